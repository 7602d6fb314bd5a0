//! Brute-force GN reference: direct midpoint-rule evaluation of the GN double
//! integral at the center of the channel under test, summed incoherently
//! over spans. Independent of the closed-form kernel in `qot`.

use eonplan_core::netgraph::{Band, Span};
use eonplan_core::qot::QotParams;

/// A rectangular PSD block: center and width in Hz, PSD in W/Hz.
#[derive(Clone, Copy, Debug)]
pub struct Block {
    pub center_hz: f64,
    pub width_hz: f64,
    pub psd: f64,
}

fn psd_at(blocks: &[Block], f: f64) -> f64 {
    blocks
        .iter()
        .find(|b| (f - b.center_hz).abs() < b.width_hz / 2.0)
        .map_or(0.0, |b| b.psd)
}

/// NLI PSD (W/Hz) at `f_hz`, using a grid step of `step_hz`.
pub fn gn_integral_psd(
    blocks: &[Block],
    f_hz: f64,
    spans: &[Span],
    band: Band,
    params: &QotParams,
    step_hz: f64,
) -> f64 {
    let gamma = params.gamma_per_w_km;
    let beta2 = params.beta2_ps2_per_km * 1e-24;
    let pi = std::f64::consts::PI;
    let lo = blocks
        .iter()
        .map(|b| b.center_hz - b.width_hz / 2.0)
        .fold(f64::INFINITY, f64::min);
    let hi = blocks
        .iter()
        .map(|b| b.center_hz + b.width_hz / 2.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let n = ((hi - lo) / step_hz).ceil() as usize;

    let grid: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let f = lo + (i as f64 + 0.5) * step_hz;
            (f, psd_at(blocks, f))
        })
        .filter(|&(_, g)| g > 0.0)
        .collect();

    let span_params: Vec<(f64, f64)> = spans
        .iter()
        .map(|s| {
            let a = s.attenuation_db_per_km.get(band) / (10.0 * std::f64::consts::LOG10_E);
            (a, s.length_km)
        })
        .collect();

    let mut acc = 0.0;
    for &(f1, g1) in &grid {
        for &(f2, g2) in &grid {
            let g3 = psd_at(blocks, f1 + f2 - f_hz);
            if g3 == 0.0 {
                continue;
            }
            let phi = 4.0 * pi * pi * beta2 * (f1 - f_hz) * (f2 - f_hz);
            let mut eta2 = 0.0;
            for &(a, l) in &span_params {
                let decay = (-a * l).exp();
                let num = 1.0 - 2.0 * decay * (phi * l).cos() + decay * decay;
                eta2 += num / (a * a + phi * phi);
            }
            acc += g1 * g2 * g3 * eta2;
        }
    }
    16.0 / 27.0 * gamma * gamma * acc * step_hz * step_hz
}
