//! Lightpath SNR estimation: amplifier noise, incoherent closed-form GN
//! nonlinear interference with a per-span Raman power-tilt factor, and the
//! transceiver's own noise, combined by inverse-SNR addition.
//!
//! Launch powers are spectral densities expressed in dBm per reference
//! bandwidth (12.5 GHz). Every SNR here is a ratio of signal to noise inside
//! the same reference bandwidth, which makes it independent of the channel
//! width; transceiver requirements are converted into the same convention.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{Band, BandPair, FiberSpec, Span, SpectrumAssignment, SLOTS_PER_BAND, SLOT_GHZ};

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BAND_WIDTH_THZ: f64 = SLOTS_PER_BAND as f64 * SLOT_GHZ / 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QotParams {
    pub attenuation_db_per_km: BandPair<f64>,
    pub noise_figure_db: BandPair<f64>,
    pub reference_bandwidth_ghz: f64,
    /// Launch PSD at band center, dBm per reference bandwidth.
    pub launch_offset_dbm: BandPair<f64>,
    pub launch_tilt_db_per_thz: f64,
    pub aging_margin_db: f64,
    /// Raman gain slope, 1/(W km THz).
    pub isrs_coeff: f64,
    /// Lowest frequency of each band; each band is 5 THz wide.
    pub band_start_thz: BandPair<f64>,
    pub gamma_per_w_km: f64,
    /// |beta2| in ps^2/km.
    pub beta2_ps2_per_km: f64,
    pub osnr_tx_db: f64,
    pub mws_penalty_db: f64,
    /// Width of the synthetic interferers used for the fully loaded spectrum.
    pub eol_interferer_ghz: f64,
}

impl Default for QotParams {
    fn default() -> Self {
        let fiber = FiberSpec::default();
        Self {
            attenuation_db_per_km: fiber.attenuation_db_per_km,
            noise_figure_db: fiber.noise_figure_db,
            reference_bandwidth_ghz: SLOT_GHZ,
            // 1 dBm per 75 GHz channel.
            launch_offset_dbm: BandPair::splat(1.0 - 10.0 * 6f64.log10()),
            launch_tilt_db_per_thz: 0.0,
            aging_margin_db: 1.0,
            isrs_coeff: 0.028,
            // L: 185.8-190.8 THz, 500 GHz guard, C: 191.3-196.3 THz.
            band_start_thz: BandPair::new(191.3, 185.8),
            gamma_per_w_km: 1.3,
            beta2_ps2_per_km: 21.7,
            osnr_tx_db: 26.0,
            mws_penalty_db: 1.0,
            eol_interferer_ghz: 75.0,
        }
    }
}

impl QotParams {
    pub fn validate(&self) -> Result<()> {
        if self.aging_margin_db < 0.0 {
            return Err(Error::Validation("aging margin must be >= 0".into()));
        }
        if (self.reference_bandwidth_ghz - SLOT_GHZ).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "reference bandwidth must equal the {SLOT_GHZ} GHz slot width"
            )));
        }
        let (c, l) = (self.band_start_thz.c, self.band_start_thz.l);
        if (c - l).abs() < BAND_WIDTH_THZ {
            return Err(Error::Validation("C and L bands overlap".into()));
        }
        if self.eol_interferer_ghz <= 0.0 || self.mws_penalty_db < 0.0 {
            return Err(Error::Validation("invalid interferer width or MWS penalty".into()));
        }
        Ok(())
    }

    pub fn fiber(&self) -> FiberSpec {
        FiberSpec {
            attenuation_db_per_km: self.attenuation_db_per_km,
            noise_figure_db: self.noise_figure_db,
        }
    }

    pub fn band_center_thz(&self, band: Band) -> f64 {
        self.band_start_thz.get(band) + BAND_WIDTH_THZ / 2.0
    }

    pub fn band_of(&self, f_thz: f64) -> Option<Band> {
        Band::ALL.into_iter().find(|&b| {
            let lo = self.band_start_thz.get(b);
            (lo..=lo + BAND_WIDTH_THZ).contains(&f_thz)
        })
    }

    /// Center frequency of a slot block.
    pub fn center_thz(&self, a: &SpectrumAssignment) -> f64 {
        self.band_start_thz.get(a.band) + (a.start as f64 + a.width as f64 / 2.0) * SLOT_GHZ / 1000.0
    }

    pub fn channel(&self, a: &SpectrumAssignment) -> Result<Channel> {
        let center_thz = self.center_thz(a);
        let bandwidth_ghz = a.width as f64 * SLOT_GHZ;
        let power_w = self.channel_power_w(center_thz, bandwidth_ghz)?;
        Ok(Channel {
            center_thz,
            bandwidth_ghz,
            power_w,
        })
    }

    pub fn channel_power_w(&self, center_thz: f64, bandwidth_ghz: f64) -> Result<f64> {
        let psd_dbm = launch_power(center_thz, self)?;
        Ok(dbm_to_w(psd_dbm) * bandwidth_ghz / self.reference_bandwidth_ghz)
    }
}

/// A co-propagating channel: center, occupied width and total launch power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub center_thz: f64,
    pub bandwidth_ghz: f64,
    pub power_w: f64,
}

impl Channel {
    fn psd(&self) -> f64 {
        self.power_w / (self.bandwidth_ghz * 1e9)
    }

    fn overlaps(&self, other: &Channel) -> bool {
        let gap_ghz = (self.center_thz - other.center_thz).abs() * 1000.0;
        gap_ghz < (self.bandwidth_ghz + other.bandwidth_ghz) / 2.0 - 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub snr_total_db: f64,
    pub snr_ase_db: f64,
    pub snr_nli_db: f64,
    pub osnr_tx_used_db: f64,
    /// Aging margin subtracted from the combined SNR (zero unless `eol`).
    pub margin_db: f64,
    pub eol: bool,
}

impl SnrReport {
    /// Combined SNR before the aging margin, i.e. the inverse-SNR sum.
    pub fn snr_link_and_tx_db(&self) -> f64 {
        self.snr_total_db + self.margin_db
    }
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

fn dbm_to_w(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}

/// Launch PSD (dBm per reference bandwidth) at `f_thz`.
pub fn launch_power(f_thz: f64, params: &QotParams) -> Result<f64> {
    let band = params
        .band_of(f_thz)
        .ok_or_else(|| Error::Domain(format!("{f_thz} THz is outside the C and L bands")))?;
    Ok(params.launch_offset_dbm.get(band) + params.launch_tilt_db_per_thz * (f_thz - params.band_center_thz(band)))
}

/// Accumulated amplifier noise in the reference bandwidth, in watts.
pub fn ase_noise(spans: &[Span], band: Band, f_thz: f64, params: &QotParams) -> f64 {
    let b_ref = params.reference_bandwidth_ghz * 1e9;
    let h_nu = PLANCK * f_thz * 1e12;
    spans
        .iter()
        .map(|s| {
            let nf = db_to_lin(s.noise_figure_db.get(band));
            let g = db_to_lin(s.gain_db(band));
            h_nu * nf * (g - 1.0) * b_ref
        })
        .sum()
}

/// Power attenuation in 1/km.
fn alpha_per_km(db_per_km: f64) -> f64 {
    db_per_km / (10.0 * std::f64::consts::LOG10_E)
}

fn effective_length_km(alpha: f64, length_km: f64) -> f64 {
    if alpha * length_km < 1e-12 {
        length_km
    } else {
        (1.0 - (-alpha * length_km).exp()) / alpha
    }
}

/// Per-channel Raman power factors in one span: the flat-spectrum solution of
/// the triangular Raman gain model evaluated at the effective length.
pub fn isrs_factors(channels: &[Channel], l_eff_km: f64, params: &QotParams) -> Vec<f64> {
    let p_tot: f64 = channels.iter().map(|c| c.power_w).sum();
    if channels.is_empty() || p_tot <= 0.0 || params.isrs_coeff == 0.0 {
        return vec![1.0; channels.len()];
    }
    let lo = channels
        .iter()
        .map(|c| c.center_thz - c.bandwidth_ghz / 2000.0)
        .fold(f64::INFINITY, f64::min);
    let hi = channels
        .iter()
        .map(|c| c.center_thz + c.bandwidth_ghz / 2000.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let mean_f = channels.iter().map(|c| c.power_w * c.center_thz).sum::<f64>() / p_tot;
    let k = params.isrs_coeff * p_tot * l_eff_km;
    let x = k * (hi - lo);
    let norm = if x < 1e-9 { 1.0 } else { x / (2.0 * (x / 2.0).sinh()) };
    channels
        .iter()
        .map(|c| norm * (-k * (c.center_thz - mean_f)).exp())
        .collect()
}

/// Fully loaded spectrum: both bands tiled with `eol_interferer_ghz` channels
/// at profile power, minus any that overlap `cut`.
pub fn full_load(cut: &Channel, params: &QotParams) -> Vec<Channel> {
    let w = params.eol_interferer_ghz;
    let per_band = (BAND_WIDTH_THZ * 1000.0 / w).floor() as usize;
    let mut out = Vec::with_capacity(2 * per_band);
    for band in [Band::L, Band::C] {
        let lo = params.band_start_thz.get(band);
        for i in 0..per_band {
            let center_thz = lo + (i as f64 + 0.5) * w / 1000.0;
            let ch = Channel {
                center_thz,
                bandwidth_ghz: w,
                power_w: params
                    .channel_power_w(center_thz, w)
                    .expect("tile center lies inside its band"),
            };
            if !ch.overlaps(cut) {
                out.push(ch);
            }
        }
    }
    out
}

/// NLI power in the reference bandwidth at the center of `cut`, accumulated
/// incoherently over `spans`. With `full_fill`, `interferers` is ignored and
/// replaced by [`full_load`].
pub fn nli_noise(
    cut: &Channel,
    interferers: &[Channel],
    spans: &[Span],
    band: Band,
    params: &QotParams,
    full_fill: bool,
) -> f64 {
    let loaded;
    let others: &[Channel] = if full_fill {
        loaded = full_load(cut, params);
        &loaded
    } else {
        interferers
    };
    let mut all = Vec::with_capacity(others.len() + 1);
    all.push(*cut);
    all.extend(others.iter().copied().filter(|c| !c.overlaps(cut)));

    let gamma = params.gamma_per_w_km;
    let beta2 = params.beta2_ps2_per_km * 1e-24;
    let b_ref = params.reference_bandwidth_ghz * 1e9;
    let pi = std::f64::consts::PI;

    let mut total = 0.0;
    for span in spans {
        let alpha = alpha_per_km(span.attenuation_db_per_km.get(band));
        let l_eff = effective_length_km(alpha, span.length_km);
        let l_eff_a = 1.0 / alpha;
        let rho = isrs_factors(&all, l_eff, params);

        // The tilt factor scales co-propagating channels only; the channel
        // under test keeps its launch PSD so adding interferers never lowers NLI.
        let g_cut = all[0].psd();
        let b_cut = all[0].bandwidth_ghz * 1e9;
        let mut kernel = g_cut * g_cut * (pi * pi / 2.0 * beta2 * l_eff_a * b_cut * b_cut).asinh();
        for (ch, r) in all.iter().zip(&rho).skip(1) {
            let g = ch.psd() * r;
            let df = (ch.center_thz - all[0].center_thz).abs() * 1e12;
            let half = ch.bandwidth_ghz * 1e9 / 2.0;
            kernel += g * g * ((df + half) / (df - half)).ln();
        }
        let g_nli = 8.0 / 27.0 * gamma * gamma * g_cut * l_eff * l_eff * kernel / (pi * beta2 * l_eff_a);
        total += g_nli * b_ref;
    }
    total
}

/// Everything needed to evaluate one (tentative) lightpath.
#[derive(Debug, Clone, Copy)]
pub struct SnrQuery<'a> {
    /// Spans of each link along the path, in order.
    pub links: &'a [&'a [Span]],
    pub assignment: SpectrumAssignment,
    /// Comb line of a multi-wavelength source.
    pub mws_line: bool,
    /// Co-propagating channels per link (same length as `links`); ignored at EOL.
    pub interferers: Option<&'a [Vec<Channel>]>,
}

/// SNR of a lightpath. At end of life the spectrum is assumed fully loaded and
/// the aging margin is subtracted from the combined value.
pub fn estimate_snr(q: &SnrQuery<'_>, params: &QotParams, eol: bool) -> Result<SnrReport> {
    let cut = params.channel(&q.assignment)?;
    let band = q.assignment.band;
    let signal = cut.power_w * params.reference_bandwidth_ghz / cut.bandwidth_ghz;

    let mut ase = 0.0;
    let mut nli = 0.0;
    for (i, spans) in q.links.iter().enumerate() {
        ase += ase_noise(spans, band, cut.center_thz, params);
        let local: &[Channel] = match q.interferers {
            Some(per_link) if !eol => &per_link[i],
            _ => &[],
        };
        nli += nli_noise(&cut, local, spans, band, params, eol);
    }
    let osnr_tx_db = params.osnr_tx_db - if q.mws_line { params.mws_penalty_db } else { 0.0 };
    let snr_ase = signal / ase;
    let snr_nli = signal / nli;
    let inv = 1.0 / snr_ase + 1.0 / snr_nli + 1.0 / db_to_lin(osnr_tx_db);
    let margin_db = if eol { params.aging_margin_db } else { 0.0 };
    Ok(SnrReport {
        snr_total_db: lin_to_db(1.0 / inv) - margin_db,
        snr_ase_db: lin_to_db(snr_ase),
        snr_nli_db: lin_to_db(snr_nli),
        osnr_tx_used_db: osnr_tx_db,
        margin_db,
        eol,
    })
}

/// End-of-life noise-to-signal ratio of one link (ASE plus fully loaded NLI).
/// Values add along a path.
pub fn eol_link_noise_ratio(spans: &[Span], a: &SpectrumAssignment, params: &QotParams) -> Result<f64> {
    let cut = params.channel(a)?;
    let signal = cut.power_w * params.reference_bandwidth_ghz / cut.bandwidth_ghz;
    let ase = ase_noise(spans, a.band, cut.center_thz, params);
    let nli = nli_noise(&cut, &[], spans, a.band, params, true);
    Ok((ase + nli) / signal)
}

/// End-of-life SNR from an accumulated path noise-to-signal ratio.
pub fn eol_snr_db(path_noise_ratio: f64, mws_line: bool, params: &QotParams) -> f64 {
    let osnr_tx_db = params.osnr_tx_db - if mws_line { params.mws_penalty_db } else { 0.0 };
    lin_to_db(1.0 / (path_noise_ratio + 1.0 / db_to_lin(osnr_tx_db))) - params.aging_margin_db
}
