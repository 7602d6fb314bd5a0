//! Physical topology, fiber spans and per-link spectrum occupancy.

mod grid;
mod sndlib;
mod topology;

use serde::{Deserialize, Serialize};

pub use grid::{first_fit, SpectrumAssignment, SpectrumGrid, MAX_WIDTH, MIN_WIDTH, SLOTS_PER_BAND};
pub use sndlib::{parse_sndlib_native, parse_sndlib_xml, parse_topology};
pub use topology::{
    build_spans, great_circle_km, FiberSpec, Link, LinkId, Node, NodeId, Span, Topology, SPAN_LENGTH_KM,
};

/// Slot width of the flex grid.
pub const SLOT_GHZ: f64 = 12.5;

/// Amplification band. Each band is an independent 400-slot array; the guard
/// band between them is not part of either array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    C,
    L,
}

impl Band {
    /// First-fit scan order.
    pub const ALL: [Band; 2] = [Band::C, Band::L];

    pub fn index(self) -> usize {
        match self {
            Band::C => 0,
            Band::L => 1,
        }
    }
}

/// A value per amplification band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPair<T> {
    pub c: T,
    pub l: T,
}

impl<T: Copy> BandPair<T> {
    pub fn new(c: T, l: T) -> Self {
        Self { c, l }
    }

    pub fn splat(v: T) -> Self {
        Self { c: v, l: v }
    }

    pub fn get(&self, band: Band) -> T {
        match band {
            Band::C => self.c,
            Band::L => self.l,
        }
    }
}
