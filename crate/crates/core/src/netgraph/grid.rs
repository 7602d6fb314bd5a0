use serde::{Deserialize, Serialize};

use super::{Band, LinkId};
use crate::error::{Error, Result};

pub const SLOTS_PER_BAND: usize = 400;
/// 37.5 GHz.
pub const MIN_WIDTH: usize = 3;
/// 150 GHz.
pub const MAX_WIDTH: usize = 12;

const WORDS: usize = SLOTS_PER_BAND.div_ceil(64);

/// Contiguous block of slots in one band, applied to every link of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpectrumAssignment {
    pub band: Band,
    pub start: usize,
    pub width: usize,
}

impl SpectrumAssignment {
    pub fn new(band: Band, start: usize, width: usize) -> Self {
        Self { band, start, width }
    }

    pub fn end(&self) -> usize {
        self.start + self.width
    }

    pub fn slots(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Mask([u64; WORDS]);

impl Mask {
    fn get(&self, slot: usize) -> bool {
        self.0[slot / 64] >> (slot % 64) & 1 == 1
    }

    fn set(&mut self, slot: usize, v: bool) {
        let bit = 1u64 << (slot % 64);
        if v {
            self.0[slot / 64] |= bit;
        } else {
            self.0[slot / 64] &= !bit;
        }
    }

    fn union(&mut self, other: &Mask) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= b;
        }
    }

    /// Start of the first run of `width` free slots at or after `from`.
    fn first_free_run(&self, width: usize, from: usize) -> Option<usize> {
        let mut run = 0;
        let mut slot = from;
        while slot < SLOTS_PER_BAND {
            if self.get(slot) {
                run = 0;
            } else {
                run += 1;
                if run == width {
                    return Some(slot + 1 - width);
                }
            }
            slot += 1;
        }
        None
    }
}

/// Slot occupancy per link and band. Bidirectional lightpaths share one array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumGrid {
    links: Vec<[Mask; 2]>,
}

impl SpectrumGrid {
    pub fn new(link_count: usize) -> Self {
        Self {
            links: vec![[Mask::default(); 2]; link_count],
        }
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn is_occupied(&self, link: LinkId, band: Band, slot: usize) -> bool {
        self.links[link.0][band.index()].get(slot)
    }

    pub fn occupied_count(&self, link: LinkId, band: Band) -> usize {
        self.links[link.0][band.index()]
            .0
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    fn path_mask(&self, path: &[LinkId], band: Band) -> Mask {
        let mut m = Mask::default();
        for l in path {
            m.union(&self.links[l.0][band.index()]);
        }
        m
    }

    /// All positions where `width` slots are free on every link of `path`,
    /// in first-fit scan order (band C low to high, then band L).
    pub fn fit_positions<'a>(&'a self, path: &'a [LinkId], width: usize) -> impl Iterator<Item = (Band, usize)> + 'a {
        Band::ALL.into_iter().flat_map(move |band| {
            let mask = self.path_mask(path, band);
            let mut from = 0;
            std::iter::from_fn(move || {
                let s = mask.first_free_run(width, from)?;
                from = s + 1;
                Some((band, s))
            })
        })
    }

    pub fn first_fit(&self, path: &[LinkId], width: usize) -> Option<(Band, usize)> {
        first_fit(self, path, width)
    }

    pub fn allocate(&mut self, path: &[LinkId], a: &SpectrumAssignment) -> Result<()> {
        check_bounds(a)?;
        for &l in path {
            let m = &self.links[l.0][a.band.index()];
            if let Some(slot) = a.slots().find(|&s| m.get(s)) {
                return Err(Error::Occupancy {
                    link: l.0,
                    band: a.band,
                    slot,
                    message: "slot already occupied",
                });
            }
        }
        for &l in path {
            let m = &mut self.links[l.0][a.band.index()];
            for s in a.slots() {
                m.set(s, true);
            }
        }
        Ok(())
    }

    pub fn release(&mut self, path: &[LinkId], a: &SpectrumAssignment) -> Result<()> {
        check_bounds(a)?;
        for &l in path {
            let m = &self.links[l.0][a.band.index()];
            if let Some(slot) = a.slots().find(|&s| !m.get(s)) {
                return Err(Error::Occupancy {
                    link: l.0,
                    band: a.band,
                    slot,
                    message: "releasing a free slot",
                });
            }
        }
        for &l in path {
            let m = &mut self.links[l.0][a.band.index()];
            for s in a.slots() {
                m.set(s, false);
            }
        }
        Ok(())
    }
}

fn check_bounds(a: &SpectrumAssignment) -> Result<()> {
    if a.width == 0 || a.end() > SLOTS_PER_BAND {
        return Err(Error::Validation(format!(
            "assignment {}+{} outside the {SLOTS_PER_BAND}-slot band",
            a.start, a.width
        )));
    }
    Ok(())
}

/// Lowest-frequency run of `width` slots free on all links of `path`,
/// exhausting band C before band L.
pub fn first_fit(grid: &SpectrumGrid, path: &[LinkId], width: usize) -> Option<(Band, usize)> {
    debug_assert!(!path.is_empty());
    grid.fit_positions(path, width).next()
}
