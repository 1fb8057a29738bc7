use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use super::interval::DyadicInterval;
use crate::error::{Error, Result};
use crate::wavepacket::PacketCache;

/// Largest supported grid exponent; `4^M` fine cells must stay addressable
/// and exhaustive enumerations must stay finite in practice.
pub const MAX_M: u32 = 10;

/// Space `[0, 2^M)` sampled on the fine mesh `2^{-M}`, frequencies in
/// `[0, 2^M)`.
///
/// The grid owns the wave packet memo table so that every collection and
/// operator built on the same grid shares it.
#[derive(Clone)]
pub struct AmbientGrid {
    m: u32,
    packets: Arc<PacketCache>,
}

impl AmbientGrid {
    pub fn new(m: u32) -> Result<Self> {
        if m > MAX_M {
            return Err(Error::InvalidParameter(format!("M = {m} exceeds {MAX_M}")));
        }
        Ok(AmbientGrid { m, packets: Arc::new(PacketCache::new(m)) })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn packets(&self) -> &PacketCache {
        &self.packets
    }

    /// Number of fine cells, `4^M`.
    pub fn cells(&self) -> usize {
        cells_for(self.m)
    }

    /// The whole spatial domain `[0, 2^M)`.
    pub fn domain(&self) -> DyadicInterval {
        DyadicInterval::new(self.m as i32, 0)
    }

    pub fn contains_space(&self, i: &DyadicInterval) -> bool {
        i.scale >= -(self.m as i32) && i.subset_of(&self.domain())
    }

    /// Frequency intervals live in `[0, 2^M)` with length at least `2^{-M}`.
    pub fn contains_freq(&self, w: &DyadicInterval) -> bool {
        w.scale >= -(self.m as i32) && w.subset_of(&self.domain())
    }

    pub fn cell_range(&self, i: &DyadicInterval) -> Range<usize> {
        cell_range(self.m, i)
    }
}

impl PartialEq for AmbientGrid {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl Eq for AmbientGrid {}

impl fmt::Debug for AmbientGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AmbientGrid(M = {})", self.m)
    }
}

pub fn cells_for(m: u32) -> usize {
    1usize << (2 * m)
}

/// Fine-cell indices covered by a spatial interval inside `[0, 2^M)`.
pub fn cell_range(m: u32, i: &DyadicInterval) -> Range<usize> {
    let shift = i.scale + m as i32;
    debug_assert!(shift >= 0, "interval finer than the grid");
    let start = (i.index as usize) << shift;
    start..start + (1usize << shift)
}
