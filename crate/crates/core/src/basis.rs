//! Bit-encoded Zeeman product basis.
//!
//! Site `k` lives in bit `k` of a basis index (little-endian); a set bit is
//! spin up, a cleared bit spin down.

use crate::error::{Error, Result};

/// Largest supported number of sites. A dense state at this size already
/// needs 16 GiB.
pub const MAX_SITES: usize = 30;

/// A site label checked against the number of sites it was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteIndex(usize);

impl SiteIndex {
    pub fn new(site: usize, m_sites: usize) -> Result<Self> {
        if site < m_sites {
            Ok(SiteIndex(site))
        } else {
            Err(Error::SiteOutOfRange { site, m_sites })
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn mask(self) -> usize {
        1 << self.0
    }
}

/// One configuration of the product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisConfig {
    bits: usize,
}

impl BasisConfig {
    pub fn new(bits: usize, m_sites: usize) -> Result<Self> {
        if m_sites > MAX_SITES {
            return Err(Error::Capability(format!(
                "{m_sites} sites exceeds the dense-state limit of {MAX_SITES}"
            )));
        }
        if bits >> m_sites != 0 {
            return Err(Error::Domain(format!(
                "basis bits {bits:#b} do not fit in {m_sites} sites"
            )));
        }
        Ok(BasisConfig { bits })
    }

    /// Builds a configuration from per-site spins, `true` meaning up.
    pub fn from_spins(spins: &[bool]) -> Result<Self> {
        let bits = spins
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &up)| acc | (usize::from(up) << k));
        Self::new(bits, spins.len())
    }

    pub fn spins(self, m_sites: usize) -> Vec<bool> {
        (0..m_sites).map(|k| self.bits >> k & 1 == 1).collect()
    }

    #[inline]
    pub fn bits(self) -> usize {
        self.bits
    }

    #[inline]
    pub fn is_up(self, site: SiteIndex) -> bool {
        self.bits & site.mask() != 0
    }

    /// Number of up spins, i.e. the magnetization sector.
    #[inline]
    pub fn up_count(self) -> u32 {
        self.bits.count_ones()
    }
}

/// Hilbert-space dimension for `m_sites` spins.
pub fn dimension(m_sites: usize) -> Result<usize> {
    if m_sites > MAX_SITES {
        return Err(Error::Capability(format!(
            "{m_sites} sites exceeds the dense-state limit of {MAX_SITES}"
        )));
    }
    Ok(1usize << m_sites)
}

/// Inserts a zero bit at position `pos`, shifting higher bits up by one.
#[inline]
pub fn insert_zero_bit(value: usize, pos: usize) -> usize {
    let low = value & ((1 << pos) - 1);
    ((value >> pos) << (pos + 1)) | low
}

/// Maps background index `i` (the other M-1 sites in ascending order) to the
/// full configuration with `site` set up.
#[inline]
pub fn embed_background(i: usize, site: usize) -> usize {
    insert_zero_bit(i, site) | (1 << site)
}

/// Inverse of [`embed_background`]: drops bit `site`.
#[inline]
pub fn background_index(bits: usize, site: usize) -> usize {
    let low = bits & ((1 << site) - 1);
    ((bits >> (site + 1)) << site) | low
}

/// All configurations of `m_sites` spins with exactly `ups` up spins, in
/// ascending order.
pub fn sector_configs(m_sites: usize, ups: u32) -> Vec<usize> {
    (0..1usize << m_sites)
        .filter(|b| b.count_ones() == ups)
        .collect()
}
