//! Dense state vectors and the site-resolved observables read from them.

use num_complex::Complex64;

use crate::basis::{self, BasisConfig, SiteIndex};
use crate::error::{Error, Result};

/// Allowed deviation of the squared norm from one.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Tolerance for probabilities straying outside `[0, 1]`.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// A normalized pure state of `m_sites` spin-1/2 sites.
///
/// Amplitudes are indexed by [`BasisConfig::bits`]. Normalization is
/// checked at construction and never silently repaired; call
/// [`StateVector::renormalize`] explicitly if needed.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    m_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The product basis state `config`.
    pub fn basis(m_sites: usize, config: BasisConfig) -> Result<Self> {
        let dim = basis::dimension(m_sites)?;
        if config.bits() >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: config.bits() + 1,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[config.bits()] = Complex64::new(1.0, 0.0);
        Ok(StateVector {
            m_sites,
            amplitudes,
        })
    }

    /// Wraps an amplitude array, rejecting it unless its norm is one.
    pub fn from_amplitudes(m_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_amplitudes_unnormalized(m_sites, amplitudes)?;
        state.check_normalized()?;
        Ok(state)
    }

    /// Wraps an amplitude array of the right length without checking its norm.
    /// The caller must call [`renormalize`](Self::renormalize) or otherwise
    /// guarantee unit norm before reading observables.
    pub fn from_amplitudes_unnormalized(
        m_sites: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let dim = basis::dimension(m_sites)?;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(StateVector {
            m_sites,
            amplitudes,
        })
    }

    #[inline]
    pub fn m_sites(&self) -> usize {
        self.m_sites
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    #[inline]
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        let amps = &self.amplitudes;
        pairwise_sum(0, amps.len(), &|b| amps[b].norm_sqr())
    }

    pub fn check_normalized(&self) -> Result<()> {
        let deviation = (self.norm_sqr() - 1.0).abs();
        if deviation < NORM_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NotNormalized { deviation })
        }
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn renormalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain(
                "cannot renormalize a zero or non-finite vector".into(),
            ));
        }
        let inv = 1.0 / norm;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn site(&self, site: usize) -> Result<SiteIndex> {
        SiteIndex::new(site, self.m_sites)
    }
}

const PAIRWISE_BLOCK: usize = 128;

/// Sum of `term(k)` for `k` in `lo..hi` with a fixed pairwise tree. The tree
/// shape depends only on the range, so the result is bit-reproducible.
pub(crate) fn pairwise_sum<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64,
{
    let len = hi - lo;
    if len <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for k in lo..hi {
            acc += term(k);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term)
    }
}

/// Probability that `site` is up: the sum of `|amp|^2` over configurations
/// with that bit set.
pub fn up_probability(psi: &StateVector, site: SiteIndex) -> Result<f64> {
    if site.get() >= psi.m_sites {
        return Err(Error::SiteOutOfRange {
            site: site.get(),
            m_sites: psi.m_sites,
        });
    }
    let amps = psi.amplitudes();
    let s = site.get();
    let mask = site.mask();
    Ok(pairwise_sum(0, amps.len() / 2, &|k| {
        amps[basis::insert_zero_bit(k, s) | mask].norm_sqr()
    }))
}

/// Maps an up-probability `w` to the polarization `2(w - 1/2)`.
pub fn polarization_from_w(w: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&w) || w.is_nan() {
        return Err(Error::Domain(format!("probability {w} outside [0, 1]")));
    }
    Ok(2.0 * (w - 0.5))
}

/// Expectation value of the total `I^z`.
pub fn total_magnetization(psi: &StateVector) -> f64 {
    let half_m = psi.m_sites as f64 / 2.0;
    let amps = psi.amplitudes();
    pairwise_sum(0, amps.len(), &|b| {
        amps[b].norm_sqr() * (b.count_ones() as f64 - half_m)
    })
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (x, y) = (a.amplitudes(), b.amplitudes());
    let re = pairwise_sum(0, x.len(), &|k| (x[k].conj() * y[k]).re);
    let im = pairwise_sum(0, x.len(), &|k| (x[k].conj() * y[k]).im);
    Ok(Complex64::new(re, im))
}
