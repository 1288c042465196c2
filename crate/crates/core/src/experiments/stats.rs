use super::{PolarizationTrace, TimeGrid};
use crate::error::{Error, Result};
use crate::states::StateKind;

fn same_grid(a: &PolarizationTrace, b: &PolarizationTrace) -> Result<()> {
    if a.grid != b.grid || a.values.len() != b.values.len() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Root-mean-square difference of two traces, in polarization units.
pub fn rms_deviation(a: &PolarizationTrace, b: &PolarizationTrace) -> Result<f64> {
    same_grid(a, b)?;
    let ss: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    Ok((ss / a.values.len() as f64).sqrt())
}

/// Largest pointwise difference of two traces, in polarization units.
pub fn max_abs_deviation(a: &PolarizationTrace, b: &PolarizationTrace) -> Result<f64> {
    same_grid(a, b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Pure-minus-ensemble difference in `W` units, which is the summed
/// interference (cross) terms between ensemble members.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub max_abs: f64,
    pub rms: f64,
}

pub fn cross_term_residual(pure: &PolarizationTrace, ens: &PolarizationTrace) -> Result<Residual> {
    same_grid(pure, ens)?;
    let values: Vec<f64> = pure
        .values
        .iter()
        .zip(&ens.values)
        .map(|(p, e)| (p - e) / 2.0)
        .collect();
    let max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    Ok(Residual {
        grid: pure.grid,
        values,
        max_abs,
        rms,
    })
}

/// Chebyshev bound `min(1, p_max / (N_alpha eps^2))` on the probability that
/// the realization average misses the ensemble `W` by at least `eps`.
pub fn chebyshev_bound(p_max: f64, n_alpha: u64, eps: f64) -> Result<f64> {
    if !(p_max > 0.0 && p_max <= 1.0) {
        return Err(Error::Domain(format!(
            "p_max must lie in (0, 1], got {p_max}"
        )));
    }
    if n_alpha == 0 {
        return Err(Error::Domain("N_alpha must be at least 1".into()));
    }
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    Ok((p_max / (n_alpha as f64 * eps * eps)).min(1.0))
}

/// Number of independent random phases behind `n_alpha` realizations:
/// `N_alpha 2^(M-1)` for entangled states, `N_alpha (M-1)` for product states.
pub fn effective_samples(kind: StateKind, m_sites: usize, n_alpha: u64) -> Result<u64> {
    if m_sites < 2 {
        return Err(Error::Domain(format!(
            "effective samples need M >= 2, got {m_sites}"
        )));
    }
    Ok(n_alpha * kind.independent_phases(m_sites))
}
