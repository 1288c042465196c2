//! Unitary time evolution: exact spectral propagation for small systems and
//! second-order Trotter-Suzuki stepping for large ones.

pub mod spectral;
pub mod trotter;

use std::fmt;

use crate::error::{Error, Result};
use crate::hamiltonian::CouplingNetwork;
use crate::state::StateVector;

pub use spectral::{
    evolve_exact, exact_diagonalize, exact_diagonalize_unblocked, exact_diagonalize_with_cap,
    SpectralBlock, SpectralDecomposition, EXACT_MAX_SITES,
};
pub use trotter::{evolve_trotter, pair_gate, PairGate, TrotterPlan, TrotterReport};

/// Default Trotter step in units of the fastest pair rate.
pub const DEFAULT_STEP_FACTOR: f64 = 0.02;

/// `0.02 / b_max`, or `0.02` for a network without couplings.
pub fn default_dt(net: &CouplingNetwork) -> f64 {
    let rate = net.max_rate();
    if rate > 0.0 {
        DEFAULT_STEP_FACTOR / rate
    } else {
        DEFAULT_STEP_FACTOR
    }
}

/// Which propagator to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagator {
    Exact,
    Trotter { dt: f64 },
}

impl fmt::Display for Propagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Propagator::Exact => f.write_str("exact"),
            Propagator::Trotter { dt } => write!(f, "trotter(dt={dt})"),
        }
    }
}

/// A propagator with its per-network setup done (diagonalization or gate
/// tables), shareable across realizations.
#[derive(Debug, Clone)]
pub enum PreparedPropagator {
    Exact(SpectralDecomposition),
    Trotter { net: CouplingNetwork, dt: f64 },
}

/// Bookkeeping from one sampled evolution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SampleReport {
    /// Trotter steps applied.
    pub steps: usize,
    /// Largest step size used, `None` for exact propagation.
    pub effective_dt: Option<f64>,
}

impl PreparedPropagator {
    pub fn new(net: &CouplingNetwork, propagator: Propagator) -> Result<Self> {
        Self::with_exact_cap(net, propagator, EXACT_MAX_SITES)
    }

    pub fn with_exact_cap(
        net: &CouplingNetwork,
        propagator: Propagator,
        exact_max_sites: usize,
    ) -> Result<Self> {
        match propagator {
            Propagator::Exact => Ok(PreparedPropagator::Exact(exact_diagonalize_with_cap(
                net,
                exact_max_sites,
            )?)),
            Propagator::Trotter { dt } => {
                if dt <= 0.0 || !dt.is_finite() {
                    return Err(Error::Domain(format!(
                        "Trotter step must be positive, got {dt}"
                    )));
                }
                Ok(PreparedPropagator::Trotter {
                    net: net.clone(),
                    dt,
                })
            }
        }
    }

    pub fn m_sites(&self) -> usize {
        match self {
            PreparedPropagator::Exact(dec) => dec.m_sites(),
            PreparedPropagator::Trotter { net, .. } => net.m_sites(),
        }
    }

    pub fn propagator(&self) -> Propagator {
        match self {
            PreparedPropagator::Exact(_) => Propagator::Exact,
            PreparedPropagator::Trotter { dt, .. } => Propagator::Trotter { dt: *dt },
        }
    }

    /// Evolves `psi0` once through the non-decreasing `times`, calling
    /// `visit(k, psi(times[k]))` at each. Trotter runs step continuously
    /// between samples, splitting each interval into equal steps no longer
    /// than `dt`.
    pub fn sample<F>(&self, psi0: &StateVector, times: &[f64], mut visit: F) -> Result<SampleReport>
    where
        F: FnMut(usize, &StateVector) -> Result<()>,
    {
        if psi0.m_sites() != self.m_sites() {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.m_sites(),
                found: psi0.dim(),
            });
        }
        let ordered = times.windows(2).all(|w| w[1] >= w[0]);
        if !ordered
            || times.iter().any(|t| !t.is_finite())
            || times.first().is_some_and(|&t| t < 0.0)
        {
            return Err(Error::Domain(
                "sample times must be non-negative and non-decreasing".into(),
            ));
        }
        match self {
            PreparedPropagator::Exact(dec) => {
                dec.sample(psi0, times, visit)?;
                Ok(SampleReport::default())
            }
            PreparedPropagator::Trotter { net, dt } => {
                let mut psi = psi0.clone();
                let mut report = SampleReport::default();
                let mut plan: Option<TrotterPlan> = None;
                let mut now = 0.0;
                for (k, &t) in times.iter().enumerate() {
                    let span = t - now;
                    if span > 0.0 {
                        let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
                        let sub = span / steps as f64;
                        if plan
                            .as_ref()
                            .is_none_or(|p| (p.dt() - sub).abs() > 1e-12 * sub)
                        {
                            plan = Some(TrotterPlan::new(net, sub)?);
                        }
                        plan.as_ref()
                            .expect("plan built above")
                            .advance(&mut psi, steps)?;
                        report.steps += steps;
                        report.effective_dt = Some(report.effective_dt.unwrap_or(0.0).max(sub));
                        now = t;
                    }
                    visit(k, &psi)?;
                }
                Ok(report)
            }
        }
    }
}
