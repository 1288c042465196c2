//! Polarization traces: the brute-force ensemble, single pure states, and
//! averages over random-phase realizations, plus the statistics comparing
//! them.

mod average;
mod ensemble;
mod stats;

use std::fmt;

use crate::basis::SiteIndex;
use crate::error::{Error, Result};
use crate::propagators::{PreparedPropagator, Propagator};
use crate::rng::PhaseRecord;
use crate::state::{polarization_from_w, total_magnetization, up_probability};
use crate::states::{InitialStateSpec, StateKind};

pub use average::{averaged_trace, ConvergenceStats};
pub use ensemble::{
    ensemble_trace, ensemble_trace_enumerated, ensemble_trace_spectral, EnsembleCaps,
};
pub use stats::{
    chebyshev_bound, cross_term_residual, effective_samples, max_abs_deviation, rms_deviation,
    Residual,
};

/// Uniform sample times `t_k = k t_max / (n_samples - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_samples: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::Config(format!(
                "time grid needs >= 2 samples, got {n_samples}"
            )));
        }
        if t_max <= 0.0 || !t_max.is_finite() {
            return Err(Error::Config(format!(
                "time grid needs t_max > 0, got {t_max}"
            )));
        }
        Ok(TimeGrid { t_max, n_samples })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / (self.n_samples - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_samples {
            self.t_max
        } else {
            k as f64 * self.t_max / (self.n_samples - 1) as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.time(k)).collect()
    }
}

/// Where a trace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSource {
    /// Brute-force average over all `members` basis states.
    Ensemble { members: usize },
    /// A single pure state, or the average of `n_alpha` of them.
    Pure { kind: StateKind, n_alpha: usize },
}

impl fmt::Display for TraceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceSource::Ensemble { .. } => f.write_str("ensemble"),
            TraceSource::Pure { kind, n_alpha } => write!(f, "{} N_alpha={n_alpha}", kind.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub source: TraceSource,
    pub excited_site: usize,
    pub observed_site: usize,
    pub propagator: Propagator,
    /// Phase streams consumed, one per realization.
    pub phase_records: Vec<PhaseRecord>,
    /// Largest Trotter step actually taken.
    pub effective_dt: Option<f64>,
    pub trotter_steps: usize,
    /// Largest `|norm^2 - 1|` seen at any sample, when tracked.
    pub max_norm_drift: Option<f64>,
    /// Largest change of total `I^z` from its initial value, when tracked.
    pub max_magnetization_drift: Option<f64>,
}

/// Local polarization `P(t_k)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationTrace {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    pub meta: TraceMeta,
}

impl PolarizationTrace {
    /// Up-probabilities `W = (P + 1)/2`.
    pub fn w_values(&self) -> Vec<f64> {
        self.values.iter().map(|p| (p + 1.0) / 2.0).collect()
    }

    pub fn label(&self) -> String {
        self.meta.source.to_string()
    }
}

/// Raw up-probability samples of one evolution, with drift diagnostics.
pub(crate) struct WSamples {
    pub w: Vec<f64>,
    pub steps: usize,
    pub effective_dt: Option<f64>,
    pub max_norm_drift: f64,
    pub max_magnetization_drift: f64,
}

pub(crate) fn sample_w(
    prepared: &PreparedPropagator,
    spec: &InitialStateSpec,
    observed: SiteIndex,
    grid: &TimeGrid,
) -> Result<(WSamples, Option<PhaseRecord>)> {
    let (psi0, record) = spec.build(prepared.m_sites())?;
    let m0 = total_magnetization(&psi0);
    let mut w = Vec::with_capacity(grid.n_samples());
    let mut max_norm_drift: f64 = 0.0;
    let mut max_magnetization_drift: f64 = 0.0;
    let report = prepared.sample(&psi0, &grid.times(), |_, psi| {
        max_norm_drift = max_norm_drift.max((psi.norm_sqr() - 1.0).abs());
        max_magnetization_drift =
            max_magnetization_drift.max((total_magnetization(psi) - m0).abs());
        w.push(up_probability(psi, observed)?);
        Ok(())
    })?;
    Ok((
        WSamples {
            w,
            steps: report.steps,
            effective_dt: report.effective_dt,
            max_norm_drift,
            max_magnetization_drift,
        },
        record,
    ))
}

pub(crate) fn to_polarization(w: &[f64]) -> Result<Vec<f64>> {
    w.iter().map(|&w| polarization_from_w(w)).collect()
}

/// Polarization of `observed_site` along one continuous evolution of the
/// initial state described by `spec`.
pub fn pure_state_trace(
    prepared: &PreparedPropagator,
    spec: &InitialStateSpec,
    observed_site: usize,
    grid: &TimeGrid,
) -> Result<PolarizationTrace> {
    let observed = SiteIndex::new(observed_site, prepared.m_sites())?;
    let (samples, record) = sample_w(prepared, spec, observed, grid)?;
    Ok(PolarizationTrace {
        grid: *grid,
        values: to_polarization(&samples.w)?,
        meta: TraceMeta {
            source: TraceSource::Pure {
                kind: spec.kind,
                n_alpha: 1,
            },
            excited_site: spec.excited_site,
            observed_site,
            propagator: prepared.propagator(),
            phase_records: record.into_iter().collect(),
            effective_dt: samples.effective_dt,
            trotter_steps: samples.steps,
            max_norm_drift: Some(samples.max_norm_drift),
            max_magnetization_drift: Some(samples.max_magnetization_drift),
        },
    })
}
