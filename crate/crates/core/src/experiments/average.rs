use rayon::prelude::*;

use super::stats::{effective_samples, max_abs_deviation, rms_deviation};
use super::{sample_w, to_polarization, PolarizationTrace, TimeGrid, TraceMeta, TraceSource};
use crate::basis::SiteIndex;
use crate::error::{Error, Result};
use crate::propagators::PreparedPropagator;
use crate::rng::SeedStream;
use crate::states::{InitialStateSpec, StateKind};

/// Spread of an averaged trace across its realizations. All quantities are
/// in polarization units; divide variances by 4 (deviations by 2) for `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStats {
    pub n_alpha: usize,
    /// Per-time mean polarization.
    pub mean: Vec<f64>,
    /// Per-time unbiased sample variance of single-realization polarizations;
    /// zero when `n_alpha == 1`.
    pub variance: Vec<f64>,
    /// RMS deviation of the mean from a reference trace, once attached.
    pub rms_deviation: Option<f64>,
    pub max_abs_deviation: Option<f64>,
    /// Independent random phases behind the average.
    pub effective_samples: u64,
}

impl ConvergenceStats {
    /// Fills in the deviation of the mean from `reference`.
    pub fn compare_to(
        &mut self,
        trace: &PolarizationTrace,
        reference: &PolarizationTrace,
    ) -> Result<()> {
        self.rms_deviation = Some(rms_deviation(trace, reference)?);
        self.max_abs_deviation = Some(max_abs_deviation(trace, reference)?);
        Ok(())
    }

    /// Per-time variance of `W` across realizations.
    pub fn w_variance(&self) -> Vec<f64> {
        self.variance.iter().map(|v| v / 4.0).collect()
    }
}

/// Averages `n_alpha` pure-state traces whose phases come from substreams
/// `0..n_alpha` of `master_seed`. Realizations run in parallel; the mean is
/// accumulated in realization order.
pub fn averaged_trace(
    prepared: &PreparedPropagator,
    kind: StateKind,
    excited: usize,
    observed: usize,
    grid: &TimeGrid,
    n_alpha: usize,
    master_seed: u64,
) -> Result<(PolarizationTrace, ConvergenceStats)> {
    if n_alpha < 1 {
        return Err(Error::Config("N_alpha must be at least 1".into()));
    }
    let m = prepared.m_sites();
    let observed_site = SiteIndex::new(observed, m)?;

    let runs: Vec<_> = (0..n_alpha as u64)
        .into_par_iter()
        .map(|r| {
            let spec = InitialStateSpec::new(kind, excited, SeedStream::phases(master_seed, r));
            sample_w(prepared, &spec, observed_site, grid)
        })
        .collect::<Result<_>>()?;

    let n = n_alpha as f64;
    let samples = grid.n_samples();
    let mean_w: Vec<f64> = (0..samples)
        .map(|k| runs.iter().map(|(s, _)| s.w[k]).sum::<f64>() / n)
        .collect();
    let values = to_polarization(&mean_w)?;
    let variance: Vec<f64> = (0..samples)
        .map(|k| {
            if n_alpha < 2 {
                return 0.0;
            }
            let ss: f64 = runs
                .iter()
                .map(|(s, _)| (2.0 * (s.w[k] - mean_w[k])).powi(2))
                .sum();
            ss / (n - 1.0)
        })
        .collect();

    let trace = PolarizationTrace {
        grid: *grid,
        values: values.clone(),
        meta: TraceMeta {
            source: TraceSource::Pure { kind, n_alpha },
            excited_site: excited,
            observed_site: observed,
            propagator: prepared.propagator(),
            phase_records: runs.iter().filter_map(|(_, rec)| *rec).collect(),
            effective_dt: runs.iter().find_map(|(s, _)| s.effective_dt),
            trotter_steps: runs.iter().map(|(s, _)| s.steps).sum(),
            max_norm_drift: Some(
                runs.iter()
                    .map(|(s, _)| s.max_norm_drift)
                    .fold(0.0, f64::max),
            ),
            max_magnetization_drift: Some(
                runs.iter()
                    .map(|(s, _)| s.max_magnetization_drift)
                    .fold(0.0, f64::max),
            ),
        },
    };
    let stats = ConvergenceStats {
        n_alpha,
        mean: values,
        variance,
        rms_deviation: None,
        max_abs_deviation: None,
        effective_samples: effective_samples(kind, m.max(2), n_alpha as u64)?,
    };
    Ok((trace, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::pure_state_trace;
    use crate::hamiltonian::build_ladder;
    use crate::propagators::Propagator;

    #[test]
    fn single_realization_equals_pure_trace() {
        let net = build_ladder(6, 1.0, 0.1).unwrap();
        let prepared = PreparedPropagator::new(&net, Propagator::Exact).unwrap();
        let grid = TimeGrid::new(10.0, 21).unwrap();
        let (avg, stats) =
            averaged_trace(&prepared, StateKind::Product, 0, 0, &grid, 1, 17).unwrap();
        let spec = InitialStateSpec::new(StateKind::Product, 0, SeedStream::phases(17, 0));
        let pure = pure_state_trace(&prepared, &spec, 0, &grid).unwrap();
        assert_eq!(avg.values, pure.values);
        assert_eq!(avg.meta.phase_records, pure.meta.phase_records);
        assert!(stats.variance.iter().all(|&v| v == 0.0));
        assert_eq!(stats.effective_samples, 5);
    }

    #[test]
    fn mean_and_variance_match_direct_computation() {
        let net = build_ladder(6, 1.0, 0.1).unwrap();
        let prepared = PreparedPropagator::new(&net, Propagator::Exact).unwrap();
        let grid = TimeGrid::new(10.0, 11).unwrap();
        let (avg, stats) =
            averaged_trace(&prepared, StateKind::Entangled, 0, 0, &grid, 5, 3).unwrap();
        let singles: Vec<Vec<f64>> = (0..5)
            .map(|r| {
                let spec = InitialStateSpec::new(StateKind::Entangled, 0, SeedStream::phases(3, r));
                pure_state_trace(&prepared, &spec, 0, &grid).unwrap().values
            })
            .collect();
        for k in 0..11 {
            let mean = singles.iter().map(|s| s[k]).sum::<f64>() / 5.0;
            let var = singles.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / 4.0;
            assert!((avg.values[k] - mean).abs() < 1e-12);
            assert!((stats.variance[k] - var).abs() < 1e-12);
            assert!(stats.variance[k] >= 0.0);
        }
        assert_eq!(avg.meta.phase_records.len(), 5);
        assert!(averaged_trace(&prepared, StateKind::Entangled, 0, 0, &grid, 0, 3).is_err());
    }
}
