//! Brute-force infinite-temperature ensemble: every background
//! configuration with equal weight `1/2^(M-1)`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{sample_w, to_polarization, PolarizationTrace, TimeGrid, TraceMeta, TraceSource};
use crate::basis::SiteIndex;
use crate::error::{Error, Result};
use crate::hamiltonian::CouplingNetwork;
use crate::propagators::{PreparedPropagator, Propagator, SpectralDecomposition};
use crate::rng::SeedStream;
use crate::state::pairwise_sum;
use crate::states::{InitialStateSpec, StateKind};

/// Members evolved per work item; fixed so reductions do not depend on the
/// worker count.
const MEMBER_CHUNK: usize = 32;

/// Largest systems the brute-force ensemble accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleCaps {
    pub exact_max_sites: usize,
    pub trotter_max_sites: usize,
}

impl Default for EnsembleCaps {
    fn default() -> Self {
        EnsembleCaps {
            exact_max_sites: 12,
            trotter_max_sites: 14,
        }
    }
}

/// `P^ens(t)` of `observed` given `excited` was up. With the exact propagator
/// the member sum is done in closed form in each magnetization sector; with
/// Trotter every member is evolved separately.
pub fn ensemble_trace(
    net: &CouplingNetwork,
    excited: usize,
    observed: usize,
    grid: &TimeGrid,
    propagator: Propagator,
    caps: EnsembleCaps,
) -> Result<PolarizationTrace> {
    let m = net.m_sites();
    match propagator {
        Propagator::Exact => {
            if m > caps.exact_max_sites {
                return Err(Error::Capability(format!(
                    "exact ensemble is capped at M = {} (got M = {m}); use the Trotter \
                     propagator (cap M = {}) or a pure-state trace",
                    caps.exact_max_sites, caps.trotter_max_sites
                )));
            }
            let prepared =
                PreparedPropagator::with_exact_cap(net, propagator, caps.exact_max_sites)?;
            match &prepared {
                PreparedPropagator::Exact(dec) => {
                    ensemble_trace_spectral(dec, excited, observed, grid)
                }
                PreparedPropagator::Trotter { .. } => unreachable!("exact propagator requested"),
            }
        }
        Propagator::Trotter { .. } => {
            if m > caps.trotter_max_sites {
                return Err(Error::Capability(format!(
                    "brute-force ensemble is capped at M = {} (got M = {m}); use an entangled \
                     pure-state trace instead",
                    caps.trotter_max_sites
                )));
            }
            if m > caps.exact_max_sites {
                log::warn!(
                    "brute-force ensemble at M = {m} evolves {} states; expect a long run",
                    1usize << (m - 1)
                );
            }
            let prepared = PreparedPropagator::new(net, propagator)?;
            ensemble_trace_enumerated(&prepared, excited, observed, grid)
        }
    }
}

/// Evolves every basis member on its own and averages the up-probabilities.
pub fn ensemble_trace_enumerated(
    prepared: &PreparedPropagator,
    excited: usize,
    observed: usize,
    grid: &TimeGrid,
) -> Result<PolarizationTrace> {
    let m = prepared.m_sites();
    SiteIndex::new(excited, m)?;
    let observed_site = SiteIndex::new(observed, m)?;
    let members = 1usize << (m - 1);
    let chunk_starts: Vec<usize> = (0..members).step_by(MEMBER_CHUNK).collect();

    struct ChunkSum {
        w: Vec<f64>,
        steps: usize,
        effective_dt: Option<f64>,
        norm: f64,
        mag: f64,
    }

    let chunks: Vec<ChunkSum> = chunk_starts
        .par_iter()
        .map(|&start| {
            let mut sum = ChunkSum {
                w: vec![0.0; grid.n_samples()],
                steps: 0,
                effective_dt: None,
                norm: 0.0,
                mag: 0.0,
            };
            for i in start..(start + MEMBER_CHUNK).min(members) {
                let spec = InitialStateSpec::new(
                    StateKind::BasisMember(i),
                    excited,
                    SeedStream::new(0, 0),
                );
                let (samples, _) = sample_w(prepared, &spec, observed_site, grid)?;
                for (acc, w) in sum.w.iter_mut().zip(&samples.w) {
                    *acc += w;
                }
                sum.steps += samples.steps;
                sum.effective_dt = samples.effective_dt;
                sum.norm = sum.norm.max(samples.max_norm_drift);
                sum.mag = sum.mag.max(samples.max_magnetization_drift);
            }
            Ok(sum)
        })
        .collect::<Result<_>>()?;

    let scale = 1.0 / members as f64;
    let w: Vec<f64> = (0..grid.n_samples())
        .map(|k| chunks.iter().map(|c| c.w[k]).sum::<f64>() * scale)
        .collect();
    Ok(PolarizationTrace {
        grid: *grid,
        values: to_polarization(&w)?,
        meta: TraceMeta {
            source: TraceSource::Ensemble { members },
            excited_site: excited,
            observed_site: observed,
            propagator: prepared.propagator(),
            phase_records: Vec::new(),
            effective_dt: chunks.iter().find_map(|c| c.effective_dt),
            trotter_steps: chunks.iter().map(|c| c.steps).sum(),
            max_norm_drift: Some(chunks.iter().map(|c| c.norm).fold(0.0, f64::max)),
            max_magnetization_drift: Some(chunks.iter().map(|c| c.mag).fold(0.0, f64::max)),
        },
    })
}

/// Closed-form member sum. In a block with eigenvectors `V`,
/// `sum_{c in S_n} sum_{f in S_n'} |U_fc(t)|^2 = sum_{kl} A_kl B_kl cos((E_k - E_l) t)`
/// where `A = V_{S_n'}^T V_{S_n'}` and `B = V_{S_n}^T V_{S_n}` restrict rows to
/// configurations with the observed / excited site up.
pub fn ensemble_trace_spectral(
    dec: &SpectralDecomposition,
    excited: usize,
    observed: usize,
    grid: &TimeGrid,
) -> Result<PolarizationTrace> {
    let m = dec.m_sites();
    let excited_mask = SiteIndex::new(excited, m)?.mask();
    let observed_mask = SiteIndex::new(observed, m)?.mask();
    let members = 1usize << (m - 1);
    let times = grid.times();

    let per_block: Vec<Vec<f64>> = dec
        .blocks()
        .par_iter()
        .map(|block| {
            let d = block.configs.len();
            let rows_with = |mask: usize| -> DMatrix<f64> {
                let rows: Vec<usize> = (0..d).filter(|&r| block.configs[r] & mask != 0).collect();
                block.vectors.select_rows(rows.iter())
            };
            let v_obs = rows_with(observed_mask);
            let v_exc = rows_with(excited_mask);
            if v_obs.nrows() == 0 || v_exc.nrows() == 0 {
                return vec![0.0; times.len()];
            }
            let a = v_obs.tr_mul(&v_obs);
            let b = v_exc.tr_mul(&v_exc);
            let c = a.component_mul(&b);
            let mut cos = DMatrix::<f64>::zeros(d, times.len());
            let mut sin = DMatrix::<f64>::zeros(d, times.len());
            for (j, &t) in times.iter().enumerate() {
                for k in 0..d {
                    let (s, co) = (block.energies[k] * t).sin_cos();
                    cos[(k, j)] = co;
                    sin[(k, j)] = s;
                }
            }
            let u_re = &c * &cos;
            let u_im = &c * &sin;
            (0..times.len())
                .map(|j| {
                    pairwise_sum(0, d, &|k| {
                        cos[(k, j)] * u_re[(k, j)] + sin[(k, j)] * u_im[(k, j)]
                    })
                })
                .collect()
        })
        .collect();

    let scale = 1.0 / members as f64;
    let w: Vec<f64> = (0..times.len())
        .map(|j| per_block.iter().map(|b| b[j]).sum::<f64>() * scale)
        .collect();
    Ok(PolarizationTrace {
        grid: *grid,
        values: to_polarization(&w)?,
        meta: TraceMeta {
            source: TraceSource::Ensemble { members },
            excited_site: excited,
            observed_site: observed,
            propagator: Propagator::Exact,
            phase_records: Vec::new(),
            effective_dt: None,
            trotter_steps: 0,
            max_norm_drift: None,
            max_magnetization_drift: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_chain, build_ladder, build_star, AnisotropyKind};
    use crate::propagators::exact_diagonalize_unblocked;

    #[test]
    fn two_spin_rabi() {
        let net = build_chain(2, 1.0, AnisotropyKind::XY).unwrap();
        let grid = TimeGrid::new(20.0, 100).unwrap();
        let trace = ensemble_trace(
            &net,
            0,
            0,
            &grid,
            Propagator::Exact,
            EnsembleCaps::default(),
        )
        .unwrap();
        for (k, p) in trace.values.iter().enumerate() {
            let t = grid.time(k);
            assert!((p - (t / 2.0).cos().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_matches_enumeration_and_unblocked() {
        let grid = TimeGrid::new(8.0, 33).unwrap();
        for net in [
            build_ladder(8, 1.0, 0.1).unwrap(),
            build_star(7, 1.0, 2).unwrap(),
            build_chain(6, 1.0, AnisotropyKind::Isotropic).unwrap(),
        ] {
            let m = net.m_sites();
            for (n, n2) in [(0, 0), (0, m - 1), (2, 1)] {
                let spectral = ensemble_trace(
                    &net,
                    n,
                    n2,
                    &grid,
                    Propagator::Exact,
                    EnsembleCaps::default(),
                )
                .unwrap();
                let prepared = PreparedPropagator::new(&net, Propagator::Exact).unwrap();
                let enumerated = ensemble_trace_enumerated(&prepared, n, n2, &grid).unwrap();
                let full = PreparedPropagator::Exact(exact_diagonalize_unblocked(&net).unwrap());
                let full_enum = ensemble_trace_enumerated(&full, n, n2, &grid).unwrap();
                for k in 0..grid.n_samples() {
                    assert!((spectral.values[k] - enumerated.values[k]).abs() < 1e-9);
                    assert!((spectral.values[k] - full_enum.values[k]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ising_network_is_frozen() {
        let net = build_chain(6, 1.0, AnisotropyKind::Ising).unwrap();
        let grid = TimeGrid::new(10.0, 20).unwrap();
        let trace = ensemble_trace(
            &net,
            0,
            0,
            &grid,
            Propagator::Exact,
            EnsembleCaps::default(),
        )
        .unwrap();
        assert!(trace.values.iter().all(|p| (p - 1.0).abs() < 1e-10));
    }

    #[test]
    fn caps_are_enforced() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let net = build_chain(13, 1.0, AnisotropyKind::XY).unwrap();
        assert!(matches!(
            ensemble_trace(
                &net,
                0,
                0,
                &grid,
                Propagator::Exact,
                EnsembleCaps::default()
            ),
            Err(Error::Capability(_))
        ));
        let small = EnsembleCaps {
            exact_max_sites: 4,
            trotter_max_sites: 5,
        };
        let net = build_chain(6, 1.0, AnisotropyKind::XY).unwrap();
        assert!(matches!(
            ensemble_trace(&net, 0, 0, &grid, Propagator::Trotter { dt: 0.1 }, small),
            Err(Error::Capability(_))
        ));
    }
}
