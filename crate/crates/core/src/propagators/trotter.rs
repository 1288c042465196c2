//! Second-order (Strang) Trotter-Suzuki propagation with two-site gates.
//!
//! One step of size `dt` applies every coupling's half-step gate in `(i, j)`
//! order and then again in reverse order. The two middle half-steps act on
//! the same pair and are fused into one full-step gate, as are the boundary
//! half-steps of consecutive steps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::CouplingNetwork;
use crate::state::StateVector;

/// `exp(-i H_pair dt)` for `H_pair = a I^z I^z + b/2 (I^+ I^- + I^- I^+)`.
///
/// The aligned configurations pick up `corner`; the anti-aligned pair
/// `{up-down, down-up}` mixes through `[[mid_diag, mid_off], [mid_off, mid_diag]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGate {
    pub corner: Complex64,
    pub mid_diag: Complex64,
    pub mid_off: Complex64,
}

pub fn pair_gate(a: f64, b: f64, dt: f64) -> PairGate {
    let outer = Complex64::from_polar(1.0, a * dt / 4.0);
    let (sin, cos) = (b * dt / 2.0).sin_cos();
    PairGate {
        corner: Complex64::from_polar(1.0, -a * dt / 4.0),
        mid_diag: outer * cos,
        mid_off: outer * Complex64::new(0.0, -sin),
    }
}

impl PairGate {
    /// Dense 4x4 form in the basis `{up-up, up-down, down-up, down-down}`.
    pub fn matrix(&self) -> [[Complex64; 4]; 4] {
        let z = Complex64::new(0.0, 0.0);
        [
            [self.corner, z, z, z],
            [z, self.mid_diag, self.mid_off, z],
            [z, self.mid_off, self.mid_diag, z],
            [z, z, z, self.corner],
        ]
    }

    fn is_real_rotation(&self) -> bool {
        self.corner == Complex64::new(1.0, 0.0) && self.mid_diag.im == 0.0 && self.mid_off.re == 0.0
    }

    /// Applies the gate to sites `i < j` of the amplitude array in place.
    pub(crate) fn apply(&self, amps: &mut [Complex64], i: usize, j: usize) {
        debug_assert!(i < j);
        let (lo, hi) = (1usize << i, 1usize << j);
        let real = self.is_real_rotation();
        let (corner, d, o) = (self.corner, self.mid_diag, self.mid_off);
        let (c, s) = (d.re, o.im);
        // Each block of 2*hi splits into the j-down and j-up halves; within a
        // half, runs of `lo` indices alternate between i-down and i-up.
        for block in amps.chunks_exact_mut(2 * hi) {
            let (down, up) = block.split_at_mut(hi);
            for (dn, upr) in down
                .chunks_exact_mut(2 * lo)
                .zip(up.chunks_exact_mut(2 * lo))
            {
                let (dd, du) = dn.split_at_mut(lo);
                let (ud, uu) = upr.split_at_mut(lo);
                if real {
                    for (x, y) in du.iter_mut().zip(ud.iter_mut()) {
                        let (xv, yv) = (*x, *y);
                        *x = Complex64::new(c * xv.re - s * yv.im, c * xv.im + s * yv.re);
                        *y = Complex64::new(c * yv.re - s * xv.im, c * yv.im + s * xv.re);
                    }
                } else {
                    for v in dd.iter_mut().chain(uu.iter_mut()) {
                        *v *= corner;
                    }
                    for (x, y) in du.iter_mut().zip(ud.iter_mut()) {
                        let (xv, yv) = (*x, *y);
                        *x = d * xv + o * yv;
                        *y = o * xv + d * yv;
                    }
                }
            }
        }
    }
}

/// Precomputed gates for symmetric steps of size `dt`.
#[derive(Debug, Clone)]
pub struct TrotterPlan {
    m_sites: usize,
    dt: f64,
    pairs: Vec<(usize, usize)>,
    half: Vec<PairGate>,
    full: Vec<PairGate>,
}

impl TrotterPlan {
    pub fn new(net: &CouplingNetwork, dt: f64) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::Domain(format!(
                "Trotter step must be positive, got {dt}"
            )));
        }
        let cs = net.couplings();
        Ok(TrotterPlan {
            m_sites: net.m_sites(),
            dt,
            pairs: cs.iter().map(|c| (c.i, c.j)).collect(),
            half: cs.iter().map(|c| pair_gate(c.a, c.b, dt / 2.0)).collect(),
            full: cs.iter().map(|c| pair_gate(c.a, c.b, dt)).collect(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Gate sequence of a single step as `(i, j, gate)`, forward then reverse.
    pub fn sequence(&self) -> Vec<(usize, usize, PairGate)> {
        let n = self.pairs.len();
        if n == 0 {
            return Vec::new();
        }
        let mut seq = Vec::with_capacity(2 * n - 1);
        for k in 0..n - 1 {
            seq.push((self.pairs[k].0, self.pairs[k].1, self.half[k]));
        }
        seq.push((self.pairs[n - 1].0, self.pairs[n - 1].1, self.full[n - 1]));
        for k in (0..n - 1).rev() {
            seq.push((self.pairs[k].0, self.pairs[k].1, self.half[k]));
        }
        seq
    }

    /// Applies `steps` symmetric steps in place.
    pub fn advance(&self, psi: &mut StateVector, steps: usize) -> Result<()> {
        if psi.m_sites() != self.m_sites {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.m_sites,
                found: psi.dim(),
            });
        }
        let n = self.pairs.len();
        if steps == 0 || n == 0 {
            return Ok(());
        }
        let amps = psi.amplitudes_mut();
        let gate = |amps: &mut [Complex64], g: &PairGate, k: usize| {
            g.apply(amps, self.pairs[k].0, self.pairs[k].1)
        };
        if n == 1 {
            for _ in 0..steps {
                gate(amps, &self.full[0], 0);
            }
            return Ok(());
        }
        gate(amps, &self.half[0], 0);
        for step in 0..steps {
            for k in 1..n - 1 {
                gate(amps, &self.half[k], k);
            }
            gate(amps, &self.full[n - 1], n - 1);
            for k in (1..n - 1).rev() {
                gate(amps, &self.half[k], k);
            }
            if step + 1 == steps {
                gate(amps, &self.half[0], 0);
            } else {
                gate(amps, &self.full[0], 0);
            }
        }
        Ok(())
    }
}

/// Steps actually taken by [`evolve_trotter`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterReport {
    pub full_steps: usize,
    /// Length of a final shorter step when `t` is not a multiple of `dt`.
    pub fractional_step: Option<f64>,
}

impl TrotterReport {
    pub fn total_steps(&self) -> usize {
        self.full_steps + usize::from(self.fractional_step.is_some())
    }
}

/// Splits `t` into whole steps of `dt` plus an optional remainder. Ratios
/// within 1e-9 of an integer count as exact multiples.
pub fn step_count(t: f64, dt: f64) -> TrotterReport {
    let ratio = t / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() < 1e-9 {
        return TrotterReport {
            full_steps: nearest as usize,
            fractional_step: None,
        };
    }
    let full = ratio.floor();
    TrotterReport {
        full_steps: full as usize,
        fractional_step: Some(t - full * dt),
    }
}

/// Evolves `psi0` to time `t >= 0` with steps of `dt`, taking `ceil(t/dt)`
/// steps (the last one shortened if needed).
pub fn evolve_trotter(
    net: &CouplingNetwork,
    psi0: &StateVector,
    t: f64,
    dt: f64,
) -> Result<(StateVector, TrotterReport)> {
    let plan = TrotterPlan::new(net, dt)?;
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!(
            "Trotter evolution needs t >= 0, got {t}"
        )));
    }
    if psi0.m_sites() != net.m_sites() {
        return Err(Error::DimensionMismatch {
            expected: net.dim(),
            found: psi0.dim(),
        });
    }
    let report = step_count(t, dt);
    let mut psi = psi0.clone();
    plan.advance(&mut psi, report.full_steps)?;
    if let Some(rest) = report.fractional_step {
        TrotterPlan::new(net, rest)?.advance(&mut psi, 1)?;
    }
    Ok((psi, report))
}
