//! Initial states with one site polarized up over an infinite-temperature
//! background of the other `M - 1` sites.
//!
//! * basis members: one background configuration, the ensemble elements;
//! * entangled: all `2^(M-1)` background configurations with uniform modulus
//!   and independent random phases;
//! * product: every background site in `(|down> + e^{-i phi_l}|up>)/sqrt(2)`,
//!   i.e. only `M - 1` independent phases.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::basis::{self, SiteIndex};
use crate::error::{Error, Result};
use crate::rng::{PhaseRecord, SeedStream};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateKind {
    /// Ensemble member with background index `i < 2^(M-1)`.
    BasisMember(usize),
    Entangled,
    Product,
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::BasisMember(_) => "basis",
            StateKind::Entangled => "entangled",
            StateKind::Product => "product",
        }
    }

    /// Number of independent random phases in a state of this kind.
    pub fn independent_phases(&self, m_sites: usize) -> u64 {
        match self {
            StateKind::BasisMember(_) => 0,
            StateKind::Entangled => 1u64 << m_sites.saturating_sub(1),
            StateKind::Product => m_sites.saturating_sub(1) as u64,
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKind::BasisMember(i) => write!(f, "basis[{i}]"),
            other => f.write_str(other.name()),
        }
    }
}

/// Which initial state to build, where the excitation sits, and which phase
/// stream to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InitialStateSpec {
    pub kind: StateKind,
    pub excited_site: usize,
    pub phases: SeedStream,
}

impl InitialStateSpec {
    pub fn new(kind: StateKind, excited_site: usize, phases: SeedStream) -> Self {
        InitialStateSpec {
            kind,
            excited_site,
            phases,
        }
    }

    /// Builds the state; random kinds also return the record of phases drawn.
    pub fn build(&self, m_sites: usize) -> Result<(StateVector, Option<PhaseRecord>)> {
        let site = SiteIndex::new(self.excited_site, m_sites)?;
        match self.kind {
            StateKind::BasisMember(i) => Ok((make_basis_member(m_sites, site, i)?, None)),
            StateKind::Entangled => {
                let (psi, rec) = make_entangled(m_sites, site, self.phases)?;
                Ok((psi, Some(rec)))
            }
            StateKind::Product => {
                let (psi, rec) = make_product(m_sites, site, self.phases)?;
                Ok((psi, Some(rec)))
            }
        }
    }
}

fn check_site(m_sites: usize, site: SiteIndex) -> Result<()> {
    basis::dimension(m_sites)?;
    if m_sites < 1 || site.get() >= m_sites {
        return Err(Error::SiteOutOfRange {
            site: site.get(),
            m_sites,
        });
    }
    Ok(())
}

fn uniform_phase<R: Rng>(rng: &mut R) -> f64 {
    rng.random::<f64>() * TAU
}

/// The product basis state with `site` up and the other sites set by the
/// bits of `background` in ascending site order.
pub fn make_basis_member(
    m_sites: usize,
    site: SiteIndex,
    background: usize,
) -> Result<StateVector> {
    check_site(m_sites, site)?;
    let members = 1usize << (m_sites - 1);
    if background >= members {
        return Err(Error::Domain(format!(
            "background index {background} out of range (< {members})"
        )));
    }
    let bits = basis::embed_background(background, site.get());
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m_sites];
    amps[bits] = Complex64::new(1.0, 0.0);
    StateVector::from_amplitudes(m_sites, amps)
}

/// Uniform superposition of all ensemble members with phases
/// `e^{-i phi_i}`, `phi_i` i.i.d. uniform on `[0, 2pi)`, drawn in background
/// index order.
pub fn make_entangled(
    m_sites: usize,
    site: SiteIndex,
    phases: SeedStream,
) -> Result<(StateVector, PhaseRecord)> {
    check_site(m_sites, site)?;
    let members = 1usize << (m_sites - 1);
    let modulus = 1.0 / (members as f64).sqrt();
    let mut rng = phases.rng();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m_sites];
    for i in 0..members {
        let phi = uniform_phase(&mut rng);
        amps[basis::embed_background(i, site.get())] = Complex64::from_polar(modulus, -phi);
    }
    let psi = StateVector::from_amplitudes(m_sites, amps)?;
    Ok((psi, phases.record(members as u64)))
}

/// `|up>_n` times `(|down>_l + e^{-i phi_l} |up>_l)/sqrt(2)` on every other
/// site, phases drawn in ascending site order.
pub fn make_product(
    m_sites: usize,
    site: SiteIndex,
    phases: SeedStream,
) -> Result<(StateVector, PhaseRecord)> {
    check_site(m_sites, site)?;
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut rng = phases.rng();
    // Background amplitudes, built one site at a time by tensor product.
    let mut background = vec![Complex64::new(1.0, 0.0)];
    for _ in (0..m_sites).filter(|&l| l != site.get()) {
        let up = Complex64::from_polar(half, -uniform_phase(&mut rng));
        let down: Vec<Complex64> = background.iter().map(|a| a * half).collect();
        let ups: Vec<Complex64> = background.iter().map(|a| a * up).collect();
        background = down;
        background.extend(ups);
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m_sites];
    for (i, a) in background.into_iter().enumerate() {
        amps[basis::embed_background(i, site.get())] = a;
    }
    let psi = StateVector::from_amplitudes(m_sites, amps)?;
    Ok((psi, phases.record((m_sites - 1) as u64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{inner_product, total_magnetization, up_probability};

    fn site(n: usize, m: usize) -> SiteIndex {
        SiteIndex::new(n, m).unwrap()
    }

    #[test]
    fn basis_member_layout() {
        let psi = make_basis_member(3, site(0, 3), 0).unwrap();
        assert_eq!(psi.amplitudes()[0b001], Complex64::new(1.0, 0.0));
        let psi = make_basis_member(3, site(0, 3), 3).unwrap();
        assert_eq!(psi.amplitudes()[0b111], Complex64::new(1.0, 0.0));
        for i in 0..16 {
            for n in 0..5 {
                let psi = make_basis_member(5, site(n, 5), i).unwrap();
                assert_eq!(up_probability(&psi, site(n, 5)).unwrap(), 1.0);
            }
        }
        assert!(make_basis_member(3, site(0, 3), 4).is_err());
    }

    #[test]
    fn entangled_populations() {
        let m = 7;
        for n in [0, 3, 6] {
            let (psi, rec) = make_entangled(m, site(n, m), SeedStream::phases(1, 0)).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-14);
            assert_eq!(rec.count, 64);
            for k in 0..m {
                let w = up_probability(&psi, site(k, m)).unwrap();
                let want = if k == n { 1.0 } else { 0.5 };
                assert!((w - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn entangled_magnetization() {
        let (psi, _) = make_entangled(6, site(0, 6), SeedStream::phases(3, 0)).unwrap();
        assert!((total_magnetization(&psi) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn entangled_overlap_statistics() {
        // E|<a|b>|^2 = 1/D for independent uniform phases, Var = (D-1)/D^3.
        let m = 8;
        let d = 128.0;
        let overlaps: Vec<f64> = (0..100u64)
            .map(|k| {
                let (a, _) = make_entangled(m, site(0, m), SeedStream::phases(k, 0)).unwrap();
                let (b, _) = make_entangled(m, site(0, m), SeedStream::phases(k, 1)).unwrap();
                inner_product(&a, &b).unwrap().norm_sqr()
            })
            .collect();
        let n = overlaps.len() as f64;
        let mean = overlaps.iter().sum::<f64>() / n;
        let se = ((d - 1.0) / (d * d * d) / n).sqrt();
        assert!((mean - 1.0 / d).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn product_populations_and_phase_count() {
        let m = 6;
        let (psi, rec) = make_product(m, site(2, m), SeedStream::phases(4, 0)).unwrap();
        assert_eq!(rec.count, 5);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        for k in 0..m {
            let w = up_probability(&psi, site(k, m)).unwrap();
            let want = if k == 2 { 1.0 } else { 0.5 };
            assert!((w - want).abs() < 1e-12);
        }
    }

    #[test]
    fn product_phases_are_subset_sums() {
        let m = 5;
        let stream = SeedStream::phases(11, 2);
        let (psi, _) = make_product(m, site(0, m), stream).unwrap();
        let mut rng = stream.rng();
        let phis: Vec<f64> = (0..m - 1).map(|_| uniform_phase(&mut rng)).collect();
        let modulus = 0.25;
        for i in 0..16usize {
            let sum: f64 = (0..m - 1)
                .filter(|l| i >> l & 1 == 1)
                .map(|l| phis[l])
                .sum();
            let want = Complex64::from_polar(modulus, -sum);
            let got = psi.amplitudes()[basis::embed_background(i, 0)];
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let s = SeedStream::phases(77, 5);
        assert_eq!(
            make_entangled(6, site(1, 6), s).unwrap(),
            make_entangled(6, site(1, 6), s).unwrap()
        );
        assert_eq!(
            make_product(6, site(1, 6), s).unwrap(),
            make_product(6, site(1, 6), s).unwrap()
        );
        assert_ne!(
            make_entangled(6, site(1, 6), s).unwrap().0,
            make_entangled(6, site(1, 6), SeedStream::phases(78, 5))
                .unwrap()
                .0
        );
    }

    #[test]
    fn independent_phase_counts() {
        assert_eq!(StateKind::Entangled.independent_phases(14), 8192);
        assert_eq!(StateKind::Product.independent_phases(14), 13);
        let spec = InitialStateSpec::new(StateKind::Entangled, 0, SeedStream::phases(1, 0));
        assert_eq!(spec.build(10).unwrap().1.unwrap().count, 512);
        let spec = InitialStateSpec::new(StateKind::Product, 0, SeedStream::phases(1, 0));
        assert_eq!(spec.build(10).unwrap().1.unwrap().count, 9);
    }

    #[test]
    fn seed_averaged_density_matrix_is_uniform_mixture() {
        // Averaged |psi><psi| over seeds -> diag(1/D) on the bit-n-up block.
        let (m, seeds) = (4, 1000u64);
        let d = 8usize;
        let mut rho = vec![Complex64::new(0.0, 0.0); d * d];
        for s in 0..seeds {
            let (psi, _) = make_entangled(m, site(0, m), SeedStream::phases(s, 0)).unwrap();
            for i in 0..d {
                for j in 0..d {
                    let (bi, bj) = (basis::embed_background(i, 0), basis::embed_background(j, 0));
                    rho[i * d + j] += psi.amplitudes()[bi] * psi.amplitudes()[bj].conj();
                }
            }
        }
        let n = seeds as f64;
        // Off-diagonal entries e^{i(phi_j - phi_i)}/D have mean 0 and per-component
        // standard deviation 1/(D sqrt 2).
        let se = 1.0 / (d as f64 * 2f64.sqrt() * n.sqrt());
        for i in 0..d {
            for j in 0..d {
                let mean = rho[i * d + j] / n;
                if i == j {
                    assert!((mean.re - 1.0 / d as f64).abs() < 1e-12);
                } else {
                    assert!(mean.re.abs() < 5.0 * se && mean.im.abs() < 5.0 * se);
                }
            }
        }
    }
}
