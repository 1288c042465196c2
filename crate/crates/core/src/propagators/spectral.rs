//! Exact propagation through a dense eigendecomposition.
//!
//! The Hamiltonian conserves total `I^z`, so it is diagonalized one
//! magnetization sector at a time. `V` is then block diagonal and
//! `exp(-iHt) = V exp(-iEt) V^T` is applied block by block.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::basis;
use crate::error::{Error, Result};
use crate::hamiltonian::CouplingNetwork;
use crate::state::StateVector;

/// Default cap on the number of sites for exact diagonalization.
pub const EXACT_MAX_SITES: usize = 12;

/// Times evaluated per batched matrix product in [`SpectralDecomposition::sample`].
const TIME_CHUNK: usize = 64;

/// Eigenpairs of `H` restricted to an invariant set of configurations.
#[derive(Debug, Clone)]
pub struct SpectralBlock {
    /// Basis configurations spanning the block, ascending.
    pub configs: Vec<usize>,
    pub energies: DVector<f64>,
    /// Orthonormal eigenvectors as columns, rows indexed like `configs`.
    pub vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    m_sites: usize,
    blocks: Vec<SpectralBlock>,
}

/// Sector-blocked eigendecomposition, capped at [`EXACT_MAX_SITES`].
pub fn exact_diagonalize(net: &CouplingNetwork) -> Result<SpectralDecomposition> {
    exact_diagonalize_with_cap(net, EXACT_MAX_SITES)
}

pub fn exact_diagonalize_with_cap(
    net: &CouplingNetwork,
    max_sites: usize,
) -> Result<SpectralDecomposition> {
    check_cap(net, max_sites)?;
    let m = net.m_sites();
    let blocks = (0..=m as u32)
        .map(|ups| diagonalize_block(net, basis::sector_configs(m, ups)))
        .collect();
    Ok(SpectralDecomposition { m_sites: m, blocks })
}

/// Diagonalizes the full `2^M` matrix as a single block, ignoring sector
/// structure. Reference route for checking the blocked decomposition.
pub fn exact_diagonalize_unblocked(net: &CouplingNetwork) -> Result<SpectralDecomposition> {
    check_cap(net, EXACT_MAX_SITES)?;
    let configs: Vec<usize> = (0..net.dim()).collect();
    Ok(SpectralDecomposition {
        m_sites: net.m_sites(),
        blocks: vec![diagonalize_block(net, configs)],
    })
}

fn check_cap(net: &CouplingNetwork, max_sites: usize) -> Result<()> {
    if net.m_sites() > max_sites {
        return Err(Error::Capability(format!(
            "exact diagonalization is capped at M = {max_sites} (got M = {}); \
             use the Trotter propagator instead",
            net.m_sites()
        )));
    }
    Ok(())
}

fn diagonalize_block(net: &CouplingNetwork, configs: Vec<usize>) -> SpectralBlock {
    let h = net.sector_matrix(&configs);
    let eig = SymmetricEigen::new(h);
    SpectralBlock {
        configs,
        energies: eig.eigenvalues,
        vectors: eig.eigenvectors,
    }
}

impl SpectralDecomposition {
    pub fn m_sites(&self) -> usize {
        self.m_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.m_sites
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| b.energies.iter().copied())
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// The full eigenvector matrix (columns), block by block. Meant for
    /// small-M checks only.
    pub fn dense_eigenvectors(&self) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.dim();
        let mut v = DMatrix::<f64>::zeros(dim, dim);
        let mut e = DVector::<f64>::zeros(dim);
        let mut col0 = 0;
        for block in &self.blocks {
            for k in 0..block.configs.len() {
                e[col0 + k] = block.energies[k];
                for (r, &row) in block.configs.iter().enumerate() {
                    v[(row, col0 + k)] = block.vectors[(r, k)];
                }
            }
            col0 += block.configs.len();
        }
        (e, v)
    }

    fn check_dim(&self, psi: &StateVector) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(())
    }

    /// `V exp(-iEt) V^T psi0`.
    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        self.check_dim(psi0)?;
        let input = psi0.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for block in &self.blocks {
            let (re, im) = gather(block, input);
            let v = &block.vectors;
            let mut c_re = v.tr_mul(&re);
            let mut c_im = v.tr_mul(&im);
            for k in 0..c_re.len() {
                let phase = Complex64::from_polar(1.0, -block.energies[k] * t);
                let c = Complex64::new(c_re[k], c_im[k]) * phase;
                c_re[k] = c.re;
                c_im[k] = c.im;
            }
            let psi_re = v * c_re;
            let psi_im = v * c_im;
            for (r, &row) in block.configs.iter().enumerate() {
                out[row] = Complex64::new(psi_re[r], psi_im[r]);
            }
        }
        StateVector::from_amplitudes(self.m_sites, out)
    }

    /// Visits `exp(-iH t_k) psi0` for every `t_k` in `times`. Each time is
    /// evaluated directly from the eigenbasis coefficients of `psi0`, in
    /// batches of matrix products.
    pub fn sample<F>(&self, psi0: &StateVector, times: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(usize, &StateVector) -> Result<()>,
    {
        self.check_dim(psi0)?;
        let input = psi0.amplitudes();
        let coefficients: Vec<(DVector<f64>, DVector<f64>)> = self
            .blocks
            .iter()
            .map(|block| {
                let (re, im) = gather(block, input);
                (block.vectors.tr_mul(&re), block.vectors.tr_mul(&im))
            })
            .collect();

        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (chunk_idx, chunk) in times.chunks(TIME_CHUNK).enumerate() {
            let mut evolved = Vec::with_capacity(self.blocks.len());
            for (block, (c_re, c_im)) in self.blocks.iter().zip(&coefficients) {
                let d = block.configs.len();
                let mut z_re = DMatrix::<f64>::zeros(d, chunk.len());
                let mut z_im = DMatrix::<f64>::zeros(d, chunk.len());
                for (j, &t) in chunk.iter().enumerate() {
                    for k in 0..d {
                        let z = Complex64::new(c_re[k], c_im[k])
                            * Complex64::from_polar(1.0, -block.energies[k] * t);
                        z_re[(k, j)] = z.re;
                        z_im[(k, j)] = z.im;
                    }
                }
                evolved.push((&block.vectors * z_re, &block.vectors * z_im));
            }
            for j in 0..chunk.len() {
                for (block, (psi_re, psi_im)) in self.blocks.iter().zip(&evolved) {
                    for (r, &row) in block.configs.iter().enumerate() {
                        amps[row] = Complex64::new(psi_re[(r, j)], psi_im[(r, j)]);
                    }
                }
                let state = StateVector::from_amplitudes_unnormalized(self.m_sites, amps)?;
                visit(chunk_idx * TIME_CHUNK + j, &state)?;
                amps = state.into_amplitudes();
            }
        }
        Ok(())
    }
}

fn gather(block: &SpectralBlock, input: &[Complex64]) -> (DVector<f64>, DVector<f64>) {
    let re = DVector::from_iterator(
        block.configs.len(),
        block.configs.iter().map(|&c| input[c].re),
    );
    let im = DVector::from_iterator(
        block.configs.len(),
        block.configs.iter().map(|&c| input[c].im),
    );
    (re, im)
}

/// `exp(-iHt) psi0` from a precomputed decomposition.
pub fn evolve_exact(
    dec: &SpectralDecomposition,
    psi0: &StateVector,
    t: f64,
) -> Result<StateVector> {
    dec.evolve(psi0, t)
}
