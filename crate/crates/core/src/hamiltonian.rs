//! Coupling networks and the matrix-free spin-spin Hamiltonian
//!
//! `H = sum_{i<j} [ a_ij I^z_i I^z_j + b_ij/2 (I^+_i I^-_j + I^-_i I^+_j) ]`
//! with spin-1/2 operators and hbar = 1.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::basis;
use crate::error::{Error, Result};
use crate::rng::{DrawRecord, SeedStream};
use crate::state::StateVector;

/// Largest network that may be materialized as a dense matrix.
pub const DENSE_MAX_SITES: usize = 12;

/// Below this dimension `apply` runs serially.
const PARALLEL_MIN_DIM: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    /// Ising coefficient.
    pub a: f64,
    /// Flip-flop coefficient.
    pub b: f64,
}

impl Coupling {
    pub fn new(i: usize, j: usize, a: f64, b: f64) -> Result<Self> {
        if i >= j {
            return Err(Error::Config(format!(
                "coupling ({i}, {j}) must have i < j"
            )));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!(
                "coupling ({i}, {j}) has non-finite strength"
            )));
        }
        Ok(Coupling { i, j, a, b })
    }

    /// Largest rate in the pair block, `max(|b|, |a|/2)`.
    pub fn rate(&self) -> f64 {
        self.b.abs().max(self.a.abs() / 2.0)
    }
}

/// Anisotropy ratio between the Ising and flip-flop parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnisotropyKind {
    /// b = 0
    Ising,
    /// a = 0
    XY,
    /// a = b
    Isotropic,
    /// a = -2b, the secular dipolar coupling
    Dipolar,
}

impl AnisotropyKind {
    /// `(a, b)` for a bond of strength `magnitude`. For [`Ising`](Self::Ising)
    /// the magnitude goes to `a`, otherwise to `b`.
    pub fn coefficients(self, magnitude: f64) -> (f64, f64) {
        match self {
            AnisotropyKind::Ising => (magnitude, 0.0),
            AnisotropyKind::XY => (0.0, magnitude),
            AnisotropyKind::Isotropic => (magnitude, magnitude),
            AnisotropyKind::Dipolar => (-2.0 * magnitude, magnitude),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AnisotropyKind::Ising => "ising",
            AnisotropyKind::XY => "xy",
            AnisotropyKind::Isotropic => "isotropic",
            AnisotropyKind::Dipolar => "dipolar",
        }
    }
}

impl std::str::FromStr for AnisotropyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ising" => Ok(AnisotropyKind::Ising),
            "xy" => Ok(AnisotropyKind::XY),
            "isotropic" | "heisenberg" => Ok(AnisotropyKind::Isotropic),
            "dipolar" => Ok(AnisotropyKind::Dipolar),
            other => Err(Error::Config(format!("unknown anisotropy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Chain,
    Ladder,
    Star,
    Custom,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Chain => "chain",
            Topology::Ladder => "ladder",
            Topology::Star => "star",
            Topology::Custom => "custom",
        })
    }
}

/// Immutable set of pairwise couplings over `m_sites` spins, sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingNetwork {
    m_sites: usize,
    couplings: Vec<Coupling>,
    topology: Topology,
}

impl CouplingNetwork {
    pub fn new(m_sites: usize, mut couplings: Vec<Coupling>, topology: Topology) -> Result<Self> {
        if m_sites < 1 {
            return Err(Error::Config("a network needs at least one site".into()));
        }
        basis::dimension(m_sites)?;
        couplings.sort_by_key(|c| (c.i, c.j));
        for c in &couplings {
            Coupling::new(c.i, c.j, c.a, c.b)?;
            if c.j >= m_sites {
                return Err(Error::Config(format!(
                    "coupling ({}, {}) references a site beyond M = {m_sites}",
                    c.i, c.j
                )));
            }
        }
        if let Some(w) = couplings
            .windows(2)
            .find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j))
        {
            return Err(Error::Config(format!(
                "duplicate coupling ({}, {})",
                w[0].i, w[0].j
            )));
        }
        Ok(CouplingNetwork {
            m_sites,
            couplings,
            topology,
        })
    }

    #[inline]
    pub fn m_sites(&self) -> usize {
        self.m_sites
    }

    #[inline]
    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    #[inline]
    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn dim(&self) -> usize {
        1 << self.m_sites
    }

    /// Largest pair rate `max(|b|, |a|/2)` over the network, zero if empty.
    pub fn max_rate(&self) -> f64 {
        self.couplings
            .iter()
            .map(Coupling::rate)
            .fold(0.0, f64::max)
    }

    /// Diagonal (Ising) energy of basis configuration `bits`.
    pub fn diagonal_energy(&self, bits: usize) -> f64 {
        self.couplings
            .iter()
            .map(|c| {
                let aligned = (bits >> c.i & 1) == (bits >> c.j & 1);
                if aligned {
                    c.a / 4.0
                } else {
                    -c.a / 4.0
                }
            })
            .sum()
    }

    /// Writes `H * input` into `out` without materializing `H`. Each output
    /// amplitude is gathered by exactly one worker.
    pub fn apply_into(&self, input: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = self.dim();
        for len in [input.len(), out.len()] {
            if len != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: len,
                });
            }
        }
        let terms: Vec<(usize, usize, f64, f64)> = self
            .couplings
            .iter()
            .map(|c| (c.i, c.j, c.a / 4.0, c.b / 2.0))
            .collect();
        let gather = |bits: usize| {
            let mut diag = 0.0;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(i, j, quarter_a, half_b) in &terms {
                if (bits >> i & 1) == (bits >> j & 1) {
                    diag += quarter_a;
                } else {
                    diag -= quarter_a;
                    if half_b != 0.0 {
                        acc += input[bits ^ (1 << i | 1 << j)] * half_b;
                    }
                }
            }
            acc + input[bits] * diag
        };
        if dim >= PARALLEL_MIN_DIM {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(bits, slot)| *slot = gather(bits));
        } else {
            out.iter_mut()
                .enumerate()
                .for_each(|(bits, slot)| *slot = gather(bits));
        }
        Ok(())
    }

    /// Dense real-symmetric matrix of `H` restricted to `configs` (any set
    /// closed under the flip-flop moves, typically one magnetization sector).
    pub fn sector_matrix(&self, configs: &[usize]) -> DMatrix<f64> {
        let n = configs.len();
        let mut position = vec![usize::MAX; self.dim()];
        for (p, &c) in configs.iter().enumerate() {
            position[c] = p;
        }
        let mut h = DMatrix::<f64>::zeros(n, n);
        for (col, &bits) in configs.iter().enumerate() {
            h[(col, col)] = self.diagonal_energy(bits);
            for c in &self.couplings {
                if (bits >> c.i & 1) != (bits >> c.j & 1) && c.b != 0.0 {
                    let row = position[bits ^ (1 << c.i | 1 << c.j)];
                    debug_assert!(row != usize::MAX, "config set not closed under H");
                    h[(row, col)] += c.b / 2.0;
                }
            }
        }
        h
    }

    /// Full dense matrix of `H` in the product basis.
    pub fn dense_matrix(&self) -> Result<DMatrix<f64>> {
        if self.m_sites > DENSE_MAX_SITES {
            return Err(Error::Capability(format!(
                "dense Hamiltonian limited to M <= {DENSE_MAX_SITES}, got {}",
                self.m_sites
            )));
        }
        let all: Vec<usize> = (0..self.dim()).collect();
        Ok(self.sector_matrix(&all))
    }

    /// Serializes to the edge-list format read by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("M {}\n", self.m_sites);
        for c in &self.couplings {
            let _ = writeln!(out, "{} {} {:?} {:?}", c.i, c.j, c.a, c.b);
        }
        out
    }
}

/// `H * psi`. The result is not normalized and is returned as raw amplitudes.
pub fn apply_hamiltonian(net: &CouplingNetwork, psi: &StateVector) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    net.apply_into(psi.amplitudes(), &mut out)?;
    Ok(out)
}

/// Open nearest-neighbour chain.
pub fn build_chain(m_sites: usize, b: f64, kind: AnisotropyKind) -> Result<CouplingNetwork> {
    if m_sites < 1 {
        return Err(Error::Config("chain needs M >= 1".into()));
    }
    let (a, b) = kind.coefficients(b);
    let couplings = (0..m_sites.saturating_sub(1))
        .map(|k| Coupling::new(k, k + 1, a, b))
        .collect::<Result<Vec<_>>>()?;
    CouplingNetwork::new(m_sites, couplings, Topology::Chain)
}

/// Two open XY legs `0..M/2` and `M/2..M` joined by rungs `(k, k + M/2)`.
pub fn build_ladder(m_sites: usize, b_x: f64, b_y: f64) -> Result<CouplingNetwork> {
    if !m_sites.is_multiple_of(2) || m_sites < 4 {
        return Err(Error::Config(format!(
            "ladder needs an even M >= 4, got {m_sites}"
        )));
    }
    let half = m_sites / 2;
    let mut couplings = Vec::with_capacity(3 * half - 2);
    for leg in [0, half] {
        for k in 0..half - 1 {
            couplings.push(Coupling::new(leg + k, leg + k + 1, 0.0, b_x)?);
        }
    }
    for k in 0..half {
        couplings.push(Coupling::new(k, k + half, 0.0, b_y)?);
    }
    CouplingNetwork::new(m_sites, couplings, Topology::Ladder)
}

/// Fully connected dipolar cluster with `b_ij ~ Normal(0, sigma^2)` and
/// `a_ij = -2 b_ij`, drawn in `(i, j)` order from the network substream.
pub fn build_star(m_sites: usize, sigma: f64, seed: u64) -> Result<CouplingNetwork> {
    if m_sites < 2 {
        return Err(Error::Config(format!("star needs M >= 2, got {m_sites}")));
    }
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::Config(format!("star needs sigma > 0, got {sigma}")));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = SeedStream::network(seed).rng();
    let mut couplings = Vec::with_capacity(m_sites * (m_sites - 1) / 2);
    for i in 0..m_sites {
        for j in i + 1..m_sites {
            let (a, b) = AnisotropyKind::Dipolar.coefficients(normal.sample(&mut rng));
            couplings.push(Coupling::new(i, j, a, b)?);
        }
    }
    CouplingNetwork::new(m_sites, couplings, Topology::Star)
}

/// Draws consumed by [`build_star`] for `(m_sites, seed)`.
pub fn star_draw_record(m_sites: usize, seed: u64) -> DrawRecord {
    SeedStream::network(seed).record((m_sites * m_sites.saturating_sub(1) / 2) as u64)
}

/// `(9/4)(M - 1) sigma^2`, the local second moment of a dipolar star.
pub fn local_second_moment(m_sites: usize, sigma: f64) -> f64 {
    2.25 * m_sites.saturating_sub(1) as f64 * sigma * sigma
}

/// Parses an edge list: a header `M <int>`, then lines `i j a b`. Blank lines
/// and `#` comments are skipped.
pub fn parse_edge_list(text: &str) -> Result<CouplingNetwork> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `M <int>` header".into(),
    })?;
    let m_sites = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["M", m] => m.parse::<usize>().map_err(|e| Error::Parse {
            line: header_line,
            message: format!("bad site count: {e}"),
        })?,
        _ => {
            return Err(Error::Parse {
                line: header_line,
                message: format!("expected `M <int>`, found `{header}`"),
            })
        }
    };

    let mut couplings: Vec<Coupling> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, text) in lines {
        let parse_err = |message: String| Error::Parse { line, message };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(format!("expected `i j a b`, found `{text}`")));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(format!("bad index: {e}")))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|e| parse_err(format!("bad index: {e}")))?;
        let a: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(format!("bad a: {e}")))?;
        let b: f64 = fields[3]
            .parse()
            .map_err(|e| parse_err(format!("bad b: {e}")))?;
        if i >= m_sites || j >= m_sites {
            return Err(parse_err(format!(
                "site index out of range for M = {m_sites}"
            )));
        }
        if i == j {
            return Err(parse_err(format!("self-coupling ({i}, {j})")));
        }
        let (i, j) = (i.min(j), i.max(j));
        if !seen.insert((i, j)) {
            return Err(parse_err(format!("duplicate coupling ({i}, {j})")));
        }
        couplings.push(Coupling::new(i, j, a, b).map_err(|e| parse_err(e.to_string()))?);
    }
    CouplingNetwork::new(m_sites, couplings, Topology::Custom)
}

pub fn load_edge_list(path: &Path) -> Result<CouplingNetwork> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text)
}
