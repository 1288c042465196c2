//! Ensemble dynamics of spin-1/2 networks from single random-phase pure
//! states.
//!
//! The local polarization `P_{n'n}(t)` of an infinite-temperature ensemble
//! can be computed by evolving all `2^(M-1)` basis members with site `n` up
//! and averaging, or by evolving one superposition of all members with
//! random phases. The interference terms of the superposition average out as
//! the Hilbert space grows, so a single state reproduces the ensemble. This
//! crate computes both routes and the statistics that compare them.
//!
//! ```
//! use qpar::experiments::{ensemble_trace, pure_state_trace, EnsembleCaps, TimeGrid};
//! use qpar::hamiltonian::build_ladder;
//! use qpar::propagators::{PreparedPropagator, Propagator};
//! use qpar::rng::SeedStream;
//! use qpar::states::{InitialStateSpec, StateKind};
//!
//! let net = build_ladder(6, 1.0, 0.1)?;
//! let grid = TimeGrid::new(10.0, 51)?;
//! let ens = ensemble_trace(&net, 0, 0, &grid, Propagator::Exact, EnsembleCaps::default())?;
//! let prepared = PreparedPropagator::new(&net, Propagator::Exact)?;
//! let spec = InitialStateSpec::new(StateKind::Entangled, 0, SeedStream::phases(7, 0));
//! let pure = pure_state_trace(&prepared, &spec, 0, &grid)?;
//! assert!((ens.values[0] - 1.0).abs() < 1e-12);
//! assert!((pure.values[0] - 1.0).abs() < 1e-12);
//! # Ok::<(), qpar::Error>(())
//! ```

pub mod basis;
pub mod error;
pub mod experiments;
pub mod hamiltonian;
pub mod propagators;
pub mod rng;
pub mod state;
pub mod states;

pub use error::{Error, Result};
pub use state::{
    inner_product, polarization_from_w, total_magnetization, up_probability, StateVector,
};
