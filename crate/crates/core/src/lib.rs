//! Symmetry-resolved simulation of all-to-all interacting 3-level atoms.
//!
//! The Hilbert space of `L` sites, each hosting `n` bosons in 3 modes,
//! fragments into dynamical sectors labeled by Young diagrams (site
//! permutations), SU(3)/SU(d) irreps, and the total magnetization. This
//! crate enumerates those sectors, builds the Hamiltonian block for each
//! one, classifies the resulting spectra as chaotic or regular, and
//! integrates the SU(3) coherent-state classical limit to measure
//! trajectory divergence and Lyapunov exponents.
//!
//! Module map:
//! - [`young`]: partition / Young-diagram combinatorics and Schur-Weyl
//!   dimension bookkeeping.
//! - [`su3`]: explicit SU(3) irrep bases `D(p,q)` with generator matrix
//!   elements, plus an independent brute-force construction.
//! - [`sectors`]: enumeration of Fock-table, symmetric, and antisymmetric
//!   sector bases; fragmentation census.
//! - [`hamiltonian`]: sector Hamiltonian assembly along all basis
//!   pathways; effective SU(3) representation projection.
//! - [`spectral`]: dense diagonalization, spectral unfolding,
//!   level-spacing statistics, r-ratios.
//! - [`classical`]: coherent-state initialization, classical equations of
//!   motion, conservation monitors, ensemble divergence, Lyapunov fits.

#![allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra
#![allow(clippy::too_many_arguments)] // operation signatures follow their contracts

pub mod classical;
pub mod error;
pub mod hamiltonian;
pub mod sectors;
pub mod spectral;
pub mod su3;
pub mod young;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
