//! Exact symbolic engine for the antifield (Batalin-Vilkovisky) formalism.
//!
//! The crate is organised bottom-up:
//!
//! - [`algebra`]: canonical polynomials over graded generators with Koszul signs.
//! - [`jet`]: total and Euler-Lagrange derivatives, Noether identities, gauge commutators.
//! - [`bracket`]: the antibracket (pointwise and variational), the BV Laplacian and
//!   property harnesses for their axioms.
//! - [`master`]: staged extended actions and the classical master equation solver.
//! - [`linfty`]: multi-bracket extraction and the strong homotopy Jacobi identities.
//! - [`syntax`] and [`cli`]: the expression/model language and command driver.

pub mod algebra;
pub mod bracket;
pub mod cli;
pub mod jet;
pub mod linfty;
pub mod linsolve;
pub mod master;
pub mod model;
pub mod syntax;
