//! # crested-markov
//!
//! Generalized crested products of finite Markov chains indexed by a finite
//! poset, together with their exact spectral theory and the generalized
//! Insect chain built on top of them.
//!
//! Given a poset `(I, ≤)` with `I = {1..n}`, a reversible chain `P_i` on a
//! finite set `X_i` for every element, and a selection distribution `p⁰`,
//! the crested product is the chain on `X = X_1 × ⋯ × X_n`
//!
//! ```text
//! 𝒫 = Σ_i p⁰_i · (P_i at i) ⊗ (J_j for j < i) ⊗ (I_j elsewhere)
//! ```
//!
//! where `J_j` is the uniform averaging operator. Its eigenspaces are indexed
//! by antichains of the poset, which makes every spectral quantity computable
//! in closed form and checkable against a dense eigen-solve.
//!
//! ## Modules
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`poset`] | orders, ancestral/hereditary sets, antichains, ancestral poset, automorphisms |
//! | [`markov`] | generic reversible chains: detailed balance, stationary law, dense spectral oracle |
//! | [`kron`] | ordered tensor-product assembly over `X` |
//! | [`crested`] | the crested product, its eigenblocks, `U/D/Δ`, k-step probabilities |
//! | [`insect`] | glued tree `𝒯`, level coefficients, the Insect chain and its simulation |
//! | [`gelfand`] | submodule dimensions and spherical functions |
//!
//! ## Quick start
//!
//! ```
//! use crested_markov::{insect::InsectChain, poset::Poset};
//!
//! // 1 sits above 2 and 3.
//! let poset = Poset::from_covers(3, &[(2, 1), (3, 1)]).unwrap();
//! let insect = InsectChain::new(poset, vec![2, 2, 2]).unwrap();
//! let chain = insect.to_crested().unwrap().assemble().unwrap();
//! assert_eq!(chain.len(), 8);
//! ```

pub mod crested;
pub mod error;
pub mod gelfand;
pub mod insect;
pub mod kron;
pub mod markov;
pub mod poset;

pub use error::{Error, Result};

/// Identity tolerance for quantities that are exact by construction.
pub const EXACT_TOL: f64 = 1e-12;
/// Residual tolerance after a dense eigen-solve.
pub const SOLVE_TOL: f64 = 1e-10;
/// Tolerance for composed pipelines (analytic vs. oracle).
pub const PIPELINE_TOL: f64 = 1e-9;
