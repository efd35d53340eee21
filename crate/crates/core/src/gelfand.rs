//! Submodule decomposition of `L(X)` and spherical functions.
//!
//! For the Insect chain `L(X) = ⊕_S W_S` over all antichains `S`, with
//! `dim W_S = ∏_{i∈A(S)} m_i · ∏_{i∈S} (m_i − 1)`. Fixing a base point
//! `x₀ ∈ X`, the spherical function of `W_S` is
//!
//! ```text
//! φ_S = (⊗_{i∈A(S)} φ_i) ⊗ (⊗_{i∈S} ψ_i) ⊗ (⊗_{i∉A[S]} ϱ_i)
//! ```
//!
//! with `φ_i = δ_{x₀ᵢ}`, `ψ_i = 1` at `x₀ᵢ` and `−1/(m_i − 1)` elsewhere, and
//! `ϱ_i ≡ 1`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::insect::InsectChain;
use crate::kron::Shape;
use crate::markov::Chain;
use crate::poset::{Antichain, Poset};

/// `(S, dim W_S)` for every antichain, in enumeration order. Dimensions are
/// zero when some `i ∈ S` has `m_i = 1`.
pub fn module_decomposition(poset: &Poset, sizes: &[usize]) -> Result<Vec<(Antichain, usize)>> {
    if sizes.len() != poset.len() {
        return Err(Error::DimensionMismatch {
            expected: poset.len(),
            got: sizes.len(),
        });
    }
    Ok(poset
        .antichains()
        .into_iter()
        .map(|s| {
            let above: usize = poset
                .ancestral_set(s.members())
                .iter()
                .map(|i| sizes[i])
                .product();
            let own: usize = s.iter().map(|i| sizes[i].saturating_sub(1)).product();
            (s, above * own)
        })
        .collect())
}

/// A spherical function `φ_S` with base point `x₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalFunction {
    pub antichain: Antichain,
    pub base_point: Vec<usize>,
    pub values: DVector<f64>,
}

impl SphericalFunction {
    pub fn value_at(&self, shape: &Shape, x: &[usize]) -> Result<f64> {
        Ok(self.values[shape.checked_linearize(x)?])
    }
}

/// Builds `φ_S` on `X = ∏ X_i`.
pub fn spherical(
    poset: &Poset,
    sizes: &[usize],
    s: Antichain,
    base_point: &[usize],
) -> Result<SphericalFunction> {
    if !poset.is_antichain(s.members()) || s.iter().any(|i| i >= poset.len()) {
        return Err(Error::InvalidSpec(format!("{s} is not an antichain")));
    }
    let shape = Shape::capped(sizes.to_vec())?;
    shape.checked_linearize(base_point)?;
    if let Some(i) = s.iter().find(|&i| sizes[i] < 2) {
        return Err(Error::InvalidSpec(format!("W_S is trivial: m_{} = 1", i + 1)));
    }
    let above = poset.ancestral_set(s.members());
    let values = DVector::from_iterator(
        shape.total(),
        shape.states().map(|x| {
            (0..x.len())
                .map(|i| {
                    let hit = x[i] == base_point[i];
                    if above.contains(i) {
                        if hit {
                            1.0
                        } else {
                            0.0
                        }
                    } else if s.contains(i) {
                        if hit {
                            1.0
                        } else {
                            -1.0 / (sizes[i] - 1) as f64
                        }
                    } else {
                        1.0
                    }
                })
                .product()
        }),
    );
    Ok(SphericalFunction {
        antichain: s,
        base_point: base_point.to_vec(),
        values,
    })
}

/// Residuals of one spherical function against an assembled chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalCheck {
    pub antichain: Antichain,
    pub eigenvalue: f64,
    /// `max |𝒫φ − λφ|`.
    pub eigen_residual: f64,
    /// `|φ(x₀) − 1|`.
    pub base_error: f64,
    /// `max |φ − Π_{W_S} φ|`.
    pub module_residual: f64,
}

impl SphericalCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.eigen_residual <= tol && self.base_error <= tol && self.module_residual <= tol
    }
}

/// `max |𝒫φ − λφ|` and `|φ(x₀) − 1|`.
pub fn eigen_residuals(
    phi: &SphericalFunction,
    chain: &Chain,
    shape: &Shape,
    eigenvalue: f64,
) -> Result<(f64, f64)> {
    let applied = chain.apply(&phi.values)?;
    let residual = (applied - &phi.values * eigenvalue).amax();
    let base = (phi.values[shape.checked_linearize(&phi.base_point)?] - 1.0).abs();
    Ok((residual, base))
}

/// Checks `φ_S` against the Insect chain: eigen-equation with the exact
/// `λ_S`, normalization at `x₀` and membership in `W_S`.
pub fn verify_spherical(phi: &SphericalFunction, insect: &InsectChain) -> Result<SphericalCheck> {
    let spec = insect.to_crested()?;
    let chain = spec.assemble()?;
    let eigenvalue = insect
        .eigenstructure()
        .into_iter()
        .find(|e| e.antichain == phi.antichain)
        .map(|e| e.eigenvalue)
        .ok_or_else(|| Error::InvalidSpec(format!("no module for {}", phi.antichain)))?;
    let (eigen_residual, base_error) = eigen_residuals(phi, &chain, insect.shape(), eigenvalue)?;
    let block = spec
        .eigenblocks()
        .into_iter()
        .find(|b| b.antichain == phi.antichain)
        .expect("uniform components have one block per antichain");
    let module_residual = projection_residual(&spec.block_basis(&block), &phi.values);
    Ok(SphericalCheck {
        antichain: phi.antichain,
        eigenvalue,
        eigen_residual,
        base_error,
        module_residual,
    })
}

fn projection_residual(basis: &DMatrix<f64>, f: &DVector<f64>) -> f64 {
    let gram = basis.transpose() * basis;
    let coeffs = gram
        .cholesky()
        .map(|c| c.solve(&(basis.transpose() * f)))
        .unwrap_or_else(|| DVector::zeros(basis.ncols()));
    (f - basis * coeffs).amax()
}
