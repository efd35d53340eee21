//! Ordered tensor products over `X = X_1 × ⋯ × X_n`.
//!
//! States of `X` are linearized in mixed radix with coordinate 1 most
//! significant, so `(x_1, …, x_n) ↦ ((x_1·m_2 + x_2)·m_3 + x_3)…`. Every
//! tensor product in this crate places factor `i` at position `i`, whatever
//! order the factors are written in mathematically.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::markov::Measure;

/// Hard cap on `∏ m_i` for dense assembly.
pub const MAX_STATES: usize = 65536;

/// Coordinate sizes `m_1, …, m_n` with mixed-radix (de)linearization.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Shape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if let Some(i) = sizes.iter().position(|&m| m == 0) {
            return Err(Error::InvalidSpec(format!("coordinate {} has size 0", i + 1)));
        }
        let mut total: usize = 1;
        for &m in &sizes {
            total = total.checked_mul(m).ok_or(Error::SizeCap(usize::MAX))?;
        }
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Ok(Shape {
            sizes,
            strides,
            total,
        })
    }

    /// Like [`Shape::new`] but rejects products above [`MAX_STATES`].
    pub fn capped(sizes: Vec<usize>) -> Result<Self> {
        let shape = Self::new(sizes)?;
        if shape.total > MAX_STATES {
            return Err(Error::SizeCap(shape.total));
        }
        Ok(shape)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    pub fn rank(&self) -> usize {
        self.sizes.len()
    }

    /// `∏ m_i`.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn linearize(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn checked_linearize(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: x.len(),
            });
        }
        for (i, (&a, &m)) in x.iter().zip(&self.sizes).enumerate() {
            if a >= m {
                return Err(Error::Index {
                    index: a,
                    bound: format!("coordinate {} value in 0..{m}", i + 1),
                });
            }
        }
        Ok(self.linearize(x))
    }

    pub fn delinearize(&self, mut k: usize) -> Vec<usize> {
        let mut x = vec![0; self.rank()];
        for i in (0..self.rank()).rev() {
            x[i] = k % self.sizes[i];
            k /= self.sizes[i];
        }
        x
    }

    /// Coordinate `i` of the state with linear index `k`.
    pub fn coord(&self, k: usize, i: usize) -> usize {
        (k / self.strides[i]) % self.sizes[i]
    }

    /// All states in linear order.
    pub fn states(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.total).map(|k| self.delinearize(k))
    }
}

/// One tensor factor.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Identity,
    /// The averaging operator `J`, all entries `1/m`.
    Uniform,
    Custom(DMatrix<f64>),
}

impl Factor {
    pub fn materialize(&self, m: usize) -> Result<DMatrix<f64>> {
        match self {
            Factor::Identity => Ok(DMatrix::identity(m, m)),
            Factor::Uniform => Ok(DMatrix::from_element(m, m, 1.0 / m as f64)),
            Factor::Custom(a) => {
                if a.nrows() != m || a.ncols() != m {
                    Err(Error::DimensionMismatch {
                        expected: m,
                        got: if a.nrows() != m { a.nrows() } else { a.ncols() },
                    })
                } else {
                    Ok(a.clone())
                }
            }
        }
    }
}

/// One factor per coordinate, in coordinate order.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSpec {
    pub factors: Vec<Factor>,
}

impl FactorSpec {
    pub fn new(factors: Vec<Factor>) -> Self {
        FactorSpec { factors }
    }
}

/// Kronecker product of the factors, factor `i` at coordinate `i`.
///
/// Entry `[x, y]` equals `∏_i factor_i[x_i, y_i]`.
pub fn assemble_term(shape: &Shape, spec: &FactorSpec) -> Result<DMatrix<f64>> {
    if spec.factors.len() != shape.rank() {
        return Err(Error::DimensionMismatch {
            expected: shape.rank(),
            got: spec.factors.len(),
        });
    }
    if shape.total() > MAX_STATES {
        return Err(Error::SizeCap(shape.total()));
    }
    let mats = spec
        .factors
        .iter()
        .zip(shape.sizes())
        .map(|(f, &m)| f.materialize(m))
        .collect::<Result<Vec<_>>>()?;
    Ok(kron_all(&mats))
}

/// Left-to-right Kronecker product of rectangular matrices.
pub fn kron_all(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    mats.iter()
        .fold(DMatrix::from_element(1, 1, 1.0), |acc, m| acc.kronecker(m))
}

/// The special matrices used to write `U` and `Δ` of a crested product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialKind {
    /// First column all ones, everything else zero.
    A,
    /// `diag(1/√σ(x))`.
    SigmaNorm,
    /// `diag(1, 0, …, 0)`.
    JDiag,
}

pub fn special_factor(kind: SpecialKind, size: usize, sigma: Option<&Measure>) -> Result<DMatrix<f64>> {
    match kind {
        SpecialKind::A => Ok(DMatrix::from_fn(
            size,
            size,
            |_, c| if c == 0 { 1.0 } else { 0.0 },
        )),
        SpecialKind::JDiag => Ok(DMatrix::from_fn(size, size, |r, c| {
            if r == 0 && c == 0 {
                1.0
            } else {
                0.0
            }
        })),
        SpecialKind::SigmaNorm => {
            let sigma = sigma.ok_or_else(|| Error::InvalidMeasure("σ is required".into()))?;
            if sigma.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: sigma.len(),
                });
            }
            if sigma.vector().iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidMeasure("σ must be strictly positive".into()));
            }
            Ok(DMatrix::from_diagonal(&sigma.vector().map(|v| 1.0 / v.sqrt())))
        }
    }
}
