//! Finite Markov chains, reversibility and the dense spectral oracle.
//!
//! A chain `P` is reversible with respect to `π` when
//! `π(x) p(x,y) = π(y) p(y,x)`. Then `D^{1/2} P D^{-1/2}` is symmetric
//! (`D = diag π`), so `P` diagonalizes over the reals as `PU = UΔ` with
//! `UᵀDU = I`, and
//!
//! ```text
//! p⁽ᵏ⁾(x,y) = π(y) Σ_z u(x,z) λ_z^k u(y,z).
//! ```
//!
//! [`spectral_oracle`] produces that decomposition with a standard dense
//! symmetric eigen-solver and is what every analytic spectrum in this crate
//! is checked against.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::{EXACT_TOL, PIPELINE_TOL, SOLVE_TOL};

/// A row-stochastic transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    p: DMatrix<f64>,
}

impl Chain {
    /// Validates squareness, non-negativity and unit row sums (within
    /// `1e-12`).
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::DimensionMismatch {
                expected: p.nrows(),
                got: p.ncols(),
            });
        }
        for (r, row) in p.row_iter().enumerate() {
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                return Err(Error::NotStochastic {
                    row: r,
                    reason: format!("entry {v} is negative or not finite"),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > EXACT_TOL {
                return Err(Error::NotStochastic {
                    row: r,
                    reason: format!("row sums to {sum}"),
                });
            }
        }
        Ok(Chain { p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(m, m, |r, c| rows[r][c]))
    }

    pub fn identity(m: usize) -> Self {
        Chain {
            p: DMatrix::identity(m, m),
        }
    }

    /// The averaging operator `J`, every entry `1/m`.
    pub fn uniform(m: usize) -> Self {
        Chain {
            p: DMatrix::from_element(m, m, 1.0 / m as f64),
        }
    }

    pub fn len(&self) -> usize {
        self.p.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.p.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.p
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.p[(x, y)]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.p - self.p.transpose()).amax() <= tol
    }

    /// `(Pf)(x) = Σ_y p(x,y) f(y)`.
    pub fn apply(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(&self.p * f)
    }

    /// `P^k` by repeated multiplication.
    pub fn power(&self, k: u32) -> DMatrix<f64> {
        let mut acc = DMatrix::identity(self.len(), self.len());
        for _ in 0..k {
            acc = &acc * &self.p;
        }
        acc
    }

    /// Whether every state reaches every other along positive entries.
    pub fn is_irreducible(&self) -> bool {
        let m = self.len();
        if m == 0 {
            return true;
        }
        let reach = |forward: bool| {
            let mut seen = vec![false; m];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(x) = queue.pop_front() {
                for y in 0..m {
                    let w = if forward { self.p[(x, y)] } else { self.p[(y, x)] };
                    if w > 0.0 && !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// A strictly positive probability vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    pi: DVector<f64>,
}

impl Measure {
    pub fn new(pi: DVector<f64>) -> Result<Self> {
        if let Some((i, v)) = pi.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::InvalidMeasure(format!("entry {i} is {v}")));
        }
        let sum = pi.sum();
        if (sum - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidMeasure(format!("sums to {sum}")));
        }
        Ok(Measure { pi })
    }

    pub fn from_slice(pi: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(pi))
    }

    pub fn uniform(m: usize) -> Self {
        Measure {
            pi: DVector::from_element(m, 1.0 / m as f64),
        }
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn get(&self, x: usize) -> f64 {
        self.pi[x]
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let u = 1.0 / self.len() as f64;
        self.pi.iter().all(|v| (v - u).abs() <= tol)
    }
}

/// Outcome of a detailed-balance scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetailedBalance {
    pub max_violation: f64,
    /// Pair attaining the maximum, when it is nonzero.
    pub worst_pair: Option<(usize, usize)>,
}

impl DetailedBalance {
    pub fn holds(&self) -> bool {
        self.holds_within(SOLVE_TOL)
    }

    pub fn holds_within(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Scans `|π(x)p(x,y) − π(y)p(y,x)|` over all pairs.
pub fn check_detailed_balance(chain: &Chain, measure: &Measure) -> Result<DetailedBalance> {
    if chain.len() != measure.len() {
        return Err(Error::DimensionMismatch {
            expected: chain.len(),
            got: measure.len(),
        });
    }
    let mut out = DetailedBalance {
        max_violation: 0.0,
        worst_pair: None,
    };
    let m = chain.len();
    for x in 0..m {
        for y in (x + 1)..m {
            let gap = (measure.get(x) * chain.entry(x, y) - measure.get(y) * chain.entry(y, x)).abs();
            if gap > out.max_violation {
                out.max_violation = gap;
                out.worst_pair = Some((x, y));
            }
        }
    }
    Ok(out)
}

/// The unique stationary law of an irreducible chain.
pub fn stationary(chain: &Chain) -> Result<Measure> {
    if !chain.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let m = chain.len();
    // (Pᵀ − I) π = 0 with the last equation replaced by Σπ = 1.
    let mut a = chain.matrix().transpose() - DMatrix::identity(m, m);
    let mut b = DVector::zeros(m);
    for c in 0..m {
        a[(m - 1, c)] = 1.0;
    }
    b[m - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or(Error::NotIrreducible)?;
    // Clean rounding noise before validation.
    let pi = pi.map(|v| v.max(f64::MIN_POSITIVE));
    let total = pi.sum();
    Measure::new(pi / total)
}

/// `PU = UΔ`, `UᵀDU = I` for a reversible chain.
///
/// Columns are ordered by decreasing eigenvalue. Column 0 is the all-ones
/// vector; the remaining columns have their first significant component
/// positive.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub u: DMatrix<f64>,
    pub pi: DVector<f64>,
    pub eigenvalues: DVector<f64>,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn d(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.pi)
    }

    pub fn delta(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.eigenvalues)
    }

    /// Max-abs residuals of `PU − UΔ` and `UᵀDU − I`.
    pub fn contract_residuals(&self, chain: &Chain) -> (f64, f64) {
        let m = self.len();
        let pu = chain.matrix() * &self.u - &self.u * self.delta();
        let orth = self.u.transpose() * self.d() * &self.u - DMatrix::<f64>::identity(m, m);
        (pu.amax(), orth.amax())
    }

    /// `p⁽ᵏ⁾(x,y) = π(y) Σ_z u(x,z) λ_z^k u(y,z)`.
    pub fn kstep(&self, x: usize, y: usize, k: u32) -> f64 {
        let sum: f64 = (0..self.len())
            .map(|z| self.u[(x, z)] * self.eigenvalues[z].powi(k as i32) * self.u[(y, z)])
            .sum();
        self.pi[y] * sum
    }
}

/// Dense eigendecomposition of a reversible chain via the symmetrization
/// `D^{1/2} P D^{-1/2}`.
pub fn spectral_oracle(chain: &Chain, measure: &Measure) -> Result<SpectralData> {
    let balance = check_detailed_balance(chain, measure)?;
    if !balance.holds() {
        let (x, y) = balance.worst_pair.unwrap_or_default();
        return Err(Error::NotReversible(format!(
            "detailed balance fails at ({x},{y}) by {:.3e}",
            balance.max_violation
        )));
    }
    let m = chain.len();
    let sqrt_pi = measure.vector().map(f64::sqrt);
    let b = DMatrix::from_fn(m, m, |x, y| sqrt_pi[x] * chain.entry(x, y) / sqrt_pi[y]);
    let b = (&b + b.transpose()) * 0.5;
    let eig = SymmetricEigen::new(b);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(m, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut u = DMatrix::from_fn(m, m, |x, z| eig.eigenvectors[(x, order[z])] / sqrt_pi[x]);

    let pi = measure.vector();
    let top = eigenvalues
        .iter()
        .take_while(|&&l| (l - 1.0).abs() <= PIPELINE_TOL)
        .count();
    if top > 0 {
        rebase_with_constants(&mut u, pi, top);
    }
    for z in top.max(1)..m {
        fix_sign(&mut u, z);
    }
    Ok(SpectralData {
        u,
        pi: pi.clone(),
        eigenvalues,
    })
}

/// Replaces the first `k` columns (an eigenspace containing the constants)
/// with a π-orthonormal basis whose first vector is `1`.
fn rebase_with_constants(u: &mut DMatrix<f64>, pi: &DVector<f64>, k: usize) {
    let m = u.nrows();
    let dot = |a: &DVector<f64>, b: &DVector<f64>| a.component_mul(b).dot(pi);
    let mut basis = vec![DVector::from_element(m, 1.0)];
    let mut candidates: Vec<DVector<f64>> = (0..k).map(|z| u.column(z).into_owned()).collect();
    while basis.len() < k && !candidates.is_empty() {
        // Take the candidate with the largest component outside the span.
        let residuals: Vec<DVector<f64>> = candidates
            .iter()
            .map(|c| {
                let mut r = c.clone();
                for b in &basis {
                    r -= b * dot(b, c);
                }
                r
            })
            .collect();
        let (best, norm) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, dot(r, r).sqrt()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        basis.push(&residuals[best] / norm);
        candidates.remove(best);
    }
    for (z, b) in basis.into_iter().enumerate() {
        u.set_column(z, &b);
    }
    for z in 1..k {
        fix_sign(u, z);
    }
}

fn fix_sign(u: &mut DMatrix<f64>, z: usize) {
    let col = u.column(z);
    let scale = col.amax();
    if let Some(first) = col.iter().find(|v| v.abs() > 1e-9 * scale.max(1e-300)) {
        if *first < 0.0 {
            u.column_mut(z).neg_mut();
        }
    }
}

/// Symmetric non-negative edge weights on `m` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    w: DMatrix<f64>,
}

impl WeightedGraph {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::DimensionMismatch {
                expected: w.nrows(),
                got: w.ncols(),
            });
        }
        if w.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidSpec("negative edge weight".into()));
        }
        if (&w - w.transpose()).amax() > 0.0 {
            return Err(Error::InvalidSpec("weights are not symmetric".into()));
        }
        Ok(WeightedGraph { w })
    }

    pub fn len(&self) -> usize {
        self.w.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.w.nrows() == 0
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.w[(x, y)]
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Edges `{x, y}` with `x ≤ y` and positive weight (loops included).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let m = self.len();
        (0..m)
            .flat_map(|x| (x..m).map(move |y| (x, y)))
            .filter(|&(x, y)| self.w[(x, y)] > 0.0)
            .collect()
    }

    /// `W(x) = Σ_z w(x,z)`.
    pub fn degree(&self, x: usize) -> f64 {
        self.w.row(x).sum()
    }
}

/// `w(x,y) = π(x) p(x,y)`; requires detailed balance.
pub fn to_weighted_graph(chain: &Chain, measure: &Measure) -> Result<WeightedGraph> {
    let balance = check_detailed_balance(chain, measure)?;
    if !balance.holds() {
        return Err(Error::NotReversible(format!(
            "detailed balance violated by {:.3e}",
            balance.max_violation
        )));
    }
    let m = chain.len();
    let w = DMatrix::from_fn(m, m, |x, y| measure.get(x) * chain.entry(x, y));
    WeightedGraph::new((&w + w.transpose()) * 0.5)
}

/// The random walk `p(x,y) = w(x,y)/W(x)` and its law `π(x) = W(x)/W`.
pub fn from_weighted_graph(graph: &WeightedGraph) -> Result<(Chain, Measure)> {
    let m = graph.len();
    let degrees: Vec<f64> = (0..m).map(|x| graph.degree(x)).collect();
    if let Some(x) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedVertex(x));
    }
    let total: f64 = degrees.iter().sum();
    let mut p = DMatrix::from_fn(m, m, |x, y| graph.weight(x, y) / degrees[x]);
    for mut row in p.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    let pi = DVector::from_iterator(m, degrees.iter().map(|d| d / total));
    Ok((Chain::new(p)?, Measure::new(pi)?))
}

/// Structural and spectral classification of a chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub irreducible: bool,
    /// The undirected support graph admits a 2-coloring (loops forbid it).
    pub bipartite: bool,
    /// Irreducible and aperiodic.
    pub ergodic: bool,
    /// Period of the chain when irreducible.
    pub period: Option<u64>,
    /// Multiplicity of eigenvalue 1, when the chain is irreducible and
    /// reversible for its stationary law.
    pub unit_multiplicity: Option<usize>,
    /// Whether −1 is an eigenvalue, same availability as above.
    pub has_minus_one: Option<bool>,
}

impl Classification {
    /// Spectral ergodicity: 1 simple and −1 absent.
    pub fn spectrally_ergodic(&self) -> Option<bool> {
        Some(self.unit_multiplicity? == 1 && !self.has_minus_one?)
    }
}

pub fn classify(chain: &Chain) -> Classification {
    let m = chain.len();
    let p = chain.matrix();
    let irreducible = chain.is_irreducible();

    let mut color: Vec<Option<bool>> = vec![None; m];
    let mut bipartite = true;
    for start in 0..m {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let cx = color[x].expect("colored");
            for y in 0..m {
                if p[(x, y)] > 0.0 || p[(y, x)] > 0.0 {
                    match color[y] {
                        None => {
                            color[y] = Some(!cx);
                            queue.push_back(y);
                        }
                        Some(cy) if cy == cx => bipartite = false,
                        _ => {}
                    }
                }
            }
        }
    }

    let period = irreducible.then(|| {
        let mut level = vec![u64::MAX; m];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for y in 0..m {
                if p[(x, y)] > 0.0 && level[y] == u64::MAX {
                    level[y] = level[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        let mut g = 0u64;
        for x in 0..m {
            for y in 0..m {
                if p[(x, y)] > 0.0 {
                    g = gcd(g, (level[x] + 1).abs_diff(level[y]));
                }
            }
        }
        g
    });

    let mut unit_multiplicity = None;
    let mut has_minus_one = None;
    if irreducible {
        if let Ok(pi) = stationary(chain) {
            if let Ok(spec) = spectral_oracle(chain, &pi) {
                unit_multiplicity = Some(
                    spec.eigenvalues
                        .iter()
                        .filter(|l| (*l - 1.0).abs() <= PIPELINE_TOL)
                        .count(),
                );
                has_minus_one = Some(spec.eigenvalues.iter().any(|l| (*l + 1.0).abs() <= PIPELINE_TOL));
            }
        }
    }

    Classification {
        irreducible,
        bipartite,
        ergodic: irreducible && period == Some(1),
        period,
        unit_multiplicity,
        has_minus_one,
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
