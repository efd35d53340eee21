//! The generalized crested product and its spectral theory.
//!
//! For a poset `(I, ≤)`, reversible components `(P_i, σ_i)` and a selection
//! law `p⁰`, the crested product is
//!
//! ```text
//! 𝒫 = Σ_i p⁰_i · P_i ⊗ (⊗_{j∈H(i)} J_j) ⊗ (⊗_{j∉H[i]} I_j)
//! ```
//!
//! with factors positioned by coordinate. Picking `i` moves coordinate `i`
//! by `P_i`, re-randomizes every coordinate below `i` and freezes the rest.
//!
//! Write `L(X_i) = V⁰_i ⊕ ⋯ ⊕ V^{r_i}_i` for the eigenspaces of `P_i`
//! (`V⁰_i` the constants). For every antichain `S` and multi-index `j` with
//! `j_i ∈ 1..=r_i`,
//!
//! ```text
//! W_{S,j} = (⊗_{i∈S} V^{j_i}_i) ⊗ (⊗_{i∈A(S)} L(X_i)) ⊗ (⊗_{i∉A[S]} V⁰_i)
//! λ_{S,j} = Σ_{i∈S} p⁰_i λ^{(i)}_{j_i} + Σ_{i∉A[S]} p⁰_i
//! ```
//!
//! and `L(X)` is the direct sum of all `W_{S,j}`. The chain is reversible
//! exactly when every non-maximal component is symmetric, with
//! `π(x) = ∏_{i∈S̄} σ_i(x_i) / ∏_{i∉S̄} m_i`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kron::{assemble_term, kron_all, special_factor, Factor, FactorSpec, Shape, SpecialKind};
use crate::markov::{
    check_detailed_balance, classify, spectral_oracle, stationary, Chain, Measure, SpectralData,
};
use crate::poset::{Antichain, ElementSet, Poset};
use crate::{EXACT_TOL, PIPELINE_TOL};

/// Eigenvalues closer than this are one eigenspace.
pub const EIGENSPACE_TOL: f64 = 1e-9;
/// Relabeling search for the first-crested condition is exhaustive up to
/// this many elements.
pub const RELABEL_SEARCH_LIMIT: usize = 8;

/// One eigenspace of a component: a contiguous range of columns of `U_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenspace {
    pub eigenvalue: f64,
    pub columns: Range<usize>,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }
}

/// An irreducible reversible chain on one coordinate, with its spectral
/// data computed once.
#[derive(Clone, Debug)]
pub struct ComponentChain {
    chain: Chain,
    sigma: Measure,
    spectral: SpectralData,
    eigenspaces: Vec<Eigenspace>,
}

impl ComponentChain {
    pub fn new(chain: Chain, sigma: Measure) -> Result<Self> {
        if !chain.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let spectral = spectral_oracle(&chain, &sigma)?;
        let mut eigenspaces: Vec<Eigenspace> = Vec::new();
        for (z, &l) in spectral.eigenvalues.iter().enumerate() {
            match eigenspaces.last_mut() {
                Some(last) if (last.eigenvalue - l).abs() <= EIGENSPACE_TOL => last.columns.end = z + 1,
                _ => eigenspaces.push(Eigenspace {
                    eigenvalue: l,
                    columns: z..z + 1,
                }),
            }
        }
        if eigenspaces[0].dim() != 1 {
            return Err(Error::NotIrreducible);
        }
        eigenspaces[0].eigenvalue = 1.0;
        Ok(ComponentChain {
            chain,
            sigma,
            spectral,
            eigenspaces,
        })
    }

    /// Uses the stationary law of an irreducible chain as `σ`.
    pub fn with_stationary(chain: Chain) -> Result<Self> {
        let sigma = stationary(&chain)?;
        Self::new(chain, sigma)
    }

    /// `J_m` with uniform `σ`.
    pub fn uniform(m: usize) -> Self {
        Self::new(Chain::uniform(m), Measure::uniform(m)).expect("J is irreducible and symmetric")
    }

    pub fn size(&self) -> usize {
        self.chain.len()
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn sigma(&self) -> &Measure {
        &self.sigma
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    /// `V⁰, V¹, …, V^r` in decreasing eigenvalue order.
    pub fn eigenspaces(&self) -> &[Eigenspace] {
        &self.eigenspaces
    }

    /// Number of non-trivial eigenspaces `r_i`.
    pub fn r(&self) -> usize {
        self.eigenspaces.len() - 1
    }

    pub fn is_symmetric(&self) -> bool {
        self.chain.is_symmetric(EXACT_TOL)
    }

    pub fn is_ergodic(&self) -> bool {
        self.spectral
            .eigenvalues
            .iter()
            .all(|l| (l + 1.0).abs() > PIPELINE_TOL)
    }
}

/// One eigenspace `W_{S,j}` of the crested product.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBlock {
    pub antichain: Antichain,
    /// `j_i` for each `i ∈ S`, in increasing `i`.
    pub multi_index: Vec<usize>,
    pub eigenvalue: f64,
    pub dimension: usize,
}

/// Outcome of the reversibility criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Reversibility {
    /// Non-maximal elements whose component is not symmetric.
    pub violating: Vec<usize>,
    pub pi: Option<Measure>,
}

impl Reversibility {
    pub fn reversible(&self) -> bool {
        self.violating.is_empty()
    }
}

/// A labeling under which the crested product is a first crested product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstCrestedPartition {
    /// `labeling[i]` is the new 0-based position of element `i`.
    pub labeling: Vec<usize>,
    /// `C`, in new positions.
    pub crossed: ElementSet,
    /// `N = {i : H(i) ≠ ∅}`, in new positions.
    pub nested: ElementSet,
}

/// Component and assembled ergodicity.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicityReport {
    pub components_ergodic: Vec<bool>,
    pub unit_multiplicity: Option<usize>,
    pub has_minus_one: Option<bool>,
    pub assembled_ergodic: bool,
}

impl ErgodicityReport {
    pub fn all_components_ergodic(&self) -> bool {
        self.components_ergodic.iter().all(|&e| e)
    }

    /// Components ergodic but the product is not.
    pub fn mismatch(&self) -> bool {
        self.all_components_ergodic() && !self.assembled_ergodic
    }
}

/// Poset, components and selection weights.
#[derive(Clone, Debug)]
pub struct CrestedSpec {
    poset: Poset,
    shape: Shape,
    components: Vec<ComponentChain>,
    weights: Vec<f64>,
}

impl CrestedSpec {
    pub fn new(poset: Poset, components: Vec<ComponentChain>, weights: Vec<f64>) -> Result<Self> {
        let n = poset.len();
        if components.len() != n {
            return Err(Error::InvalidSpec(format!(
                "{} components for a poset on {n} elements",
                components.len()
            )));
        }
        if weights.len() != n {
            return Err(Error::InvalidSpec(format!(
                "{} weights for {n} elements",
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "weight p0_{} must be positive",
                i + 1
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidSpec(format!("weights sum to {total}")));
        }
        let shape = Shape::capped(components.iter().map(ComponentChain::size).collect())?;
        Ok(CrestedSpec {
            poset,
            shape,
            components,
            weights,
        })
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn components(&self) -> &[ComponentChain] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The same spec with element `i` moved to position `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let poset = self.poset.relabel(perm)?;
        let n = perm.len();
        let mut components = vec![None; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            components[perm[i]] = Some(self.components[i].clone());
            weights[perm[i]] = self.weights[i];
        }
        Self::new(
            poset,
            components.into_iter().map(|c| c.expect("permutation")).collect(),
            weights,
        )
    }

    /// Factors of term `i`: `P_i` at `i`, `J` below `i`, identity elsewhere.
    pub fn term_factors(&self, i: usize) -> FactorSpec {
        let below = self.poset.hereditary(i).expect("index in range");
        FactorSpec::new(
            (0..self.poset.len())
                .map(|j| {
                    if j == i {
                        Factor::Custom(self.components[i].chain().matrix().clone())
                    } else if below.contains(j) {
                        Factor::Uniform
                    } else {
                        Factor::Identity
                    }
                })
                .collect(),
        )
    }

    /// The transition matrix of `𝒫` on `X`.
    pub fn assemble(&self) -> Result<Chain> {
        let mut total = DMatrix::zeros(self.shape.total(), self.shape.total());
        for (i, &w) in self.weights.iter().enumerate() {
            total += assemble_term(&self.shape, &self.term_factors(i))? * w;
        }
        Chain::new(total)
    }

    /// `π(x) = ∏_{i∈S̄} σ_i(x_i) / ∏_{i∉S̄} m_i`.
    pub fn product_measure(&self) -> Measure {
        let top = self.poset.maximal_elements().members();
        let pi = DVector::from_iterator(
            self.shape.total(),
            self.shape.states().map(|x| {
                x.iter()
                    .enumerate()
                    .map(|(i, &xi)| {
                        if top.contains(i) {
                            self.components[i].sigma().get(xi)
                        } else {
                            1.0 / self.shape.size(i) as f64
                        }
                    })
                    .product()
            }),
        );
        Measure::new(pi).expect("product of probability vectors")
    }

    /// Reversible iff `P_k` is symmetric for every non-maximal `k`.
    pub fn reversibility(&self) -> Reversibility {
        let top = self.poset.maximal_elements().members();
        let violating: Vec<usize> = (0..self.poset.len())
            .filter(|&k| !top.contains(k) && !self.components[k].is_symmetric())
            .collect();
        let pi = violating.is_empty().then(|| self.product_measure());
        Reversibility { violating, pi }
    }

    /// One block per antichain `S` and multi-index `j ∈ 𝒥_S`, antichains in
    /// enumeration order and multi-indices lexicographic.
    pub fn eigenblocks(&self) -> Vec<EigenBlock> {
        let mut out = Vec::new();
        for s in self.poset.antichains() {
            let members: Vec<usize> = s.iter().collect();
            let above = self.poset.ancestral_set(s.members());
            let rest = self
                .poset
                .elements()
                .difference(self.poset.ancestral_closed_set(s.members()));
            let constant_part: f64 = rest.iter().map(|i| self.weights[i]).sum();
            let free_dim: usize = above.iter().map(|i| self.shape.size(i)).product();
            let ranges: Vec<usize> = members.iter().map(|&i| self.components[i].r()).collect();
            for j in multi_indices(&ranges) {
                let mut eigenvalue = constant_part;
                let mut dimension = free_dim;
                for (&i, &ji) in members.iter().zip(&j) {
                    let space = &self.components[i].eigenspaces()[ji];
                    eigenvalue += self.weights[i] * space.eigenvalue;
                    dimension *= space.dim();
                }
                out.push(EigenBlock {
                    antichain: s,
                    multi_index: j,
                    eigenvalue,
                    dimension,
                });
            }
        }
        out
    }

    /// Columns spanning `W_{S,j}`.
    pub fn block_basis(&self, block: &EigenBlock) -> DMatrix<f64> {
        let s = block.antichain;
        let above = self.poset.ancestral_set(s.members());
        let mut j = block.multi_index.iter();
        let factors: Vec<DMatrix<f64>> = (0..self.poset.len())
            .map(|i| {
                let m = self.shape.size(i);
                if s.contains(i) {
                    let space = &self.components[i].eigenspaces()[*j.next().expect("multi-index")];
                    self.components[i]
                        .spectral()
                        .u
                        .columns(space.columns.start, space.dim())
                        .into_owned()
                } else if above.contains(i) {
                    DMatrix::identity(m, m)
                } else {
                    DMatrix::from_element(m, 1, 1.0)
                }
            })
            .collect();
        kron_all(&factors)
    }

    /// `(eigenvalue, dimension)` pairs expanded to a sorted multiset.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .eigenblocks()
            .into_iter()
            .flat_map(|b| std::iter::repeat_n(b.eigenvalue, b.dimension))
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    fn require_reversible(&self) -> Result<()> {
        let rev = self.reversibility();
        if rev.reversible() {
            Ok(())
        } else {
            Err(Error::NotReversible(format!(
                "components {:?} are not symmetric but lie below another element",
                rev.violating.iter().map(|k| k + 1).collect::<Vec<_>>()
            )))
        }
    }

    /// `U`, `D` and `Δ` built from the component decompositions.
    ///
    /// Column `z` of `U` is the eigenvector indexed by the state `z`; its
    /// antichain is the set of minimal elements of `{i : z_i ≠ 0}`.
    pub fn spectral_matrices(&self) -> Result<SpectralData> {
        self.require_reversible()?;
        let n = self.poset.len();
        let total = self.shape.total();
        let tables = self.factor_tables()?;

        let mut u = DMatrix::zeros(total, total);
        for s in self.poset.antichains() {
            let above = self.poset.ancestral_set(s.members());
            let factors: Vec<DMatrix<f64>> = (0..n)
                .map(|i| {
                    if s.contains(i) {
                        tables[i].u_minus_a.clone()
                    } else if above.contains(i) {
                        tables[i].sigma_norm.clone()
                    } else {
                        tables[i].a.clone()
                    }
                })
                .collect();
            u += kron_all(&factors);
        }

        let d = kron_all(
            &self
                .components
                .iter()
                .map(|c| DMatrix::from_diagonal(c.sigma().vector()))
                .collect::<Vec<_>>(),
        );

        let mut delta = DMatrix::zeros(total, total);
        for i in 0..n {
            let below = self.poset.hereditary(i)?;
            let factors: Vec<DMatrix<f64>> = (0..n)
                .map(|j| {
                    if j == i {
                        self.components[i].spectral().delta()
                    } else if below.contains(j) {
                        tables[j].j_diag.clone()
                    } else {
                        DMatrix::identity(self.shape.size(j), self.shape.size(j))
                    }
                })
                .collect();
            delta += kron_all(&factors) * self.weights[i];
        }

        Ok(SpectralData {
            u,
            pi: d.diagonal(),
            eigenvalues: delta.diagonal(),
        })
    }

    fn factor_tables(&self) -> Result<Vec<FactorTable>> {
        self.components
            .iter()
            .map(|c| {
                let m = c.size();
                let a = special_factor(SpecialKind::A, m, None)?;
                Ok(FactorTable {
                    u_minus_a: &c.spectral().u - &a,
                    sigma_norm: special_factor(SpecialKind::SigmaNorm, m, Some(c.sigma()))?,
                    j_diag: special_factor(SpecialKind::JDiag, m, None)?,
                    a,
                    eigenvalues: c.spectral().eigenvalues.clone(),
                    sigma: c.sigma().vector().clone(),
                })
            })
            .collect()
    }

    /// k-step transition probabilities from the closed form
    /// `p⁽ᵏ⁾(x,y) = π(y) Σ_z U(x,z) λ_z^k U(y,z)`, with `U(x,z)` expanded as
    /// the sum over antichains of products of `(u_i − a_i)`, `δ_σ` and `a_i`.
    pub fn kstep(&self) -> Result<KStep<'_>> {
        self.require_reversible()?;
        let tables = self.factor_tables()?;
        let antichains = self
            .poset
            .antichains()
            .into_iter()
            .map(|s| {
                let above = self.poset.ancestral_set(s.members());
                let rest = self
                    .poset
                    .elements()
                    .difference(self.poset.ancestral_closed_set(s.members()));
                (s.members(), above, rest)
            })
            .collect();
        let below = (0..self.poset.len())
            .map(|i| self.poset.hereditary(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(KStep {
            spec: self,
            tables,
            antichains,
            below,
        })
    }

    /// Component ergodicity and the spectrum of the assembled chain.
    pub fn ergodicity(&self) -> Result<ErgodicityReport> {
        let components_ergodic = self.components.iter().map(ComponentChain::is_ergodic).collect();
        let chain = self.assemble()?;
        let c = classify(&chain);
        let (unit_multiplicity, has_minus_one) = match self.reversibility().pi {
            Some(pi) => {
                let s = spectral_oracle(&chain, &pi)?;
                (
                    Some(
                        s.eigenvalues
                            .iter()
                            .filter(|l| (*l - 1.0).abs() <= PIPELINE_TOL)
                            .count(),
                    ),
                    Some(s.eigenvalues.iter().any(|l| (*l + 1.0).abs() <= PIPELINE_TOL)),
                )
            }
            None => (c.unit_multiplicity, c.has_minus_one),
        };
        let assembled_ergodic = match (unit_multiplicity, has_minus_one) {
            (Some(u), Some(m)) => u == 1 && !m,
            _ => c.ergodic,
        };
        Ok(ErgodicityReport {
            components_ergodic,
            unit_multiplicity,
            has_minus_one,
            assembled_ergodic,
        })
    }

    /// Exhaustive detailed-balance scan of the assembled chain against the
    /// product measure; returns the worst pair when it exceeds `tol`.
    pub fn detailed_balance_violation(&self, tol: f64) -> Result<Option<(usize, usize, f64)>> {
        let chain = self.assemble()?;
        let report = check_detailed_balance(&chain, &self.product_measure())?;
        Ok(if report.holds_within(tol) {
            None
        } else {
            report.worst_pair.map(|(x, y)| (x, y, report.max_violation))
        })
    }
}

#[derive(Clone, Debug)]
struct FactorTable {
    u_minus_a: DMatrix<f64>,
    a: DMatrix<f64>,
    sigma_norm: DMatrix<f64>,
    j_diag: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    sigma: DVector<f64>,
}

/// Evaluator for k-step probabilities of a reversible crested product.
#[derive(Debug)]
pub struct KStep<'a> {
    spec: &'a CrestedSpec,
    tables: Vec<FactorTable>,
    /// `(S, A(S), I ∖ A[S])` per antichain.
    antichains: Vec<(ElementSet, ElementSet, ElementSet)>,
    below: Vec<ElementSet>,
}

impl KStep<'_> {
    /// `λ_z = Σ_i p⁰_i λ^{(i)}_{z_i} ∏_{h∈H(i)} [z_h = 0]`.
    pub fn eigenvalue(&self, z: &[usize]) -> f64 {
        (0..z.len())
            .filter(|&i| self.below[i].iter().all(|h| z[h] == 0))
            .map(|i| self.spec.weights[i] * self.tables[i].eigenvalues[z[i]])
            .sum()
    }

    /// `U(x,z)` as the literal sum over antichains.
    pub fn u_entry(&self, x: &[usize], z: &[usize]) -> f64 {
        self.antichains
            .iter()
            .map(|&(s, above, rest)| {
                let mut v = 1.0;
                for i in 0..x.len() {
                    let t = &self.tables[i];
                    v *= if s.contains(i) {
                        t.u_minus_a[(x[i], z[i])]
                    } else if above.contains(i) {
                        if x[i] == z[i] {
                            1.0 / t.sigma[x[i]].sqrt()
                        } else {
                            0.0
                        }
                    } else {
                        debug_assert!(rest.contains(i));
                        t.a[(x[i], z[i])]
                    };
                    if v == 0.0 {
                        break;
                    }
                }
                v
            })
            .sum()
    }

    fn pi(&self, y: &[usize]) -> f64 {
        y.iter()
            .enumerate()
            .map(|(i, &yi)| self.tables[i].sigma[yi])
            .product()
    }

    fn check(&self, x: &[usize]) -> Result<()> {
        self.spec.shape.checked_linearize(x).map(|_| ())
    }

    /// `p⁽ᵏ⁾(x,y)` summed over every interior index `z ∈ X`.
    pub fn probability(&self, x: &[usize], y: &[usize], k: u32) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let sum: f64 = self
            .spec
            .shape
            .states()
            .map(|z| {
                let ux = self.u_entry(x, &z);
                if ux == 0.0 {
                    0.0
                } else {
                    ux * self.eigenvalue(&z).powi(k as i32) * self.u_entry(y, &z)
                }
            })
            .sum();
        Ok(self.pi(y) * sum)
    }

    /// `p⁽ᵏ⁾(0,y)`: only `z` with `z_i ≠ 0` exactly on an antichain `S`
    /// contribute, giving at most `1 + Σ_{S≠∅} ∏_{i∈S}(m_i − 1)` terms.
    pub fn probability_from_origin(&self, y: &[usize], k: u32) -> Result<f64> {
        self.check(y)?;
        let n = y.len();
        let mut sum = 0.0;
        for &(s, above, _) in &self.antichains {
            let members: Vec<usize> = s.iter().collect();
            let ranges: Vec<usize> = members.iter().map(|&i| self.spec.shape.size(i) - 1).collect();
            let scale: f64 = above
                .iter()
                .map(|j| 1.0 / self.tables[j].sigma[0].sqrt())
                .product();
            for digits in multi_indices(&ranges) {
                let mut z = vec![0; n];
                let mut coeff = scale;
                for (&i, &zi) in members.iter().zip(&digits) {
                    z[i] = zi;
                    coeff *= self.tables[i].u_minus_a[(0, zi)];
                }
                sum += coeff * self.eigenvalue(&z).powi(k as i32) * self.u_entry(y, &z);
            }
        }
        Ok(self.pi(y) * sum)
    }

    /// Number of `z` terms used by [`KStep::probability_from_origin`].
    pub fn origin_term_count(&self) -> usize {
        self.antichains
            .iter()
            .map(|&(s, _, _)| s.iter().map(|i| self.spec.shape.size(i) - 1).product::<usize>())
            .sum()
    }
}

/// All tuples `(j_1, …, j_k)` with `j_h ∈ 1..=ranges[h]`, lexicographic. An
/// empty `ranges` yields one empty tuple; a zero range yields none.
fn multi_indices(ranges: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &r in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (1..=r).map(move |j| {
                    let mut v = prefix.clone();
                    v.push(j);
                    v
                })
            })
            .collect();
    }
    out
}

/// Whether `H(i) = {j : j > i}` for every `i` with `H(i) ≠ ∅`, indices
/// taken as labels.
pub fn satisfies_first_crested_condition(poset: &Poset) -> bool {
    let n = poset.len();
    (0..n).all(|i| {
        let below = poset.hereditary(i).expect("index in range");
        below.is_empty() || below == ElementSet::full(n).difference(ElementSet::full(i + 1))
    })
}

/// Finds a labeling under which the crested product reduces to a first
/// crested product with `N = {i : H(i) ≠ ∅}`.
///
/// Up to [`RELABEL_SEARCH_LIMIT`] elements every labeling is tried in
/// lexicographic order and the first admissible one is returned; above it
/// only the identity labeling is tested.
pub fn first_crested_partition(poset: &Poset) -> Option<FirstCrestedPartition> {
    let n = poset.len();
    let admissible = |labeling: &[usize]| -> Option<FirstCrestedPartition> {
        let relabeled = poset.relabel(labeling).ok()?;
        satisfies_first_crested_condition(&relabeled).then(|| {
            let nested: ElementSet = (0..n)
                .filter(|&i| !relabeled.hereditary(i).expect("in range").is_empty())
                .collect();
            FirstCrestedPartition {
                labeling: labeling.to_vec(),
                crossed: relabeled.elements().difference(nested),
                nested,
            }
        })
    };
    let mut labeling: Vec<usize> = (0..n).collect();
    if n > RELABEL_SEARCH_LIMIT {
        return admissible(&labeling);
    }
    loop {
        if let Some(found) = admissible(&labeling) {
            return Some(found);
        }
        if !next_permutation(&mut labeling) {
            return None;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// The first crested product built directly from a partition:
/// `Σ_{i∈C} p_i I⊗⋯⊗P_i⊗⋯⊗I + Σ_{i∈N} p_i I⊗⋯⊗P_i⊗J_{i+1}⊗⋯⊗J_n`.
pub fn first_crested_product(
    components: &[ComponentChain],
    weights: &[f64],
    nested: ElementSet,
) -> Result<Chain> {
    let n = components.len();
    let sizes: Vec<usize> = components.iter().map(ComponentChain::size).collect();
    let shape = Shape::capped(sizes.clone())?;
    let mut total = DMatrix::zeros(shape.total(), shape.total());
    for i in 0..n {
        let factors: Vec<DMatrix<f64>> = (0..n)
            .map(|j| {
                if j == i {
                    components[i].chain().matrix().clone()
                } else if j > i && nested.contains(i) {
                    DMatrix::from_element(sizes[j], sizes[j], 1.0 / sizes[j] as f64)
                } else {
                    DMatrix::identity(sizes[j], sizes[j])
                }
            })
            .collect();
        total += kron_all(&factors) * weights[i];
    }
    Chain::new(total)
}
