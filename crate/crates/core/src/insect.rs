//! The generalized Insect chain.
//!
//! For every node `A` of the ancestral poset `I_𝒜` the relation
//! `x ∼_A y ⇔ x_i = y_i ∀ i ∈ A` partitions `X`. The tree `𝒯` has one level
//! per node, whose vertices are the `∼_A` classes, and joins a class to the
//! coarser class containing it along every cover `B ⊲ A`. Gluing the
//! refinement trees of all maximal chains of `I_𝒜` gives a single graph
//! whose leaf level (`A = I`) is `X`.
//!
//! An insect starts at a leaf, performs a simple random walk on `𝒯` and
//! stops the first time after step 0 that it stands on a leaf (possibly the
//! one it left). With `α` the probability of climbing from one level to an
//! upper cover before touching a leaf, and `p_i` the probability that an
//! excursion tops out at level `A_i`, the induced chain on `X` is the crested
//! product with `P_i = J_i` and `p⁰ = p`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::crested::{ComponentChain, CrestedSpec};
use crate::error::{Error, Result};
use crate::kron::Shape;
use crate::markov::Chain;
use crate::poset::{AncestralPoset, Antichain, ElementSet, Poset};

/// Name of the generator used by [`InsectChain::simulate`].
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// How the climbing probability `α` treats a step down to the leaf level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AlphaRule {
    /// A step down to a leaf ends the walk and contributes nothing. These are
    /// first-passage probabilities of the stopped walk.
    #[default]
    FirstPassage,
    /// A step down to a leaf counts as a return with probability
    /// `α_{I,i}`, the same way as a step to any other lower level.
    LeafReturn,
}

impl fmt::Display for AlphaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphaRule::FirstPassage => "first-passage",
            AlphaRule::LeafReturn => "leaf-return",
        })
    }
}

/// Classes of `∼_A` on `X`, each as a sorted list of linear state indices.
/// Classes are ordered by the values of the coordinates in `A`.
pub fn ancestral_classes(poset: &Poset, a: ElementSet, sizes: &[usize]) -> Result<Vec<Vec<usize>>> {
    if !poset.is_ancestral(a) {
        return Err(Error::NotAncestral(a.to_string()));
    }
    let shape = Shape::capped(sizes.to_vec())?;
    let coords: Vec<usize> = a.iter().collect();
    let count: usize = coords.iter().map(|&i| sizes[i]).product();
    let mut classes = vec![Vec::new(); count];
    for (k, x) in shape.states().enumerate() {
        classes[class_index(&coords, sizes, &x)].push(k);
    }
    Ok(classes)
}

fn class_index(coords: &[usize], sizes: &[usize], x: &[usize]) -> usize {
    coords.iter().fold(0, |acc, &i| acc * sizes[i] + x[i])
}

/// One level of `𝒯`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    /// Node of `I_𝒜`.
    pub node: usize,
    pub set: ElementSet,
    /// First global vertex id of this level.
    pub offset: usize,
    pub size: usize,
}

/// The glued tree `𝒯` as an undirected simple graph.
#[derive(Clone, Debug)]
pub struct TreeGraph {
    sizes: Vec<usize>,
    levels: Vec<Level>,
    level_of: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl TreeGraph {
    pub fn build(ancestral: &AncestralPoset, sizes: &[usize]) -> Result<Self> {
        let mut levels = Vec::with_capacity(ancestral.len());
        let mut offset = 0;
        for node in 0..ancestral.len() {
            let set = ancestral.set(node);
            let size = set.iter().map(|i| sizes[i]).product();
            levels.push(Level {
                node,
                set,
                offset,
                size,
            });
            offset += size;
        }
        let mut level_of = Vec::with_capacity(offset);
        for (l, level) in levels.iter().enumerate() {
            level_of.extend(std::iter::repeat_n(l, level.size));
        }
        let mut adjacency = vec![Vec::new(); offset];
        for (lower, upper) in ancestral.covers() {
            let fine = &levels[lower];
            let coarse = &levels[upper];
            let fine_coords: Vec<usize> = fine.set.iter().collect();
            let coarse_coords: Vec<usize> = coarse.set.iter().collect();
            let mut x = vec![0; sizes.len()];
            for v in 0..fine.size {
                let mut rem = v;
                for &i in fine_coords.iter().rev() {
                    x[i] = rem % sizes[i];
                    rem /= sizes[i];
                }
                let a = fine.offset + v;
                let b = coarse.offset + class_index(&coarse_coords, sizes, &x);
                if adjacency[a].contains(&b) {
                    return Err(Error::InvalidSpec(format!(
                        "multi-edge between vertices {a} and {b}"
                    )));
                }
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        Ok(TreeGraph {
            sizes: sizes.to_vec(),
            levels,
            level_of,
            adjacency,
        })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Level (equivalently node of `I_𝒜`) containing vertex `v`.
    pub fn level_of(&self, v: usize) -> usize {
        self.level_of[v]
    }

    /// Vertex of level `node` holding the class of `x`.
    pub fn vertex(&self, node: usize, x: &[usize]) -> usize {
        let level = &self.levels[node];
        let coords: Vec<usize> = level.set.iter().collect();
        level.offset + class_index(&coords, &self.sizes, x)
    }

    fn leaf_level(&self) -> &Level {
        self.levels.last().expect("I is always a level")
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_level().size
    }

    /// Vertex id of the leaf with linear state index `k`.
    pub fn leaf(&self, k: usize) -> usize {
        self.leaf_level().offset + k
    }

    /// Linear state index of `v` when it is a leaf.
    pub fn leaf_index(&self, v: usize) -> Option<usize> {
        let leaf = self.leaf_level();
        (v >= leaf.offset && v < leaf.offset + leaf.size).then(|| v - leaf.offset)
    }
}

/// Climbing probabilities and level weights, exact and rounded.
#[derive(Clone, Debug, PartialEq)]
pub struct InsectCoefficients {
    /// `α` per node, shared by every upper cover; `None` on maximal nodes.
    pub alpha_exact: Vec<Option<BigRational>>,
    /// `p_i` per element.
    pub p_exact: Vec<BigRational>,
    pub alpha: Vec<Option<f64>>,
    pub p: Vec<f64>,
}

impl InsectCoefficients {
    /// `Σ p_i` in exact arithmetic.
    pub fn weight_total(&self) -> BigRational {
        self.p_exact.iter().fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn sums_to_one(&self) -> bool {
        self.weight_total().is_one()
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().expect("finite rational")
}

fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Solves `α = a + b·α` at every node, bottom-up.
///
/// At the bottom `α_I = 1/|{A : I ⊲ A}|`. At a non-maximal node `A_i` with
/// degree `d = Σ_{k⊲i} ∏_{h∈A_k∖A_i} m_h + |{l : A_i ⊲ A_l}|`,
/// `a = 1/d` and `b = Σ_{k⊲i} ∏_{h∈A_k∖A_i} m_h · α_k / d`, where the
/// `k = I` term is dropped under [`AlphaRule::FirstPassage`].
pub fn solve_alphas(
    ancestral: &AncestralPoset,
    sizes: &[usize],
    rule: AlphaRule,
) -> Result<Vec<Option<BigRational>>> {
    let bottom = ancestral.bottom();
    let mut alpha: Vec<Option<BigRational>> = vec![None; ancestral.len()];
    for node in ancestral.topological_order() {
        let ups = ancestral.upper_covers(node).len();
        if ups == 0 {
            continue;
        }
        if node == bottom {
            alpha[node] = Some(ratio(1, ups));
            continue;
        }
        let set = ancestral.set(node);
        let children = |k: usize| -> usize {
            ancestral
                .set(k)
                .difference(set)
                .iter()
                .map(|h| sizes[h])
                .product()
        };
        let degree: usize = ancestral
            .lower_covers(node)
            .iter()
            .map(|&k| children(k))
            .sum::<usize>()
            + ups;
        let mut back = BigRational::zero();
        for &k in ancestral.lower_covers(node) {
            if k == bottom && rule == AlphaRule::FirstPassage {
                continue;
            }
            let ak = alpha[k].as_ref().expect("lower covers are solved first");
            back += ratio(children(k), degree) * ak;
        }
        let denom = BigRational::one() - back;
        if denom <= BigRational::zero() {
            return Err(Error::Degenerate(node));
        }
        alpha[node] = Some(ratio(1, degree) / denom);
    }
    Ok(alpha)
}

/// `p_i = Σ_{chains I ⊲ ⋯ ⊲ A_i} ∏ α · (1 − Σ_{A_i⊲A_l} α_{i,l})`, the last
/// factor omitted on maximal nodes. Sums over chains are accumulated as
/// a flow through `I_𝒜`.
pub fn level_weights(ancestral: &AncestralPoset, alpha: &[Option<BigRational>]) -> Vec<BigRational> {
    let bottom = ancestral.bottom();
    let mut reach = vec![BigRational::zero(); ancestral.len()];
    reach[bottom] = BigRational::one();
    for node in ancestral.topological_order() {
        if let Some(a) = &alpha[node] {
            let flow = &reach[node] * a;
            for &up in ancestral.upper_covers(node) {
                reach[up] += flow.clone();
            }
        }
    }
    (0..bottom)
        .map(|i| match &alpha[i] {
            None => reach[i].clone(),
            Some(a) => {
                let ups = ancestral.upper_covers(i).len();
                &reach[i] * (BigRational::one() - a * ratio(ups, 1))
            }
        })
        .collect()
}

/// One eigenspace `W_S` of the Insect chain.
#[derive(Clone, Debug, PartialEq)]
pub struct InsectEigenspace {
    pub antichain: Antichain,
    /// `λ_S = Σ_{i∉A[S]} p_i`.
    pub exact: BigRational,
    pub eigenvalue: f64,
    /// `∏_{i∈A(S)} m_i · ∏_{i∈S} (m_i − 1)`.
    pub dimension: usize,
}

/// Eigenvalue coincidences among antichains.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymmetryReport {
    pub automorphisms: usize,
    /// `(S, φ(S))` with `S ≠ φ(S)` for some automorphism `φ`.
    pub forced: Vec<(Antichain, Antichain)>,
    /// Forced pairs whose eigenvalues differ.
    pub violations: Vec<(Antichain, Antichain)>,
    /// Pairs with equal eigenvalue that no automorphism connects.
    pub accidental: Vec<(Antichain, Antichain)>,
}

/// The Insect chain on `(poset, sizes)`.
#[derive(Clone, Debug)]
pub struct InsectChain {
    poset: Poset,
    shape: Shape,
    ancestral: AncestralPoset,
    tree: TreeGraph,
    rule: AlphaRule,
    coefficients: InsectCoefficients,
}

impl InsectChain {
    pub fn new(poset: Poset, sizes: Vec<usize>) -> Result<Self> {
        Self::with_rule(poset, sizes, AlphaRule::default())
    }

    pub fn with_rule(poset: Poset, sizes: Vec<usize>, rule: AlphaRule) -> Result<Self> {
        if sizes.len() != poset.len() {
            return Err(Error::DimensionMismatch {
                expected: poset.len(),
                got: sizes.len(),
            });
        }
        if let Some(i) = sizes.iter().position(|&m| m == 0) {
            return Err(Error::InvalidSpec(format!("component {} has size 0", i + 1)));
        }
        let shape = Shape::capped(sizes.clone())?;
        let ancestral = poset.ancestral_poset();
        let tree = TreeGraph::build(&ancestral, &sizes)?;
        let alpha_exact = solve_alphas(&ancestral, &sizes, rule)?;
        let p_exact = level_weights(&ancestral, &alpha_exact);
        if let Some(i) = p_exact.iter().position(|p| *p <= BigRational::zero()) {
            return Err(Error::Degenerate(i));
        }
        let coefficients = InsectCoefficients {
            alpha: alpha_exact.iter().map(|a| a.as_ref().map(to_f64)).collect(),
            p: p_exact.iter().map(to_f64).collect(),
            alpha_exact,
            p_exact,
        };
        Ok(InsectChain {
            poset,
            shape,
            ancestral,
            tree,
            rule,
            coefficients,
        })
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn sizes(&self) -> &[usize] {
        self.shape.sizes()
    }

    pub fn ancestral(&self) -> &AncestralPoset {
        &self.ancestral
    }

    pub fn tree(&self) -> &TreeGraph {
        &self.tree
    }

    pub fn rule(&self) -> AlphaRule {
        self.rule
    }

    pub fn coefficients(&self) -> &InsectCoefficients {
        &self.coefficients
    }

    /// `α_{from,to}` for a cover `from ⊲ to` of `I_𝒜`.
    pub fn alpha(&self, from: usize, to: usize) -> Option<f64> {
        if self.ancestral.upper_covers(from).contains(&to) {
            self.coefficients.alpha[from]
        } else {
            None
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.coefficients.p
    }

    /// The crested product with uniform components and `p⁰ = p`.
    pub fn to_crested(&self) -> Result<CrestedSpec> {
        let components = self.sizes().iter().map(|&m| ComponentChain::uniform(m)).collect();
        CrestedSpec::new(self.poset.clone(), components, self.coefficients.p.clone())
    }

    /// `p(x,y) = Σ_{i : x ∼_{A_i} y} p_i / ∏_{h∉A_i} m_h`.
    pub fn direct_transition_matrix(&self) -> Result<Chain> {
        let n = self.shape.total();
        let sizes = self.sizes();
        let terms: Vec<(ElementSet, f64)> = (0..self.poset.len())
            .map(|i| {
                let a = self.ancestral.set(i);
                let free: usize = self
                    .poset
                    .elements()
                    .difference(a)
                    .iter()
                    .map(|h| sizes[h])
                    .product();
                (a, self.coefficients.p[i] / free as f64)
            })
            .collect();
        let states: Vec<Vec<usize>> = self.shape.states().collect();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (xi, x) in states.iter().enumerate() {
            for (yi, y) in states.iter().enumerate() {
                m[(xi, yi)] = terms
                    .iter()
                    .filter(|(a, _)| a.iter().all(|j| x[j] == y[j]))
                    .map(|(_, w)| w)
                    .sum();
            }
        }
        Chain::new(m)
    }

    /// One eigenspace per antichain `S` with `m_i ≥ 2` for all `i ∈ S`,
    /// in antichain enumeration order.
    pub fn eigenstructure(&self) -> Vec<InsectEigenspace> {
        let sizes = self.sizes();
        self.poset
            .antichains()
            .into_iter()
            .filter(|s| s.iter().all(|i| sizes[i] >= 2))
            .map(|s| {
                let exact = self.exact_eigenvalue(s);
                let above = self.poset.ancestral_set(s.members());
                let dimension = above.iter().map(|i| sizes[i]).product::<usize>()
                    * s.iter().map(|i| sizes[i] - 1).product::<usize>();
                InsectEigenspace {
                    antichain: s,
                    eigenvalue: to_f64(&exact),
                    exact,
                    dimension,
                }
            })
            .collect()
    }

    /// `λ_S = Σ_{i∉A[S]} p_i` in exact arithmetic.
    pub fn exact_eigenvalue(&self, s: Antichain) -> BigRational {
        self.poset
            .elements()
            .difference(self.poset.ancestral_closed_set(s.members()))
            .iter()
            .fold(BigRational::zero(), |acc, i| acc + &self.coefficients.p_exact[i])
    }

    /// Walks from leaf `start` until the next leaf; returns its state index.
    pub fn walk<R: Rng + ?Sized>(&self, start: usize, rng: &mut R) -> usize {
        let mut v = self.tree.leaf(start);
        loop {
            let nbrs = self.tree.neighbors(v);
            v = nbrs[rng.random_range(0..nbrs.len())];
            if let Some(k) = self.tree.leaf_index(v) {
                return k;
            }
        }
    }

    /// Walk `index` of a run seeded by `seed`: stream `index` of
    /// `ChaCha8(seed)`.
    pub fn walk_seeded(&self, start: usize, seed: u64, index: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.walk(start, &mut rng)
    }

    /// End-leaf counts of `trials` independent walks from `start`.
    pub fn simulate(&self, start: usize, trials: u64, seed: u64) -> Result<Vec<u64>> {
        let leaves = self.tree.leaf_count();
        if start >= leaves {
            return Err(Error::Index {
                index: start,
                bound: format!("< {leaves}"),
            });
        }
        Ok((0..trials)
            .into_par_iter()
            .fold(
                || vec![0u64; leaves],
                |mut acc, t| {
                    acc[self.walk_seeded(start, seed, t)] += 1;
                    acc
                },
            )
            .reduce(
                || vec![0u64; leaves],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            ))
    }

    /// Checks `λ_S = λ_{φ(S)}` for every automorphism `φ` and lists equal
    /// eigenvalues not explained by any automorphism.
    pub fn eigenvalue_symmetry_check(&self) -> Result<SymmetryReport> {
        let autos = self.poset.automorphisms()?;
        let antichains = self.poset.antichains();
        let exact: Vec<BigRational> = antichains.iter().map(|&s| self.exact_eigenvalue(s)).collect();
        let position = |s: ElementSet| {
            antichains
                .iter()
                .position(|a| a.members() == s)
                .expect("image of an antichain")
        };
        let mut connected = vec![vec![false; antichains.len()]; antichains.len()];
        let mut report = SymmetryReport {
            automorphisms: autos.len(),
            ..Default::default()
        };
        for phi in &autos {
            for (a, s) in antichains.iter().enumerate() {
                let b = position(s.members().map(phi));
                if connected[a][b] {
                    continue;
                }
                connected[a][b] = true;
                connected[b][a] = true;
                if a < b {
                    report.forced.push((*s, antichains[b]));
                    if exact[a] != exact[b] {
                        report.violations.push((*s, antichains[b]));
                    }
                }
            }
        }
        for a in 0..antichains.len() {
            for b in (a + 1)..antichains.len() {
                if exact[a] == exact[b] && !connected[a][b] {
                    report.accidental.push((antichains[a], antichains[b]));
                }
            }
        }
        report.forced.sort();
        report.violations.sort();
        Ok(report)
    }
}

/// Whether some automorphism maps `s` onto `t`.
pub fn connecting_automorphism(poset: &Poset, s: Antichain, t: Antichain) -> Result<Option<Vec<usize>>> {
    Ok(poset
        .automorphisms()?
        .into_iter()
        .find(|phi| s.members().map(phi) == t.members()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn diamond_classes() {
        let poset = Poset::diamond();
        let classes = ancestral_classes(&poset, ElementSet::from_labels(&[1, 3]), &[2, 2, 2]).unwrap();
        // 000,010 | 001,011 | 100,110 | 101,111
        assert_eq!(classes, vec![vec![0, 2], vec![1, 3], vec![4, 6], vec![5, 7]]);
        let full = ancestral_classes(&poset, poset.elements(), &[2, 2, 2]).unwrap();
        assert_eq!(full.len(), 8);
        assert!(full.iter().all(|c| c.len() == 1));
        let empty = ancestral_classes(&poset, ElementSet::EMPTY, &[2, 2, 2]).unwrap();
        assert_eq!(empty, vec![(0..8).collect::<Vec<_>>()]);
        assert!(matches!(
            ancestral_classes(&poset, ElementSet::from_labels(&[2]), &[2, 2, 2]),
            Err(Error::NotAncestral(_))
        ));
    }

    #[test]
    fn diamond_tree_shape() {
        let insect = InsectChain::new(Poset::diamond(), vec![2, 2, 2]).unwrap();
        let tree = insect.tree();
        let sizes: Vec<usize> = tree.levels().iter().map(|l| l.size).collect();
        // A_1 = ∅, A_2 = {1,3}, A_3 = {1,2}, I.
        assert_eq!(sizes, vec![1, 4, 4, 8]);
        for v in 0..tree.vertex_count() {
            let expected = match tree.level_of(v) {
                0 => 8,
                1 | 2 => 3,
                _ => 2,
            };
            assert_eq!(tree.degree(v), expected);
        }
        assert_eq!(tree.edge_count(), 24);
    }

    #[test]
    fn chain_tree_is_rooted_tree() {
        let insect = InsectChain::new(Poset::chain(3).unwrap(), vec![2, 3, 2]).unwrap();
        let tree = insect.tree();
        assert_eq!(tree.edge_count() + 1, tree.vertex_count());
        assert_eq!(insect.ancestral().maximal_chains().len(), 1);
    }

    #[test]
    fn diamond_alpha_both_rules() {
        let first = InsectChain::new(Poset::diamond(), vec![2, 2, 2]).unwrap();
        let c = first.coefficients();
        assert_eq!(c.alpha_exact[3], Some(q(1, 2)));
        assert_eq!(c.alpha_exact[1], Some(q(1, 3)));
        assert_eq!(c.alpha_exact[2], Some(q(1, 3)));
        assert_eq!(c.p_exact, vec![q(1, 3), q(1, 3), q(1, 3)]);

        let leaf = InsectChain::with_rule(Poset::diamond(), vec![2, 2, 2], AlphaRule::LeafReturn).unwrap();
        let c = leaf.coefficients();
        assert_eq!(c.alpha_exact[1], Some(q(1, 2)));
        assert_eq!(c.p_exact, vec![q(1, 2), q(1, 4), q(1, 4)]);
        assert_eq!(leaf.alpha(1, 0), Some(0.5));
        assert_eq!(leaf.alpha(0, 1), None);
    }

    #[test]
    fn two_level_chain_weights() {
        for (m1, m2) in [(2, 2), (3, 2), (2, 5)] {
            let insect = InsectChain::new(Poset::chain(2).unwrap(), vec![m1, m2]).unwrap();
            let p = &insect.coefficients().p_exact;
            assert_eq!(p[0], q(1, m2 as i64 + 1));
            assert_eq!(p[1], q(m2 as i64, m2 as i64 + 1));
        }
    }

    #[test]
    fn singleton_weights_and_walk() {
        let insect = InsectChain::new(Poset::antichain(1).unwrap(), vec![2]).unwrap();
        assert_eq!(insect.coefficients().p_exact, vec![BigRational::one()]);
        let m = insect.to_crested().unwrap().assemble().unwrap();
        assert!(m.matrix().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn crested_matches_direct_formula() {
        for poset in [
            Poset::diamond(),
            Poset::chain(3).unwrap(),
            Poset::antichain(2).unwrap(),
        ] {
            let n = poset.len();
            let insect = InsectChain::new(poset, vec![2; n]).unwrap();
            let a = insect.to_crested().unwrap().assemble().unwrap();
            let b = insect.direct_transition_matrix().unwrap();
            assert!((a.matrix() - b.matrix()).amax() <= 1e-12);
            assert!(a.is_symmetric(1e-12));
        }
    }

    #[test]
    fn eigenstructure_dimensions() {
        let insect = InsectChain::new(Poset::diamond(), vec![2, 2, 2]).unwrap();
        let e = insect.eigenstructure();
        let dims: Vec<usize> = e.iter().map(|b| b.dimension).collect();
        assert_eq!(dims, vec![1, 1, 2, 2, 2]);
        assert_eq!(e[0].exact, BigRational::one());
    }

    #[test]
    fn walk_is_reproducible() {
        let insect = InsectChain::new(Poset::diamond(), vec![2, 2, 2]).unwrap();
        let a = insect.simulate(0, 500, 7).unwrap();
        let b = insect.simulate(0, 500, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().sum::<u64>(), 500);
        assert_eq!(insect.walk_seeded(3, 11, 4), insect.walk_seeded(3, 11, 4));
        assert!(insect.simulate(8, 1, 0).is_err());
        assert_eq!(insect.simulate(0, 0, 0).unwrap(), vec![0; 8]);
    }

    #[test]
    fn diamond_symmetry() {
        let insect = InsectChain::new(Poset::diamond(), vec![2, 2, 2]).unwrap();
        let r = insect.eigenvalue_symmetry_check().unwrap();
        assert_eq!(r.automorphisms, 2);
        let poset = insect.poset();
        let two = poset.antichain_from(ElementSet::from_labels(&[2])).unwrap();
        let three = poset.antichain_from(ElementSet::from_labels(&[3])).unwrap();
        assert!(r.forced.contains(&(two, three)));
        assert!(r.violations.is_empty());

        let chain = InsectChain::new(Poset::chain(3).unwrap(), vec![2; 3]).unwrap();
        let r = chain.eigenvalue_symmetry_check().unwrap();
        assert_eq!(r.automorphisms, 1);
        assert!(r.forced.is_empty());
    }
}
