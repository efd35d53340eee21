//! Finite posets on `{1..n}`.
//!
//! Elements are stored as indices `0..n` and reported with 1-based labels,
//! matching the way posets are usually drawn. Subsets of `I` are bitmasks
//! ([`ElementSet`]), so closures, antichain enumeration and the
//! ancestral/hereditary calculus are all plain bit operations.
//!
//! Conventions: `A(i) = {j : j > i}` is the ancestral set of `i`,
//! `H(i) = {j : j < i}` its hereditary set, and `A[i]`, `H[i]` add `i`
//! itself. For a subset the operations are unions over its members.

use std::fmt;

use crate::error::{Error, Result};

/// Largest poset accepted; antichains are enumerated over all `2^n` subsets.
pub const MAX_ELEMENTS: usize = 16;
/// Largest poset for which automorphisms are searched.
pub const MAX_AUTOMORPHISM_ELEMENTS: usize = 10;

/// A subset of `I`, stored as a bitmask over element indices.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ElementSet(u32);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 32);
        if n == 32 {
            ElementSet(u32::MAX)
        } else {
            ElementSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        ElementSet(1 << i)
    }

    pub fn from_bits(bits: u32) -> Self {
        ElementSet(bits)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices.into_iter().fold(ElementSet::EMPTY, |acc, i| acc.with(i))
    }

    /// Builds a set from 1-based labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        Self::from_indices(labels.iter().map(|&l| l - 1))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn with(self, i: usize) -> Self {
        ElementSet(self.0 | (1 << i))
    }

    pub fn without(self, i: usize) -> Self {
        ElementSet(self.0 & !(1 << i))
    }

    pub fn union(self, other: Self) -> Self {
        ElementSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        ElementSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        ElementSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Member indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Member labels (1-based) in increasing order.
    pub fn labels(self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    /// Image of the set under a permutation of element indices.
    pub fn map(self, perm: &[usize]) -> Self {
        Self::from_indices(self.iter().map(|i| perm[i]))
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, l) in self.labels().into_iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromIterator<usize> for ElementSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_indices(iter)
    }
}

/// A set of pairwise incomparable elements.
///
/// Ordered by size, then lexicographically by sorted members.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Antichain(ElementSet);

impl Antichain {
    pub fn empty() -> Self {
        Antichain(ElementSet::EMPTY)
    }

    pub fn members(self) -> ElementSet {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.len()
    }

    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(self, i: usize) -> bool {
        self.0.contains(i)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        self.0.iter()
    }
}

impl Ord for Antichain {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for Antichain {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A finite partial order on `n` elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    n: usize,
    labels: Vec<String>,
    /// `up[i] = A[i]`, everything `≥ i`.
    up: Vec<ElementSet>,
    /// `down[i] = H[i]`, everything `≤ i`.
    down: Vec<ElementSet>,
    covers: Vec<(usize, usize)>,
}

impl Poset {
    /// Builds a poset from cover pairs `(lower, upper)` given as 1-based
    /// labels. Any relation pairs are accepted; the result is their
    /// reflexive-transitive closure.
    pub fn from_covers(n: usize, covers: &[(usize, usize)]) -> Result<Self> {
        let pairs = covers
            .iter()
            .map(|&(lo, hi)| {
                for l in [lo, hi] {
                    if l == 0 || l > n {
                        return Err(Error::Index {
                            index: l,
                            bound: format!("a label in 1..={n}"),
                        });
                    }
                }
                Ok((lo - 1, hi - 1))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_relations(n, &pairs)
    }

    /// Same as [`Poset::from_covers`] but with 0-based indices.
    pub fn from_relations(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_ELEMENTS {
            return Err(Error::SizeLimit {
                what: "poset",
                size: n,
                limit: MAX_ELEMENTS,
            });
        }
        let mut up: Vec<ElementSet> = (0..n).map(ElementSet::singleton).collect();
        for &(lo, hi) in pairs {
            if lo >= n || hi >= n {
                return Err(Error::Index {
                    index: lo.max(hi),
                    bound: format!("an index in 0..{n}"),
                });
            }
            if lo == hi {
                return Err(Error::Cycle(lo + 1, hi + 1));
            }
            up[lo] = up[lo].with(hi);
        }
        // Warshall closure on bitsets.
        for k in 0..n {
            for i in 0..n {
                if up[i].contains(k) {
                    up[i] = up[i].union(up[k]);
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if up[i].contains(j) && up[j].contains(i) {
                    return Err(Error::Cycle(i + 1, j + 1));
                }
            }
        }
        let down: Vec<ElementSet> = (0..n)
            .map(|j| (0..n).filter(|&i| up[i].contains(j)).collect())
            .collect();
        let mut covers = Vec::new();
        for i in 0..n {
            let strict_up = up[i].without(i);
            for j in strict_up.iter() {
                let between = strict_up.without(j).intersection(down[j]);
                if between.is_empty() {
                    covers.push((i, j));
                }
            }
        }
        Ok(Poset {
            n,
            labels: (1..=n).map(|l| l.to_string()).collect(),
            up,
            down,
            covers,
        })
    }

    /// Totally ordered `1 > 2 > ⋯ > n`.
    pub fn chain(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|i| (i, i - 1)).collect();
        Self::from_relations(n, &pairs)
    }

    /// `n` pairwise incomparable elements.
    pub fn antichain(n: usize) -> Result<Self> {
        Self::from_relations(n, &[])
    }

    /// `1` above `2` and `3`; its ancestral poset is a diamond.
    pub fn diamond() -> Self {
        Self::from_covers(3, &[(2, 1), (3, 1)]).expect("valid poset")
    }

    /// Attaches display labels (metadata only).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn elements(&self) -> ElementSet {
        ElementSet::full(self.n)
    }

    /// Cover pairs `(lower, upper)` as 0-based indices.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i].contains(j)
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::Index {
                index: i,
                bound: format!("an index in 0..{}", self.n),
            })
        }
    }

    /// `A(i)`: elements strictly above `i`.
    pub fn ancestral(&self, i: usize) -> Result<ElementSet> {
        self.check(i)?;
        Ok(self.up[i].without(i))
    }

    /// `H(i)`: elements strictly below `i`.
    pub fn hereditary(&self, i: usize) -> Result<ElementSet> {
        self.check(i)?;
        Ok(self.down[i].without(i))
    }

    /// `A[i] = A(i) ∪ {i}`.
    pub fn ancestral_closed(&self, i: usize) -> Result<ElementSet> {
        self.check(i)?;
        Ok(self.up[i])
    }

    /// `H[i] = H(i) ∪ {i}`.
    pub fn hereditary_closed(&self, i: usize) -> Result<ElementSet> {
        self.check(i)?;
        Ok(self.down[i])
    }

    /// `A(J) = ⋃_{j∈J} A(j)`.
    pub fn ancestral_set(&self, set: ElementSet) -> ElementSet {
        set.iter()
            .fold(ElementSet::EMPTY, |acc, j| acc.union(self.up[j].without(j)))
    }

    pub fn hereditary_set(&self, set: ElementSet) -> ElementSet {
        set.iter()
            .fold(ElementSet::EMPTY, |acc, j| acc.union(self.down[j].without(j)))
    }

    pub fn ancestral_closed_set(&self, set: ElementSet) -> ElementSet {
        set.iter().fold(ElementSet::EMPTY, |acc, j| acc.union(self.up[j]))
    }

    pub fn hereditary_closed_set(&self, set: ElementSet) -> ElementSet {
        set.iter()
            .fold(ElementSet::EMPTY, |acc, j| acc.union(self.down[j]))
    }

    pub fn is_ancestral(&self, set: ElementSet) -> bool {
        self.ancestral_closed_set(set) == set
    }

    pub fn is_hereditary(&self, set: ElementSet) -> bool {
        self.hereditary_closed_set(set) == set
    }

    pub fn is_antichain(&self, set: ElementSet) -> bool {
        set.iter()
            .all(|i| self.up[i].intersection(set) == ElementSet::singleton(i))
    }

    pub fn is_chain(&self, set: ElementSet) -> bool {
        set.iter().all(|i| set.is_subset(self.up[i].union(self.down[i])))
    }

    /// Wraps a set as an antichain after checking incomparability.
    pub fn antichain_from(&self, set: ElementSet) -> Option<Antichain> {
        (set.is_subset(self.elements()) && self.is_antichain(set)).then_some(Antichain(set))
    }

    /// Every antichain, `∅` included, ordered by size then lexicographically.
    pub fn antichains(&self) -> Vec<Antichain> {
        let mut out: Vec<Antichain> = (0..(1u32 << self.n))
            .map(ElementSet::from_bits)
            .filter(|&s| self.is_antichain(s))
            .map(Antichain)
            .collect();
        out.sort();
        out
    }

    /// `S̄ = {j : A(j) = ∅}`.
    pub fn maximal_elements(&self) -> Antichain {
        Antichain((0..self.n).filter(|&j| self.up[j].len() == 1).collect())
    }

    pub fn minimal_elements(&self) -> Antichain {
        Antichain((0..self.n).filter(|&j| self.down[j].len() == 1).collect())
    }

    /// `A_S = I ∖ H[S]`.
    pub fn ancestral_of_antichain(&self, s: Antichain) -> ElementSet {
        self.elements()
            .difference(self.hereditary_closed_set(s.members()))
    }

    /// Inverse of [`Poset::ancestral_of_antichain`]: the maximal elements of
    /// the hereditary complement.
    pub fn antichain_of_ancestral(&self, a: ElementSet) -> Result<Antichain> {
        if !a.is_subset(self.elements()) || !self.is_ancestral(a) {
            return Err(Error::NotAncestral(a.to_string()));
        }
        let rest = self.elements().difference(a);
        Ok(Antichain(
            rest.iter()
                .filter(|&i| self.up[i].intersection(rest) == ElementSet::singleton(i))
                .collect(),
        ))
    }

    /// The singleton ancestral sets `A_i` plus `I`, ordered by reversed
    /// containment.
    pub fn ancestral_poset(&self) -> AncestralPoset {
        let mut sets: Vec<ElementSet> = (0..self.n)
            .map(|i| self.ancestral_of_antichain(Antichain(ElementSet::singleton(i))))
            .collect();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                assert_ne!(sets[i], sets[j], "distinct elements share an ancestral set");
            }
        }
        sets.push(self.elements());
        AncestralPoset::from_sets(sets)
    }

    /// Order automorphisms as index permutations (`perm[i]` is the image of
    /// `i`). The identity comes first.
    pub fn automorphisms(&self) -> Result<Vec<Vec<usize>>> {
        if self.n > MAX_AUTOMORPHISM_ELEMENTS {
            return Err(Error::SizeLimit {
                what: "automorphism search",
                size: self.n,
                limit: MAX_AUTOMORPHISM_ELEMENTS,
            });
        }
        let mut out = Vec::new();
        let mut image = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        self.extend_automorphism(0, &mut image, &mut used, &mut out);
        Ok(out)
    }

    fn extend_automorphism(
        &self,
        i: usize,
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == self.n {
            out.push(image.clone());
            return;
        }
        for target in 0..self.n {
            if used[target] {
                continue;
            }
            let consistent = (0..i).all(|k| {
                self.leq(k, i) == self.leq(image[k], target) && self.leq(i, k) == self.leq(target, image[k])
            });
            if consistent {
                image[i] = target;
                used[target] = true;
                self.extend_automorphism(i + 1, image, used, out);
                used[target] = false;
            }
        }
        image[i] = usize::MAX;
    }

    /// The isomorphic poset in which element `i` is renamed `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        let pairs: Vec<_> = self.covers.iter().map(|&(lo, hi)| (perm[lo], perm[hi])).collect();
        Self::from_relations(self.n, &pairs)
    }
}

/// The poset `(I_𝒜, ≤)` of ancestral sets `A_i = I ∖ H[i]` together with
/// `I`, ordered by `A ≤ B ⇔ A ⊇ B`.
///
/// Node `i < n` is `A_i`; node `n` is `I`, the unique minimal node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AncestralPoset {
    sets: Vec<ElementSet>,
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
}

impl AncestralPoset {
    fn from_sets(sets: Vec<ElementSet>) -> Self {
        let len = sets.len();
        let below = |a: usize, b: usize| a != b && sets[b].is_subset(sets[a]);
        let mut up = vec![Vec::new(); len];
        let mut down = vec![Vec::new(); len];
        for a in 0..len {
            for b in 0..len {
                if below(a, b) && !(0..len).any(|c| below(a, c) && below(c, b)) {
                    up[a].push(b);
                    down[b].push(a);
                }
            }
        }
        AncestralPoset { sets, up, down }
    }

    /// Number of nodes (`n + 1`).
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Index of the node `I`.
    pub fn bottom(&self) -> usize {
        self.sets.len() - 1
    }

    pub fn set(&self, node: usize) -> ElementSet {
        self.sets[node]
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.sets[b].is_subset(self.sets[a])
    }

    /// Nodes `B` with `A ⊲ B`.
    pub fn upper_covers(&self, node: usize) -> &[usize] {
        &self.up[node]
    }

    /// Nodes `B` with `B ⊲ A`.
    pub fn lower_covers(&self, node: usize) -> &[usize] {
        &self.down[node]
    }

    /// All cover pairs `(lower, upper)`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|a| self.up[a].iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn is_maximal(&self, node: usize) -> bool {
        self.up[node].is_empty()
    }

    /// Nodes ordered so that every node follows all nodes below it.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&k| (std::cmp::Reverse(self.sets[k].len()), k));
        order
    }

    /// Saturated chains from `I` up to `node`, each listed bottom-up.
    pub fn chains_to(&self, node: usize) -> Vec<Vec<usize>> {
        if node == self.bottom() {
            return vec![vec![node]];
        }
        let mut out = Vec::new();
        for &below in &self.down[node] {
            for mut chain in self.chains_to(below) {
                chain.push(node);
                out.push(chain);
            }
        }
        out
    }

    /// Maximal chains, each listed bottom-up from `I`.
    pub fn maximal_chains(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![self.bottom()]];
        while let Some(chain) = stack.pop() {
            let last = *chain.last().expect("non-empty");
            if self.up[last].is_empty() {
                out.push(chain);
                continue;
            }
            for &next in self.up[last].iter().rev() {
                let mut extended = chain.clone();
                extended.push(next);
                stack.push(extended);
            }
        }
        out
    }

    /// `"I"` for the bottom node, `"A_<label>"` otherwise.
    pub fn node_name(&self, node: usize) -> String {
        if node == self.bottom() {
            "I".to_string()
        } else {
            format!("A_{}", node + 1)
        }
    }
}
