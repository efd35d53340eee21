//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use crested_markov::crested::{ComponentChain, CrestedSpec};
use crested_markov::insect::{ancestral_classes, InsectChain};
use crested_markov::markov::{from_weighted_graph, Chain, Measure, WeightedGraph};
use crested_markov::poset::Poset;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub const POSET_KINDS: [&str; 5] = ["chain", "antichain", "diamond", "V", "Lambda"];

/// chain/antichain on `n` elements; diamond = 1 above 2,3; V = 3 below 1,2;
/// Lambda = 3 above 1,2.
pub fn named_poset(kind: &str, n: usize) -> Poset {
    match kind {
        "chain" => Poset::chain(n).unwrap(),
        "antichain" => Poset::antichain(n).unwrap(),
        "diamond" => Poset::diamond(),
        "V" => Poset::from_covers(3, &[(3, 1), (3, 2)]).unwrap(),
        "Lambda" => Poset::from_covers(3, &[(1, 3), (2, 3)]).unwrap(),
        _ => unreachable!(),
    }
}

/// Lazy symmetric stochastic matrix with positive diagonal.
pub fn random_symmetric(m: usize, rng: &mut impl Rng) -> Chain {
    let mut w = DMatrix::zeros(m, m);
    for x in 0..m {
        for y in (x + 1)..m {
            let v: f64 = rng.random_range(0.05..1.0);
            w[(x, y)] = v;
            w[(y, x)] = v;
        }
    }
    let max_row = (0..m).map(|x| w.row(x).sum()).fold(0.0, f64::max);
    let scale = rng.random_range(0.3..0.9) / max_row.max(1e-300);
    w *= scale;
    for x in 0..m {
        w[(x, x)] = 1.0 - w.row(x).sum();
    }
    Chain::new(w).unwrap()
}

/// Reversible chain with a generic stationary law.
pub fn random_reversible(m: usize, rng: &mut impl Rng) -> (Chain, Measure) {
    let mut w = DMatrix::zeros(m, m);
    for x in 0..m {
        for y in x..m {
            let v: f64 = rng.random_range(0.05..1.0);
            w[(x, y)] = v;
            w[(y, x)] = v;
        }
    }
    from_weighted_graph(&WeightedGraph::new(w).unwrap()).unwrap()
}

pub fn random_weights(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let drift: f64 = 1.0 - w.iter().sum::<f64>();
    w[0] += drift;
    w
}

/// A reversible crested spec: symmetric components below the top, generic
/// reversible components on maximal elements.
pub fn random_spec(rng: &mut impl Rng) -> (String, CrestedSpec) {
    let kind = POSET_KINDS[rng.random_range(0..POSET_KINDS.len())];
    let n = match kind {
        "chain" | "antichain" => rng.random_range(1..=4),
        _ => 3,
    };
    let poset = named_poset(kind, n);
    let top = poset.maximal_elements();
    let components = (0..n)
        .map(|i| {
            let m = rng.random_range(2..=3);
            if top.contains(i) {
                let (p, s) = random_reversible(m, rng);
                ComponentChain::new(p, s).unwrap()
            } else {
                ComponentChain::new(random_symmetric(m, rng), Measure::uniform(m)).unwrap()
            }
        })
        .collect();
    let weights = random_weights(n, rng);
    (
        format!("{kind}{n}"),
        CrestedSpec::new(poset, components, weights).unwrap(),
    )
}

/// `P^k` by binary exponentiation.
pub fn matrix_power(p: &DMatrix<f64>, mut k: u32) -> DMatrix<f64> {
    let mut result = DMatrix::identity(p.nrows(), p.ncols());
    let mut base = p.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    result
}

/// Sorted eigenvalues of `D^{1/2} P D^{-1/2}`.
pub fn dense_spectrum(p: &DMatrix<f64>, pi: &DVector<f64>) -> Vec<f64> {
    let n = p.nrows();
    let s = DMatrix::from_fn(n, n, |x, y| {
        let v = p[(x, y)] * (pi[x] / pi[y]).sqrt();
        let w = p[(y, x)] * (pi[y] / pi[x]).sqrt();
        0.5 * (v + w)
    });
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn max_multiset_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `p(x,y) = Σ_i p_i [x, y share a ∼_{A_i} class] / |class|`.
pub fn insect_direct_oracle(insect: &InsectChain) -> DMatrix<f64> {
    let sizes = insect.sizes();
    let total: usize = sizes.iter().product();
    let mut m = DMatrix::zeros(total, total);
    for i in 0..insect.poset().len() {
        let a = insect
            .poset()
            .elements()
            .difference(insect.poset().hereditary_closed(i).unwrap());
        for class in ancestral_classes(insect.poset(), a, sizes).unwrap() {
            let w = insect.weights()[i] / class.len() as f64;
            for &x in &class {
                for &y in &class {
                    m[(x, y)] += w;
                }
            }
        }
    }
    m
}

/// Solves `h = Q h + r` on the non-absorbing vertices.
fn absorb(adj: &[Vec<usize>], absorbing: &dyn Fn(usize) -> Option<f64>) -> Vec<f64> {
    let free: Vec<usize> = (0..adj.len()).filter(|&v| absorbing(v).is_none()).collect();
    let pos: HashMap<usize, usize> = free.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let n = free.len();
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (k, &v) in free.iter().enumerate() {
        let d = adj[v].len() as f64;
        for &w in &adj[v] {
            match absorbing(w) {
                Some(val) => b[k] += val / d,
                None => a[(k, pos[&w])] -= 1.0 / d,
            }
        }
    }
    let h = a.lu().solve(&b).expect("absorbing chain is transient");
    (0..adj.len())
        .map(|v| match absorbing(v) {
            Some(val) => val,
            None => h[pos[&v]],
        })
        .collect()
}

fn adjacency(insect: &InsectChain) -> Vec<Vec<usize>> {
    let t = insect.tree();
    (0..t.vertex_count()).map(|v| t.neighbors(v).to_vec()).collect()
}

/// Probability that the walk, started at `start` and taking one step,
/// exits upward through level `target`: it reaches `target` before any leaf
/// and before any other upper cover of the starting level.
pub fn first_passage(insect: &InsectChain, start: usize, target: usize) -> f64 {
    let t = insect.tree();
    let adj = adjacency(insect);
    let siblings = insect.ancestral().upper_covers(t.level_of(start)).to_vec();
    let h = absorb(&adj, &|v| {
        let level = t.level_of(v);
        if level == target {
            Some(1.0)
        } else if t.leaf_index(v).is_some() || siblings.contains(&level) {
            Some(0.0)
        } else {
            None
        }
    });
    let nbrs = t.neighbors(start);
    nbrs.iter().map(|&w| h[w]).sum::<f64>() / nbrs.len() as f64
}

/// Exact end-leaf distribution of the stopped walk from every leaf.
pub fn walk_kernel(insect: &InsectChain) -> DMatrix<f64> {
    let t = insect.tree();
    let adj = adjacency(insect);
    let leaves = t.leaf_count();
    let mut k = DMatrix::zeros(leaves, leaves);
    for y in 0..leaves {
        let h = absorb(&adj, &|v| t.leaf_index(v).map(|l| if l == y { 1.0 } else { 0.0 }));
        for x in 0..leaves {
            let nbrs = t.neighbors(t.leaf(x));
            k[(x, y)] = nbrs.iter().map(|&w| h[w]).sum::<f64>() / nbrs.len() as f64;
        }
    }
    k
}

/// Distribution of the coarsest level visited by one excursion from leaf
/// `start`, coarseness measured by the size of the level's set. Valid when
/// that level is unique on every path, as on chains and the diamond.
pub fn top_level_distribution(insect: &InsectChain, start: usize) -> Vec<f64> {
    let t = insect.tree();
    let nodes = insect.ancestral().len();
    let rank = |node: usize| insect.ancestral().set(node).len();
    // State (vertex, top node); value = P(absorbed with final top = target).
    let mut out = vec![0.0; nodes];
    let verts = t.vertex_count();
    let idx = |v: usize, top: usize| v * nodes + top;
    let mut adj = vec![Vec::new(); verts * nodes];
    for v in 0..verts {
        for top in 0..nodes {
            for &w in t.neighbors(v) {
                let lw = t.level_of(w);
                let next = if rank(lw) < rank(top) { lw } else { top };
                adj[idx(v, top)].push(idx(w, next));
            }
        }
    }
    for target in 0..nodes {
        let h = absorb(&adj, &|s| {
            let (v, top) = (s / nodes, s % nodes);
            t.leaf_index(v).map(|_| if top == target { 1.0 } else { 0.0 })
        });
        let v0 = t.leaf(start);
        let bottom = insect.ancestral().bottom();
        let first = &adj[idx(v0, bottom)];
        out[target] = first.iter().map(|&s| h[s]).sum::<f64>() / first.len() as f64;
    }
    out
}

/// Vertex and edge sets of `𝒯` rebuilt by hashing `(node, restricted x)`
/// pairs over every maximal chain.
pub fn hashed_tree(insect: &InsectChain) -> (usize, usize, HashMap<(usize, Vec<usize>), usize>) {
    let anc = insect.ancestral();
    let sizes = insect.sizes();
    let restrict = |node: usize, x: &[usize]| -> Vec<usize> { anc.set(node).iter().map(|i| x[i]).collect() };
    let mut vertices: HashSet<(usize, Vec<usize>)> = HashSet::new();
    let mut edges: HashSet<((usize, Vec<usize>), (usize, Vec<usize>))> = HashSet::new();
    let states: Vec<Vec<usize>> = {
        let mut v = vec![vec![]];
        for &m in sizes {
            v = v
                .into_iter()
                .flat_map(|p: Vec<usize>| (0..m).map(move |d| [p.clone(), vec![d]].concat()))
                .collect();
        }
        v
    };
    for chain in anc.maximal_chains() {
        for x in &states {
            for &node in &chain {
                vertices.insert((node, restrict(node, x)));
            }
            for pair in chain.windows(2) {
                edges.insert(((pair[0], restrict(pair[0], x)), (pair[1], restrict(pair[1], x))));
            }
        }
    }
    let mut degree: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    for (a, b) in &edges {
        *degree.entry(a.clone()).or_default() += 1;
        *degree.entry(b.clone()).or_default() += 1;
    }
    (vertices.len(), edges.len(), degree)
}

pub fn line(id: usize, pass: bool, detail: impl AsRef<str>) -> String {
    format!(
        "criterion {id:>2}: {} {}",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    )
}
