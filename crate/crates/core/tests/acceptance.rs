//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails when a criterion outside `KNOWN_RED` fails, or when a
//! known-red criterion unexpectedly passes (so the list stays honest).

mod common;

use std::time::Instant;

use common::*;
use crested_markov::crested::{
    first_crested_partition, first_crested_product, satisfies_first_crested_condition, ComponentChain,
    CrestedSpec,
};
use crested_markov::gelfand::{module_decomposition, spherical, verify_spherical};
use crested_markov::insect::{connecting_automorphism, AlphaRule, InsectChain};
use crested_markov::markov::{Chain, Measure};
use crested_markov::poset::{Antichain, ElementSet, Poset};
use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met as stated; see the README.
const KNOWN_RED: &[usize] = &[6];

const SPEC_COUNT: usize = 60;

fn specs() -> Vec<(String, CrestedSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    (0..SPEC_COUNT).map(|_| random_spec(&mut rng)).collect()
}

fn criterion_1(specs: &[(String, CrestedSpec)]) -> (bool, String) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (_, spec) in specs {
        let chain = spec.assemble().unwrap();
        let pi = spec.product_measure();
        let dense = dense_spectrum(chain.matrix(), pi.vector());
        worst = worst.max(max_multiset_deviation(&spec.spectrum(), &dense));
    }
    let secs = start.elapsed().as_secs_f64();
    (
        worst <= 1e-9 && secs < 10.0 && specs.len() >= 50,
        format!(
            "{} specs, max eigenvalue deviation {worst:.2e}, {secs:.2}s",
            specs.len()
        ),
    )
}

fn criterion_2(specs: &[(String, CrestedSpec)]) -> (bool, String) {
    let (mut pu, mut orth) = (0.0f64, 0.0f64);
    for (_, spec) in specs {
        let chain = spec.assemble().unwrap();
        let s = spec.spectral_matrices().unwrap();
        let (a, b) = s.contract_residuals(&chain);
        pu = pu.max(a);
        orth = orth.max(b);
    }
    (
        pu <= 1e-9 && orth <= 1e-9,
        format!("max |PU-UΔ| {pu:.2e}, max |UᵀDU-I| {orth:.2e}"),
    )
}

fn criterion_3(specs: &[(String, CrestedSpec)]) -> (bool, String) {
    let clean = specs
        .iter()
        .filter(|(_, s)| s.detailed_balance_violation(1e-12).unwrap().is_none())
        .count();
    let top = ComponentChain::uniform(3);
    let skew = ComponentChain::with_stationary(
        Chain::from_rows(&[vec![0.2, 0.8, 0.0], vec![0.3, 0.3, 0.4], vec![0.0, 0.6, 0.4]]).unwrap(),
    )
    .unwrap();
    let broken = CrestedSpec::new(Poset::chain(2).unwrap(), vec![top, skew], vec![0.4, 0.6]).unwrap();
    let violation = broken.detailed_balance_violation(1e-12).unwrap();
    let flagged = broken.reversibility().violating == vec![1];
    (
        clean == specs.len() && violation.is_some() && flagged,
        format!(
            "(a) {clean}/{} specs satisfy detailed balance within 1e-12; (b) non-symmetric P_2 gives violating pair {:?}",
            specs.len(),
            violation.map(|(x, y, v)| (x, y, format!("{v:.2e}")))
        ),
    )
}

fn criterion_4(specs: &[(String, CrestedSpec)]) -> (bool, String) {
    let ks = [0u32, 1, 2, 5, 8, 20];
    let mut worst = 0.0f64;
    for (idx, (_, spec)) in specs.iter().enumerate() {
        let p = spec.assemble().unwrap();
        let eval = spec.kstep().unwrap();
        let states: Vec<Vec<usize>> = spec.shape().states().collect();
        for &k in &ks {
            let pk = matrix_power(p.matrix(), k);
            for (yi, y) in states.iter().enumerate() {
                worst = worst.max((eval.probability_from_origin(y, k).unwrap() - pk[(0, yi)]).abs());
            }
            if idx < 12 {
                for (xi, x) in states.iter().enumerate() {
                    for (yi, y) in states.iter().enumerate() {
                        worst = worst.max((eval.probability(x, y, k).unwrap() - pk[(xi, yi)]).abs());
                    }
                }
            }
        }
    }
    (
        worst <= 1e-9,
        format!("k ∈ {ks:?}, all pairs on 12 specs and the origin row on all, max deviation {worst:.2e}"),
    )
}

/// Elements `0..k` form a chain, `k..n` sit below `k − 1` as an antichain.
fn nested_family(n: usize, k: usize) -> Poset {
    let mut covers = Vec::new();
    for i in 1..k {
        covers.push((i + 1, i));
    }
    if k > 0 {
        for j in k..n {
            covers.push((j + 1, k));
        }
    }
    Poset::from_covers(n, &covers).unwrap()
}

fn criterion_5() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut posets = Vec::new();
    for n in 1..=5 {
        posets.push(Poset::chain(n).unwrap());
        let reversed: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
        posets.push(Poset::from_covers(n, &reversed).unwrap());
        for k in 0..=n {
            let base = nested_family(n, k);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            posets.push(base.relabel(&perm).unwrap());
        }
    }
    let mut exact = 0;
    for poset in &posets {
        let Some(part) = first_crested_partition(poset) else {
            continue;
        };
        let n = poset.len();
        let components: Vec<ComponentChain> = (0..n)
            .map(|_| {
                let m = rng.random_range(2..=3);
                ComponentChain::new(random_symmetric(m, &mut rng), Measure::uniform(m)).unwrap()
            })
            .collect();
        let spec = CrestedSpec::new(poset.clone(), components, random_weights(n, &mut rng)).unwrap();
        let relabeled = spec.relabel(&part.labeling).unwrap();
        let direct = first_crested_product(relabeled.components(), relabeled.weights(), part.nested).unwrap();
        if relabeled.assemble().unwrap().matrix() == direct.matrix() {
            exact += 1;
        }
    }
    let example = Poset::from_covers(4, &[(2, 1), (4, 1), (4, 3)]).unwrap();
    let mut admissible = 0;
    let mut tried = 0;
    let mut perm: Vec<usize> = (0..4).collect();
    loop {
        tried += 1;
        if satisfies_first_crested_condition(&example.relabel(&perm).unwrap()) {
            admissible += 1;
        }
        if !next_perm(&mut perm) {
            break;
        }
    }
    let none = first_crested_partition(&example).is_none();
    (
        exact == posets.len() && tried == 24 && admissible == 0 && none,
        format!(
            "{exact}/{} reducible posets match the first crested product exactly; 4-element example admissible under {admissible}/{tried} labelings",
            posets.len()
        ),
    )
}

fn next_perm(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn test_posets() -> Vec<(Poset, Vec<usize>)> {
    let mut out = vec![
        (Poset::diamond(), vec![2, 2, 2]),
        (Poset::diamond(), vec![3, 2, 3]),
        (named_poset("V", 3), vec![2, 3, 2]),
        (named_poset("Lambda", 3), vec![2, 2, 3]),
        (
            Poset::from_covers(4, &[(2, 1), (4, 1), (4, 3)]).unwrap(),
            vec![2, 2, 2, 2],
        ),
        (eight_element(), vec![2; 8]),
    ];
    for n in 1..=4 {
        out.push((Poset::chain(n).unwrap(), (0..n).map(|i| 2 + i % 2).collect()));
        out.push((Poset::antichain(n).unwrap(), vec![3; n]));
    }
    out
}

fn eight_element() -> Poset {
    Poset::from_covers(
        8,
        &[(2, 1), (3, 2), (8, 3), (5, 4), (6, 4), (7, 5), (7, 6), (8, 7)],
    )
    .unwrap()
}

fn criterion_6() -> (bool, String) {
    let insect = InsectChain::new(Poset::diamond(), vec![2, 2, 2]).unwrap();
    let leaf000 = insect.tree().leaf(0);
    let a2_vertex = insect.tree().vertex(1, &[0, 0, 0]);
    let a3_vertex = insect.tree().vertex(2, &[0, 0, 0]);
    let oracle_i2 = first_passage(&insect, leaf000, 1);
    let oracle_i3 = first_passage(&insect, leaf000, 2);
    let oracle_21 = first_passage(&insect, a2_vertex, 0);
    let oracle_31 = first_passage(&insect, a3_vertex, 0);
    let solver = insect.coefficients();
    let solver_agrees = (solver.alpha[3].unwrap() - oracle_i2).abs() <= 1e-10
        && (solver.alpha[1].unwrap() - oracle_21).abs() <= 1e-10
        && (solver.alpha[2].unwrap() - oracle_31).abs() <= 1e-10;
    let leaf_return = InsectChain::with_rule(Poset::diamond(), vec![2, 2, 2], AlphaRule::LeafReturn).unwrap();

    let mut sums_exact = true;
    for (poset, sizes) in test_posets() {
        let insect = InsectChain::new(poset, sizes).unwrap();
        let total = insect
            .coefficients()
            .p_exact
            .iter()
            .fold(BigRational::from_integer(0.into()), |a, b| a + b);
        let float: f64 = insect.weights().iter().sum();
        sums_exact &= total == BigRational::one() && (float - 1.0).abs() <= 1e-12;
    }

    let expected = 0.5;
    let pass = (oracle_i2 - expected).abs() <= 1e-10
        && (oracle_i3 - expected).abs() <= 1e-10
        && (oracle_21 - expected).abs() <= 1e-10
        && (oracle_31 - expected).abs() <= 1e-10
        && sums_exact;
    (
        pass,
        format!(
            "oracle α_(I,A2)={oracle_i2:.10} α_(I,A3)={oracle_i3:.10} α_(A2,A1)={oracle_21:.10} α_(A3,A1)={oracle_31:.10} \
             (target 1/2 for all); solver agrees with oracle: {solver_agrees}; leaf-return rule gives α_(A2,A1)={}; Σp=1 exactly on all test posets: {sums_exact}",
            leaf_return.coefficients().alpha[1].unwrap()
        ),
    )
}

fn criterion_7() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (poset, sizes) in test_posets() {
        if sizes.iter().product::<usize>() > 256 {
            continue;
        }
        let insect = InsectChain::new(poset, sizes).unwrap();
        let assembled = insect.to_crested().unwrap().assemble().unwrap();
        worst = worst.max((assembled.matrix() - insect_direct_oracle(&insect)).amax());
        count += 1;
    }
    (
        worst <= 1e-12,
        format!("{count} posets, max entry deviation {worst:.2e}"),
    )
}

fn criterion_8() -> (bool, String) {
    let insect = InsectChain::new(Poset::diamond(), vec![2, 2, 2]).unwrap();
    let row = insect
        .to_crested()
        .unwrap()
        .assemble()
        .unwrap()
        .matrix()
        .row(0)
        .into_owned();
    let trials = 100_000u64;
    let start = Instant::now();
    let counts = insect.simulate(0, trials, 0x5eed).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let again = insect.simulate(0, trials, 0x5eed).unwrap();
    let mut worst_z = 0.0f64;
    for (y, &c) in counts.iter().enumerate() {
        let p = row[y];
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        worst_z = worst_z.max((c as f64 / trials as f64 - p).abs() / se);
    }
    (
        worst_z <= 3.0 && secs < 5.0 && counts == again,
        format!(
            "10^5 walks from 000: max |z| {worst_z:.2}, {secs:.2}s, identical rerun: {}",
            counts == again
        ),
    )
}

fn criterion_9() -> (bool, String) {
    let poset = eight_element();
    let insect = InsectChain::new(poset.clone(), vec![3; 8]).unwrap();
    let anti =
        |labels: &[usize]| -> Antichain { poset.antichain_from(ElementSet::from_labels(labels)).unwrap() };
    let pairs = [
        (vec![3], vec![7]),
        (vec![3, 5], vec![3, 6]),
        (vec![2, 5], vec![2, 6]),
        (vec![1, 5], vec![1, 6]),
    ];
    let equal = pairs
        .iter()
        .all(|(a, b)| insect.exact_eigenvalue(anti(a)) == insect.exact_eigenvalue(anti(b)));
    let no_auto = connecting_automorphism(&poset, anti(&[3]), anti(&[7]))
        .unwrap()
        .is_none();
    let report = insect.eigenvalue_symmetry_check().unwrap();
    (
        equal && no_auto && report.violations.is_empty(),
        format!(
            "exact equalities hold: {equal}; automorphism mapping {{3}} to {{7}}: {}; λ_{{3}} = {}; {} automorphisms",
            if no_auto { "none" } else { "found" },
            insect.exact_eigenvalue(anti(&[3])),
            report.automorphisms
        ),
    )
}

fn criterion_10() -> (bool, String) {
    let cases = [
        (Poset::diamond(), vec![2, 2, 2], vec![0, 0, 0]),
        (Poset::diamond(), vec![3, 2, 3], vec![2, 1, 0]),
        (Poset::chain(3).unwrap(), vec![2, 3, 2], vec![1, 2, 0]),
        (Poset::chain(2).unwrap(), vec![3, 3], vec![0, 0]),
    ];
    let mut dims_ok = true;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (poset, sizes, x0) in cases {
        let total: usize = module_decomposition(&poset, &sizes)
            .unwrap()
            .iter()
            .map(|(_, d)| d)
            .sum();
        dims_ok &= total == sizes.iter().product::<usize>();
        let insect = InsectChain::new(poset.clone(), sizes.clone()).unwrap();
        for s in poset.antichains() {
            let phi = spherical(&poset, &sizes, s, &x0).unwrap();
            let c = verify_spherical(&phi, &insect).unwrap();
            worst = worst
                .max(c.eigen_residual)
                .max(c.base_error)
                .max(c.module_residual);
            checked += 1;
        }
    }
    (
        dims_ok && worst <= 1e-9,
        format!("Σ dim W_S = ∏ m_i: {dims_ok}; {checked} spherical functions, max residual {worst:.2e}"),
    )
}

fn criterion_11(specs: &[(String, CrestedSpec)]) -> (bool, String) {
    let mut ok = 0;
    let mut eligible = 0;
    for (_, spec) in specs {
        let r = spec.ergodicity().unwrap();
        if r.all_components_ergodic() {
            eligible += 1;
            if r.unit_multiplicity == Some(1) && r.has_minus_one == Some(false) {
                ok += 1;
            }
        }
    }
    (
        eligible == specs.len() && ok == eligible,
        format!("{ok}/{eligible} specs with ergodic components have simple eigenvalue 1 and no -1"),
    )
}

fn main() {
    let specs = specs();
    let results: Vec<(usize, (bool, String))> = vec![
        (1, criterion_1(&specs)),
        (2, criterion_2(&specs)),
        (3, criterion_3(&specs)),
        (4, criterion_4(&specs)),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
        (11, criterion_11(&specs)),
    ];
    let mut unexpected = Vec::new();
    for (id, (pass, detail)) in &results {
        println!("{}", line(*id, *pass, detail));
        if *pass == KNOWN_RED.contains(id) {
            unexpected.push(*id);
        }
    }
    let _ = DMatrix::<f64>::zeros(0, 0);
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
