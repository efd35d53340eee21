use std::fmt::Write as _;

use crested_markov::crested::{first_crested_partition, CrestedSpec};
use crested_markov::gelfand::{module_decomposition, spherical, verify_spherical};
use crested_markov::insect::{AlphaRule, InsectChain, RNG_ALGORITHM};
use crested_markov::markov::{check_detailed_balance, spectral_oracle, Chain};
use crested_markov::poset::MAX_AUTOMORPHISM_ELEMENTS;
use crested_markov::{EXACT_TOL, PIPELINE_TOL};

use crate::document::{format_state, parse_state, CliError, CliResult, Input, Mode};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Text for stdout plus the exit code.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: 0 }
    }
}

pub fn header(input: &Input) -> String {
    format!("# crested-markov v{VERSION} hash={}\n", input.hash)
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

pub fn matrix_csv(m: &nalgebra::DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn build(input: &Input, rule: AlphaRule) -> CliResult<Outcome> {
    let spec = input.doc.crested(rule)?;
    let chain = spec.assemble()?;
    let mut out = header(input);
    let poset_hash = crate::document::hex_digest(format!("{:?}", input.doc.poset.covers).as_bytes());
    writeln!(
        out,
        "# mode={} sizes={} states={} poset={}",
        input.doc.mode,
        join(spec.shape().sizes(), ","),
        chain.len(),
        &poset_hash[..16]
    )
    .unwrap();
    out.push_str(&matrix_csv(chain.matrix()));
    Ok(Outcome::ok(out))
}

fn reversibility_note(spec: &CrestedSpec) -> Option<String> {
    let rev = spec.reversibility();
    (!rev.reversible()).then(|| {
        format!(
            "reversibility: violated; P_k is not symmetric for non-maximal k = {}",
            join(&rev.violating.iter().map(|k| k + 1).collect::<Vec<_>>(), ",")
        )
    })
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dense_deviation(spec: &CrestedSpec, chain: &Chain) -> CliResult<f64> {
    let dense = spectral_oracle(chain, &spec.product_measure())?;
    Ok(max_deviation(&spec.spectrum(), dense.eigenvalues.as_slice()))
}

pub fn spectrum(input: &Input, rule: AlphaRule) -> CliResult<Outcome> {
    let spec = input.doc.crested(rule)?;
    let mut out = header(input);
    if let Some(note) = reversibility_note(&spec) {
        writeln!(out, "{note}").unwrap();
        return Ok(Outcome { text: out, code: 3 });
    }
    for b in spec.eigenblocks() {
        writeln!(
            out,
            "S={} j=({}) lambda={:.11e} dim={}",
            b.antichain,
            join(&b.multi_index, ","),
            b.eigenvalue,
            b.dimension
        )
        .unwrap();
    }
    let dev = dense_deviation(&spec, &spec.assemble()?)?;
    let pass = dev <= PIPELINE_TOL;
    writeln!(
        out,
        "oracle: max multiset deviation {dev:.3e} {}",
        if pass { "PASS" } else { "FAIL" }
    )
    .unwrap();
    Ok(Outcome {
        text: out,
        code: if pass { 0 } else { 3 },
    })
}

pub fn kstep(
    input: &Input,
    rule: AlphaRule,
    from: &str,
    to: &str,
    k: u32,
    verify: bool,
) -> CliResult<Outcome> {
    let spec = input.doc.crested(rule)?;
    let sizes = spec.shape().sizes().to_vec();
    let x = parse_state(from, &sizes)?;
    let y = parse_state(to, &sizes)?;
    if let Some(note) = reversibility_note(&spec) {
        return Err(CliError::math(note));
    }
    let eval = spec.kstep()?;
    let p = if x.iter().all(|&v| v == 0) {
        eval.probability_from_origin(&y, k)?
    } else {
        eval.probability(&x, &y, k)?
    };
    let mut out = header(input);
    writeln!(
        out,
        "p^({k})({},{}) = {p:.16e}",
        format_state(&x, &sizes),
        format_state(&y, &sizes)
    )
    .unwrap();
    let mut code = 0;
    if verify {
        let power = spec.assemble()?.power(k);
        let oracle = power[(spec.shape().linearize(&x), spec.shape().linearize(&y))];
        let dev = (oracle - p).abs();
        let pass = dev <= PIPELINE_TOL;
        writeln!(
            out,
            "power oracle: {oracle:.16e} deviation {dev:.3e} {}",
            if pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
        if !pass {
            code = 3;
        }
    }
    Ok(Outcome { text: out, code })
}

pub fn insect(input: &Input, rule: AlphaRule) -> CliResult<Outcome> {
    let chain = input.doc.insect(rule)?;
    let anc = chain.ancestral();
    let tree = chain.tree();
    let coeff = chain.coefficients();
    let mut out = header(input);
    writeln!(out, "rule={rule} sizes={}", join(chain.sizes(), ",")).unwrap();
    writeln!(
        out,
        "tree: vertices={} edges={}",
        tree.vertex_count(),
        tree.edge_count()
    )
    .unwrap();
    for level in tree.levels() {
        let degree = tree.degree(level.offset);
        writeln!(
            out,
            "level {} set={} vertices={} degree={}",
            anc.node_name(level.node),
            level.set,
            level.size,
            degree
        )
        .unwrap();
    }
    for (from, to) in anc.covers() {
        let a = coeff.alpha_exact[from].as_ref().expect("non-maximal");
        writeln!(
            out,
            "alpha {} -> {} = {a} ({:.16e})",
            anc.node_name(from),
            anc.node_name(to),
            coeff.alpha[from].unwrap()
        )
        .unwrap();
    }
    for (i, (q, p)) in coeff.p_exact.iter().zip(&coeff.p).enumerate() {
        writeln!(out, "p_{} = {q} ({p:.16e})", i + 1).unwrap();
    }
    for e in chain.eigenstructure() {
        writeln!(
            out,
            "lambda S={} = {} ({:.16e}) dim={}",
            e.antichain, e.exact, e.eigenvalue, e.dimension
        )
        .unwrap();
    }
    if chain.poset().len() <= MAX_AUTOMORPHISM_ELEMENTS {
        let r = chain.eigenvalue_symmetry_check()?;
        writeln!(
            out,
            "symmetry: automorphisms={} forced={} violations={}",
            r.automorphisms,
            r.forced.len(),
            r.violations.len()
        )
        .unwrap();
        for (a, b) in &r.accidental {
            writeln!(
                out,
                "accidental: lambda {a} = lambda {b}, no automorphism maps one to the other"
            )
            .unwrap();
        }
    }
    Ok(Outcome::ok(out))
}

pub fn simulate(
    input: &Input,
    rule: AlphaRule,
    trials: u64,
    seed: u64,
    start: Option<&str>,
) -> CliResult<Outcome> {
    if input.doc.mode != Mode::Insect {
        return Err(CliError::schema("mode: simulate needs mode insect"));
    }
    let chain = input.doc.insect(rule)?;
    let sizes = chain.sizes().to_vec();
    let x = match start {
        Some(s) => parse_state(s, &sizes)?,
        None => input.doc.base_point(),
    };
    let start_index = chain.shape().checked_linearize(&x)?;
    let counts = chain.simulate(start_index, trials, seed)?;
    let analytic = chain.to_crested()?.assemble()?;
    let mut out = header(input);
    writeln!(
        out,
        "# rng={RNG_ALGORITHM} seed={seed} trials={trials} start={}",
        format_state(&x, &sizes)
    )
    .unwrap();
    writeln!(out, "state,count,frequency,analytic").unwrap();
    if trials > 0 {
        for (y, state) in chain.shape().states().enumerate() {
            writeln!(
                out,
                "{},{},{:.16e},{:.16e}",
                format_state(&state, &sizes),
                counts[y],
                counts[y] as f64 / trials as f64,
                analytic.entry(start_index, y)
            )
            .unwrap();
        }
    }
    Ok(Outcome::ok(out))
}

struct Checks {
    lines: Vec<String>,
    failed: bool,
}

impl Checks {
    fn add(&mut self, name: &str, pass: bool, detail: impl AsRef<str>) {
        self.failed |= !pass;
        self.lines.push(format!(
            "check {name}: {} {}",
            if pass { "PASS" } else { "FAIL" },
            detail.as_ref()
        ));
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.lines.push(format!("check {name}: SKIP {why}"));
    }
}

pub fn verify(input: &Input, rule: AlphaRule) -> CliResult<Outcome> {
    let doc = &input.doc;
    let mut c = Checks {
        lines: Vec::new(),
        failed: false,
    };
    c.add("schema", true, format!("mode={} n={}", doc.mode, doc.poset.n));

    let poset = match doc.poset() {
        Ok(p) => p,
        Err(e) => return Ok(finish(input, c, Some(("poset", e.message)))),
    };
    c.add(
        "poset",
        true,
        format!(
            "acyclic, {} covers, {} antichains",
            poset.covers().len(),
            poset.antichains().len()
        ),
    );

    if let Err(e) = doc.chains() {
        return Ok(finish(input, c, Some(("stochastic", e.message))));
    }
    c.add("stochastic", true, "every component row sums to 1 within 1e-12");

    let spec = match doc.crested(rule) {
        Ok(s) => s,
        Err(e) => return Ok(finish(input, c, Some(("components", e.message)))),
    };
    c.add("components", true, "irreducible and reversible for their σ");
    let total: f64 = spec.weights().iter().sum();
    c.add(
        "weights",
        (total - 1.0).abs() <= EXACT_TOL,
        format!(
            "p0 = [{}], sum {total}",
            join(
                &spec
                    .weights()
                    .iter()
                    .map(|w| format!("{w:.6}"))
                    .collect::<Vec<_>>(),
                ", "
            )
        ),
    );

    let chain = spec.assemble()?;
    c.add(
        "assembled",
        true,
        format!("{} states, row sums within 1e-12", chain.len()),
    );

    let rev = spec.reversibility();
    let scan = check_detailed_balance(&chain, &spec.product_measure())?;
    let scan_holds = scan.holds_within(EXACT_TOL);
    c.add(
        "reversibility",
        rev.reversible() == scan_holds,
        format!(
            "condition {} (non-symmetric below the top: [{}]); detailed balance max violation {:.3e}",
            if rev.reversible() { "holds" } else { "fails" },
            join(&rev.violating.iter().map(|k| k + 1).collect::<Vec<_>>(), ","),
            scan.max_violation
        ),
    );

    let dims: usize = spec.eigenblocks().iter().map(|b| b.dimension).sum();
    c.add(
        "dimensions",
        dims == chain.len(),
        format!("Σ dim W_(S,j) = {dims}"),
    );

    if rev.reversible() {
        let dev = dense_deviation(&spec, &chain)?;
        c.add(
            "spectrum",
            dev <= PIPELINE_TOL,
            format!("analytic vs dense deviation {dev:.3e}"),
        );

        let s = spec.spectral_matrices()?;
        let (pu, orth) = s.contract_residuals(&chain);
        c.add(
            "contracts",
            pu <= PIPELINE_TOL && orth <= PIPELINE_TOL,
            format!("|PU-UΔ| {pu:.3e}, |UᵀDU-I| {orth:.3e}"),
        );

        let eval = spec.kstep()?;
        let power = chain.power(5);
        let mut worst = 0.0f64;
        for (y, state) in spec.shape().states().enumerate() {
            worst = worst.max((eval.probability_from_origin(&state, 5)? - power[(0, y)]).abs());
        }
        c.add(
            "kstep",
            worst <= PIPELINE_TOL,
            format!("origin row at k=5 vs P^5, deviation {worst:.3e}"),
        );

        let erg = spec.ergodicity()?;
        if erg.all_components_ergodic() {
            c.add(
                "ergodicity",
                erg.unit_multiplicity == Some(1) && erg.has_minus_one == Some(false),
                format!(
                    "eigenvalue 1 multiplicity {:?}, -1 present {:?}",
                    erg.unit_multiplicity, erg.has_minus_one
                ),
            );
        } else {
            c.skip("ergodicity", "some component is periodic");
        }
    } else {
        for name in ["spectrum", "contracts", "kstep", "ergodicity"] {
            c.skip(name, "chain is not reversible");
        }
    }

    match first_crested_partition(&poset) {
        Some(part) => c.add(
            "first-crested",
            true,
            format!(
                "labeling {} gives C={} N={}",
                join(&part.labeling.iter().map(|v| v + 1).collect::<Vec<_>>(), ","),
                part.crossed,
                part.nested
            ),
        ),
        None => c.add("first-crested", true, "no admissible labeling"),
    }

    if doc.mode == Mode::Insect {
        let insect = doc.insect(rule)?;
        insect_checks(&mut c, &insect, &chain, &doc.base_point())?;
    }
    Ok(finish(input, c, None))
}

fn insect_checks(c: &mut Checks, insect: &InsectChain, chain: &Chain, x0: &[usize]) -> CliResult<()> {
    let sum = insect.coefficients().weight_total();
    c.add(
        "insect-weights",
        insect.coefficients().sums_to_one(),
        format!("Σ p_i = {sum} exactly"),
    );

    let direct = insect.direct_transition_matrix()?;
    let dev = (direct.matrix() - chain.matrix()).amax();
    c.add(
        "insect-direct",
        dev <= EXACT_TOL,
        format!("crested vs direct formula {dev:.3e}"),
    );

    let poset = insect.poset();
    let sizes = insect.sizes();
    let total: usize = module_decomposition(poset, sizes)?.iter().map(|(_, d)| d).sum();
    c.add("modules", total == chain.len(), format!("Σ dim W_S = {total}"));

    let mut worst = 0.0f64;
    let mut count = 0;
    for s in poset.antichains() {
        if s.iter().any(|i| sizes[i] < 2) {
            continue;
        }
        let phi = spherical(poset, sizes, s, x0)?;
        let r = verify_spherical(&phi, insect)?;
        worst = worst
            .max(r.eigen_residual)
            .max(r.base_error)
            .max(r.module_residual);
        count += 1;
    }
    c.add(
        "spherical",
        worst <= PIPELINE_TOL,
        format!("{count} functions, max residual {worst:.3e}"),
    );

    if poset.len() <= MAX_AUTOMORPHISM_ELEMENTS {
        let r = insect.eigenvalue_symmetry_check()?;
        c.add(
            "symmetry",
            r.violations.is_empty(),
            format!(
                "{} automorphisms, {} forced pairs, {} accidental",
                r.automorphisms,
                r.forced.len(),
                r.accidental.len()
            ),
        );
    } else {
        c.skip("symmetry", "poset too large for automorphism search");
    }
    Ok(())
}

fn finish(input: &Input, mut c: Checks, fatal: Option<(&str, String)>) -> Outcome {
    if let Some((name, msg)) = fatal {
        c.add(name, false, msg);
    }
    let mut out = header(input);
    for l in &c.lines {
        out.push_str(l);
        out.push('\n');
    }
    writeln!(out, "verdict: {}", if c.failed { "FAIL" } else { "PASS" }).unwrap();
    Outcome {
        text: out,
        code: if c.failed { 3 } else { 0 },
    }
}
