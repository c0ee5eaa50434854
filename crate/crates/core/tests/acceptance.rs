//! Acceptance suite. Prints one line per criterion and fails if any
//! criterion fails other than those listed in `KNOWN_UNATTAINABLE`.
//!
//! Lines go straight to the process stdout so that they show up without
//! `--nocapture`.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use probdep::conditional::{assess_cpafd, assess_cpfd};
use probdep::dataio::{generate, write_relation, GeneratorSpec};
use probdep::miner::{mine, MinedDependency, MinerConfig};
use probdep::pafd_estimators::{
    assess_pafd_mc, assess_pafd_unioned, estimate_projection, McConfig,
};
use probdep::pfd_exact::assess_pfd;
use probdep::model::Projection;
use probdep::worlds_oracle::{afd_confidence, enumerate_worlds, oracle_confidence, DEFAULT_WORLD_CAP};
use probdep::{
    AttrSet, AttributeSchema, ConfidenceReport, DependencyKind, DependencySpec, Error, Marker,
    OptionAssignment, PatternTableau, ProbRelation, ProbTuple,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{counterexample, d1, domain_of, random_relation, random_tableau, random_xy, tableau, Limits};

/// Exactness bound for the pruned search and the ordering checks.
const EXACT_TOL: f64 = 1e-9;
/// Values that are exact by construction (zero-variance sampling included).
const PINNED_TOL: f64 = 1e-12;
/// Allowed distance of a Monte Carlo estimate from a known value.
const MC_TOL: f64 = 0.01;

/// Sub-checks that cannot hold as literally stated; see the README.
const KNOWN_UNATTAINABLE: &[&str] = &["4c"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail,
}

struct Suite {
    results: Vec<(String, Verdict)>,
}

impl Suite {
    fn record(&mut self, id: &str, ok: bool, detail: String) {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        let tag = match (verdict, KNOWN_UNATTAINABLE.contains(&id)) {
            (Verdict::Pass, _) => "PASS",
            (Verdict::Fail, true) => "FAIL (known)",
            (Verdict::Fail, false) => "FAIL",
        };
        let line = format!("acceptance criterion {id}: {tag}: {detail}\n");
        let mut out = std::io::stdout().lock();
        out.write_all(line.as_bytes()).unwrap();
        out.flush().unwrap();
        self.results.push((id.to_string(), verdict));
    }
}

fn spec(kind: DependencyKind, x: &AttrSet, y: &AttrSet, t: Option<&PatternTableau>) -> DependencySpec {
    DependencySpec::new(kind, x.clone(), y.clone(), t.cloned()).unwrap()
}

fn oracle(r: &ProbRelation, dep: &DependencySpec) -> f64 {
    oracle_confidence(r, dep, DEFAULT_WORLD_CAP).unwrap().value()
}

struct Instance {
    pfd: f64,
    pafd: f64,
    cpfd_any: f64,
    cpfd_wild_y: f64,
    some_world_fails: bool,
}

/// Criteria 1 and 4 share the random instances.
fn oracle_equivalence(suite: &mut Suite) -> Vec<Instance> {
    const N: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let start = Instant::now();
    let mut worst_pfd: f64 = 0.0;
    let mut worst_cpfd: f64 = 0.0;
    let mut instances = Vec::with_capacity(N);
    let mut y_constant_tableaux = 0;
    for _ in 0..N {
        let r = random_relation(&mut rng, Limits::default());
        let (x, y) = random_xy(&mut rng, &r);
        let dom = domain_of(&r);
        let t_any = random_tableau(&mut rng, &x, &y, dom, false);
        let t_wild = random_tableau(&mut rng, &x, &y, dom, true);
        if (0..t_any.rows().len()).any(|i| t_any.y_patterns(i).iter().any(|p| *p != probdep::Pattern::Wildcard)) {
            y_constant_tableaux += 1;
        }

        let pfd = oracle(&r, &spec(DependencyKind::Pfd, &x, &y, None));
        let pafd = oracle(&r, &spec(DependencyKind::Pafd, &x, &y, None));
        let cpfd_any = oracle(&r, &spec(DependencyKind::Cpfd, &x, &y, Some(&t_any)));
        let cpfd_wild_y = oracle(&r, &spec(DependencyKind::Cpfd, &x, &y, Some(&t_wild)));

        worst_pfd = worst_pfd.max((assess_pfd(&r, &x, &y).unwrap().value() - pfd).abs());
        worst_cpfd = worst_cpfd.max((assess_cpfd(&r, &x, &y, &t_any).unwrap().value() - cpfd_any).abs());
        worst_cpfd = worst_cpfd.max((assess_cpfd(&r, &x, &y, &t_wild).unwrap().value() - cpfd_wild_y).abs());

        let some_world_fails = enumerate_worlds(&r, DEFAULT_WORLD_CAP)
            .unwrap()
            .any(|w| w.prob > 0.0 && !probdep::worlds_oracle::fd_holds(&w, &x, &y));
        instances.push(Instance {
            pfd,
            pafd,
            cpfd_any,
            cpfd_wild_y,
            some_world_fails,
        });
    }
    let elapsed = start.elapsed();
    suite.record(
        "1",
        worst_pfd <= EXACT_TOL && worst_cpfd <= EXACT_TOL && elapsed < Duration::from_secs(120),
        format!(
            "{N} random relations ({y_constant_tableaux} tableaux with Y constants): max |pfd - oracle| = {worst_pfd:.2e}, \
             max |cpfd - oracle| = {worst_cpfd:.2e} (tol {EXACT_TOL:.0e}), {:.1} s (limit 120 s)",
            elapsed.as_secs_f64()
        ),
    );
    instances
}

fn orderings(suite: &mut Suite, instances: &[Instance]) {
    let thm1_weak = instances.iter().filter(|i| i.pafd < i.pfd - EXACT_TOL).count();
    let strict_cases: Vec<&Instance> = instances
        .iter()
        .filter(|i| i.pfd < 1.0 - EXACT_TOL && i.some_world_fails)
        .collect();
    let thm1_strict = strict_cases.iter().filter(|i| i.pafd <= i.pfd).count();
    suite.record(
        "4a",
        thm1_weak == 0 && thm1_strict == 0,
        format!(
            "pAFD >= pFD on {} instances: {thm1_weak} violations; strictly greater on all {} with a failing world: {thm1_strict} violations",
            instances.len(),
            strict_cases.len()
        ),
    );
    let thm2_scoped = instances.iter().filter(|i| i.cpfd_wild_y < i.pfd - EXACT_TOL).count();
    suite.record(
        "4b",
        thm2_scoped == 0,
        format!(
            "CpFD >= pFD for consistent tableaux that only select rows (Y all `_`): {thm2_scoped} violations in {}",
            instances.len()
        ),
    );
    let thm2_literal = instances.iter().filter(|i| i.cpfd_any < i.pfd - EXACT_TOL).count();
    let d1 = d1();
    let (x, y) = (AttrSet::parse("Color"), AttrSet::parse("Type"));
    let red_star = assess_cpfd(&d1, &x, &y, &tableau("Color", "Type", &[&["Red", "Star"]])).unwrap().value();
    suite.record(
        "4c",
        thm2_literal == 0,
        format!(
            "CpFD >= pFD for consistent tableaux with Y constants: {thm2_literal} violations in {}; \
             the D1 golden itself has CpFD {red_star} < pFD 0.75, since a Y constant can fail a world the FD holds in",
            instances.len()
        ),
    );
}

fn d1_goldens(suite: &mut Suite) {
    let d1 = d1();
    let (x, y) = (AttrSet::parse("Color"), AttrSet::parse("Type"));
    let red_star = tableau("Color", "Type", &[&["Red", "Star"]]);
    let red_any = tableau("Color", "Type", &[&["Red", "_"]]);
    let cases: [(&str, f64, f64, f64); 4] = [
        ("pFD", 0.75, oracle(&d1, &spec(DependencyKind::Pfd, &x, &y, None)), assess_pfd(&d1, &x, &y).unwrap().value()),
        (
            "pAFD",
            0.875,
            oracle(&d1, &spec(DependencyKind::Pafd, &x, &y, None)),
            assess_pafd_mc(&d1, &x, &y, &McConfig { epsilon: 0.002, ..McConfig::with_seed(1) }).unwrap().value(),
        ),
        (
            "CpFD (Red,Star)",
            0.5,
            oracle(&d1, &spec(DependencyKind::Cpfd, &x, &y, Some(&red_star))),
            assess_cpfd(&d1, &x, &y, &red_star).unwrap().value(),
        ),
        (
            "CpFD (Red,_)",
            0.75,
            oracle(&d1, &spec(DependencyKind::Cpfd, &x, &y, Some(&red_any))),
            assess_cpfd(&d1, &x, &y, &red_any).unwrap().value(),
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, golden, by_oracle, fast) in cases {
        let tol = if name == "pAFD" { MC_TOL } else { PINNED_TOL };
        ok &= (by_oracle - golden).abs() <= PINNED_TOL && (fast - golden).abs() <= tol;
        parts.push(format!("{name} golden {golden} oracle {by_oracle} fast {fast:.6}"));
    }
    suite.record("2", ok, parts.join("; "));
}

fn counterexample_pins(suite: &mut Suite) {
    let r = counterexample();
    let (x, y) = (AttrSet::parse("A"), AttrSet::parse("B,C"));
    let b2 = tableau("A", "B,C", &[&["_", "b2", "_"]]);
    let world = enumerate_worlds(&r, 1).unwrap().next().unwrap();
    let per_world = afd_confidence(&world, &x, &y);
    let pafd_mc = assess_pafd_mc(&r, &x, &y, &McConfig::default()).unwrap();
    let cpafd_oracle = oracle(&r, &spec(DependencyKind::Cpafd, &x, &y, Some(&b2)));
    let cpafd_mc = assess_cpafd(&r, &x, &y, &b2, &McConfig::default()).unwrap();
    let ok = (per_world - 0.50).abs() <= PINNED_TOL
        && (pafd_mc.value() - 0.50).abs() <= PINNED_TOL
        && (cpafd_oracle - 0.02).abs() <= PINNED_TOL
        && (cpafd_mc.value() - 0.02).abs() <= PINNED_TOL
        && cpafd_mc.std_error() == Some(0.0);
    suite.record(
        "3",
        ok,
        format!(
            "pAFD per world {per_world} (MC {}), CpAFD oracle {cpafd_oracle} MC {} with std error {:?}",
            pafd_mc.value(),
            cpafd_mc.value(),
            cpafd_mc.std_error()
        ),
    );
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn mc_convergence(suite: &mut Suite) {
    let r = generate(&GeneratorSpec {
        n_tuples: 10_000,
        domain_cardinality: 8,
        noise: 0.1,
        seed: 5,
        ..GeneratorSpec::default()
    })
    .unwrap();
    let (x, y) = (AttrSet::parse("A"), AttrSet::parse("B"));
    let proj = Projection::new(&r, &x, &y).unwrap();
    let cfg = McConfig::with_seed(1);
    let run = estimate_projection(&proj, &cfg).unwrap();
    let half_width = 1.96 * run.report.std_error().unwrap();
    let used = run.report.samples_used().unwrap();

    let reference = estimate_projection(&proj, &McConfig::fixed(u64::MAX, 40_000)).unwrap().report.value();
    const RUNS: u64 = 48;
    const LEN: u64 = 1024;
    let checkpoints: Vec<u64> = (4..=10).map(|e| 1u64 << e).collect();
    let mut sq = vec![0.0; checkpoints.len()];
    for seed in 0..RUNS {
        let trace = estimate_projection(&proj, &McConfig::fixed(1000 + seed, LEN)).unwrap().running_means;
        for (i, &k) in checkpoints.iter().enumerate() {
            sq[i] += (trace[k as usize - 1] - reference).powi(2);
        }
    }
    let lx: Vec<f64> = checkpoints.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = sq.iter().map(|s| (s / RUNS as f64).sqrt().ln()).collect();
    let slope = least_squares_slope(&lx, &ly);
    suite.record(
        "5",
        used <= 1000 && half_width < 0.005 && (slope + 0.5).abs() <= 0.1,
        format!(
            "10^4 tuples: stopped after {used} samples with 95% half-width {half_width:.2e} (< 5e-3); \
             RMS error vs {reference:.5} over {RUNS} runs has log-log slope {slope:.3} (want -0.5 +- 0.1)"
        ),
    );
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn pruning_trend(suite: &mut Suite) {
    let (x, y) = (AttrSet::parse("A"), AttrSet::parse("B"));
    let gen = |n, m, noise| {
        generate(&GeneratorSpec {
            n_tuples: n,
            domain_cardinality: m,
            noise,
            seed: 11,
            ..GeneratorSpec::default()
        })
        .unwrap()
    };
    let mut growth = Vec::new();
    for n in [12, 14, 16] {
        let r = gen(n, 4, 0.1);
        let dep = spec(DependencyKind::Pfd, &x, &y, None);
        let (_, t_oracle) = timed(|| oracle(&r, &dep));
        let (_, t_pruned) = timed(|| assess_pfd(&r, &x, &y).unwrap());
        growth.push(format!(
            "n={n}: oracle {:.1} ms, pruned {:.3} ms",
            t_oracle.as_secs_f64() * 1e3,
            t_pruned.as_secs_f64() * 1e3
        ));
    }
    let r25 = gen(25, 4, 0.1);
    let worlds = r25.world_count();
    let capped = matches!(
        oracle_confidence(&r25, &spec(DependencyKind::Pfd, &x, &y, None), 1_000_000),
        Err(Error::TooManyWorlds { .. })
    );
    let (v25, t25) = timed(|| assess_pfd(&r25, &x, &y).unwrap().value());
    let mut big = Vec::new();
    let mut big_ok = true;
    for noise in [0.0, 0.05] {
        let r = gen(10_000, 8, noise);
        let (v, t) = timed(|| assess_pfd(&r, &x, &y).unwrap().value());
        big_ok &= t < Duration::from_secs(10);
        big.push(format!("noise {noise}: {v:.3e} in {:.1} ms", t.as_secs_f64() * 1e3));
    }
    suite.record(
        "6",
        worlds > 1_000_000 && capped && t25 < Duration::from_millis(100) && big_ok,
        format!(
            "25 tuples: {worlds} worlds, oracle refused at cap 10^6: {capped}, pruned search {v25:.4} in {:.3} ms (< 100 ms); \
             10^4 tuples, m=8: {} (< 10 s); growth {}",
            t25.as_secs_f64() * 1e3,
            big.join(", "),
            growth.join(", ")
        ),
    );
}

fn noise_robustness(suite: &mut Suite) {
    let (x, y) = (AttrSet::parse("A"), AttrSet::parse("B"));
    let noises = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5];
    let seeds = 5u64;
    let mut pafd = vec![0.0; noises.len()];
    let mut pfd = vec![0.0; noises.len()];
    for (i, &noise) in noises.iter().enumerate() {
        for seed in 0..seeds {
            let r = generate(&GeneratorSpec {
                n_tuples: 100,
                domain_cardinality: 4,
                noise,
                seed,
                ..GeneratorSpec::default()
            })
            .unwrap();
            pfd[i] += assess_pfd(&r, &x, &y).unwrap().value() / seeds as f64;
            let cfg = McConfig {
                epsilon: 0.002,
                ..McConfig::with_seed(seed)
            };
            pafd[i] += assess_pafd_mc(&r, &x, &y, &cfg).unwrap().value() / seeds as f64;
        }
    }
    let monotone = pafd.windows(2).all(|w| w[1] <= w[0]);
    let at5 = 1;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    suite.record(
        "7",
        pfd[at5] < 0.1 && pafd[at5] >= 0.85 && monotone,
        format!(
            "100 tuples, 5 seeds, noise {noises:?}: mean pFD [{}], mean pAFD [{}]; at noise 0.05 pFD < 0.1 and pAFD >= 0.85; pAFD non-increasing: {monotone}",
            fmt(&pfd),
            fmt(&pafd)
        ),
    );
}

/// Two certain conflicting rows plus four rows that exist with
/// probability 1/4 each and never conflict. Large worlds score higher, so
/// the ratio of expected masses overshoots the expected ratio.
fn over_estimation_fixture() -> ProbRelation {
    let schema = AttributeSchema::new(["X", "Y"], None).unwrap();
    let mut tuples = vec![
        ProbTuple::new("base1", vec![OptionAssignment::with_values(1.0, ["a", "1"])]),
        ProbTuple::new("base2", vec![OptionAssignment::with_values(1.0, ["a", "2"])]),
    ];
    for i in 0..4 {
        tuples.push(ProbTuple::new(
            format!("extra{i}"),
            vec![
                OptionAssignment::with_values(0.25, [format!("b{i}"), "1".to_string()]),
                OptionAssignment::with_marker(0.75, Marker::Ignored),
            ],
        ));
    }
    ProbRelation::from_tuples(schema, tuples)
}

fn estimator_divergence(suite: &mut Suite) {
    let gap = |r: &ProbRelation, x: &str, y: &str| {
        let (x, y) = (AttrSet::parse(x), AttrSet::parse(y));
        let u = assess_pafd_unioned(r, &x, &y).unwrap().value();
        let o = oracle(r, &spec(DependencyKind::Pafd, &x, &y, None));
        (u, o, u - o)
    };
    let (u1, o1, g1) = gap(&d1(), "Color", "Type");
    let over = over_estimation_fixture();
    assert!(over.validate().is_empty());
    let (u2, o2, g2) = gap(&over, "X", "Y");
    suite.record(
        "8",
        g1.abs() > 0.05 && g1 < 0.0 && g2 > 0.0,
        format!(
            "D1: unioned {u1:.4} vs oracle {o1:.4} (gap {g1:+.4}, under-estimate, |gap| > 0.05); \
             optional-rows fixture: unioned {u2:.4} vs oracle {o2:.4} (gap {g2:+.4}, over-estimate)"
        ),
    );
}

fn names(found: &[MinedDependency]) -> Vec<String> {
    found.iter().map(|d| d.dependency().to_string()).collect()
}

fn mining(suite: &mut Suite) {
    let runs = 20u64;
    let mut hits = 0;
    let mut nested = 0;
    for seed in 0..runs {
        let r = generate(&GeneratorSpec {
            n_tuples: 100,
            domain_cardinality: 4,
            noise: 0.05,
            seed: 100 + seed,
            extra_attrs: vec!["C".into()],
            ..GeneratorSpec::default()
        })
        .unwrap();
        let cfg = |s: f64| MinerConfig {
            confidence_threshold: 0.8,
            specificity_threshold: s,
            mc: McConfig::with_seed(seed),
            ..MinerConfig::default()
        };
        let found = names(&mine(&r, &cfg(0.6)).unwrap());
        if found.iter().any(|d| d == "A~>B") && !found.iter().any(|d| d == "C~>B") {
            hits += 1;
        }
        let low = mine(&r, &cfg(0.3)).unwrap();
        let high = mine(&r, &cfg(0.6)).unwrap();
        if low.iter().all(|d| high.contains(d)) {
            nested += 1;
        }
    }
    suite.record(
        "9",
        hits * 100 >= 95 * runs && nested == runs,
        format!("A~>B found and C~>B omitted in {hits}/{runs} runs (need 95%); threshold 0.3 results within 0.6 results in {nested}/{runs} runs"),
    );
}

fn report_bytes(r: &ConfidenceReport) -> Vec<u8> {
    serde_json::to_vec(r).unwrap()
}

fn determinism(suite: &mut Suite) {
    let rel = generate(&GeneratorSpec {
        n_tuples: 60,
        domain_cardinality: 4,
        noise: 0.1,
        seed: 3,
        extra_attrs: vec!["C".into()],
        ..GeneratorSpec::default()
    })
    .unwrap();
    let small = d1();
    let (x, y) = (AttrSet::parse("A"), AttrSet::parse("B"));
    let t = tableau("A", "B", &[&["a1", "_"], &["a2", "_"]]);
    let everything = || {
        let mut out = Vec::new();
        let mc = McConfig::with_seed(9);
        out.extend(report_bytes(&assess_pfd(&rel, &x, &y).unwrap()));
        out.extend(report_bytes(&assess_cpfd(&rel, &x, &y, &t).unwrap()));
        out.extend(report_bytes(&assess_pafd_mc(&rel, &x, &y, &mc).unwrap()));
        out.extend(report_bytes(&assess_cpafd(&rel, &x, &y, &t, &mc).unwrap()));
        out.extend(report_bytes(&assess_pafd_unioned(&rel, &x, &y).unwrap()));
        let (cx, cy) = (AttrSet::parse("Color"), AttrSet::parse("Type"));
        out.extend(report_bytes(
            &oracle_confidence(&small, &spec(DependencyKind::Pafd, &cx, &cy, None), DEFAULT_WORLD_CAP).unwrap(),
        ));
        for d in mine(&rel, &MinerConfig { mc: McConfig::with_seed(4), ..MinerConfig::default() }).unwrap() {
            out.extend(d.dependency().to_string().bytes());
            out.extend(report_bytes(&d.report));
        }
        let mut g = Vec::new();
        write_relation(&generate(&GeneratorSpec { seed: 8, ..GeneratorSpec::default() }).unwrap(), &mut g).unwrap();
        out.extend(g);
        out
    };
    let baseline = everything();
    let mut identical = true;
    let mut variants = Vec::new();
    for threads in [1, 2, 4, 1] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        identical &= pool.install(everything) == baseline;
        variants.push(threads.to_string());
    }
    suite.record(
        "10",
        identical,
        format!(
            "assess (pfd, cpfd, pafd mc, cpafd mc, union), oracle, mine and gen output ({} bytes) identical across repeated runs with {} threads",
            baseline.len(),
            variants.join("/")
        ),
    );
}

#[test]
fn acceptance_criteria() {
    let mut suite = Suite { results: Vec::new() };
    let instances = oracle_equivalence(&mut suite);
    d1_goldens(&mut suite);
    counterexample_pins(&mut suite);
    orderings(&mut suite, &instances);
    mc_convergence(&mut suite);
    pruning_trend(&mut suite);
    noise_robustness(&mut suite);
    estimator_divergence(&mut suite);
    mining(&mut suite);
    determinism(&mut suite);
    let unexpected: Vec<&String> = suite
        .results
        .iter()
        .filter(|(id, v)| *v == Verdict::Fail && !KNOWN_UNATTAINABLE.contains(&id.as_str()))
        .map(|(id, _)| id)
        .collect();
    assert!(unexpected.is_empty(), "failed criteria: {unexpected:?}");
}
