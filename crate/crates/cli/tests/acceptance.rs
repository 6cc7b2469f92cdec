//! Acceptance gate: one PASS/FAIL line per criterion. Exact arithmetic throughout; the only
//! tolerances are the wall-clock budgets, each measured as the best of five runs.

use std::process::Command;
use std::time::{Duration, Instant};

use cyl_floer::analysis::Analysis;
use cyl_floer::bound::{reduce, theorem_bound, TargetPolicy};
use cyl_floer::fixtures;
use cyl_floer::instance::point_name;
use cyl_floer::rational::Rational;
use cyl_floer::suite::{run_corpus, CorpusConfig, CorpusReport, SuiteOptions};
use cyl_floer::surgery::{chain_maps, check_chain_identities, find_leaves, Case};
use cyl_floer_oracles::{brute_barcode, telescoped_actions};

const WRAPS: u32 = 3;
const CORPUS_COUNT: usize = 500;
const CORPUS_MAX_N: usize = 7;
const CORPUS_SEED: u64 = 9;
const BASE_BUDGET: Duration = Duration::from_millis(1);
const ZIGZAG_BUDGET: Duration = Duration::from_millis(10);
const CORPUS_BUDGET: Duration = Duration::from_secs(300);

type Check = Result<String, String>;

fn r(n: i64) -> Rational {
    Rational::from_int(n)
}

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn best_of_five(mut f: impl FnMut() -> Result<(), String>) -> Result<Duration, String> {
    let mut best = Duration::MAX;
    for _ in 0..5 {
        let t = Instant::now();
        f()?;
        best = best.min(t.elapsed());
    }
    Ok(best)
}

fn criterion_1() -> Check {
    let inst = fixtures::base(r(1));
    let run = || -> Result<(), String> {
        let a = Analysis::new(&inst, WRAPS).map_err(|e| e.to_string())?;
        let t = reduce(&inst, TargetPolicy::default(), &Rational::zero(), WRAPS).map_err(|e| e.to_string())?;
        expect("∂ = 0", a.complex.boundary.is_zero(), true)?;
        expect("HF rank", a.complex.homology_rank(), 2)?;
        expect("γ", &a.barcode.gamma, &r(1))?;
        expect("theorem bound", &t.theorem_bound, &r(1))?;
        expect("constructive cost", &t.constructive_cost, &r(1))?;
        // Oracle: the two generators are both cycles, born at actions 0 and 1.
        expect(
            "oracle barcode",
            brute_barcode(&a.complex.counts, &telescoped_actions(&inst)),
            vec![(r(0), None), (r(1), None)],
        )
    };
    let took = best_of_five(run)?;
    if took >= BASE_BUDGET {
        return Err(format!("took {took:?}, budget {BASE_BUDGET:?}"));
    }
    Ok(format!("∂ = 0, rank 2, γ = bound = cost = 1 in {took:?}"))
}

fn criterion_2() -> Check {
    let inst = fixtures::zigzag();
    let half = Rational::new(1, 2);
    let run = || -> Result<(), String> {
        let a = Analysis::new(&inst, WRAPS).map_err(|e| e.to_string())?;
        let spectrum = vec![r(0), r(1), r(-1), r(2)];
        expect("spectrum (oracle)", telescoped_actions(&inst), spectrum.clone())?;
        expect("spectrum", a.actions.values.clone(), spectrum)?;

        let ones = [(1, 0), (1, 2), (3, 2), (3, 0)];
        for q in 0..4 {
            for p in 0..4 {
                let want = u32::from(ones.contains(&(q, p)));
                expect(
                    &format!("n({}, {})", point_name(q), point_name(p)),
                    a.complex.n(q, p),
                    want,
                )?;
            }
        }
        let bars = vec![(r(-1), None), (r(0), Some(r(1))), (r(2), None)];
        expect(
            "barcode (oracle)",
            brute_barcode(&a.complex.counts, &a.actions.values),
            bars.clone(),
        )?;
        expect("barcode", a.barcode.intervals(), bars)?;
        expect("β", a.barcode.betas.clone(), vec![r(1)])?;
        expect("γ", &a.barcode.gamma, &r(3))?;
        // Oracle: 2·β₁ + γ.
        expect("theorem bound", theorem_bound(&a.barcode), r(2) * &r(1) + r(3))?;

        let t = reduce(&inst, TargetPolicy::default(), &Rational::zero(), WRAPS).map_err(|e| e.to_string())?;
        expect("steps", t.steps.len(), 1)?;
        let ev = &t.steps[0].event;
        expect("leaf", ev.leaf.face.as_str(), "B1")?;
        expect("corners", (ev.leaf.q_bar, ev.leaf.p_bar), (1, 0))?;
        expect("leaf area", &ev.leaf.area, &r(1))?;
        expect("case", ev.leaf.case, Case::Case2)?;
        expect("k", ev.k, 3)?;
        expect("γ′", &t.final_gamma, &r(4))?;
        expect("constructive cost", &t.constructive_cost, &r(5))?;
        expect("|γ − γ′|", &t.steps[0].stability.gamma_change, &r(1))?;
        if t.steps[0].stability.gamma_change > ev.leaf.area || !t.steps[0].stability.ok() {
            return Err("stability bound fails".into());
        }

        let leaves = find_leaves(&inst).map_err(|e| e.to_string())?;
        let b1 = leaves.iter().find(|l| l.face == "B1").ok_or("no leaf B1")?;
        let d = cyl_floer::surgery::delete_leaf(&inst, b1, None, &Rational::zero()).map_err(|e| e.to_string())?;
        // Oracle: Case 2 with j = 1, k = 3 shifts s3 by −a/2 and s4 by +a/2.
        let by_hand = vec![&r(-1) - &half, &r(2) + &half];
        expect("post-deletion actions", d.actions.values.clone(), by_hand.clone())?;
        let fresh = telescoped_actions(&d.instance);
        expect(
            "post-deletion differences (oracle)",
            &fresh[1] - &fresh[0],
            &by_hand[1] - &by_hand[0],
        )?;
        // n′(s4, s3) = n(s4, s3) + n(s4, p̄)·n(q̄, s3) with q̄ = s2, p̄ = s1.
        let updated = (a.complex.n(3, 2) + a.complex.n(3, 0) * a.complex.n(1, 2)) % 2;
        expect("n′(s4, s3) by the update", updated, 0)?;
        let after = Analysis::with_actions(&d.instance, d.actions.clone(), WRAPS).map_err(|e| e.to_string())?;
        let (s3, s4) = (
            d.event.relabel[2].ok_or("s3 removed")?,
            d.event.relabel[3].ok_or("s4 removed")?,
        );
        expect("n′(s4, s3) enumerated", after.complex.n(s4, s3) % 2, 0)?;
        let maps = chain_maps(&a.complex, &d.event);
        check_chain_identities(&maps, &a.complex, &after.complex, &d.event).map_err(|e| e.to_string())
    };
    let took = best_of_five(run)?;
    if took >= ZIGZAG_BUDGET {
        return Err(format!("took {took:?}, budget {ZIGZAG_BUDGET:?}"));
    }
    Ok(format!(
        "spectrum, lunes, barcode, bound 5, reduction via B1 to γ′ = 4, all exact, in {took:?}"
    ))
}

fn criterion_3() -> Check {
    let leaves = find_leaves(&fixtures::three_leaves()).map_err(|e| e.to_string())?;
    let mut pairs: Vec<(usize, usize)> = leaves
        .iter()
        .map(|l| (l.q_bar.min(l.p_bar) + 1, l.q_bar.max(l.p_bar) + 1))
        .collect();
    pairs.sort();
    expect("leaf corner pairs", pairs, vec![(3, 4), (5, 6), (6, 7)])?;
    Ok("3 leaves with corners {s3,s4}, {s5,s6}, {s6,s7}".into())
}

fn tally_clean(report: &CorpusReport, names: &[&str]) -> Check {
    let mut passes = 0;
    for name in names {
        let t = report.tally(name).ok_or_else(|| format!("unknown invariant {name}"))?;
        if t.fail > 0 {
            let f = report.failures.iter().find(|f| f.invariant == *name).unwrap();
            return Err(format!(
                "{name}: {} failures, first #{} (seed {}): {}",
                t.fail, f.index, f.seed, f.detail
            ));
        }
        if t.pass == 0 {
            return Err(format!("{name}: never exercised"));
        }
        passes += t.pass;
    }
    Ok(format!(
        "{} invariants, 0 violations ({passes} instance-level passes)",
        names.len()
    ))
}

fn corpus(count: usize, epsilon: Rational) -> Result<(CorpusReport, Duration), String> {
    let cfg = CorpusConfig {
        count,
        max_n: CORPUS_MAX_N,
        seed: CORPUS_SEED,
        area_bound: r(4),
        jobs: 1,
        options: SuiteOptions {
            max_wraps: WRAPS,
            epsilon,
            policy: TargetPolicy::default(),
        },
    };
    let t = Instant::now();
    let report = run_corpus(&cfg).map_err(|e| e.to_string())?;
    Ok((report, t.elapsed()))
}

fn criterion_4(report: &CorpusReport, took: Duration) -> Check {
    tally_clean(report, &["generation"])?;
    let summary = tally_clean(
        report,
        &[
            "d-squared",
            "homology-rank",
            "bar-counts",
            "bar-endpoints",
            "lune-count",
            "lune-area",
            "lune-leaf",
            "neighbor-lunes",
            "beta1-gamma",
            "rank-oracle",
            "index-windows",
            "shortest-bar-leaf",
            "action-gap",
            "wrap-stability",
        ],
    )?;
    if took >= CORPUS_BUDGET {
        return Err(format!("took {took:?}, budget {CORPUS_BUDGET:?}"));
    }
    Ok(format!(
        "{} instances (n ≤ {CORPUS_MAX_N}, seed {CORPUS_SEED}): {summary} in {took:.1?}",
        report.count
    ))
}

const PER_DELETION: &[&str] = &[
    "chain-identities",
    "action-shifts",
    "stability",
    "delta-matching",
    "defect-zero",
    "round-trip",
];

fn criterion_5(plain: &CorpusReport, inflated: &CorpusReport) -> Check {
    let a = tally_clean(plain, PER_DELETION)?;
    let b = tally_clean(inflated, PER_DELETION).map_err(|e| format!("ε = 1/64: {e}"))?;
    Ok(format!("ε = 0: {a}; ε = 1/64: {b}"))
}

fn criterion_6(plain: &CorpusReport, inflated: &CorpusReport) -> Check {
    let a = tally_clean(plain, &["reduction", "bound-chain"])?;
    let b = tally_clean(inflated, &["reduction", "bound-chain"]).map_err(|e| format!("ε = 1/64: {e}"))?;
    Ok(format!("ε = 0: {a}; ε = 1/64: {b}"))
}

fn cli(args: &[&str], dir: &std::path::Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cyl-floer"))
        .args(args)
        .current_dir(dir)
        .env_remove("CYL_FLOER_MAX_WRAPS")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn criterion_7() -> Check {
    let dirs = [
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    ];
    let mut runs = Vec::new();
    for (i, dir) in dirs.iter().enumerate() {
        let d = dir.path();
        let mut outputs = Vec::new();
        let inst = cli(&["gen", "--n", "5", "--seed", "42"], d)?;
        std::fs::write(d.join("g.json"), &inst).map_err(|e| e.to_string())?;
        outputs.push(inst);
        for args in [
            &["barcode", "g.json"][..],
            &["bound", "g.json"],
            &["reduce", "g.json", "--trace", "t.json"],
            &["render", "g.json"],
            &["barcode", "g.json", "-o", "b.json"],
            &["render", "b.json"],
            &["lunes", "g.json"],
        ] {
            outputs.push(cli(args, d)?);
        }
        outputs.push(std::fs::read(d.join("t.json")).map_err(|e| e.to_string())?);
        let jobs = if i == 0 { "1" } else { "3" };
        outputs.push(cli(
            &[
                "corpus", "--count", "40", "--max-n", "5", "--seed", "3", "--jobs", jobs, "--format", "json",
            ],
            d,
        )?);
        runs.push(outputs);
    }
    if runs[0] != runs[1] {
        let which = runs[0].iter().zip(&runs[1]).position(|(a, b)| a != b).unwrap();
        return Err(format!("output #{which} differs between runs"));
    }
    let svgs = runs[0].iter().filter(|o| o.starts_with(b"<svg")).count();
    Ok(format!(
        "{} outputs byte-identical across two runs ({svgs} SVG; corpus with 1 and 3 jobs)",
        runs[0].len()
    ))
}

fn main() {
    let plain = corpus(CORPUS_COUNT, Rational::zero());
    let inflated = corpus(100, Rational::new(1, 64));
    let on_corpus = |f: &dyn Fn(&CorpusReport, &CorpusReport) -> Check| match (&plain, &inflated) {
        (Ok((a, _)), Ok((b, _))) => f(a, b),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    let results: Vec<(&str, Check)> = vec![
        ("base case", criterion_1()),
        ("worked zigzag", criterion_2()),
        ("three-leaf instance", criterion_3()),
        (
            "corpus invariants",
            on_corpus(&|a, _| criterion_4(a, plain.as_ref().unwrap().1)),
        ),
        ("per-deletion invariants", on_corpus(&criterion_5)),
        ("bound chain", on_corpus(&criterion_6)),
        ("determinism", criterion_7()),
    ];
    let mut failed = 0;
    for (i, (name, res)) in results.iter().enumerate() {
        match res {
            Ok(msg) => println!("PASS {} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
