//! The invariant suite: every cross-check the engine knows, run on one instance or on a
//! generated corpus.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::action::{action_table, exactness_defect, ActionTable};
use crate::analysis::Analysis;
use crate::arrangement::{derive_trees, forward_len, reconstruct_arrangement, Arrangement, TreeView};
use crate::bound::{reduce_with, shortest_bar_leaf_check, StepContext, TargetPolicy};
use crate::error::Result;
use crate::generate::random_instance;
use crate::instance::{point_name, Instance};
use crate::lunes::{
    check_d_squared, check_filtration, check_homology_rank, check_neighbor_lunes, raw_complex, FloerComplex,
    LuneEnumerator,
};
use crate::persistence::{barcode, barcode_rank_oracle, Barcode};
use crate::rational::Rational;
use crate::surgery::{chain_maps, check_action_shifts, check_chain_identities, insert_leaf, leaves_of, Case};

/// Invariant names in report order.
pub const INVARIANTS: &[&str] = &[
    "generation",
    "serialization",
    "exactness-coefficients",
    "filtration",
    "d-squared",
    "homology-rank",
    "neighbor-lunes",
    "lune-count",
    "lune-area",
    "lune-leaf",
    "wrap-stability",
    "bar-counts",
    "bar-endpoints",
    "rank-oracle",
    "beta1-gamma",
    "index-windows",
    "shortest-bar-leaf",
    "action-gap",
    "reduction",
    "chain-identities",
    "action-shifts",
    "stability",
    "delta-matching",
    "defect-zero",
    "round-trip",
    "bound-chain",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "status", content = "detail")]
pub enum Outcome {
    Pass,
    Fail(String),
    Skip(String),
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub max_wraps: u32,
    pub epsilon: Rational,
    pub policy: TargetPolicy,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_wraps: crate::lunes::DEFAULT_MAX_WRAPS,
            epsilon: Rational::zero(),
            policy: TargetPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub n: usize,
    pub outcomes: BTreeMap<&'static str, Outcome>,
}

impl InstanceReport {
    fn new(n: usize) -> Self {
        InstanceReport {
            n,
            outcomes: BTreeMap::new(),
        }
    }

    fn record(&mut self, name: &'static str, res: std::result::Result<(), String>) {
        debug_assert!(INVARIANTS.contains(&name), "unregistered invariant {name}");
        let outcome = match res {
            Ok(()) => Outcome::Pass,
            Err(e) => Outcome::Fail(e),
        };
        // A failure sticks; later passes of the same invariant do not hide it.
        match self.outcomes.get(name) {
            Some(Outcome::Fail(_)) => {}
            _ => {
                self.outcomes.insert(name, outcome);
            }
        }
    }

    fn skip(&mut self, name: &'static str, why: &str) {
        self.outcomes.entry(name).or_insert_with(|| Outcome::Skip(why.into()));
    }

    pub fn failures(&self) -> impl Iterator<Item = (&'static str, &str)> + '_ {
        self.outcomes.iter().filter_map(|(k, v)| match v {
            Outcome::Fail(d) => Some((*k, d.as_str())),
            _ => None,
        })
    }

    pub fn ok(&self) -> bool {
        self.failures().next().is_none()
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Runs every invariant on `inst`. Errors are reported as failed invariants, never returned.
pub fn check_instance(inst: &Instance, opts: &SuiteOptions) -> InstanceReport {
    let mut rep = InstanceReport::new(inst.n);
    rep.record(
        "serialization",
        Instance::from_json(&inst.to_json())
            .map_err(|e| e.to_string())
            .and_then(|back| ensure(&back == inst, || "JSON round trip changed the instance".into())),
    );
    let arr = match reconstruct_arrangement(inst) {
        Ok(a) => a,
        Err(e) => {
            rep.record("exactness-coefficients", Err(e.to_string()));
            return rep;
        }
    };
    let view = derive_trees(&arr.skeleton);
    rep.record("exactness-coefficients", exactness_coefficients(&arr, &view));
    let actions = match action_table(&arr) {
        Ok(t) => t,
        Err(e) => {
            rep.record("defect-zero", Err(e.to_string()));
            return rep;
        }
    };

    let enumerator = LuneEnumerator::new(&arr);
    let complex = raw_complex(&enumerator, &actions, opts.max_wraps);
    rep.record("filtration", check_filtration(&actions, &complex));
    rep.record("d-squared", check_d_squared(&complex));
    rep.record("homology-rank", check_homology_rank(&complex));
    rep.record("neighbor-lunes", check_neighbor_lunes(&arr, &view, &complex));
    rep.record("lune-count", lune_counts(&arr, &view, &complex));
    rep.record("lune-area", lune_areas(&arr, &actions, &complex));
    rep.record("lune-leaf", lunes_contain_leaves(&arr, &view, &complex));
    let wider = raw_complex(&enumerator, &actions, opts.max_wraps + 1);
    rep.record(
        "wrap-stability",
        ensure(wider.lunes == complex.lunes, || {
            format!(
                "lunes differ between {} and {} wraps",
                opts.max_wraps,
                opts.max_wraps + 1
            )
        }),
    );
    rep.record("index-windows", index_windows(&arr, &view, &complex));

    let bars = match barcode(&complex, &actions) {
        Ok((b, _)) => b,
        Err(e) => {
            rep.record("bar-counts", Err(e.to_string()));
            return rep;
        }
    };
    rep.record("bar-counts", bar_counts(inst.n, &bars));
    rep.record("bar-endpoints", bar_endpoints(&actions, &bars));
    rep.record(
        "rank-oracle",
        ensure(
            barcode_rank_oracle(&complex, &actions).intervals() == bars.intervals(),
            || "column reduction and rank oracle disagree".into(),
        ),
    );
    rep.record(
        "beta1-gamma",
        ensure(bars.betas.first().is_none_or(|b| b <= &bars.gamma), || {
            format!("β₁ = {} exceeds γ = {}", bars.betas[0], bars.gamma)
        }),
    );

    let analysis = Analysis {
        instance: inst.clone(),
        arrangement: arr.clone(),
        view: view.clone(),
        actions: actions.clone(),
        complex: complex.clone(),
        barcode: bars,
        jordan: crate::persistence::JordanBasis {
            e: Vec::new(),
            f: Vec::new(),
            g: Vec::new(),
        },
    };
    let leaf_check = shortest_bar_leaf_check(&analysis);
    match &leaf_check.skipped {
        Some(why) => {
            rep.skip("shortest-bar-leaf", why);
            rep.skip("action-gap", why);
        }
        None => {
            rep.record(
                "shortest-bar-leaf",
                ensure(leaf_check.violations.is_empty(), || leaf_check.violations.join("; ")),
            );
            rep.record(
                "action-gap",
                ensure(leaf_check.gap_violations.is_empty(), || {
                    leaf_check.gap_violations.join("; ")
                }),
            );
        }
    }

    let generic = actions.is_generic();
    let trace = reduce_with(inst, opts.policy, &opts.epsilon, opts.max_wraps, |step| {
        check_step(&mut rep, step)
    });
    match trace {
        Ok(t) => {
            rep.record("reduction", Ok(()));
            if generic {
                rep.record(
                    "bound-chain",
                    ensure(t.chain_holds(), || {
                        format!(
                            "γ = {}, cost = {}, bound = {} (inflated {})",
                            t.gamma, t.constructive_cost, t.theorem_bound, t.inflated_bound
                        )
                    }),
                );
            } else {
                rep.skip("bound-chain", "non-generic");
            }
        }
        // ε is a parameter of the surgery; a face smaller than it makes the step inapplicable.
        Err(crate::Error::NonPositiveWeight(why)) if opts.epsilon.is_positive() => {
            let why = format!("epsilon too large: {why}");
            rep.skip("reduction", &why);
            rep.skip("bound-chain", &why);
        }
        Err(e) => rep.record("reduction", Err(e.to_string())),
    }
    for name in [
        "chain-identities",
        "action-shifts",
        "stability",
        "delta-matching",
        "defect-zero",
        "round-trip",
    ] {
        rep.skip(name, "no deletion");
    }
    rep
}

fn check_step(rep: &mut InstanceReport, s: StepContext<'_>) {
    let ev = &s.deletion.event;
    let at = |e: String| format!("deleting {}: {e}", s.leaf.face);
    let maps = chain_maps(&s.before.complex, ev);
    rep.record(
        "chain-identities",
        check_chain_identities(&maps, &s.before.complex, &s.after.complex, ev).map_err(|e| at(e.to_string())),
    );
    rep.record(
        "action-shifts",
        check_action_shifts(&maps, &s.before.actions, &s.after.actions, ev).map_err(|e| at(e.to_string())),
    );
    rep.record(
        "stability",
        ensure(s.stability.beta_ok && s.stability.gamma_ok, || {
            at(format!("bar lengths moved by more than {}", s.stability.bound))
        }),
    );
    rep.record(
        "delta-matching",
        ensure(s.stability.matching_ok, || {
            at("no matching at half the step cost".into())
        }),
    );
    rep.record(
        "defect-zero",
        exactness_defect(&s.deletion.instance)
            .map_err(|e| e.to_string())
            .and_then(|d| ensure(d.is_zero(), || at(format!("defect {d}")))),
    );
    rep.record(
        "round-trip",
        insert_leaf(&s.deletion.instance, &ev.inverse)
            .map_err(|e| at(e.to_string()))
            .and_then(|back| {
                ensure(back == s.before.instance, || {
                    at("insertion did not restore the instance".into())
                })
            }),
    );
}

/// `c(w) = c(v)` for every leaf `v` and every face `w` at tree distance 2.
fn exactness_coefficients(arr: &Arrangement, view: &TreeView) -> std::result::Result<(), String> {
    for leaf in leaves_of(arr, view) {
        let v = arr.skeleton.face(&leaf.face).expect("leaf exists");
        let cv = view.exactness_coefficient(v);
        for (w, _) in view.distance_two(v) {
            let cw = view.exactness_coefficient(w);
            if cw != cv {
                return Err(format!("c({}) = {cw} but c({}) = {cv}", arr.faces()[w].id, leaf.face));
            }
        }
    }
    Ok(())
}

fn lune_counts(arr: &Arrangement, view: &TreeView, c: &FloerComplex) -> std::result::Result<(), String> {
    let is_leaf = |f: usize| !arr.faces()[f].is_root && view.degree(f) == 1;
    for (&(q, p), ls) in &c.lunes {
        let pair = || format!("{} to {}", point_name(q), point_name(p));
        if ls.len() > 2 {
            return Err(format!("{} lunes from {}", ls.len(), pair()));
        }
        let has_leaf = ls.iter().any(|l| {
            let mut support = l.support();
            matches!((support.next(), support.next()), (Some(f), None) if l.nu[f] == 1 && is_leaf(f))
        });
        if ls.len() == 2 && has_leaf && arr.n() > 1 {
            return Err(format!(
                "two lunes from {}, one of them a leaf, with n = {}",
                pair(),
                arr.n()
            ));
        }
    }
    Ok(())
}

fn lune_areas(arr: &Arrangement, actions: &ActionTable, c: &FloerComplex) -> std::result::Result<(), String> {
    for (&(q, p), ls) in &c.lunes {
        let gap = actions.get(q) - actions.get(p);
        for l in ls {
            let direct: Rational = l
                .support()
                .map(|f| arr.skeleton.area(f).expect("finite face") * &Rational::from_int(l.nu[f] as i64))
                .sum();
            if l.area != gap || direct != gap {
                return Err(format!(
                    "lune from {} to {} has area {} but the action gap is {gap}",
                    point_name(q),
                    point_name(p),
                    l.area
                ));
            }
        }
    }
    Ok(())
}

fn lunes_contain_leaves(arr: &Arrangement, view: &TreeView, c: &FloerComplex) -> std::result::Result<(), String> {
    for (&(q, p), ls) in &c.lunes {
        for l in ls {
            if !l.support().any(|f| !arr.faces()[f].is_root && view.degree(f) == 1) {
                return Err(format!(
                    "lune from {} to {} covers no leaf",
                    point_name(q),
                    point_name(p)
                ));
            }
        }
    }
    Ok(())
}

/// Inclusive cyclic interval `[a, b]` modulo `m`.
fn in_window(x: usize, a: usize, b: usize, m: usize) -> bool {
    forward_len(a % m, x, m) <= forward_len(a % m, b % m, m)
}

/// Odd counts into `p̄` and out of `q̄` only reach the index windows cut out by the target
/// edge `k`, for every leaf and every face at distance 2. The two cases are mirror images.
fn index_windows(arr: &Arrangement, view: &TreeView, c: &FloerComplex) -> std::result::Result<(), String> {
    let m = arr.points();
    if m < 4 {
        return Ok(());
    }
    for leaf in leaves_of(arr, view) {
        let v = arr.skeleton.face(&leaf.face).expect("leaf exists");
        let t = leaf.segment;
        for (_, k) in view.distance_two(v) {
            let near = (t + 2, k);
            let far = (k + 1, t + m - 1);
            let (into_p, out_of_q) = match leaf.case {
                Case::Case1 => (near, far),
                Case::Case2 => (far, near),
            };
            for x in 0..m {
                if x == leaf.q_bar || x == leaf.p_bar {
                    continue;
                }
                if c.n(x, leaf.p_bar) % 2 == 1 && !in_window(x, into_p.0, into_p.1, m) {
                    return Err(format!(
                        "n({}, {}) = 1 outside the window of leaf {} with k = {}",
                        point_name(x),
                        point_name(leaf.p_bar),
                        leaf.face,
                        k + 1
                    ));
                }
                if c.n(leaf.q_bar, x) % 2 == 1 && !in_window(x, out_of_q.0, out_of_q.1, m) {
                    return Err(format!(
                        "n({}, {}) = 1 outside the window of leaf {} with k = {}",
                        point_name(leaf.q_bar),
                        point_name(x),
                        leaf.face,
                        k + 1
                    ));
                }
            }
        }
    }
    Ok(())
}

fn bar_counts(n: usize, b: &Barcode) -> std::result::Result<(), String> {
    ensure(b.finite.len() == n - 1 && b.infinite.len() == 2, || {
        format!(
            "{} finite and {} infinite bars for n = {n}",
            b.finite.len(),
            b.infinite.len()
        )
    })
}

fn bar_endpoints(actions: &ActionTable, b: &Barcode) -> std::result::Result<(), String> {
    let mut ends: Vec<&Rational> = b
        .finite
        .iter()
        .flat_map(|x| [&x.birth, &x.death])
        .chain(b.infinite.iter().map(|x| &x.birth))
        .collect();
    let mut spectrum: Vec<&Rational> = actions.values.iter().collect();
    ends.sort();
    spectrum.sort();
    ensure(ends == spectrum, || {
        "bar endpoints differ from the action spectrum".into()
    })
}

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    pub count: usize,
    pub max_n: usize,
    pub seed: u64,
    pub area_bound: Rational,
    pub jobs: usize,
    pub options: SuiteOptions,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusFailure {
    pub index: usize,
    pub seed: u64,
    pub n: usize,
    pub invariant: &'static str,
    pub detail: String,
    #[serde(skip)]
    pub instance: Option<Instance>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub count: usize,
    pub seed: u64,
    pub max_n: usize,
    /// Per invariant, in [`INVARIANTS`] order.
    pub tallies: Vec<(&'static str, Tally)>,
    pub failures: Vec<CorpusFailure>,
}

impl CorpusReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn tally(&self, name: &str) -> Option<&Tally> {
        self.tallies.iter().find(|(k, _)| *k == name).map(|(_, t)| t)
    }
}

/// `(n, seed)` of every corpus instance, drawn sequentially from `seed`.
pub fn corpus_plan(count: usize, max_n: usize, seed: u64) -> Vec<(usize, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.gen_range(1..=max_n), rng.gen())).collect()
}

fn run_one(n: usize, seed: u64, cfg: &CorpusConfig) -> (InstanceReport, Option<Instance>) {
    match random_instance(n, seed, &cfg.area_bound) {
        Ok(inst) => {
            let mut rep = check_instance(&inst, &cfg.options);
            rep.record("generation", Ok(()));
            (rep, Some(inst))
        }
        Err(e) => {
            let mut rep = InstanceReport::new(n);
            rep.record("generation", Err(e.to_string()));
            (rep, None)
        }
    }
}

/// Generates `count` instances and runs the suite on each; results are in instance order
/// regardless of `jobs`.
pub fn run_corpus(cfg: &CorpusConfig) -> Result<CorpusReport> {
    if cfg.max_n == 0 {
        return Err(crate::Error::Invalid("max n must be positive".into()));
    }
    let plan = corpus_plan(cfg.count, cfg.max_n, cfg.seed);
    let results: Vec<(InstanceReport, Option<Instance>)> = if cfg.jobs <= 1 {
        plan.iter().map(|&(n, s)| run_one(n, s, cfg)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| crate::Error::Invalid(format!("thread pool: {e}")))?;
        pool.install(|| plan.par_iter().map(|&(n, s)| run_one(n, s, cfg)).collect())
    };

    let mut tallies: Vec<(&'static str, Tally)> = INVARIANTS.iter().map(|&k| (k, Tally::default())).collect();
    let mut failures = Vec::new();
    for (index, ((rep, inst), &(n, seed))) in results.into_iter().zip(&plan).enumerate() {
        for (name, tally) in &mut tallies {
            match rep.outcomes.get(name) {
                Some(Outcome::Pass) => tally.pass += 1,
                Some(Outcome::Fail(d)) => {
                    tally.fail += 1;
                    failures.push(CorpusFailure {
                        index,
                        seed,
                        n,
                        invariant: name,
                        detail: d.clone(),
                        instance: inst.clone(),
                    });
                }
                Some(Outcome::Skip(_)) | None => tally.skip += 1,
            }
        }
    }
    Ok(CorpusReport {
        count: cfg.count,
        seed: cfg.seed,
        max_n: cfg.max_n,
        tallies,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn all_pass(rep: &InstanceReport) {
        let bad: Vec<_> = rep.failures().collect();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn worked_instances_pass() {
        let opts = SuiteOptions::default();
        for inst in [
            fixtures::base(Rational::one()),
            fixtures::zigzag(),
            fixtures::three_leaves(),
        ] {
            let rep = check_instance(&inst, &opts);
            all_pass(&rep);
            assert!(INVARIANTS
                .iter()
                .filter(|&&k| k != "generation")
                .all(|k| rep.outcomes.contains_key(k)));
        }
    }

    #[test]
    fn base_skips_deletion_checks() {
        let rep = check_instance(&fixtures::base(Rational::one()), &SuiteOptions::default());
        assert_eq!(rep.outcomes["round-trip"], Outcome::Skip("no deletion".into()));
        assert_eq!(rep.outcomes["shortest-bar-leaf"], Outcome::Skip("n = 1".into()));
        assert_eq!(rep.outcomes["bound-chain"], Outcome::Pass);
    }

    #[test]
    fn oversized_epsilon_is_skipped() {
        let opts = SuiteOptions {
            epsilon: Rational::new(3, 64),
            ..SuiteOptions::default()
        };
        let inst = crate::generate::random_instance(5, 13064107215918661825, &Rational::from_int(4)).unwrap();
        let rep = check_instance(&inst, &opts);
        all_pass(&rep);
        assert!(
            matches!(&rep.outcomes["reduction"], Outcome::Skip(why) if why.starts_with("epsilon too large")),
            "{:?}",
            rep.outcomes["reduction"]
        );
    }

    #[test]
    fn windows() {
        assert!(in_window(3, 2, 5, 8));
        assert!(in_window(0, 6, 9, 8));
        assert!(!in_window(5, 6, 9, 8));
        assert!(in_window(6, 6, 6, 8));
    }

    #[test]
    fn small_corpus_is_clean_and_order_independent() {
        let cfg = CorpusConfig {
            count: 12,
            max_n: 4,
            seed: 3,
            area_bound: Rational::from_int(4),
            jobs: 1,
            options: SuiteOptions::default(),
        };
        let a = run_corpus(&cfg).unwrap();
        assert!(a.ok(), "{:?}", a.failures);
        let b = run_corpus(&CorpusConfig { jobs: 3, ..cfg }).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
