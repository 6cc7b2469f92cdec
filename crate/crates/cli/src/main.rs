mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cyl_floer::analysis::Analysis;
use cyl_floer::arrangement::validate;
use cyl_floer::bound::{reduce, ReductionTrace, TargetPolicy};
use cyl_floer::generate::random_instance;
use cyl_floer::instance::{point_name, Instance};
use cyl_floer::lunes::{enumerate_lunes, DEFAULT_MAX_WRAPS, MAX_WRAPS_ENV};
use cyl_floer::rational::Rational;
use cyl_floer::suite::{check_instance, run_corpus, CorpusConfig, CorpusReport, Outcome, SuiteOptions};
use cyl_floer::surgery::{delete_leaf, find_leaves, insert_leaf, InsertParams, Leaf};

use render::Panels;

#[derive(Parser)]
#[command(
    name = "cyl-floer",
    version,
    about = "Floer complexes, barcodes and Hofer bounds for equators in the cylinder"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Bound on how often a lune boundary may wrap around the cylinder.
    #[arg(long, global = true, env = MAX_WRAPS_ENV, default_value_t = DEFAULT_MAX_WRAPS)]
    max_wraps: u32,
    /// Output file (stdout if omitted).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance with 2n intersection points.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "4")]
        area_bound: Rational,
    },
    /// Check an instance file against every structural rule.
    Validate { input: PathBuf },
    /// Action spectrum, leaves and homology rank.
    Info { input: PathBuf },
    /// Persistence barcode of the action filtration.
    Barcode {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Lunes between pairs of points, e.g. `--pair s2,s1`.
    Lunes {
        input: PathBuf,
        #[arg(long)]
        pair: Option<String>,
    },
    /// Barcode bound and the constructive reduction cost.
    Bound {
        input: PathBuf,
        #[arg(long, default_value = "0")]
        epsilon: Rational,
        #[arg(long, default_value = "smallest-label")]
        policy: TargetPolicy,
    },
    /// Delete leaves down to two points; `--trace` keeps every intermediate instance.
    Reduce {
        input: PathBuf,
        #[arg(long, default_value = "0")]
        epsilon: Rational,
        #[arg(long, default_value = "smallest-label")]
        policy: TargetPolicy,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Delete one leaf; writes the new instance and, with `--event`, the deletion record.
    Delete {
        input: PathBuf,
        #[arg(long)]
        leaf: String,
        /// Face at distance 2 receiving the leaf's area (default: smallest edge label).
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value = "0")]
        epsilon: Rational,
        #[arg(long)]
        event: Option<PathBuf>,
    },
    /// Insert a leaf. `--params` takes insertion parameters or a deletion record.
    Insert {
        input: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        epsilon: Option<Rational>,
    },
    /// Run the full invariant suite on one instance.
    Check {
        input: PathBuf,
        #[arg(long, default_value = "0")]
        epsilon: Rational,
    },
    /// Run the invariant suite on generated instances.
    Corpus {
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "4")]
        area_bound: Rational,
        #[arg(long, default_value = "0")]
        epsilon: Rational,
        #[arg(long, default_value = "smallest-label")]
        policy: TargetPolicy,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// SVG figure of an instance, or of a barcode file.
    Render {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Panels::All)]
        panel: Panels,
    },
}

/// A failed invariant, with the instances that exhibit it.
#[derive(Debug)]
struct Violation {
    message: String,
    instances: Vec<(String, Instance)>,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Violation {}

/// Tags core invariant violations with the instance they came from.
fn on<T>(inst: &Instance, r: cyl_floer::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| {
        if e.is_invariant_violation() {
            Violation {
                message: e.to_string(),
                instances: vec![(String::new(), inst.clone())],
            }
            .into()
        } else {
            anyhow::Error::new(e)
        }
    })
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn leaf_json(l: &Leaf) -> Value {
    json!({
        "face": l.face,
        "corners": [point_name(l.q_bar), point_name(l.p_bar)],
        "label": l.segment + 1,
        "area": l.area,
        "case": l.case,
    })
}

fn bound_json(t: &ReductionTrace) -> Value {
    let mut v = json!({
        "gamma": t.gamma,
        "betas": t.betas,
        "theoremBound": t.theorem_bound,
        "constructiveCost": t.constructive_cost,
        "finalGamma": t.final_gamma,
        "steps": t.steps.iter().map(|s| json!({
            "leaf": s.event.leaf.face,
            "corners": [point_name(s.event.leaf.q_bar), point_name(s.event.leaf.p_bar)],
            "area": s.event.leaf.area,
            "target": s.event.target,
            "k": s.event.k,
            "cost": s.event.cost_upper_bound,
            "gammaAfter": s.gamma_after,
        })).collect::<Vec<_>>(),
    });
    if !t.epsilon.is_zero() {
        v["epsilon"] = json!(t.epsilon);
        v["inflatedBound"] = json!(t.inflated_bound);
    }
    if !t.warnings.is_empty() {
        v["warnings"] = json!(t.warnings);
    }
    v
}

/// Aligned text diagram of bars on a common action axis.
fn barcode_text(intervals: &[(Rational, Option<Rational>)]) -> String {
    const COLS: usize = 40;
    let labels: Vec<String> = intervals
        .iter()
        .map(|(b, d)| match d {
            Some(d) => format!("[{b}, {d})"),
            None => format!("[{b}, ∞)"),
        })
        .collect();
    let pad = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let lo = intervals
        .iter()
        .map(|(b, _)| b)
        .min()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let hi = intervals
        .iter()
        .flat_map(|(b, d)| std::iter::once(b).chain(d))
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let span = if hi > lo { &hi - &lo } else { Rational::one() };
    let col = |v: &Rational| -> usize {
        let x = (v - &lo) * Rational::from_int((COLS - 4) as i64) / &span;
        x.to_f64().round() as usize
    };
    let mut out = String::new();
    for ((b, d), label) in intervals.iter().zip(&labels) {
        let start = col(b);
        let (end, tip) = match d {
            Some(d) => (col(d).max(start + 1), ""),
            None => (COLS, ">"),
        };
        out.push_str(&format!(
            "{label:<pad$} |{}{}{tip}\n",
            " ".repeat(start),
            "=".repeat(end - start)
        ));
    }
    out
}

fn outcome_json(o: &Outcome) -> Value {
    match o {
        Outcome::Pass => json!("pass"),
        Outcome::Fail(d) => json!({"fail": d}),
        Outcome::Skip(d) => json!({"skip": d}),
    }
}

fn corpus_text(r: &CorpusReport) -> String {
    let mut out = format!("{:<24} {:>6} {:>6} {:>6}\n", "invariant", "pass", "fail", "skip");
    for (name, t) in &r.tallies {
        out.push_str(&format!("{name:<24} {:>6} {:>6} {:>6}\n", t.pass, t.fail, t.skip));
    }
    for f in &r.failures {
        out.push_str(&format!(
            "FAIL #{} (seed {}, n = {}) {}: {}\n",
            f.index, f.seed, f.n, f.invariant, f.detail
        ));
    }
    out.push_str(&format!("{} instances, {} failures\n", r.count, r.failures.len()));
    out
}

fn render_input(path: &Path, panel: Panels, max_wraps: u32) -> anyhow::Result<String> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if v.get("trees").is_some() {
        let inst = Instance::from_json(&text)?;
        let a = on(&inst, Analysis::new(&inst, max_wraps))?;
        return Ok(render::render_analysis(&a, panel));
    }
    let parse = |x: &Value| -> anyhow::Result<Rational> {
        x.as_str()
            .ok_or_else(|| anyhow!("bar endpoints must be strings"))?
            .parse()
            .map_err(anyhow::Error::new)
    };
    let (Some(finite), Some(infinite)) = (v["finite"].as_array(), v["infinite"].as_array()) else {
        return Err(anyhow!("{} is neither an instance nor a barcode", path.display()));
    };
    let mut bars = Vec::new();
    for b in finite {
        bars.push((parse(&b["birth"])?, Some(parse(&b["death"])?)));
    }
    for b in infinite {
        bars.push((parse(&b["birth"])?, None));
    }
    bars.sort();
    Ok(render::render_barcode(&bars))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let out = cli.output.as_deref();
    let w = cli.max_wraps;
    match cli.cmd {
        Cmd::Gen { n, seed, area_bound } => {
            let inst = random_instance(n, seed, &area_bound)?;
            emit(out, &format!("{}\n", inst.to_json()))
        }
        Cmd::Validate { input } => {
            let inst = read_instance(&input)?;
            let report = validate(&inst);
            emit(out, &pretty(&report))?;
            match report.first_error() {
                Some(r) => Err(anyhow!("invalid instance: {}", r.rule)),
                None => Ok(()),
            }
        }
        Cmd::Info { input } => {
            let inst = read_instance(&input)?;
            let a = on(&inst, Analysis::new(&inst, w))?;
            let leaves = on(&inst, find_leaves(&inst))?;
            let info = json!({
                "n": inst.n,
                "generic": a.actions.is_generic(),
                "spectrum": (0..a.actions.len())
                    .map(|p| json!({"point": point_name(p), "action": a.actions.get(p)}))
                    .collect::<Vec<_>>(),
                "homologyRank": a.complex.homology_rank(),
                "leaves": leaves.iter().map(leaf_json).collect::<Vec<_>>(),
            });
            emit(out, &pretty(&info))
        }
        Cmd::Barcode { input, format } => {
            let inst = read_instance(&input)?;
            let a = on(&inst, Analysis::new(&inst, w))?;
            match format {
                Format::Json => emit(out, &pretty(&a.barcode)),
                Format::Text => emit(out, &barcode_text(&a.barcode.intervals())),
            }
        }
        Cmd::Lunes { input, pair } => {
            let inst = read_instance(&input)?;
            let a = on(&inst, Analysis::new(&inst, w))?;
            let name = |f: usize| a.arrangement.faces()[f].id.clone();
            let describe = |q: usize, p: usize, ls: &[cyl_floer::lunes::Lune]| {
                json!({
                    "from": point_name(q),
                    "to": point_name(p),
                    "count": ls.len(),
                    "lunes": ls.iter().map(|l| json!({
                        "area": l.area,
                        "boundary": {
                            "baseDirection": l.boundary.base_direction,
                            "baseWraps": l.boundary.base_wraps,
                            "curveDirection": l.boundary.curve_direction,
                            "curveWraps": l.boundary.curve_wraps,
                        },
                        "faces": l.support().map(|f| (name(f), json!(l.nu[f]))).collect::<serde_json::Map<_, _>>(),
                    })).collect::<Vec<_>>(),
                })
            };
            let listing: Vec<Value> = match pair {
                Some(spec) => {
                    let point = |s: &str| -> anyhow::Result<usize> {
                        let i: usize = s
                            .trim()
                            .strip_prefix('s')
                            .and_then(|d| d.parse().ok())
                            .ok_or_else(|| anyhow!("bad point name {s:?}"))?;
                        if i == 0 || i > a.arrangement.points() {
                            return Err(anyhow!("no point {s}"));
                        }
                        Ok(i - 1)
                    };
                    let (q, p) = spec.split_once(',').ok_or_else(|| anyhow!("--pair expects q,p"))?;
                    let (q, p) = (point(q)?, point(p)?);
                    vec![describe(q, p, &enumerate_lunes(&a.arrangement, q, p, w))]
                }
                None => a.complex.lunes.iter().map(|(&(q, p), ls)| describe(q, p, ls)).collect(),
            };
            emit(out, &pretty(&listing))
        }
        Cmd::Bound { input, epsilon, policy } => {
            let inst = read_instance(&input)?;
            let trace = on(&inst, reduce(&inst, policy, &epsilon, w))?;
            emit(out, &pretty(&bound_json(&trace)))
        }
        Cmd::Reduce {
            input,
            epsilon,
            policy,
            trace,
        } => {
            let inst = read_instance(&input)?;
            let t = on(&inst, reduce(&inst, policy, &epsilon, w))?;
            if let Some(path) = trace {
                std::fs::write(&path, pretty(&t)).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(out, &pretty(&bound_json(&t)))
        }
        Cmd::Delete {
            input,
            leaf,
            target,
            epsilon,
            event,
        } => {
            let inst = read_instance(&input)?;
            let leaves = on(&inst, find_leaves(&inst))?;
            let l = leaves
                .iter()
                .find(|l| l.face == leaf)
                .ok_or_else(|| anyhow!("{leaf} is not a leaf"))?;
            let d = on(&inst, delete_leaf(&inst, l, target.as_deref(), &epsilon))?;
            if let Some(path) = event {
                std::fs::write(&path, pretty(&d.event)).with_context(|| format!("writing {}", path.display()))?;
            }
            emit(out, &format!("{}\n", d.instance.to_json()))
        }
        Cmd::Insert { input, params, epsilon } => {
            let inst = read_instance(&input)?;
            let text = std::fs::read_to_string(&params).with_context(|| format!("reading {}", params.display()))?;
            let v: Value = serde_json::from_str(&text)?;
            let v = v.get("inverse").cloned().unwrap_or(v);
            let mut p: InsertParams = serde_json::from_value(v).context("insertion parameters")?;
            if let Some(e) = epsilon {
                p.epsilon = e;
            }
            let next = insert_leaf(&inst, &p)?;
            emit(out, &format!("{}\n", next.to_json()))
        }
        Cmd::Check { input, epsilon } => {
            let inst = read_instance(&input)?;
            let opts = SuiteOptions {
                max_wraps: w,
                epsilon,
                ..SuiteOptions::default()
            };
            let rep = check_instance(&inst, &opts);
            let outcomes: serde_json::Map<String, Value> = rep
                .outcomes
                .iter()
                .map(|(k, o)| (k.to_string(), outcome_json(o)))
                .collect();
            emit(out, &pretty(&json!({"n": rep.n, "ok": rep.ok(), "outcomes": outcomes})))?;
            let first = rep.failures().next().map(|(name, detail)| format!("{name}: {detail}"));
            match first {
                Some(message) => Err(Violation {
                    message,
                    instances: vec![(String::new(), inst)],
                }
                .into()),
                None => Ok(()),
            }
        }
        Cmd::Corpus {
            count,
            max_n,
            seed,
            jobs,
            area_bound,
            epsilon,
            policy,
            format,
        } => {
            let cfg = CorpusConfig {
                count,
                max_n,
                seed,
                area_bound,
                jobs: jobs.max(1),
                options: SuiteOptions {
                    max_wraps: w,
                    epsilon,
                    policy,
                },
            };
            let report = run_corpus(&cfg)?;
            match format {
                Format::Json => emit(out, &pretty(&report))?,
                Format::Text => emit(out, &corpus_text(&report))?,
            }
            if report.ok() {
                return Ok(());
            }
            let mut instances: Vec<(String, Instance)> = Vec::new();
            for f in &report.failures {
                if let Some(inst) = &f.instance {
                    let tag = format!("-{}", f.index);
                    if !instances.iter().any(|(t, _)| *t == tag) {
                        instances.push((tag, inst.clone()));
                    }
                }
            }
            Err(Violation {
                message: format!("{} invariant failures in the corpus", report.failures.len()),
                instances,
            }
            .into())
        }
        Cmd::Render { input, panel } => emit(out, &render_input(&input, panel, w)?),
    }
}

/// `<output>.counterexample<tag>.json` next to the output, or in the working directory.
fn counterexample_path(out: Option<&Path>, tag: &str) -> PathBuf {
    let file = format!("counterexample{tag}.json");
    match out {
        Some(p) => {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            p.with_file_name(format!("{stem}.{file}"))
        }
        None => PathBuf::from(file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let out = cli.output.clone();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Violation>() {
            Some(v) => {
                eprintln!("invariant violation: {}", v.message);
                for (tag, inst) in &v.instances {
                    let path = counterexample_path(out.as_deref(), tag);
                    match std::fs::write(&path, format!("{}\n", inst.to_json())) {
                        Ok(()) => eprintln!("counterexample written to {}", path.display()),
                        Err(err) => eprintln!("could not write {}: {err}", path.display()),
                    }
                }
                ExitCode::from(2)
            }
            None => {
                // Wrapped errors often repeat their source's message; print each part once.
                let mut parts: Vec<String> = Vec::new();
                for cause in e.chain().map(|c| c.to_string()) {
                    if !parts.last().is_some_and(|p| p.ends_with(&cause)) {
                        parts.push(cause);
                    }
                }
                eprintln!("error: {}", parts.join(": "));
                ExitCode::from(1)
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_barcode_is_aligned() {
        let r = |n| Rational::from_int(n);
        let text = barcode_text(&[(r(-1), None), (r(0), Some(r(1))), (r(2), None)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let bar = |l: &str| l.chars().position(|c| c == '|');
        assert!(lines.iter().all(|l| bar(l) == bar(lines[0])));
        assert!(lines[0].ends_with('>') && !lines[1].ends_with('>'));
    }

    #[test]
    fn counterexample_next_to_output() {
        assert_eq!(
            counterexample_path(Some(Path::new("/tmp/out/report.txt")), "-3"),
            PathBuf::from("/tmp/out/report.counterexample-3.json")
        );
        assert_eq!(counterexample_path(None, ""), PathBuf::from("counterexample.json"));
    }
}
