//! The weighted-barcode upper bound on Hofer distance and the constructive reduction that
//! certifies it by deleting leaves one at a time.

use serde::Serialize;

use crate::analysis::Analysis;
use crate::arrangement::validate;
use crate::error::{Error, Result};
use crate::instance::{point_name, FaceId, Instance, Weight};
use crate::persistence::{bar_stats, Barcode};
use crate::rational::Rational;
use crate::surgery::{delete_leaf, leaves_of, stability, Deletion, DeletionEvent, Leaf, StabilityReport};

/// `Σ_{j≥1} 2^j β_j + γ` with `β` sorted descending.
pub fn theorem_bound(b: &Barcode) -> Rational {
    let sum: Rational = b
        .betas
        .iter()
        .enumerate()
        .map(|(j, beta)| Rational::pow2(j as u32 + 1) * beta)
        .sum();
    sum + &b.gamma
}

/// `theorem_bound` plus the slack accumulated when every deletion costs `a(v) + ε`:
/// `(2^n − 2)·ε`.
pub fn inflated_bound(b: &Barcode, n: usize, epsilon: &Rational) -> Rational {
    theorem_bound(b) + (Rational::pow2(n as u32) - Rational::from_int(2)) * epsilon
}

/// Which distance-2 face receives the area of a deleted leaf.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetPolicy {
    /// Reached through the smallest edge label.
    #[default]
    SmallestLabel,
    /// Largest weight (roots first); ties by label.
    LargestArea,
}

impl std::str::FromStr for TargetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smallest-label" => Ok(TargetPolicy::SmallestLabel),
            "largest-area" => Ok(TargetPolicy::LargestArea),
            other => Err(Error::Invalid(format!("unknown target policy {other:?}"))),
        }
    }
}

fn pick_target(a: &Analysis, leaf: &Leaf, policy: TargetPolicy) -> Result<FaceId> {
    let sk = &a.arrangement.skeleton;
    let f = sk
        .face(&leaf.face)
        .ok_or_else(|| Error::InvalidTarget(format!("no face {:?}", leaf.face)))?;
    let candidates = a.view.distance_two(f);
    let chosen = match policy {
        TargetPolicy::SmallestLabel => candidates.first(),
        TargetPolicy::LargestArea => candidates.iter().min_by(|(x, kx), (y, ky)| {
            let (wx, wy) = (&sk.faces[*x].weight, &sk.faces[*y].weight);
            let by_weight = match (wx, wy) {
                (Weight::Unbounded, Weight::Unbounded) => std::cmp::Ordering::Equal,
                (Weight::Unbounded, _) => std::cmp::Ordering::Less,
                (_, Weight::Unbounded) => std::cmp::Ordering::Greater,
                (Weight::Finite(u), Weight::Finite(v)) => v.cmp(u),
            };
            by_weight.then(kx.cmp(ky))
        }),
    };
    chosen.map(|&(w, _)| sk.faces[w].id.clone()).ok_or(Error::BaseCase)
}

/// Minimum area, ties broken by the smaller `q̄`.
pub fn select_leaf(leaves: &[Leaf]) -> Option<&Leaf> {
    leaves
        .iter()
        .min_by(|a, b| a.area.cmp(&b.area).then(a.q_bar.cmp(&b.q_bar)))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReductionStep {
    pub event: DeletionEvent,
    pub gamma_before: Rational,
    pub gamma_after: Rational,
    pub stability: StabilityReport,
    /// The instance after this deletion.
    pub instance: Instance,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReductionTrace {
    pub n: usize,
    pub epsilon: Rational,
    pub policy: TargetPolicy,
    pub gamma: Rational,
    pub betas: Vec<Rational>,
    pub steps: Vec<ReductionStep>,
    pub final_gamma: Rational,
    pub constructive_cost: Rational,
    pub theorem_bound: Rational,
    pub inflated_bound: Rational,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ReductionTrace {
    /// `γ ≤ cost ≤ bound ≤ (2^n − 1)γ`, with the ε-inflated bound when ε > 0.
    pub fn chain_holds(&self) -> bool {
        let cap = (Rational::pow2(self.n as u32) - Rational::one()) * &self.gamma;
        self.gamma <= self.constructive_cost
            && self.constructive_cost <= self.inflated_bound
            && self.theorem_bound <= cap
    }
}

/// What a reduction step looked like, handed to the observer of [`reduce_with`].
pub struct StepContext<'a> {
    pub before: &'a Analysis,
    pub leaf: &'a Leaf,
    pub leaf_check: &'a LeafCheck,
    pub deletion: &'a Deletion,
    /// The new instance, in the gauge of the shift formula.
    pub after: &'a Analysis,
    pub stability: &'a StabilityReport,
}

/// Deletes minimum-area leaves until two points remain, checking at every step that the
/// leaf realises the shortest bar and that the barcode moves by at most the step cost.
pub fn reduce(inst: &Instance, policy: TargetPolicy, epsilon: &Rational, max_wraps: u32) -> Result<ReductionTrace> {
    reduce_with(inst, policy, epsilon, max_wraps, |_| {})
}

/// [`reduce`], calling `observe` on every step before its checks are enforced.
pub fn reduce_with(
    inst: &Instance,
    policy: TargetPolicy,
    epsilon: &Rational,
    max_wraps: u32,
    mut observe: impl FnMut(StepContext<'_>),
) -> Result<ReductionTrace> {
    if epsilon.is_negative() {
        return Err(Error::Invalid("epsilon must be non-negative".into()));
    }
    let mut current = Analysis::new(inst, max_wraps)?;
    let original = current.barcode.clone();
    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    let mut cost = Rational::zero();

    while current.instance.n > 1 {
        let leaves = leaves_of(&current.arrangement, &current.view);
        let leaf = select_leaf(&leaves)
            .ok_or_else(|| Error::InvariantViolation("no leaf on an instance with n > 1".into()))?
            .clone();
        let report = shortest_bar_leaf_check(&current);
        let target = pick_target(&current, &leaf, policy)?;
        let deletion = delete_leaf(&current.instance, &leaf, Some(&target), epsilon)?;
        let next = Analysis::with_actions(&deletion.instance, deletion.actions.clone(), max_wraps)?;
        let stab = stability(&current.barcode, &next.barcode, &deletion.event);
        observe(StepContext {
            before: &current,
            leaf: &leaf,
            leaf_check: &report,
            deletion: &deletion,
            after: &next,
            stability: &stab,
        });

        match &report.skipped {
            Some(why) => warnings.push(format!("step {}: shortest-bar check skipped: {why}", steps.len() + 1)),
            None => {
                if let Some(v) = report.violations.iter().chain(&report.gap_violations).next() {
                    return Err(Error::InvariantViolation(v.clone()));
                }
                // With tied leaf areas the corner leaf may differ from the selected one.
                if report.beta_min.as_ref() != Some(&leaf.area) {
                    return Err(Error::InvariantViolation(format!(
                        "minimum-area leaf {} has area {}, not the shortest bar length",
                        leaf.face, leaf.area
                    )));
                }
            }
        }
        if let Some(rule) = validate(&deletion.instance).first_error() {
            return Err(Error::InvariantViolation(format!(
                "deletion produced an invalid instance ({}: {})",
                rule.rule,
                rule.detail.as_deref().unwrap_or("")
            )));
        }
        if !stab.ok() {
            return Err(Error::InvariantViolation(format!(
                "barcode moved by more than {} when deleting {}",
                stab.bound, leaf.face
            )));
        }
        cost += &deletion.event.cost_upper_bound;
        steps.push(ReductionStep {
            gamma_before: current.barcode.gamma.clone(),
            gamma_after: next.barcode.gamma.clone(),
            event: deletion.event.clone(),
            stability: stab,
            instance: deletion.instance.clone(),
        });
        current = next.anchored();
    }

    let final_gamma = current.barcode.gamma.clone();
    Ok(ReductionTrace {
        n: inst.n,
        epsilon: epsilon.clone(),
        policy,
        gamma: original.gamma.clone(),
        betas: original.betas.clone(),
        steps,
        constructive_cost: cost + &final_gamma,
        final_gamma,
        theorem_bound: theorem_bound(&original),
        inflated_bound: inflated_bound(&original, inst.n, epsilon),
        warnings,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LeafCheck {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    /// Corners `(q̄, p̄)` of the shortest finite bar, as point names.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corners: Option<(String, String)>,
    /// The leaf with those corners.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf: Option<FaceId>,
    pub beta_min: Option<Rational>,
    pub violations: Vec<String>,
    /// Odd lune counts between points closer than `β_min` in action.
    pub gap_violations: Vec<String>,
}

impl LeafCheck {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.gap_violations.is_empty()
    }
}

/// The shortest finite bar is spanned by a minimum-area leaf, and every odd lune count
/// joins points at least `β_min` apart in action.
pub fn shortest_bar_leaf_check(a: &Analysis) -> LeafCheck {
    let mut out = LeafCheck::default();
    if a.instance.n < 2 {
        out.skipped = Some("n = 1".into());
        return out;
    }
    if !a.actions.is_generic() {
        out.skipped = Some("non-generic".into());
        return out;
    }
    let stats = bar_stats(&a.barcode);
    let Some(beta_min) = stats.beta_min else {
        out.violations.push("no finite bar".into());
        return out;
    };
    let shortest = a
        .barcode
        .finite
        .iter()
        .find(|b| b.length() == beta_min)
        .expect("beta_min comes from a bar");
    let (qb, pb) = (shortest.death_point, shortest.birth_point);
    out.corners = Some((point_name(qb), point_name(pb)));
    out.beta_min = Some(beta_min.clone());

    let leaves = leaves_of(&a.arrangement, &a.view);
    match leaves.iter().find(|l| l.q_bar == qb && l.p_bar == pb) {
        None => out.violations.push(format!(
            "shortest bar [{}, {}) joins {} and {}, which bound no leaf",
            shortest.birth,
            shortest.death,
            point_name(qb),
            point_name(pb)
        )),
        Some(leaf) => {
            out.leaf = Some(leaf.face.clone());
            if leaves.iter().any(|l| l.area < leaf.area) {
                out.violations
                    .push(format!("leaf {} of the shortest bar is not of minimum area", leaf.face));
            }
            if leaf.area != beta_min {
                out.violations.push(format!(
                    "leaf {} has area {} but the shortest bar has length {beta_min}",
                    leaf.face, leaf.area
                ));
            }
        }
    }
    let m = a.arrangement.points();
    for x in 0..m {
        for y in 0..m {
            if x != y && a.complex.n(x, y) % 2 == 1 {
                let gap = a.actions.get(x) - a.actions.get(y);
                if gap < beta_min {
                    out.gap_violations.push(format!(
                        "n({}, {}) = 1 with action gap {gap} < {beta_min}",
                        point_name(x),
                        point_name(y)
                    ));
                }
            }
        }
    }
    out
}
