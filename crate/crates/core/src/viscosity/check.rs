//! Sampled viscosity sub/supersolution checks.
//!
//! At every non-leaf node and every sampled `β` the checker locates the
//! jet frontier `α*` and evaluates the defining inequality there. Because
//! the admissible `α` form an up-closed half-line, the frontier is the only
//! element that needs testing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::Generator;
use super::jets::{one_step_frontier, JetProblem};
use crate::error::Result;
use crate::nlexp::NonlinearExpectation;
use crate::pathspace::{hitting_time, shift_window, NodeId, OpenBox, TreeProcess};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sub,
    Super,
}

/// A hitting-time horizon `H^{s,O}` on the subtree at the test point:
/// `s = steps · dt` and `O = (-radius·h, radius·h)`, unbounded when
/// `radius` is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingSpec {
    pub steps: usize,
    #[serde(default)]
    pub radius: Option<f64>,
}

impl HittingSpec {
    fn label(&self, steps: usize) -> String {
        match self.radius {
            Some(r) => format!("hit(s={steps}dt, |w|<{r}h)"),
            None => format!("hit(s={steps}dt)"),
        }
    }
}

/// Which jets are sampled. One-step horizons are always included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JetSampling {
    /// Points of the symmetric `β` grid.
    pub beta_points: usize,
    /// Half-width of the grid; defaults to `2 · sup |z|` of the tested
    /// process (1 when that is 0).
    pub beta_range: Option<f64>,
    /// Also test `β` equal to the node's own slope.
    pub include_slope: bool,
    pub hitting: Vec<HittingSpec>,
    /// Drift bound of the jets; defaults to the generator's Lipschitz
    /// constant.
    pub bound: Option<f64>,
}

impl Default for JetSampling {
    fn default() -> Self {
        JetSampling {
            beta_points: 9,
            beta_range: None,
            include_slope: true,
            hitting: vec![HittingSpec { steps: 2, radius: None }, HittingSpec { steps: 3, radius: Some(1.5) }],
            bound: None,
        }
    }
}

impl JetSampling {
    pub fn one_step() -> Self {
        JetSampling { hitting: Vec::new(), ..Self::default() }
    }
}

const ONE_STEP: &str = "one-step";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub node: String,
    pub beta: f64,
    /// Jet frontier (`α*` for subjets, `ᾱ*` for superjets).
    pub alpha: f64,
    pub margin: f64,
    /// Horizon attaining the frontier.
    pub horizon: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub role: Role,
    pub generator: String,
    pub tol: f64,
    pub bound: f64,
    pub betas_per_node: usize,
    pub samples: usize,
    /// Frontiers computed for hitting-time horizons.
    pub hitting_samples: usize,
    /// Hitting-time frontiers that undercut the one-step frontier; always 0
    /// when the sampling is consistent.
    pub hitting_inconsistent: usize,
    /// Largest margin over every sample, violating or not.
    pub worst: Option<Violation>,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

impl CheckReport {
    pub fn worst_margin(&self) -> f64 {
        self.worst.as_ref().map_or(f64::NEG_INFINITY, |v| v.margin)
    }
}

/// `z = (u_up - u_down) / 2h` at a non-leaf node.
pub fn slope<S: Real>(u: &TreeProcess<S>, at: NodeId) -> S {
    let h = u.tree().h();
    (u[at.up()] - u[at.down()]) / (h + h)
}

fn beta_grid<S: Real>(u: &TreeProcess<S>, sampling: &JetSampling) -> Vec<S> {
    let range = match sampling.beta_range {
        Some(r) => S::lit(r),
        None => {
            let zmax = u.tree().interior_nodes().map(|n| slope(u, n).abs()).fold(S::zero(), S::max);
            if zmax > S::zero() {
                zmax + zmax
            } else {
                S::one()
            }
        }
    };
    match sampling.beta_points {
        0 => Vec::new(),
        1 => vec![S::zero()],
        k => (0..k)
            .map(|i| -range + (range + range) * S::from_count(i) / S::from_count(k - 1))
            .collect(),
    }
}

struct NodeOutcome {
    samples: usize,
    hitting: usize,
    inconsistent: usize,
    worst: Option<Violation>,
    violations: Vec<Violation>,
}

/// Runs the sampled check for `role`. The margin is `-α* - F(θ, u, β)` for
/// subjets and `F(θ, u, β) + ᾱ*` for superjets; it must stay `≤ tol`.
pub fn check_solution<S: Real>(
    u: &TreeProcess<S>,
    g: &dyn Generator<S>,
    sampling: &JetSampling,
    tol: f64,
    role: Role,
) -> Result<CheckReport> {
    let tree = *u.tree();
    let bound = sampling.bound.map_or_else(|| g.lipschitz(), S::lit);
    let e = NonlinearExpectation::new(&tree, bound)?;
    // supersolutions are checked as subjets of -u at -β
    let sign = match role {
        Role::Sub => S::one(),
        Role::Super => -S::one(),
    };
    let v = match role {
        Role::Sub => u.clone(),
        Role::Super => u.neg(),
    };
    let grid = beta_grid(u, sampling);
    let tol_s = S::lit(tol);
    let dt = tree.dt();
    let h = tree.h();

    // hitting horizons depend only on the local depth; build them once
    let mut horizons = Vec::new();
    for spec in &sampling.hitting {
        for local in 2..=tree.depth() {
            let steps = spec.steps.min(local);
            if steps < 2 {
                continue;
            }
            let window = tree.subtree(steps);
            let boxed = spec.radius.map_or_else(OpenBox::unbounded, |r| OpenBox::symmetric(S::lit(r) * h));
            let region = hitting_time(&window, S::from_count(steps) * dt, boxed)?;
            horizons.push((spec.label(steps), local, steps, region));
        }
    }

    let outcomes: Vec<Result<NodeOutcome>> = tree
        .interior_nodes()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| {
            let local = tree.depth() - n.level();
            let mut betas = grid.clone();
            if sampling.include_slope {
                betas.push(slope(u, n));
            }
            let mut problems = Vec::new();
            for (label, d, steps, region) in &horizons {
                if *d == local {
                    let window = shift_window(&v, n, *steps)?;
                    let le = e.on(window.tree());
                    problems.push((label.as_str(), JetProblem::new(&le, &window, NodeId::ROOT, S::zero(), region)?));
                }
            }
            let mut out =
                NodeOutcome { samples: 0, hitting: 0, inconsistent: 0, worst: None, violations: Vec::new() };
            for &beta in &betas {
                let b = sign * beta;
                let one = one_step_frontier(&e, &v, n, b);
                let (mut alpha, mut label) = (one, ONE_STEP);
                for (name, p) in problems.iter_mut() {
                    p.set_beta(b);
                    let a = p.frontier();
                    out.hitting += 1;
                    if a < one - S::lit(1e-8) * (S::one() + one.abs()) {
                        out.inconsistent += 1;
                    }
                    if a < alpha {
                        alpha = a;
                        label = name;
                    }
                }
                let margin = -alpha - sign * g.eval(tree.view(n), u[n], beta);
                out.samples += 1;
                let record = Violation {
                    node: n.address(),
                    beta: beta.as_f64(),
                    alpha: (sign * alpha).as_f64(),
                    margin: margin.as_f64(),
                    horizon: label.to_string(),
                };
                if margin > tol_s || margin.is_nan() {
                    out.violations.push(record.clone());
                }
                if out.worst.as_ref().is_none_or(|w| record.margin > w.margin) {
                    out.worst = Some(record);
                }
            }
            Ok(out)
        })
        .collect();

    let mut report = CheckReport {
        role,
        generator: g.name(),
        tol,
        bound: bound.as_f64(),
        betas_per_node: grid.len() + usize::from(sampling.include_slope),
        samples: 0,
        hitting_samples: 0,
        hitting_inconsistent: 0,
        worst: None,
        violations: Vec::new(),
        passed: true,
    };
    for o in outcomes {
        let o = o?;
        report.samples += o.samples;
        report.hitting_samples += o.hitting;
        report.hitting_inconsistent += o.inconsistent;
        report.violations.extend(o.violations);
        if let Some(w) = o.worst {
            if report.worst.as_ref().is_none_or(|r| w.margin > r.margin) {
                report.worst = Some(w);
            }
        }
    }
    report.passed = report.violations.is_empty();
    Ok(report)
}

/// Sampled test of `-α - F(θ, u(θ), β) ≤ tol` over subjets `(α, β)`.
pub fn check_subsolution<S: Real>(
    u: &TreeProcess<S>,
    g: &dyn Generator<S>,
    sampling: &JetSampling,
    tol: f64,
) -> Result<CheckReport> {
    check_solution(u, g, sampling, tol, Role::Sub)
}

/// Sampled test of `-α - F(θ, u(θ), β) ≥ -tol` over superjets `(α, β)`.
pub fn check_supersolution<S: Real>(
    u: &TreeProcess<S>,
    g: &dyn Generator<S>,
    sampling: &JetSampling,
    tol: f64,
) -> Result<CheckReport> {
    check_solution(u, g, sampling, tol, Role::Super)
}
