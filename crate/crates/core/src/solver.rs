//! Backward-induction oracle for the semilinear equation and the harnesses
//! built on it: Perron supremum, comparison, maximum principle and the
//! difference-of-solutions check.
//!
//! The oracle is the explicit scheme `u = m + dt F(θ, m, z)` with
//! `m = (u_up + u_down)/2` and `z = (u_up - u_down)/(2h)`. Evaluating `F` at
//! `m` instead of `u` avoids a fixed point per node; the `O(dt)`
//! consistency error is absorbed by the tolerance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nlexp::NonlinearExpectation;
use crate::pathspace::{hitting_time, modulus, NodeId, NodeView, OpenBox, PathTree, StoppingRegion, TreeProcess};
use crate::regularize::{epsilon_n_process, inf_convolution, sup_convolution};
use crate::scalar::Real;
use crate::viscosity::{
    check_subsolution, check_supersolution, pucci_with_source, special_solution, with_source, Builtin, CheckReport,
    DynGenerator, FnGenerator, Generator, JetSampling,
};

/// Terminal values `ξ`, one per leaf in leaf order.
#[derive(Clone, Debug, PartialEq)]
pub struct TerminalCondition<S> {
    xi: Vec<S>,
}

impl<S: Real> TerminalCondition<S> {
    pub fn new(tree: &PathTree<S>, xi: Vec<S>) -> Result<Self> {
        if xi.len() != tree.leaf_count() {
            return Err(Error::LengthMismatch { expected: tree.leaf_count(), got: xi.len() });
        }
        if let Some(i) = xi.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("terminal value {i}")));
        }
        Ok(TerminalCondition { xi })
    }

    pub fn from_fn(tree: &PathTree<S>, mut f: impl FnMut(NodeView<'_, S>) -> S) -> Result<Self> {
        Self::new(tree, tree.leaves().map(|n| f(tree.view(n))).collect())
    }

    pub fn values(&self) -> &[S] {
        &self.xi
    }

    pub fn sup_norm(&self) -> S {
        self.xi.iter().fold(S::zero(), |a, x| a.max(x.abs()))
    }
}

fn check_contraction<S: Real>(tree: &PathTree<S>, l: S) -> Result<()> {
    if l * tree.h() > S::one() || !(l * tree.dt() < S::one()) {
        return Err(Error::ContractionViolated { dt: tree.dt().as_f64(), l: l.as_f64() });
    }
    Ok(())
}

/// Backward induction for `-∂_t u - ½ ∂²_ωω u - F(θ, u, ∂_ω u) = 0`,
/// `u_T = ξ`. Levels are processed in parallel.
pub fn ppde_solve<S: Real>(g: &dyn Generator<S>, xi: &TerminalCondition<S>, tree: &PathTree<S>) -> Result<TreeProcess<S>> {
    check_contraction(tree, g.lipschitz())?;
    let mut v = TreeProcess::from_leaves(tree, xi.values())?.into_values();
    let (dt, h) = (tree.dt(), tree.h());
    for level in (0..tree.depth()).rev() {
        let start = (1usize << level) - 1;
        let end = 2 * start + 1;
        let (head, tail) = v.split_at_mut(end);
        head[start..end].par_iter_mut().enumerate().for_each(|(j, slot)| {
            let n = NodeId(start + j);
            let (up, down) = (tail[n.up().0 - end], tail[n.down().0 - end]);
            let m = (up + down) / S::two();
            let z = (up - down) / (h + h);
            *slot = m + dt * g.eval(tree.view(n), m, z);
        });
    }
    TreeProcess::new(*tree, v)
}

/// `5 dt (1 + L)(1 + sup|ξ|)`.
pub fn default_tolerance(dt: f64, l: f64, sup_xi: f64) -> f64 {
    5.0 * dt * (1.0 + l) * (1.0 + sup_xi)
}

/// `u + c (T - t)`.
pub fn time_shift<S: Real>(u: &TreeProcess<S>, c: S) -> TreeProcess<S> {
    let tree = *u.tree();
    u.map_nodes(|v, x| x + c * tree.remaining(v.node()))
}

/// Horizon of a special-solution member, on the full tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonSpec {
    Terminal,
    Level { level: usize },
    /// First exit of `ω` from `(-radius·h, radius·h)` or time `steps·dt`.
    Hitting { steps: usize, radius: Option<f64> },
}

impl HorizonSpec {
    pub fn region<S: Real>(&self, tree: &PathTree<S>) -> Result<StoppingRegion> {
        match *self {
            HorizonSpec::Terminal => Ok(StoppingRegion::leaves(tree.depth())),
            HorizonSpec::Level { level } => StoppingRegion::level(tree.depth(), level),
            HorizonSpec::Hitting { steps, radius } => {
                let boxed = radius.map_or_else(OpenBox::unbounded, |r| OpenBox::symmetric(S::lit(r) * tree.h()));
                hitting_time(tree, S::from_count(steps) * tree.dt(), boxed)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetTriple {
    pub alpha: f64,
    pub beta: f64,
    pub horizon: HorizonSpec,
}

/// Candidate members of a subsolution family: down-shifted oracles
/// `u - δ(T - t)` and special solutions `η` built on the oracle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySpec {
    pub shifts: Vec<f64>,
    pub jets: Vec<JetTriple>,
    /// Members must stay below `oracle + upper_slack (T - t) + tol`.
    pub upper_slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Member<S> {
    pub process: TreeProcess<S>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dropped {
    pub provenance: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsolutionFamily<S> {
    pub generator: String,
    pub spec: FamilySpec,
    pub tol: f64,
    pub members: Vec<Member<S>>,
    pub dropped: Vec<Dropped>,
}

/// Validates every candidate of `spec` and keeps those that pass
/// [`check_subsolution`] and stay below the supersolution bound.
pub fn build_subsolution_family<S: Real>(
    g: &dyn Generator<S>,
    xi: &TerminalCondition<S>,
    tree: &PathTree<S>,
    spec: &FamilySpec,
    sampling: &JetSampling,
    tol: f64,
) -> Result<SubsolutionFamily<S>> {
    let oracle = ppde_solve(g, xi, tree)?;
    let e = NonlinearExpectation::new(tree, g.lipschitz())?;
    let mut candidates = Vec::new();
    for &d in &spec.shifts {
        candidates.push((format!("shift(delta={d})"), time_shift(&oracle, -S::lit(d))));
    }
    for j in &spec.jets {
        let region = j.horizon.region(tree)?;
        let eta = special_solution(&e, &oracle, &region, S::lit(j.alpha), S::lit(j.beta))?;
        candidates.push((format!("eta(alpha={}, beta={}, horizon={:?})", j.alpha, j.beta, j.horizon), eta));
    }
    let upper = time_shift(&oracle, S::lit(spec.upper_slack));
    let verdicts: Vec<Result<Option<String>>> = candidates
        .par_iter()
        .map(|(_, p)| {
            let excess = p.values().iter().zip(upper.values()).fold(S::neg_infinity(), |a, (&x, &b)| a.max(x - b));
            if excess > S::lit(tol) {
                return Ok(Some(format!("exceeds the upper bound by {}", excess.as_f64())));
            }
            let r = check_subsolution(p, g, sampling, tol)?;
            Ok((!r.passed).then(|| format!("{} violations, worst margin {}", r.violations.len(), r.worst_margin())))
        })
        .collect();
    let mut family =
        SubsolutionFamily { generator: g.name(), spec: spec.clone(), tol, members: Vec::new(), dropped: Vec::new() };
    for ((provenance, process), verdict) in candidates.into_iter().zip(verdicts) {
        match verdict? {
            None => family.members.push(Member { process, provenance }),
            Some(reason) => family.dropped.push(Dropped { provenance, reason }),
        }
    }
    Ok(family)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerronResult<S> {
    pub value: TreeProcess<S>,
    /// Index of the member attaining the maximum at each node; ties go to
    /// the earliest member.
    pub argmax: Vec<usize>,
    pub provenance: Vec<String>,
}

impl<S> PerronResult<S> {
    pub fn provenance_at(&self, node: NodeId) -> &str {
        &self.provenance[self.argmax[node.0]]
    }
}

/// Pointwise maximum over the family.
pub fn perron_construct<S: Real>(family: &SubsolutionFamily<S>) -> Result<PerronResult<S>> {
    let first = family.members.first().ok_or(Error::EmptyFamily)?;
    let tree = *first.process.tree();
    let mut best = first.process.values().to_vec();
    let mut argmax = vec![0; best.len()];
    for (k, m) in family.members.iter().enumerate().skip(1) {
        first.process.same_tree(&m.process)?;
        for (i, &x) in m.process.values().iter().enumerate() {
            if x > best[i] {
                best[i] = x;
                argmax[i] = k;
            }
        }
    }
    Ok(PerronResult {
        value: TreeProcess::new(tree, best)?,
        argmax,
        provenance: family.members.iter().map(|m| m.provenance.clone()).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeGap {
    pub node: String,
    pub u: f64,
    pub v: f64,
    /// `u - v`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub tol: f64,
    pub sub_check: CheckReport,
    pub super_check: CheckReport,
    pub preconditions_ok: bool,
    pub terminal_ok: bool,
    pub terminal_violations: Vec<NodeGap>,
    /// Nodes with `u > v + tol`.
    pub violations: Vec<NodeGap>,
    pub max_gap: f64,
    pub passed: bool,
}

fn gaps<S: Real>(u: &TreeProcess<S>, v: &TreeProcess<S>, nodes: impl Iterator<Item = NodeId>, tol: S) -> Vec<NodeGap> {
    nodes
        .filter(|&n| u[n] - v[n] > tol)
        .map(|n| NodeGap { node: n.address(), u: u[n].as_f64(), v: v[n].as_f64(), gap: (u[n] - v[n]).as_f64() })
        .collect()
}

/// Checks `u_T ≤ v_T` and `u ≤ v + tol`, with the sub/supersolution checks
/// of `u` and `v` for `g` recorded as preconditions.
pub fn comparison_check<S: Real>(
    u: &TreeProcess<S>,
    v: &TreeProcess<S>,
    g: &dyn Generator<S>,
    sampling: &JetSampling,
    tol: f64,
) -> Result<ComparisonReport> {
    u.same_tree(v)?;
    let tree = *u.tree();
    let (sub_check, super_check) =
        rayon::join(|| check_subsolution(u, g, sampling, tol), || check_supersolution(v, g, sampling, tol));
    let (sub_check, super_check) = (sub_check?, super_check?);
    let terminal_violations = gaps(u, v, tree.leaves(), S::zero());
    let violations = gaps(u, v, tree.nodes(), S::lit(tol));
    let max_gap = tree.nodes().map(|n| (u[n] - v[n]).as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let preconditions_ok = sub_check.passed && super_check.passed;
    let terminal_ok = terminal_violations.is_empty();
    let passed = preconditions_ok && terminal_ok && violations.is_empty();
    Ok(ComparisonReport {
        tol,
        sub_check,
        super_check,
        preconditions_ok,
        terminal_ok,
        terminal_violations,
        violations,
        max_gap,
        passed,
    })
}

/// Penalty indices of the maximum-principle argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxPrincipleParams {
    pub m: f64,
    pub n: f64,
    pub c: f64,
}

impl Default for MaxPrincipleParams {
    fn default() -> Self {
        MaxPrincipleParams { m: 4.0, n: 16.0, c: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub params: MaxPrincipleParams,
    pub tol: f64,
    pub precondition: CheckReport,
    pub terminal_ok: bool,
    pub max_terminal: f64,
    /// `max u`.
    pub max_u: f64,
    /// `max (u - u^n)`; nonpositive by construction.
    pub max_u_minus_un: f64,
    /// `max (u^n - v^{n,m})`.
    pub max_un_minus_v: f64,
    /// Nodes with `u > tol`.
    pub violations: Vec<String>,
    /// Nodes with `u^n > v^{n,m} + tol`.
    pub domination_violations: Vec<String>,
    pub passed: bool,
}

/// `F = L y⁺ + L |z|`.
pub fn pucci_extremal<S: Real>(l: S) -> DynGenerator<S> {
    Builtin::PucciPlus { l }.into_dyn()
}

/// Maximum principle for the Pucci extremal equation: if `u` is a
/// subsolution of `-∂_t u - ½ ∂²u - L u⁺ - L|∂_ω u| = 0` with `u_T ≤ 0`,
/// then `u ≤ 0`.
///
/// The intermediate comparator is
/// `v^{n,m} = E̅_L[Σ e^{Ls}(ρ^{n,m} + L(u^m - u^n)⁺) ds + e^{L(T-t)} (u^n_T)⁺]`
/// with `ρ^{n,m} = C m (1/n + ρ̄(θ, C/n))`; the report asserts
/// `u ≤ u^n ≤ v^{n,m} + tol` and `u ≤ tol`.
pub fn pucci_max_principle<S: Real>(
    u: &TreeProcess<S>,
    l: S,
    params: MaxPrincipleParams,
    sampling: &JetSampling,
    tol: f64,
) -> Result<MaxPrincipleReport> {
    let tree = *u.tree();
    let g = pucci_extremal(l);
    let precondition = check_subsolution(u, g.as_ref(), sampling, tol)?;
    let (m, n, c) = (S::lit(params.m), S::lit(params.n), S::lit(params.c));
    let un = sup_convolution(u, n)?.regularized;
    let um = sup_convolution(u, m)?.regularized;
    let running = TreeProcess::from_fn(&tree, |v| {
        let rho = c * m * (S::one() / n + modulus(&v.point(), c / n));
        rho + l * (um[v.node()] - un[v.node()]).max(S::zero())
    });
    let terminal: Vec<S> = un.leaf_values().iter().map(|&x| x.max(S::zero())).collect();
    let e = NonlinearExpectation::new(&tree, l)?;
    let v = e.controlled_value(&running, &terminal, l)?;

    let tol_s = S::lit(tol);
    let max_terminal = u.leaf_values().iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x.as_f64()));
    let max_of = |f: &dyn Fn(NodeId) -> S| tree.nodes().map(|k| f(k).as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let violations: Vec<String> = tree.nodes().filter(|&k| u[k] > tol_s).map(NodeId::address).collect();
    let domination_violations: Vec<String> =
        tree.nodes().filter(|&k| un[k] > v[k] + tol_s).map(NodeId::address).collect();
    let terminal_ok = max_terminal <= 0.0;
    let max_u_minus_un = max_of(&|k| u[k] - un[k]);
    let passed = precondition.passed
        && terminal_ok
        && violations.is_empty()
        && domination_violations.is_empty()
        && max_u_minus_un <= 0.0;
    Ok(MaxPrincipleReport {
        params,
        tol,
        precondition,
        terminal_ok,
        max_terminal,
        max_u: max_of(&|k| u[k]),
        max_u_minus_un,
        max_un_minus_v: max_of(&|k| un[k] - v[k]),
        violations,
        domination_violations,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceReport {
    /// `u` against `F₀ (+ slack)`.
    pub u_check: CheckReport,
    /// `v` against `F₀ + δ (- slack)`.
    pub v_check: CheckReport,
    /// `w = u - v` against `L|z| + δ (+ 2 slack)`.
    pub w_check: CheckReport,
    pub passed: bool,
}

/// `w = u - v` checked as a subsolution of `G(θ, y, z) = L|z| + δ(θ)`,
/// for `u` a subsolution of `F₀` and `v` a supersolution of `F₀ + δ`.
///
/// `F₀` must not depend on `y`. With `slack = Some(ρ)` (regularized
/// pairs) the equations become `F₀ + ρ`, `F₀ + δ - ρ` and `L|z| + δ + 2ρ`.
pub fn difference_subsolution_check<S: Real>(
    u: &TreeProcess<S>,
    v: &TreeProcess<S>,
    f0: DynGenerator<S>,
    delta: &TreeProcess<S>,
    slack: Option<&TreeProcess<S>>,
    sampling: &JetSampling,
    tol: f64,
) -> Result<DifferenceReport> {
    u.same_tree(v)?;
    u.same_tree(delta)?;
    let tree = *u.tree();
    let zero = TreeProcess::constant(&tree, S::zero());
    let rho = slack.unwrap_or(&zero);
    u.same_tree(rho)?;
    let l = f0.lipschitz();
    let f_u = with_source(f0.clone(), rho.clone());
    let f_v = with_source(f0, delta.zip_with(rho, |d, r| d - r)?);
    let g_w = pucci_with_source(l, delta.zip_with(rho, |d, r| d + r + r)?);
    let w = u.zip_with(v, |a, b| a - b)?;
    let u_check = check_subsolution(u, f_u.as_ref(), sampling, tol)?;
    let v_check = check_supersolution(v, f_v.as_ref(), sampling, tol)?;
    let w_check = check_subsolution(&w, g_w.as_ref(), sampling, tol)?;
    let passed = w_check.passed;
    Ok(DifferenceReport { u_check, v_check, w_check, passed })
}

/// `2 ρ⁰(θ, ε_n(θ))` for the generator's declared modulus.
pub fn regularization_slack<S: Real>(g: &dyn Generator<S>, u: &TreeProcess<S>, n: S) -> TreeProcess<S> {
    let tree = *u.tree();
    let eps = epsilon_n_process(&tree, n, u.sup_norm());
    TreeProcess::from_fn(&tree, |v| {
        let r = g.modulus(v, eps[v.node()], u[v.node()]);
        r + r
    })
}

/// Sup-convolution transfer: if `u` is a subsolution of `F₀`, then `u^n`
/// is one of `F₀ + ρ⁰(·, ε_n(·))`. Returns the check of `u^n`.
pub fn regularization_transfer<S: Real>(
    u: &TreeProcess<S>,
    g: DynGenerator<S>,
    n: S,
    sampling: &JetSampling,
    tol: f64,
) -> Result<CheckReport> {
    let un = sup_convolution(u, n)?.regularized;
    let half = regularization_slack(g.as_ref(), u, n).map(|x| x / S::two());
    let perturbed = with_source(g, half);
    check_subsolution(&un, perturbed.as_ref(), sampling, tol)
}

/// The regularized pair `(u^n, v_n)`: sup-convolution of `u`, inf-convolution
/// of `v`.
pub fn regularized_pair<S: Real>(
    u: &TreeProcess<S>,
    v: &TreeProcess<S>,
    n: S,
) -> Result<(TreeProcess<S>, TreeProcess<S>)> {
    Ok((sup_convolution(u, n)?.regularized, inf_convolution(v, n)?.regularized))
}

/// Convenience generator `F + c`.
pub fn shifted_generator<S: Real>(g: DynGenerator<S>, c: S) -> DynGenerator<S> {
    let l = g.lipschitz();
    let mono = g.monotone_in_y();
    let name = format!("{} + {c}", g.name());
    FnGenerator::new(name, l, mono, move |at, y, z| g.eval(at, y, z) + c).into_dyn()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree() -> PathTree<f64> {
        PathTree::new(6, 0.02).unwrap()
    }

    fn payoff(t: &PathTree<f64>) -> TerminalCondition<f64> {
        TerminalCondition::from_fn(t, |v| (1.3 * v.value()).sin() + 0.5 * v.running_max()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let t = PathTree::new(3, 0.25f64).unwrap();
        let b = TerminalCondition::from_fn(&t, |v| v.value()).unwrap();
        let u = ppde_solve(&Builtin::Zero, &b, &t).unwrap();
        assert!(u.max_abs_diff(&TreeProcess::brownian(&t)) < 1e-15);
        let zero = TerminalCondition::new(&t, vec![0.0; 8]).unwrap();
        let c = ppde_solve(&Builtin::Constant { c: 2.0 }, &zero, &t).unwrap();
        for n in t.nodes() {
            assert!((c[n] - 2.0 * t.remaining(n)).abs() < 1e-14);
        }
        let t = tree();
        let xi = payoff(&t);
        let e = NonlinearExpectation::new(&t, 1.5).unwrap();
        let u = ppde_solve(&Builtin::Pucci { l: 1.5 }, &xi, &t).unwrap();
        let x = TreeProcess::from_leaves(&t, xi.values()).unwrap();
        let direct = e.sup_expectation(&x, NodeId::ROOT, &StoppingRegion::leaves(6)).unwrap();
        assert!((u.root() - direct).abs() < 1e-12);
        assert!(matches!(
            ppde_solve(&Builtin::Pucci { l: 20.0 }, &xi, &t),
            Err(Error::ContractionViolated { .. })
        ));
    }

    #[test]
    fn perron_examples() {
        let t = tree();
        let g = Builtin::Pucci { l: 1.0 };
        let xi = payoff(&t);
        let tol = default_tolerance(0.02, 1.0, xi.sup_norm());
        let oracle = ppde_solve(&g, &xi, &t).unwrap();
        let spec = FamilySpec { shifts: vec![0.2, 0.1], ..FamilySpec::default() };
        let fam = build_subsolution_family(&g, &xi, &t, &spec, &JetSampling::one_step(), tol).unwrap();
        assert_eq!(fam.members.len(), 2);
        let p = perron_construct(&fam).unwrap();
        assert!(p.value.max_abs_diff(&time_shift(&oracle, -0.1)) < 1e-15);
        assert!(p.provenance_at(NodeId::ROOT).contains("0.1"));

        let empty = build_subsolution_family(&g, &xi, &t, &FamilySpec::default(), &JetSampling::one_step(), tol).unwrap();
        assert!(matches!(perron_construct(&empty), Err(Error::EmptyFamily)));

        let jets = FamilySpec {
            jets: vec![JetTriple { alpha: 0.5, beta: 0.5, horizon: HorizonSpec::Terminal }],
            ..FamilySpec::default()
        };
        let fam = build_subsolution_family(&g, &xi, &t, &jets, &JetSampling::default(), tol).unwrap();
        assert_eq!(fam.members.len(), 1, "{:?}", fam.dropped);
    }

    #[test]
    fn comparison_examples() {
        let t = tree();
        let g = Builtin::Linear { a: 0.5, b: 1.0 };
        let xi = payoff(&t);
        let tol = default_tolerance(0.02, 1.0, xi.sup_norm());
        let s = JetSampling::default();
        let u = ppde_solve(&g, &xi, &t).unwrap();
        let r = comparison_check(&time_shift(&u, -0.1), &time_shift(&u, 0.1), &g, &s, tol).unwrap();
        assert!(r.passed, "{r:?}");
        let same = comparison_check(&u, &u, &g, &s, tol).unwrap();
        assert!(same.passed);
        assert_eq!(same.max_gap, 0.0);
        let bad = comparison_check(&u.map(|x| x + 1.0), &u, &g, &s, tol).unwrap();
        assert!(!bad.passed && !bad.terminal_ok);
        assert_eq!(bad.violations.len(), t.node_count());
    }

    #[test]
    fn maximum_principle_examples() {
        let t = tree();
        let s = JetSampling::default();
        let zero = TreeProcess::constant(&t, 0.0);
        assert!(pucci_max_principle(&zero, 1.0, MaxPrincipleParams::default(), &s, 0.01).unwrap().passed);
        let xi = TerminalCondition::from_fn(&t, |v| -f64::abs(v.value()) - 0.2 * v.running_max()).unwrap();
        let u = ppde_solve(pucci_extremal(1.0).as_ref(), &xi, &t).unwrap();
        let tol = default_tolerance(0.02, 1.0, xi.sup_norm());
        let r = pucci_max_principle(&u, 1.0, MaxPrincipleParams::default(), &s, tol).unwrap();
        assert!(r.passed, "{r:?}");
        let eps = TreeProcess::constant(&t, 0.05);
        let r = pucci_max_principle(&eps, 1.0, MaxPrincipleParams::default(), &s, 0.01).unwrap();
        assert!(!r.terminal_ok && !r.passed);
    }

    #[test]
    fn difference_examples() {
        let t = tree();
        let f0 = Builtin::Pucci { l: 1.0 }.into_dyn();
        let xi = payoff(&t);
        let tol = default_tolerance(0.02, 1.0, xi.sup_norm());
        let s = JetSampling::default();
        let u = ppde_solve(f0.as_ref(), &xi, &t).unwrap();
        let zero = TreeProcess::constant(&t, 0.0);
        assert!(difference_subsolution_check(&u, &u, f0.clone(), &zero, None, &s, tol).unwrap().passed);
        let delta = TreeProcess::constant(&t, 0.2);
        let fd = shifted_generator(f0.clone(), 0.2);
        let v = ppde_solve(fd.as_ref(), &xi, &t).unwrap();
        let r = difference_subsolution_check(&u, &v, f0.clone(), &delta, None, &s, tol).unwrap();
        assert!(r.passed && r.u_check.passed && r.v_check.passed, "{r:?}");
        assert!(r.w_check.worst_margin() < -0.1);

        let n = 8.0;
        let (un, vn) = regularized_pair(&u, &v, n).unwrap();
        let slack = regularization_slack(f0.as_ref(), &u, n);
        let r = difference_subsolution_check(&un, &vn, f0.clone(), &delta, Some(&slack), &s, tol).unwrap();
        assert!(r.passed, "{:?}", r.w_check.worst);
    }

    #[test]
    fn regularization_keeps_subsolutions() {
        let t = tree();
        let f0 = Builtin::Pucci { l: 1.0 }.into_dyn();
        let xi = payoff(&t);
        let tol = default_tolerance(0.02, 1.0, xi.sup_norm());
        let u = time_shift(&ppde_solve(f0.as_ref(), &xi, &t).unwrap(), -0.1);
        for n in [2.0, 8.0, 64.0] {
            let r = regularization_transfer(&u, f0.clone(), n, &JetSampling::default(), tol).unwrap();
            assert!(r.passed, "n = {n}: {:?}", r.worst);
        }
    }
}
