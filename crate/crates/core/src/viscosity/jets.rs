use crate::error::{Error, Result};
use crate::nlexp::NonlinearExpectation;
use crate::pathspace::{shift_process, NodeId, Phase, StoppingRegion, TreeProcess};
use crate::scalar::{Real, Scalar};
use crate::snell::snell_envelope;

/// A candidate jet `(α, β)` together with the horizon `H` of the tangency
/// problem, given on the subtree hanging off the test point.
#[derive(Clone, Debug, PartialEq)]
pub struct JetCandidate<S> {
    pub alpha: S,
    pub beta: S,
    pub horizon: StoppingRegion,
}

/// Resolution of [`subjet_frontier`].
pub const FRONTIER_TOL: f64 = 1e-10;

fn check_horizon<S: Scalar>(u: &TreeProcess<S>, at: NodeId, horizon: &StoppingRegion) -> Result<()> {
    u.tree().check_node(at)?;
    let local_depth = u.tree().depth() - at.level();
    if horizon.depth() != local_depth {
        return Err(Error::InvalidRegion(format!(
            "horizon has depth {}, the subtree at {at} has depth {local_depth}",
            horizon.depth()
        )));
    }
    if !horizon.is_positive() {
        return Err(Error::RegionNotPositive);
    }
    Ok(())
}

/// Tangency payoff `X_τ = u^θ_τ - α τ - β B_τ` on the subtree at `at`.
fn tangency_payoff<S: Scalar>(u: &TreeProcess<S>, at: NodeId, alpha: S, beta: S) -> Result<TreeProcess<S>> {
    let shifted = shift_process(u, at)?;
    Ok(shifted.map_nodes(|v, x| x - alpha * v.time() - beta * v.value()))
}

/// `(α, β) ∈ J̲_L u(θ)` with horizon `H`: immediate stopping is optimal for
/// `max_{τ ≤ H} E̅_L[X_τ]`.
pub fn subjet_test<S: Scalar>(
    e: &NonlinearExpectation<S>,
    u: &TreeProcess<S>,
    at: NodeId,
    cand: &JetCandidate<S>,
) -> Result<bool> {
    check_horizon(u, at, &cand.horizon)?;
    let x = tangency_payoff(u, at, cand.alpha, cand.beta)?;
    let local = NonlinearExpectation::new(x.tree(), e.bound())?;
    let snell = snell_envelope(&local, &x, &cand.horizon)?;
    Ok(snell.value == x.root())
}

/// `(α, β) ∈ J̄_L u(θ)`: `min_{τ ≤ H} E̲_L[X_τ] = u(θ)`, i.e. the subjet
/// test of `-u` at `(-α, -β)`.
pub fn superjet_test<S: Scalar>(
    e: &NonlinearExpectation<S>,
    u: &TreeProcess<S>,
    at: NodeId,
    cand: &JetCandidate<S>,
) -> Result<bool> {
    let flipped = JetCandidate { alpha: -cand.alpha, beta: -cand.beta, horizon: cand.horizon.clone() };
    subjet_test(e, &u.neg(), at, &flipped)
}

/// The tangency problem at one point, flattened for repeated evaluation
/// over `α`.
pub(crate) struct JetProblem<S> {
    coef: S,
    u: Vec<S>,
    tau: Vec<S>,
    b: Vec<S>,
    phase: Vec<Phase>,
    beta: S,
    scratch: Vec<S>,
}

impl<S: Scalar> JetProblem<S> {
    pub(crate) fn new(
        e: &NonlinearExpectation<S>,
        u: &TreeProcess<S>,
        at: NodeId,
        beta: S,
        horizon: &StoppingRegion,
    ) -> Result<Self> {
        check_horizon(u, at, horizon)?;
        let shifted = shift_process(u, at)?;
        let sub = *shifted.tree();
        Ok(JetProblem {
            coef: e.bound() * sub.h() / S::two(),
            tau: sub.nodes().map(|n| sub.time(n)).collect(),
            b: sub.nodes().map(|n| sub.value(n)).collect(),
            u: shifted.into_values(),
            phase: horizon.phases().to_vec(),
            beta,
            scratch: Vec::new(),
        })
    }

    pub(crate) fn set_beta(&mut self, beta: S) {
        self.beta = beta;
    }

    fn payoff(&self, i: usize, alpha: S) -> S {
        self.u[i] - alpha * self.tau[i] - self.beta * self.b[i]
    }

    /// Same arithmetic as [`subjet_test`].
    pub(crate) fn admissible(&mut self, alpha: S) -> bool {
        let n = self.u.len();
        self.scratch.clear();
        self.scratch.resize(n, S::zero());
        for i in (0..n).rev() {
            match self.phase[i] {
                Phase::After => {}
                Phase::Stop => self.scratch[i] = self.payoff(i, alpha),
                Phase::Before => {
                    let (up, down) = (self.scratch[2 * i + 2], self.scratch[2 * i + 1]);
                    let cont = (up + down).half() + self.coef * (up - down).abs();
                    self.scratch[i] = self.payoff(i, alpha).max_of(cont);
                }
            }
        }
        self.scratch[0] == self.u[0]
    }

    /// `[min, max]` of `(X_θ' + ατ - u_0) / τ` over reachable nodes: below
    /// the bracket every stop beats `u_0`, above it none does.
    fn bracket(&self) -> (S, S) {
        let mut lo: Option<S> = None;
        let mut hi: Option<S> = None;
        for i in 1..self.u.len() {
            if self.phase[i] == Phase::After {
                continue;
            }
            let r = (self.u[i] - self.beta * self.b[i] - self.u[0]) / self.tau[i];
            lo = Some(lo.map_or(r, |v: S| v.min_of(r)));
            hi = Some(hi.map_or(r, |v: S| v.max_of(r)));
        }
        (lo.expect("positive horizon"), hi.expect("positive horizon"))
    }
}

impl<S: Real> JetProblem<S> {
    pub(crate) fn frontier(&mut self) -> S {
        let (mut lo, mut hi) = self.bracket();
        if self.admissible(lo) {
            return lo;
        }
        let step = S::lit(FRONTIER_TOL);
        let mut tries = 0;
        while !self.admissible(hi) {
            hi = hi + step * (S::one() + hi.abs());
            tries += 1;
            if tries > 64 {
                return S::infinity();
            }
        }
        while hi - lo > step {
            let mid = (lo + hi).half();
            if mid <= lo || mid >= hi {
                break;
            }
            if self.admissible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// `α* = inf{α : (α, β) ∈ J̲_L u(θ)}` for horizon `H`, to within
/// [`FRONTIER_TOL`]. The returned value is admissible; `+∞` if no
/// admissible `α` is found.
pub fn subjet_frontier<S: Real>(
    e: &NonlinearExpectation<S>,
    u: &TreeProcess<S>,
    at: NodeId,
    beta: S,
    horizon: &StoppingRegion,
) -> Result<S> {
    Ok(JetProblem::new(e, u, at, beta, horizon)?.frontier())
}

/// `sup{α : (α, β) ∈ J̄_L u(θ)}`.
pub fn superjet_frontier<S: Real>(
    e: &NonlinearExpectation<S>,
    u: &TreeProcess<S>,
    at: NodeId,
    beta: S,
    horizon: &StoppingRegion,
) -> Result<S> {
    Ok(-subjet_frontier(e, &u.neg(), at, -beta, horizon)?)
}

/// One-step subjet frontier in closed form:
/// `α* = L |z - β| - (u - m)/dt` with `m`, `z` the mean and slope of the
/// children.
pub fn one_step_frontier<S: Scalar>(e: &NonlinearExpectation<S>, u: &TreeProcess<S>, at: NodeId, beta: S) -> S {
    let tree = u.tree();
    let (up, down) = (u[at.up()], u[at.down()]);
    let m = (up + down).half();
    let z = (up - down) / (tree.h() + tree.h());
    e.bound() * (z - beta).abs() - (u[at] - m) / tree.dt()
}
