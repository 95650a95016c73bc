//! The drift-controlled measure family and its sublinear expectations.
//!
//! On the tree a drift `μ ∈ [-L, L]` at a node tilts the up-probability to
//! `p(μ) = (1 + μh)/2`. The one-step objective is affine in `μ`, so every
//! supremum over drifts is attained at `±L` and all the suprema below are
//! computed exactly by backward induction.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pathspace::{NodeId, Phase, PathTree, StoppingRegion, TreeProcess};
use crate::scalar::{Real, Scalar};

/// `max_{|μ| ≤ L} E^μ[v]` for a single step, `(v_up + v_down)/2 + (L h/2) |v_up - v_down|`.
pub fn one_step_sup<S: Real>(v_up: S, v_down: S, bound: S, dt: S) -> Result<S> {
    let h = dt.sqrt();
    check_bound(bound, h)?;
    Ok(sup_step(v_up, v_down, bound * h / S::two()))
}

fn check_bound<S: Scalar>(bound: S, h: S) -> Result<()> {
    if bound < S::zero() || !bound.is_finite_value() {
        return Err(Error::NegativeParameter { name: "L", value: bound.as_f64() });
    }
    if bound * h > S::one() {
        return Err(Error::DriftBoundViolated { l: bound.as_f64(), h: h.as_f64() });
    }
    Ok(())
}

// `coef = L h / 2`. Both helpers evaluate `avg + coef * diff` in the same
// order so that the tilted mean under the maximizing drift reproduces the
// supremum bit for bit.
#[inline]
fn sup_step<S: Scalar>(up: S, down: S, coef: S) -> S {
    (up + down).half() + coef * (up - down).abs()
}

#[inline]
fn tilted_step<S: Scalar>(up: S, down: S, coef: S) -> S {
    (up + down).half() + coef * (up - down)
}

/// `E̅_L` and `E̲_L` on a fixed tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearExpectation<S> {
    tree: PathTree<S>,
    bound: S,
}

impl<S: Scalar> NonlinearExpectation<S> {
    /// Rejects `L < 0` and `L sqrt(dt) > 1`; the bound is never clamped.
    pub fn new(tree: &PathTree<S>, bound: S) -> Result<Self> {
        check_bound(bound, tree.h())?;
        Ok(NonlinearExpectation { tree: *tree, bound })
    }

    pub fn tree(&self) -> &PathTree<S> {
        &self.tree
    }

    pub fn bound(&self) -> S {
        self.bound
    }

    /// Same bound on another tree with the same grid.
    pub(crate) fn on(&self, tree: &PathTree<S>) -> Self {
        NonlinearExpectation { tree: *tree, bound: self.bound }
    }

    fn coef(&self, mu: S) -> S {
        mu * self.tree.h() / S::two()
    }

    pub fn one_step_sup(&self, up: S, down: S) -> S {
        sup_step(up, down, self.coef(self.bound))
    }

    pub fn one_step_inf(&self, up: S, down: S) -> S {
        -sup_step(-up, -down, self.coef(self.bound))
    }

    /// Plain mean under the tilt `p(μ) = (1 + μh)/2`.
    pub fn tilted(&self, up: S, down: S, mu: S) -> S {
        tilted_step(up, down, self.coef(mu))
    }

    /// Maximizing drift for one step; ties go to `+L`.
    pub fn argmax_drift(&self, up: S, down: S) -> S {
        if up >= down {
            self.bound
        } else {
            -self.bound
        }
    }

    /// Minimizing drift for one step; ties go to `+L`.
    pub fn argmin_drift(&self, up: S, down: S) -> S {
        if up > down {
            -self.bound
        } else {
            self.bound
        }
    }

    fn check_region(&self, x: &TreeProcess<S>, upto: &StoppingRegion) -> Result<()> {
        if x.tree().depth() != self.tree.depth() || x.tree().dt() != self.tree.dt() {
            return Err(Error::Inconsistent("process lives on a different tree".into()));
        }
        if upto.depth() != self.tree.depth() {
            return Err(Error::InvalidRegion(format!(
                "region depth {} differs from tree depth {}",
                upto.depth(),
                self.tree.depth()
            )));
        }
        Ok(())
    }

    /// Backward induction with a per-node step rule. Stop nodes keep `x`,
    /// later nodes carry the stopped value, earlier nodes apply `step`.
    fn induct(&self, x: &TreeProcess<S>, upto: &StoppingRegion, step: impl Fn(S, S) -> S) -> Result<TreeProcess<S>> {
        self.check_region(x, upto)?;
        let mut v = x.values().to_vec();
        for i in 0..v.len() {
            if upto.phases()[i] == Phase::After {
                let stop = upto.stop_of(NodeId(i)).expect("after-region nodes have a stop");
                v[i] = x.get(stop);
            }
        }
        for i in (0..self.tree.interior_count()).rev() {
            if upto.phases()[i] == Phase::Before {
                let n = NodeId(i);
                v[i] = step(v[n.up().0], v[n.down().0]);
            }
        }
        Ok(TreeProcess::from_vec_unchecked(self.tree, v))
    }

    /// `E̅_L[X_τ | F_t]` at every node, `τ` given by `upto`. Nodes strictly
    /// after the region carry the stopped value `X_τ`.
    pub fn conditional_sup(&self, x: &TreeProcess<S>, upto: &StoppingRegion) -> Result<TreeProcess<S>> {
        self.induct(x, upto, |a, b| self.one_step_sup(a, b))
    }

    pub fn conditional_inf(&self, x: &TreeProcess<S>, upto: &StoppingRegion) -> Result<TreeProcess<S>> {
        self.induct(x, upto, |a, b| self.one_step_inf(a, b))
    }

    /// Plain conditional expectation under a fixed drift control.
    pub fn conditional_tilted(
        &self,
        x: &TreeProcess<S>,
        control: &DriftControl<S>,
        upto: &StoppingRegion,
    ) -> Result<TreeProcess<S>> {
        control.check_tree(&self.tree)?;
        self.check_region(x, upto)?;
        let mut v = x.values().to_vec();
        for i in 0..v.len() {
            if upto.phases()[i] == Phase::After {
                v[i] = x.get(upto.stop_of(NodeId(i)).expect("after-region nodes have a stop"));
            }
        }
        for i in (0..self.tree.interior_count()).rev() {
            if upto.phases()[i] == Phase::Before {
                let n = NodeId(i);
                v[i] = self.tilted(v[n.up().0], v[n.down().0], control.mu[i]);
            }
        }
        Ok(TreeProcess::from_vec_unchecked(self.tree, v))
    }

    fn dominated(&self, at: NodeId, upto: &StoppingRegion) -> Result<()> {
        self.tree.check_node(at)?;
        if upto.depth() == self.tree.depth() && upto.phase(at) == Phase::After {
            return Err(Error::NotDominated(at.address()));
        }
        Ok(())
    }

    /// `E̅_L[X_τ | F_t](at)`; `at` must not lie strictly after `upto`.
    pub fn sup_expectation(&self, x: &TreeProcess<S>, at: NodeId, upto: &StoppingRegion) -> Result<S> {
        self.dominated(at, upto)?;
        Ok(self.conditional_sup(x, upto)?.get(at))
    }

    pub fn inf_expectation(&self, x: &TreeProcess<S>, at: NodeId, upto: &StoppingRegion) -> Result<S> {
        self.dominated(at, upto)?;
        Ok(self.conditional_inf(x, upto)?.get(at))
    }

    fn drift_from_table(&self, table: &TreeProcess<S>, pick: impl Fn(S, S) -> S) -> DriftControl<S> {
        let mu = self
            .tree
            .interior_nodes()
            .map(|n| pick(table.get(n.up()), table.get(n.down())))
            .collect();
        DriftControl { bound: self.bound, mu }
    }

    /// Drift attaining the one-step supremum of `y` itself at every node;
    /// for a Snell envelope this is the `P*` of its Doob-Meyer decomposition.
    pub fn argmax_control(&self, y: &TreeProcess<S>) -> DriftControl<S> {
        self.drift_from_table(y, |a, b| self.argmax_drift(a, b))
    }

    /// Drift attaining the one-step infimum of `y` at every node.
    pub fn argmin_control(&self, y: &TreeProcess<S>) -> DriftControl<S> {
        self.drift_from_table(y, |a, b| self.argmin_drift(a, b))
    }

    /// The maximizing control of `conditional_sup` (ties to `+L`).
    pub fn worst_drift(&self, x: &TreeProcess<S>, upto: &StoppingRegion) -> Result<DriftControl<S>> {
        let table = self.conditional_sup(x, upto)?;
        Ok(self.drift_from_table(&table, |a, b| self.argmax_drift(a, b)))
    }

    /// The minimizing control of `conditional_inf` (ties to `+L`).
    pub fn best_drift(&self, x: &TreeProcess<S>, upto: &StoppingRegion) -> Result<DriftControl<S>> {
        let table = self.conditional_inf(x, upto)?;
        Ok(self.drift_from_table(&table, |a, b| self.argmin_drift(a, b)))
    }
}

impl<S: Real> NonlinearExpectation<S> {
    /// Value of the controlled problem
    /// `E̅_L[Σ_{t ≤ s < T} e^{λ(s-t)} c_s dt + e^{λ(T-t)} g]` at every node.
    ///
    /// The running cost is charged at the left end of each step, so its
    /// value on the last level is unused.
    pub fn controlled_value(&self, running: &TreeProcess<S>, terminal: &[S], discount: S) -> Result<TreeProcess<S>> {
        if running.tree().depth() != self.tree.depth() {
            return Err(Error::Inconsistent("running cost lives on a different tree".into()));
        }
        let mut v = TreeProcess::from_leaves(&self.tree, terminal)?.into_values();
        let dt = self.tree.dt();
        let growth = (discount * dt).exp();
        for i in (0..self.tree.interior_count()).rev() {
            let n = NodeId(i);
            v[i] = running.get(n) * dt + growth * self.one_step_sup(v[n.up().0], v[n.down().0]);
        }
        TreeProcess::new(self.tree, v)
    }
}

/// A drift `μ(node) ∈ [-L, L]` per non-leaf node, selecting one measure of
/// the family.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftControl<S> {
    bound: S,
    mu: Vec<S>,
}

impl<S: Scalar> DriftControl<S> {
    pub fn new(tree: &PathTree<S>, bound: S, mu: Vec<S>) -> Result<Self> {
        if mu.len() != tree.interior_count() {
            return Err(Error::LengthMismatch { expected: tree.interior_count(), got: mu.len() });
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m.abs() <= bound) {
                return Err(Error::DriftOutOfBounds { node: NodeId(i).address(), mu: m.as_f64(), l: bound.as_f64() });
            }
        }
        Ok(DriftControl { bound, mu })
    }

    pub fn constant(tree: &PathTree<S>, bound: S, mu: S) -> Result<Self> {
        Self::new(tree, bound, vec![mu; tree.interior_count()])
    }

    /// Bang-bang control from a bit pattern over interior nodes: bit `i` set
    /// means `+L` at node `i`.
    pub fn from_bits(tree: &PathTree<S>, bound: S, bits: u64) -> Self {
        let mu = (0..tree.interior_count()).map(|i| if (bits >> i) & 1 == 1 { bound } else { -bound }).collect();
        DriftControl { bound, mu }
    }

    pub fn bound(&self) -> S {
        self.bound
    }

    pub fn get(&self, node: NodeId) -> S {
        self.mu[node.0]
    }

    pub fn values(&self) -> &[S] {
        &self.mu
    }

    fn check_tree(&self, tree: &PathTree<S>) -> Result<()> {
        if self.mu.len() != tree.interior_count() {
            return Err(Error::LengthMismatch { expected: tree.interior_count(), got: self.mu.len() });
        }
        Ok(())
    }

    /// Node address to drift, for audit output.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.mu.iter().enumerate().map(|(i, m)| (NodeId(i).address(), m.as_f64())).collect()
    }
}
