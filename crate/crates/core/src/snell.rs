//! Optimal stopping under `E̅_L`.
//!
//! `Y(θ) = sup_τ E̅_L[X_τ | θ]` over stopping times bounded by a horizon
//! region. On a finite tree the semicontinuity hypotheses on the obstacle
//! are vacuous and the envelope is an exact backward induction.

use crate::error::{Error, Result};
use crate::nlexp::NonlinearExpectation;
use crate::pathspace::{NodeId, Phase, StoppingRegion, TreeProcess};
use crate::scalar::Scalar;

/// Largest depth accepted by [`brute_force_snell`]; depth 5 already has
/// 458 330 stopping rules.
pub const BRUTE_FORCE_MAX_DEPTH: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct SnellResult<S> {
    pub envelope: TreeProcess<S>,
    /// `τ* = inf{t : X_t = Y_t}`, pathwise first contact.
    pub optimal: StoppingRegion,
    pub horizon: StoppingRegion,
    pub value: S,
}

/// Snell envelope of `x` up to `horizon`.
///
/// `Y = X` on the horizon, `Y = max(X, E̅_L-step of Y)` before it, and nodes
/// after the horizon carry the stopped value. Contact `Y = X` is tested with
/// exact equality: `Y` is either a copy of `X` or strictly larger.
pub fn snell_envelope<S: Scalar>(
    e: &NonlinearExpectation<S>,
    x: &TreeProcess<S>,
    horizon: &StoppingRegion,
) -> Result<SnellResult<S>> {
    let mut y = e.conditional_sup(x, horizon)?;
    let tree = *e.tree();
    for i in (0..tree.interior_count()).rev() {
        if horizon.phases()[i] == Phase::Before {
            let n = NodeId(i);
            let cont = e.one_step_sup(y[n.up()], y[n.down()]);
            y.set(n, x[n].max_of(cont));
        }
    }
    let optimal = StoppingRegion::first_hit(tree.depth(), |n| horizon.phase(n) != Phase::After && y[n] == x[n]);
    let value = y.root();
    Ok(SnellResult { envelope: y, optimal, horizon: horizon.clone(), value })
}

/// Maximum of `E̅_L[X_τ]` over every stopping rule `τ` bounded by
/// `horizon`, by explicit enumeration.
///
/// The set of achievable values at a node is `{X}` on the horizon and
/// `{X} ∪ {step(a, b) : a ∈ V(down), b ∈ V(up)}` before it; every element is
/// the value of one stopping rule of the subtree.
pub fn brute_force_snell<S: Scalar>(
    e: &NonlinearExpectation<S>,
    x: &TreeProcess<S>,
    horizon: &StoppingRegion,
) -> Result<S> {
    let depth = e.tree().depth();
    if depth > BRUTE_FORCE_MAX_DEPTH {
        return Err(Error::DepthTooLarge { depth, max: BRUTE_FORCE_MAX_DEPTH });
    }
    if horizon.depth() != depth || x.tree().depth() != depth {
        return Err(Error::InvalidRegion("horizon and obstacle must live on the tree".into()));
    }
    fn rules<S: Scalar>(e: &NonlinearExpectation<S>, x: &TreeProcess<S>, h: &StoppingRegion, n: NodeId) -> Vec<S> {
        if h.phase(n) == Phase::Stop {
            return vec![x[n]];
        }
        let down = rules(e, x, h, n.down());
        let up = rules(e, x, h, n.up());
        let mut out = Vec::with_capacity(1 + down.len() * up.len());
        out.push(x[n]);
        for &a in &up {
            for &b in &down {
                out.push(e.one_step_sup(a, b));
            }
        }
        out
    }
    let values = rules(e, x, horizon, NodeId::ROOT);
    Ok(values.into_iter().reduce(S::max_of).expect("at least the immediate rule"))
}

/// A node `θ*` strictly before `horizon` at which immediate stopping is
/// optimal for `u`, provided `u_0 > E̅_L[u_H]`; `None` when the hypothesis
/// fails.
///
/// The first such node in breadth-first order is returned.
pub fn fundamental_point<S: Scalar>(
    e: &NonlinearExpectation<S>,
    u: &TreeProcess<S>,
    horizon: &StoppingRegion,
) -> Result<Option<NodeId>> {
    let at_horizon = e.sup_expectation(u, NodeId::ROOT, horizon)?;
    if !(u.root() > at_horizon) {
        return Ok(None);
    }
    let snell = snell_envelope(e, u, horizon)?;
    let found = snell.optimal.marked_nodes().find(|&n| horizon.phase(n) == Phase::Before);
    Ok(found)
}
