//! Doob-Meyer, martingale representation and Skorokhod decompositions on
//! the tree, and the reflection identity linking the Snell envelope's
//! increasing part to a backward Skorokhod problem.
//!
//! On a finite tree the decomposition is a one-line recursion: no
//! convex-combination limits are needed and predictability of `A` is
//! automatic since `ΔA` at a child is computed from its parent.

use crate::error::{Error, Result};
use crate::nlexp::{DriftControl, NonlinearExpectation};
use crate::pathspace::{NodeId, TreeProcess};
use crate::scalar::Scalar;
use crate::snell::SnellResult;

/// `Y = Y_0 + M - A` with `M_0 = A_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DoobMeyer<S> {
    pub m: TreeProcess<S>,
    pub a: TreeProcess<S>,
}

fn allowance<S: Scalar>(scale: S) -> S {
    S::roundoff() * (S::one() + scale.abs())
}

fn check_control<S: Scalar>(e: &NonlinearExpectation<S>, x: &TreeProcess<S>, mu: &DriftControl<S>) -> Result<()> {
    if x.tree().depth() != e.tree().depth() || mu.values().len() != e.tree().interior_count() {
        return Err(Error::Inconsistent("process, control and tree disagree in size".into()));
    }
    if let Some(i) = mu.values().iter().position(|m| m.abs() > e.bound()) {
        return Err(Error::DriftOutOfBounds {
            node: NodeId(i).address(),
            mu: mu.values()[i].as_f64(),
            l: e.bound().as_f64(),
        });
    }
    Ok(())
}

/// Doob-Meyer decomposition of a `P_μ`-supermartingale.
///
/// `ΔA = Y_node - E^μ[Y_child]`, `ΔM = Y_child - E^μ[Y_child]`.
pub fn doob_meyer<S: Scalar>(
    e: &NonlinearExpectation<S>,
    y: &TreeProcess<S>,
    mu: &DriftControl<S>,
) -> Result<DoobMeyer<S>> {
    check_control(e, y, mu)?;
    let tree = *e.tree();
    let mut m = vec![S::zero(); tree.node_count()];
    let mut a = vec![S::zero(); tree.node_count()];
    for n in tree.interior_nodes() {
        let mean = e.tilted(y[n.up()], y[n.down()], mu.get(n));
        let drop = y[n] - mean;
        if drop < -allowance(y[n]) {
            return Err(Error::NotSupermartingale { node: n.address(), excess: (-drop).as_f64() });
        }
        for c in [n.down(), n.up()] {
            a[c.0] = a[n.0] + drop;
            m[c.0] = m[n.0] + (y[c] - mean);
        }
    }
    Ok(DoobMeyer { m: TreeProcess::new(tree, m)?, a: TreeProcess::new(tree, a)? })
}

/// Integrand `Z` of a `P_μ`-martingale, one value per non-leaf node.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleRepr<S> {
    z: Vec<S>,
}

impl<S: Scalar> MartingaleRepr<S> {
    pub fn get(&self, node: NodeId) -> S {
        self.z[node.0]
    }

    pub fn values(&self) -> &[S] {
        &self.z
    }

    /// `M_child = M_node + Z (ΔB - μ dt)` from `M_0 = m0`.
    pub fn reconstruct(&self, e: &NonlinearExpectation<S>, m0: S, mu: &DriftControl<S>) -> TreeProcess<S> {
        let tree = *e.tree();
        let mut m = vec![m0; tree.node_count()];
        for n in tree.interior_nodes() {
            let shift = mu.get(n) * tree.dt();
            for c in [n.down(), n.up()] {
                m[c.0] = m[n.0] + self.z[n.0] * (tree.increment(c) - shift);
            }
        }
        TreeProcess::from_fn(&tree, |v| m[v.node().0])
    }
}

/// `Z = (M_up - M_down) / (2h)`; fails unless `M` is a `P_μ`-martingale.
pub fn martingale_repr<S: Scalar>(
    e: &NonlinearExpectation<S>,
    m: &TreeProcess<S>,
    mu: &DriftControl<S>,
) -> Result<MartingaleRepr<S>> {
    check_control(e, m, mu)?;
    let tree = *e.tree();
    let two_h = tree.h() + tree.h();
    let mut z = Vec::with_capacity(tree.interior_count());
    for n in tree.interior_nodes() {
        let gap = e.tilted(m[n.up()], m[n.down()], mu.get(n)) - m[n];
        if gap.abs() > allowance(m[n.up()].abs().max_of(m[n.down()].abs())) {
            return Err(Error::NotMartingale { node: n.address(), gap: gap.as_f64() });
        }
        z.push((m[n.up()] - m[n.down()]) / two_h);
    }
    Ok(MartingaleRepr { z })
}

/// `λ = η - κ` with `κ_t = max_{s ≤ t} λ_s⁻`, `η = λ + κ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkorokhodPair<S> {
    pub eta: Vec<S>,
    pub kappa: Vec<S>,
}

pub fn skorokhod<S: Scalar>(lambda: &[S]) -> Result<SkorokhodPair<S>> {
    match lambda.first() {
        None => return Ok(SkorokhodPair { eta: vec![], kappa: vec![] }),
        Some(l0) if !l0.is_zero() => return Err(Error::SkorokhodStart(l0.as_f64())),
        Some(_) => {}
    }
    let mut kappa = Vec::with_capacity(lambda.len());
    let mut running = S::zero();
    for &l in lambda {
        running = running.max_of(l.neg_part());
        kappa.push(running);
    }
    let eta = lambda.iter().zip(&kappa).map(|(&l, &k)| l + k).collect();
    Ok(SkorokhodPair { eta, kappa })
}

impl<S: Scalar> SkorokhodPair<S> {
    /// `Σ_t 1{η_t ≠ 0} Δκ_t`; zero for a genuine Skorokhod pair.
    pub fn flat_off_mass(&self) -> S {
        (1..self.kappa.len())
            .filter(|&t| !self.eta[t].is_zero())
            .map(|t| self.kappa[t] - self.kappa[t - 1])
            .fold(S::zero(), |acc, d| acc + d)
    }
}

/// Outcome of comparing the backward Skorokhod reflection with the
/// increasing part of the Snell envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionReport<S> {
    pub decomposition: DoobMeyer<S>,
    /// `κ̄_t` per leaf path (leaf order), indexed by level.
    pub kappa_bar: Vec<Vec<S>>,
    /// `max |κ̄_t - (A*_T - A*_t)|` over paths and times.
    pub max_deviation: S,
    /// Leaf and level where the maximum deviation occurs.
    pub worst: (NodeId, usize),
}

/// Builds, along every leaf path,
/// `λ_s = (M*_{T-s} - X_{T-s}) - (M*_T - X_T)`, reflects it, reverses time
/// and compares `κ̄` with `A*_T - A*_t`.
pub fn backward_reflection<S: Scalar>(
    e: &NonlinearExpectation<S>,
    x: &TreeProcess<S>,
    snell: &SnellResult<S>,
    mu_star: &DriftControl<S>,
) -> Result<ReflectionReport<S>> {
    if !snell.horizon.is_leaves() {
        return Err(Error::Inconsistent("reflection needs the Snell envelope up to the terminal time".into()));
    }
    if x.tree().depth() != snell.envelope.tree().depth() {
        return Err(Error::Inconsistent("obstacle and envelope live on different trees".into()));
    }
    let dm = doob_meyer(e, &snell.envelope, mu_star)?;
    let tree = *e.tree();
    let depth = tree.depth();
    let mut kappa_bar = Vec::with_capacity(tree.leaf_count());
    let mut max_deviation = S::zero();
    let mut worst = (NodeId::ROOT, 0);
    for leaf in tree.leaves() {
        let mut path = vec![leaf; depth + 1];
        for t in (0..depth).rev() {
            path[t] = path[t + 1].parent().expect("non-root");
        }
        let end = dm.m[leaf] - x[leaf];
        let lambda: Vec<S> = (0..=depth).map(|s| (dm.m[path[depth - s]] - x[path[depth - s]]) - end).collect();
        let pair = skorokhod(&lambda)?;
        let kb: Vec<S> = (0..=depth).map(|t| pair.kappa[depth - t]).collect();
        for t in 0..=depth {
            let dev = (kb[t] - (dm.a[leaf] - dm.a[path[t]])).abs();
            if dev > max_deviation {
                max_deviation = dev;
                worst = (leaf, t);
            }
        }
        kappa_bar.push(kb);
    }
    Ok(ReflectionReport { decomposition: dm, kappa_bar, max_deviation, worst })
}
