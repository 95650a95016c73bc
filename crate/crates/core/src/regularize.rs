//! Sup/inf-convolutions in the backward pseudo-distance and semicontinuous
//! envelopes.
//!
//! The convolutions range over every node of the tree (all levels). A
//! candidate `θ'` can only beat `θ` itself when `n · d(θ, θ') ≤ 2M`, so the
//! search is pruned by level and by a running upper bound; the result is
//! identical to the full scan.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pathspace::{dupire_distance, modulus, NodeId, PathPoint, PathTree, TreeProcess};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvolutionResult<S> {
    pub regularized: TreeProcess<S>,
    pub n: S,
    /// Sup-norm of the input.
    pub bound: S,
}

fn paths<S: Scalar>(tree: &PathTree<S>) -> Vec<Vec<S>> {
    tree.nodes().map(|n| tree.path_values(n)).collect()
}

/// `u^n(θ) = max_{θ'} (u(θ') - n · d⃖(θ, θ'))`.
pub fn sup_convolution<S: Scalar>(u: &TreeProcess<S>, n: S) -> Result<ConvolutionResult<S>> {
    if !(n > S::zero()) {
        return Err(Error::NonPositivePenalty(n.as_f64()));
    }
    let tree = *u.tree();
    let dt = tree.dt();
    let bound = u.sup_norm();
    let paths = paths(&tree);
    let depth = tree.depth();
    let values: Vec<S> = (0..tree.node_count())
        .into_par_iter()
        .map(|i| {
            let a = &paths[i];
            let ka = a.len() - 1;
            let mut best = u.values()[i];
            for kb in 0..=depth {
                let time_pen = n * dt * S::from_count(ka.abs_diff(kb));
                if time_pen > bound + bound {
                    continue;
                }
                for node in tree.level_nodes(kb) {
                    let j = node.0;
                    let cap = u.values()[j] - time_pen;
                    if cap <= best {
                        continue;
                    }
                    // accumulate the path part of the distance, giving up
                    // as soon as the candidate cannot win
                    let b = &paths[j];
                    let mut sup = S::zero();
                    let mut beaten = false;
                    for lag in 0..=ka.max(kb) {
                        let d = (a[ka.saturating_sub(lag)] - b[kb.saturating_sub(lag)]).abs();
                        if d > sup {
                            sup = d;
                            if cap - n * sup <= best {
                                beaten = true;
                                break;
                            }
                        }
                    }
                    if !beaten {
                        best = cap - n * sup;
                    }
                }
            }
            best
        })
        .collect();
    Ok(ConvolutionResult { regularized: TreeProcess::new(tree, values)?, n, bound })
}

/// `v^n(θ) = min_{θ'} (v(θ') + n · d⃖(θ, θ')) = -(−v)^n(θ)`.
pub fn inf_convolution<S: Scalar>(v: &TreeProcess<S>, n: S) -> Result<ConvolutionResult<S>> {
    let r = sup_convolution(&v.neg(), n)?;
    Ok(ConvolutionResult { regularized: r.regularized.neg(), n, bound: r.bound })
}

/// Smallest positive backward distance between two nodes of the tree.
pub fn min_positive_distance<S: Scalar>(tree: &PathTree<S>) -> S {
    // Equals min(dt + h, 2h) on a full tree; scanned to stay independent of
    // the tree shape.
    let paths = paths(tree);
    let mut best: Option<S> = None;
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let d = crate::pathspace::distance_raw(tree.dt(), &paths[i], &paths[j]);
            if d > S::zero() && best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        }
    }
    best.unwrap_or_else(|| tree.dt())
}

/// `2M / min positive distance`: for every `n` strictly above it the
/// sup-convolution returns `u` itself.
pub fn exactness_threshold<S: Scalar>(u: &TreeProcess<S>) -> S {
    let m = u.sup_norm();
    (m + m) / min_positive_distance(u.tree())
}

/// `w*(θ; r) = max {w(θ') : d(θ, θ') ≤ r}`.
pub fn usc_envelope<S: Scalar>(w: &TreeProcess<S>, radius: S) -> Result<TreeProcess<S>> {
    envelope(w, radius, S::max_of)
}

/// `w_*(θ; r) = min {w(θ') : d(θ, θ') ≤ r}`.
pub fn lsc_envelope<S: Scalar>(w: &TreeProcess<S>, radius: S) -> Result<TreeProcess<S>> {
    envelope(w, radius, S::min_of)
}

fn envelope<S: Scalar>(w: &TreeProcess<S>, radius: S, pick: fn(S, S) -> S) -> Result<TreeProcess<S>> {
    if radius < S::zero() {
        return Err(Error::NegativeParameter { name: "radius", value: radius.as_f64() });
    }
    let tree = *w.tree();
    let points: Vec<PathPoint<S>> = tree.nodes().map(|n| tree.point(n)).collect();
    let values: Vec<S> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = w.values()[i];
            for (j, p) in points.iter().enumerate() {
                if dupire_distance(&points[i], p).expect("same grid") <= radius {
                    acc = pick(acc, w.values()[j]);
                }
            }
            acc
        })
        .collect();
    TreeProcess::new(tree, values)
}

/// Upper (`upper = true`) or lower envelopes for a decreasing family of
/// radii; the limit as `r → 0` is the envelope in the usual sense.
pub fn envelope_family<S: Scalar>(w: &TreeProcess<S>, radii: &[S], upper: bool) -> Result<Vec<(S, TreeProcess<S>)>> {
    radii
        .iter()
        .map(|&r| {
            let env = if upper { usc_envelope(w, r)? } else { lsc_envelope(w, r)? };
            Ok((r, env))
        })
        .collect()
}

/// `ε_n(θ) = (2M + 1)/n + ρ̄(θ, 2M/n)`.
pub fn epsilon_n<S: Scalar>(point: &PathPoint<S>, n: S, bound: S) -> S {
    let two_m = bound + bound;
    (two_m + S::one()) / n + modulus(point, two_m / n)
}

/// [`epsilon_n`] at every node of a tree.
pub fn epsilon_n_process<S: Scalar>(tree: &PathTree<S>, n: S, bound: S) -> TreeProcess<S> {
    TreeProcess::from_fn(tree, |v| epsilon_n(&v.point(), n, bound))
}

#[doc(hidden)]
pub fn brute_sup_convolution<S: Scalar>(u: &TreeProcess<S>, n: S) -> TreeProcess<S> {
    let tree = *u.tree();
    let paths = paths(&tree);
    TreeProcess::from_fn(&tree, |v| {
        let a = &paths[v.node().0];
        tree.nodes()
            .map(|m: NodeId| u[m] - n * crate::pathspace::distance_raw(tree.dt(), a, &paths[m.0]))
            .reduce(S::max_of)
            .expect("nonempty tree")
    })
}
