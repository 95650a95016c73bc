//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use ppde_lab::pathspace::shift_process;
use ppde_lab::{NodeId, NonlinearExpectation, Scalar, TreeProcess};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest depth enumerated directly: 2^15 controls.
const DIRECT_DEPTH: usize = 4;

fn enumerate<S: Scalar>(e: &NonlinearExpectation<S>, x: &TreeProcess<S>) -> S {
    let tree = *x.tree();
    let interior = tree.interior_count();
    let l = e.bound();
    let mut v = x.values().to_vec();
    let mut best: Option<S> = None;
    for bits in 0..1u64 << interior {
        // plain expectation under the control selected by `bits`
        for i in (0..interior).rev() {
            let n = NodeId(i);
            let mu = if (bits >> i) & 1 == 1 { l } else { -l };
            v[i] = e.tilted(v[n.up().0], v[n.down().0], mu);
        }
        best = Some(best.map_or(v[0], |b| b.max_of(v[0])));
    }
    best.expect("at least one control")
}

/// `max_μ E^μ[X_T]` over every bang-bang control, by enumeration.
///
/// Up to depth 4 all `2^(2^N - 1)` controls are enumerated. Beyond that the
/// objective `p(μ_0) V_up + (1 - p(μ_0)) V_down` is used: the two subtrees
/// carry disjoint sets of controls and both weights are nonnegative, so the
/// maximum splits into a root choice and two independent enumerations.
pub fn bang_bang_sup<S: Scalar>(e: &NonlinearExpectation<S>, x: &TreeProcess<S>) -> S {
    let depth = x.tree().depth();
    if depth <= DIRECT_DEPTH {
        return enumerate(&NonlinearExpectation::new(x.tree(), e.bound()).unwrap(), x);
    }
    let up = bang_bang_sup(e, &shift_process(x, NodeId::ROOT.up()).unwrap());
    let down = bang_bang_sup(e, &shift_process(x, NodeId::ROOT.down()).unwrap());
    let l = e.bound();
    e.tilted(up, down, l).max_of(e.tilted(up, down, -l))
}

/// Every nondecreasing `κ'` with `κ'_0 = 0` on the grid `{0, step, ..., top}`
/// for which `λ + κ' ≥ 0`.
pub fn skorokhod_alternatives<S: Scalar>(lambda: &[S], step: S, top: S) -> Vec<Vec<S>> {
    let mut levels = vec![S::zero()];
    while *levels.last().unwrap() < top {
        let next = *levels.last().unwrap() + step;
        levels.push(next);
    }
    let mut out = Vec::new();
    let mut cur = vec![S::zero()];
    fn rec<S: Scalar>(lambda: &[S], levels: &[S], from: usize, cur: &mut Vec<S>, out: &mut Vec<Vec<S>>) {
        if cur.len() == lambda.len() {
            out.push(cur.clone());
            return;
        }
        let t = cur.len();
        for (i, &k) in levels.iter().enumerate().skip(from) {
            if lambda[t] + k >= S::zero() {
                cur.push(k);
                rec(lambda, levels, i, cur, out);
                cur.pop();
            }
        }
    }
    if lambda[0] >= S::zero() {
        rec(lambda, &levels, 0, &mut cur, &mut out);
    }
    out
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Integer in `[lo, hi]`.
pub fn int(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}
