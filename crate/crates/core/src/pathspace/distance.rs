use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point `θ = (t, ω)` of the discrete path space: the stopped path
/// `(ω_0, ..., ω_k)` on a grid of step `dt`, with `t = k dt`.
///
/// Points need not come from a [`super::PathTree`]; any grid path starting at
/// the origin is accepted.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPoint<S> {
    dt: S,
    values: Vec<S>,
}

impl<S: Scalar> PathPoint<S> {
    pub fn new(dt: S, values: Vec<S>) -> Result<Self> {
        if !(dt > S::zero()) {
            return Err(Error::InvalidStep(dt.as_f64()));
        }
        match values.first() {
            None => Err(Error::LengthMismatch { expected: 1, got: 0 }),
            Some(v0) if !v0.is_zero() => Err(Error::TailNotAtOrigin(v0.as_f64())),
            Some(_) => Ok(PathPoint { dt, values }),
        }
    }

    pub(crate) fn from_parts(dt: S, values: Vec<S>) -> Self {
        PathPoint { dt, values }
    }

    pub fn level(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn time(&self) -> S {
        self.dt * S::from_count(self.level())
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// `ω_{t ∧ s}` for grid index `j`.
    pub fn stopped(&self, j: usize) -> S {
        self.values[j.min(self.level())]
    }

    /// `ω_{(t - s) ∨ 0}` for grid lag `j`.
    pub fn lagged(&self, j: usize) -> S {
        self.values[self.level().saturating_sub(j)]
    }
}

fn common_grid<S: Scalar>(a: &PathPoint<S>, b: &PathPoint<S>) -> Result<()> {
    if a.dt != b.dt {
        return Err(Error::GridMismatch { left: a.dt.as_f64(), right: b.dt.as_f64() });
    }
    Ok(())
}

fn time_gap<S: Scalar>(a: &PathPoint<S>, b: &PathPoint<S>) -> S {
    a.dt * S::from_count(a.level().abs_diff(b.level()))
}

/// `d(θ, θ') = |t - t'| + max_s |ω_{t∧s} - ω'_{t'∧s}|` over the common grid.
pub fn dupire_distance<S: Scalar>(a: &PathPoint<S>, b: &PathPoint<S>) -> Result<S> {
    common_grid(a, b)?;
    let span = a.level().max(b.level());
    let sup = (0..=span)
        .map(|j| (a.stopped(j) - b.stopped(j)).abs())
        .fold(S::zero(), S::max_of);
    Ok(time_gap(a, b) + sup)
}

/// Backward pseudo-distance: paths aligned at their right endpoints,
/// `|t - t'| + max_{s ≥ 0} |ω_{(t-s)∨0} - ω'_{(t'-s)∨0}|`.
pub fn backward_distance<S: Scalar>(a: &PathPoint<S>, b: &PathPoint<S>) -> Result<S> {
    common_grid(a, b)?;
    Ok(backward_distance_raw(a.dt, &a.values, &b.values))
}

/// Backward distance between two stopped paths given as raw slices on the
/// same grid. Hot loop of the sup-convolution.
pub(crate) fn backward_distance_raw<S: Scalar>(dt: S, a: &[S], b: &[S]) -> S {
    let (ka, kb) = (a.len() - 1, b.len() - 1);
    let mut sup = S::zero();
    for j in 0..=ka.max(kb) {
        let d = (a[ka.saturating_sub(j)] - b[kb.saturating_sub(j)]).abs();
        if d > sup {
            sup = d;
        }
    }
    dt * S::from_count(ka.abs_diff(kb)) + sup
}

/// Modulus of continuity `ρ̄(θ, δ) = max |ω_{t∧s} - ω_{t∧s'}|` over grid pairs
/// with `|s - s'| ≤ δ`.
pub fn modulus<S: Scalar>(a: &PathPoint<S>, delta: S) -> S {
    // Relative slack so that a window of exactly m grid steps is not lost to
    // rounding in `m * dt`.
    let limit = delta + a.dt / S::lit(1e9);
    let mut steps = 0;
    while steps < a.level() && S::from_count(steps + 1) * a.dt <= limit {
        steps += 1;
    }
    modulus_steps(a, steps)
}

/// Modulus over a window of `steps` grid steps.
pub fn modulus_steps<S: Scalar>(a: &PathPoint<S>, steps: usize) -> S {
    let v = &a.values;
    let mut best = S::zero();
    for i in 0..v.len() {
        for j in i + 1..v.len().min(i + steps + 1) {
            let d = (v[j] - v[i]).abs();
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// `(ω ⊗_t ω')_s = ω_s` on `[0, t]` and `ω_t + ω'_{s-t}` afterwards.
///
/// `tail` is a path started at the origin; the result must cover exactly
/// `total_steps` grid steps.
pub fn concat<S: Scalar>(prefix: &PathPoint<S>, tail: &[S], total_steps: usize) -> Result<PathPoint<S>> {
    let Some(first) = tail.first() else {
        return Err(Error::LengthMismatch { expected: total_steps + 1 - prefix.level(), got: 0 });
    };
    if !first.is_zero() {
        return Err(Error::TailNotAtOrigin(first.as_f64()));
    }
    let k = prefix.level();
    if k + tail.len() - 1 != total_steps {
        return Err(Error::LengthMismatch { expected: total_steps + 1 - k.min(total_steps), got: tail.len() });
    }
    let anchor = prefix.values[k];
    let mut values = prefix.values.clone();
    values.extend(tail[1..].iter().map(|&w| anchor + w));
    Ok(PathPoint { dt: prefix.dt, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathspace::PathTree;

    fn pt(values: &[f64]) -> PathPoint<f64> {
        PathPoint::new(1.0, values.to_vec()).unwrap()
    }

    #[test]
    fn dupire_example() {
        let a = pt(&[0.0, 1.0, 0.5]);
        let b = pt(&[0.0, 1.0]);
        assert_eq!(dupire_distance(&a, &b).unwrap(), 1.5);
        assert_eq!(dupire_distance(&b, &a).unwrap(), 1.5);
        assert_eq!(dupire_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn backward_example() {
        let a = pt(&[0.0, 1.0, 0.5]);
        let b = pt(&[0.0, 1.0]);
        assert_eq!(backward_distance(&a, &b).unwrap(), 2.0);
        assert_eq!(backward_distance(&a, &a).unwrap(), 0.0);
        let c = pt(&[0.0, -1.0, 0.5]);
        // Same time: both suprema run over the same aligned pairs.
        assert_eq!(backward_distance(&a, &c).unwrap(), dupire_distance(&a, &c).unwrap());
    }

    #[test]
    fn grid_mismatch() {
        let a = pt(&[0.0, 1.0]);
        let b = PathPoint::new(0.5, vec![0.0, 1.0]).unwrap();
        assert!(matches!(dupire_distance(&a, &b), Err(Error::GridMismatch { .. })));
        assert!(matches!(backward_distance(&a, &b), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn modulus_examples() {
        let a = pt(&[0.0, 1.0, 0.5]);
        assert_eq!(modulus(&a, 0.0), 0.0);
        assert_eq!(modulus(&a, 1.0), 1.0);
        assert_eq!(modulus(&a, 0.5), 0.0);
        assert_eq!(modulus(&a, 5.0), 1.0);
        let b = pt(&[0.0, 1.0, -1.0, 2.0]);
        assert_eq!(modulus(&b, 1.0), 3.0);
        assert_eq!(modulus(&b, 10.0), 3.0);
    }

    #[test]
    fn concat_examples() {
        let a = pt(&[0.0, 1.0]);
        assert_eq!(concat(&a, &[0.0, -1.0], 2).unwrap().values(), &[0.0, 1.0, 0.0]);
        assert_eq!(concat(&a, &[0.0, 0.0, 0.0], 3).unwrap().values(), &[0.0, 1.0, 1.0, 1.0]);
        let root = pt(&[0.0]);
        assert_eq!(concat(&root, &[0.0, 2.0, 1.0], 2).unwrap().values(), &[0.0, 2.0, 1.0]);
        assert!(matches!(concat(&a, &[0.0, 1.0], 3), Err(Error::LengthMismatch { .. })));
        assert!(matches!(concat(&a, &[1.0, 1.0], 2), Err(Error::TailNotAtOrigin(_))));
    }

    #[test]
    fn tree_points_share_the_grid() {
        let t = PathTree::new(3, 0.25).unwrap();
        let p = t.point(crate::pathspace::NodeId(9));
        assert_eq!(p.level(), 3);
        assert_eq!(p.time(), 0.75);
    }
}
