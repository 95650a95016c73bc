use std::sync::Arc;

use super::generator::{DynGenerator, FnGenerator};
use crate::decomp::{martingale_repr, MartingaleRepr};
use crate::error::{Error, Result};
use crate::nlexp::{DriftControl, NonlinearExpectation};
use crate::pathspace::{StoppingRegion, TreeProcess};
use crate::scalar::{Real, Scalar};

/// `η̄ = E̲_L[u_H - αH - βB_H | F_t]` with its dynamic-programming
/// representation.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaBar<S> {
    pub value: TreeProcess<S>,
    /// Drift attaining the infimum at every node.
    pub control: DriftControl<S>,
    /// `η̄_child = η̄_node + Z (ΔB - μ* dt) = η̄_node + Z ΔB + L |Z| dt`.
    pub repr: MartingaleRepr<S>,
}

fn stopped_payoff<S: Scalar>(u: &TreeProcess<S>, alpha: S, beta: S) -> TreeProcess<S> {
    u.map_nodes(|v, x| x - alpha * v.time() - beta * v.value())
}

pub fn eta_bar<S: Scalar>(
    e: &NonlinearExpectation<S>,
    u: &TreeProcess<S>,
    horizon: &StoppingRegion,
    alpha: S,
    beta: S,
) -> Result<EtaBar<S>> {
    let value = e.conditional_inf(&stopped_payoff(u, alpha, beta), horizon)?;
    let control = e.argmin_control(&value);
    let repr = martingale_repr(e, &value, &control)?;
    Ok(EtaBar { value, control, repr })
}

/// `η(θ) = E̲_L[u_H - α(H - t) - β(B_H - B_t) | θ]`.
///
/// Equals `u` on the horizon. After it the stopped payoff is carried
/// forward, so `η` continues linearly with slopes `(α, β)`.
pub fn special_solution<S: Scalar>(
    e: &NonlinearExpectation<S>,
    u: &TreeProcess<S>,
    horizon: &StoppingRegion,
    alpha: S,
    beta: S,
) -> Result<TreeProcess<S>> {
    let bar = e.conditional_inf(&stopped_payoff(u, alpha, beta), horizon)?;
    Ok(bar.map_nodes(|v, y| y + alpha * v.time() + beta * v.value()))
}

/// `ũ = e^{λt} u` and the generator of the transformed equation,
/// `F̃(θ, y, z) = -λ y + e^{λt} F(θ, e^{-λt} y, e^{-λt} z)`. Requires
/// `λ ≤ 0`.
pub fn change_variable<S: Real>(
    u: &TreeProcess<S>,
    g: DynGenerator<S>,
    rate: S,
) -> Result<(TreeProcess<S>, DynGenerator<S>)> {
    if rate > S::zero() || rate.is_nan() {
        return Err(Error::PositiveRate(rate.as_f64()));
    }
    let ut = u.map_nodes(|v, x| (rate * v.time()).exp() * x);
    if rate == S::zero() {
        return Ok((ut, g));
    }
    let name = format!("exp({rate}t)-transform of {}", g.name());
    let lip = rate.abs() + g.lipschitz();
    let mono = g.monotone_in_y();
    let inner = Arc::clone(&g);
    let changed = FnGenerator::new(name, lip, mono, move |at, y, z| {
        let k = (rate * at.time()).exp();
        -rate * y + k * inner.eval(at, y / k, z / k)
    });
    Ok((ut, changed.into_dyn()))
}
