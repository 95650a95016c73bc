use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathspace::{NodeView, TreeProcess};
use crate::scalar::Real;

/// The nonlinearity `F(θ, y, z)` of the equation
/// `-∂_t u - ½ ∂²_ωω u - F(·, u, ∂_ω u) = 0`.
pub trait Generator<S: Real>: Send + Sync {
    fn name(&self) -> String;

    fn eval(&self, at: NodeView<'_, S>, y: S, z: S) -> S;

    /// `L` with `|F(θ,y,z) - F(θ,y',z')| ≤ L|y-y'| + L|z-z'|`.
    fn lipschitz(&self) -> S;

    /// Whether `F` is nondecreasing in `y`.
    fn monotone_in_y(&self) -> bool;

    /// `ρ^F(θ, x, y)`: bound on `|F(θ,y,·) - F(θ',y,·)|` when `d(θ,θ') ≤ x`.
    /// `+∞` when no uniform modulus is available.
    fn modulus(&self, at: NodeView<'_, S>, dist: S, y: S) -> S;

    /// `F⁰(θ) = |F(θ, 0, 0)|`.
    fn bound(&self, at: NodeView<'_, S>) -> S {
        self.eval(at, S::zero(), S::zero()).abs()
    }
}

pub type DynGenerator<S> = Arc<dyn Generator<S>>;

impl<S: Real> fmt::Debug for dyn Generator<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Generator({})", self.name())
    }
}

/// The generators shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin<S> {
    /// `F = 0`.
    Zero,
    /// `F = c`.
    Constant { c: S },
    /// `F = a y + b z`.
    Linear { a: S, b: S },
    /// `F = L |z|`.
    Pucci {
        #[serde(rename = "L")]
        l: S,
    },
    /// `F = L y⁺ + L |z|`.
    PucciPlus {
        #[serde(rename = "L")]
        l: S,
    },
    /// `F = c0 tanh(max_{s≤t} ω_s) clamp(z, -zcap, zcap)`.
    RunningMax { c0: S, zcap: S },
}

impl<S: Real> Builtin<S> {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: S| {
            if !v.is_finite() {
                return Err(Error::NonFinite(name.to_string()));
            }
            if v < S::zero() {
                return Err(Error::NegativeParameter { name, value: v.as_f64() });
            }
            Ok(())
        };
        match *self {
            Builtin::Zero => Ok(()),
            Builtin::Constant { c } => c.is_finite().then_some(()).ok_or(Error::NonFinite("c".into())),
            Builtin::Linear { a, b } => {
                if a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonFinite("a, b".into()))
                }
            }
            Builtin::Pucci { l } | Builtin::PucciPlus { l } => check("L", l),
            Builtin::RunningMax { c0, zcap } => {
                check("c0", c0)?;
                check("zcap", zcap)
            }
        }
    }

    pub fn into_dyn(self) -> DynGenerator<S> {
        Arc::new(self)
    }
}

impl<S: Real> Generator<S> for Builtin<S> {
    fn name(&self) -> String {
        match self {
            Builtin::Zero => "zero".into(),
            Builtin::Constant { c } => format!("constant(c={c})"),
            Builtin::Linear { a, b } => format!("linear(a={a}, b={b})"),
            Builtin::Pucci { l } => format!("pucci(L={l})"),
            Builtin::PucciPlus { l } => format!("pucci_plus(L={l})"),
            Builtin::RunningMax { c0, zcap } => format!("running_max(c0={c0}, zcap={zcap})"),
        }
    }

    fn eval(&self, at: NodeView<'_, S>, y: S, z: S) -> S {
        match *self {
            Builtin::Zero => S::zero(),
            Builtin::Constant { c } => c,
            Builtin::Linear { a, b } => a * y + b * z,
            Builtin::Pucci { l } => l * z.abs(),
            Builtin::PucciPlus { l } => l * y.max(S::zero()) + l * z.abs(),
            Builtin::RunningMax { c0, zcap } => c0 * at.running_max().tanh() * z.max(-zcap).min(zcap),
        }
    }

    fn lipschitz(&self) -> S {
        match *self {
            Builtin::Zero | Builtin::Constant { .. } => S::zero(),
            Builtin::Linear { a, b } => a.abs().max(b.abs()),
            Builtin::Pucci { l } | Builtin::PucciPlus { l } => l,
            Builtin::RunningMax { c0, .. } => c0,
        }
    }

    fn monotone_in_y(&self) -> bool {
        match *self {
            Builtin::Linear { a, .. } => a >= S::zero(),
            _ => true,
        }
    }

    fn modulus(&self, _at: NodeView<'_, S>, dist: S, _y: S) -> S {
        match *self {
            // running max is 1-Lipschitz in d and tanh is 1-Lipschitz
            Builtin::RunningMax { c0, zcap } => c0 * zcap * dist,
            _ => S::zero(),
        }
    }
}

/// Parameter schema and declared modulus of a registry entry.
#[derive(Clone, Debug, Serialize)]
pub struct RegistryEntry {
    pub name: &'static str,
    pub params: Vec<(&'static str, &'static str)>,
    pub formula: &'static str,
    pub lipschitz: &'static str,
    pub modulus: &'static str,
}

pub fn registry() -> Vec<RegistryEntry> {
    vec![
        RegistryEntry { name: "zero", params: vec![], formula: "F = 0", lipschitz: "0", modulus: "rho = 0" },
        RegistryEntry {
            name: "constant",
            params: vec![("c", "real")],
            formula: "F = c",
            lipschitz: "0",
            modulus: "rho = 0",
        },
        RegistryEntry {
            name: "linear",
            params: vec![("a", "real"), ("b", "real")],
            formula: "F = a*y + b*z",
            lipschitz: "max(|a|, |b|)",
            modulus: "rho = 0",
        },
        RegistryEntry {
            name: "pucci",
            params: vec![("L", "real >= 0")],
            formula: "F = L*|z|",
            lipschitz: "L",
            modulus: "rho = 0",
        },
        RegistryEntry {
            name: "pucci_plus",
            params: vec![("L", "real >= 0")],
            formula: "F = L*max(y, 0) + L*|z|",
            lipschitz: "L",
            modulus: "rho = 0",
        },
        RegistryEntry {
            name: "running_max",
            params: vec![("c0", "real >= 0"), ("zcap", "real >= 0")],
            formula: "F = c0*tanh(max_{s<=t} w_s)*clamp(z, -zcap, zcap)",
            lipschitz: "c0",
            modulus: "rho(x) = c0*zcap*x",
        },
    ]
}

type EvalFn<S> = dyn Fn(NodeView<'_, S>, S, S) -> S + Send + Sync;

/// A generator assembled from a closure.
#[derive(Clone)]
pub struct FnGenerator<S> {
    name: String,
    lipschitz: S,
    monotone: bool,
    f: Arc<EvalFn<S>>,
    rho: Option<Arc<EvalFn<S>>>,
}

impl<S: Real> FnGenerator<S> {
    pub fn new(
        name: impl Into<String>,
        lipschitz: S,
        monotone: bool,
        f: impl Fn(NodeView<'_, S>, S, S) -> S + Send + Sync + 'static,
    ) -> Self {
        FnGenerator { name: name.into(), lipschitz, monotone, f: Arc::new(f), rho: None }
    }

    pub fn with_modulus(mut self, rho: impl Fn(NodeView<'_, S>, S, S) -> S + Send + Sync + 'static) -> Self {
        self.rho = Some(Arc::new(rho));
        self
    }

    pub fn into_dyn(self) -> DynGenerator<S> {
        Arc::new(self)
    }
}

impl<S: Real> Generator<S> for FnGenerator<S> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, at: NodeView<'_, S>, y: S, z: S) -> S {
        (self.f)(at, y, z)
    }

    fn lipschitz(&self) -> S {
        self.lipschitz
    }

    fn monotone_in_y(&self) -> bool {
        self.monotone
    }

    fn modulus(&self, at: NodeView<'_, S>, dist: S, y: S) -> S {
        match &self.rho {
            Some(rho) => rho(at, dist, y),
            None => S::infinity(),
        }
    }
}

/// `G(θ, y, z) = -α - L |β - z|`, the equation solved by the special
/// solution built from a jet `(α, β)`.
pub fn jet_generator<S: Real>(alpha: S, beta: S, l: S) -> DynGenerator<S> {
    FnGenerator::new(format!("jet(alpha={alpha}, beta={beta}, L={l})"), l, true, move |_, _, z| {
        -alpha - l * (beta - z).abs()
    })
    .with_modulus(|_, _, _| S::zero())
    .into_dyn()
}

/// `G(θ, y, z) = L |z| + δ(θ)`.
pub fn pucci_with_source<S: Real>(l: S, delta: TreeProcess<S>) -> DynGenerator<S> {
    let rho_delta = delta.clone();
    FnGenerator::new(format!("pucci(L={l}) + delta"), l, true, move |at, _, z| l * z.abs() + delta[at.node()])
        .with_modulus(move |_, _, _| {
            // δ is arbitrary on the tree; its oscillation is the only modulus
            let (lo, hi) = rho_delta.values().iter().fold((S::infinity(), S::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
            hi - lo
        })
        .into_dyn()
}

/// `F + δ(θ)`.
pub fn with_source<S: Real>(inner: DynGenerator<S>, delta: TreeProcess<S>) -> DynGenerator<S> {
    let l = inner.lipschitz();
    let mono = inner.monotone_in_y();
    let name = format!("{} + delta", inner.name());
    FnGenerator::new(name, l, mono, move |at, y, z| inner.eval(at, y, z) + delta[at.node()]).into_dyn()
}

/// Spot check of the Lipschitz and monotonicity declarations on sampled
/// triples; returns the worst excess of the Lipschitz inequality.
pub fn spot_check<S: Real>(g: &dyn Generator<S>, at: NodeView<'_, S>, samples: &[(S, S, S, S)]) -> (S, bool) {
    let l = g.lipschitz();
    let mut excess = S::neg_infinity();
    let mut monotone_ok = true;
    for &(y, z, y2, z2) in samples {
        let lhs = (g.eval(at, y, z) - g.eval(at, y2, z2)).abs();
        excess = excess.max(lhs - l * (y - y2).abs() - l * (z - z2).abs());
        if g.monotone_in_y() {
            let (lo, hi) = if y <= y2 { (y, y2) } else { (y2, y) };
            if g.eval(at, lo, z) > g.eval(at, hi, z) {
                monotone_ok = false;
            }
        }
    }
    (excess, monotone_ok)
}
