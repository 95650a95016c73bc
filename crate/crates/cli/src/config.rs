//! Experiment configuration and the path-functional registry used for
//! terminal conditions, obstacles and ad-hoc input processes.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ppde_lab::pathspace::TreeSpec;
use ppde_lab::solver::{FamilySpec, JetTriple, HorizonSpec, MaxPrincipleParams};
use ppde_lab::viscosity::{Builtin, Generator, JetSampling, Role};
use ppde_lab::{NodeId, NodeView, Process, Tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 0;

/// A real functional of the stopped path, evaluated node by node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Functional {
    Zero,
    Constant { c: f64 },
    /// `ω_t`.
    Brownian,
    Time,
    /// `max_{s≤t} ω_s`.
    RunningMax,
    /// `ω_t²`.
    Square,
    /// `(ω_t - strike)⁺`.
    Call { strike: f64 },
    /// `(strike - ω_t)⁺`.
    Put { strike: f64 },
    /// `(max_{s≤t} ω_s - strike)⁺`.
    Lookback { strike: f64 },
    /// `sin(k ω_t)`.
    Sin { k: f64 },
    /// `cos(k ω_t) - t`.
    CosDecay { k: f64 },
    /// Independent uniform draws on `[lo, hi]`, seeded.
    Uniform { lo: f64, hi: f64 },
    /// Explicit values keyed by node address (`"level:bits"`).
    Table {
        values: BTreeMap<String, f64>,
        #[serde(default)]
        default: Option<f64>,
    },
}

impl Functional {
    /// Values at every node of `tree`; only the leaves are required when
    /// `leaves_only` is set.
    pub fn process(&self, tree: &Tree, seed: u64, leaves_only: bool) -> Result<Process> {
        let scalar = |f: &dyn Fn(NodeView<'_, f64>) -> f64| Process::from_fn(tree, f);
        let p = match self {
            Functional::Zero => Process::constant(tree, 0.0),
            Functional::Constant { c } => Process::constant(tree, *c),
            Functional::Brownian => Process::brownian(tree),
            Functional::Time => Process::time(tree),
            Functional::RunningMax => Process::running_max(tree),
            Functional::Square => scalar(&|v| v.value() * v.value()),
            Functional::Call { strike } => scalar(&|v| (v.value() - strike).max(0.0)),
            Functional::Put { strike } => scalar(&|v| (strike - v.value()).max(0.0)),
            Functional::Lookback { strike } => scalar(&|v| (v.running_max() - strike).max(0.0)),
            Functional::Sin { k } => scalar(&|v| (k * v.value()).sin()),
            Functional::CosDecay { k } => scalar(&|v| (k * v.value()).cos() - v.time()),
            Functional::Uniform { lo, hi } => {
                if !(lo <= hi) {
                    bail!("uniform: lo = {lo} must not exceed hi = {hi}");
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let vals = (0..tree.node_count()).map(|_| if lo == hi { *lo } else { rng.gen_range(*lo..=*hi) });
                Process::new(*tree, vals.collect())?
            }
            Functional::Table { values, default } => table(tree, values, *default, leaves_only)?,
        };
        if let Some(i) = p.values().iter().position(|x| !x.is_finite()) {
            bail!("functional {} is not finite at node {}", self.label(), NodeId(i));
        }
        Ok(p)
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("functionals serialize")
    }

    pub fn label(&self) -> String {
        serde_json::to_string(self).unwrap_or_else(|_| format!("{self:?}"))
    }
}

fn table(tree: &Tree, values: &BTreeMap<String, f64>, default: Option<f64>, leaves_only: bool) -> Result<Process> {
    let mut out: Vec<Option<f64>> = vec![None; tree.node_count()];
    for (addr, &v) in values {
        let n = NodeId::parse(addr).with_context(|| format!("table entry {addr:?}"))?;
        if !tree.contains(n) {
            bail!("table entry {addr:?} lies outside a tree of depth {}", tree.depth());
        }
        out[n.0] = Some(v);
    }
    let mut vals = Vec::with_capacity(out.len());
    for n in tree.nodes() {
        let needed = !leaves_only || tree.is_leaf(n);
        match (out[n.0], default) {
            (Some(v), _) | (None, Some(v)) => vals.push(v),
            (None, None) if needed => bail!("table has no value for node {n} and no default"),
            (None, None) => vals.push(0.0),
        }
    }
    Ok(Process::new(*tree, vals)?)
}

pub struct FunctionalEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub formula: &'static str,
}

pub fn functional_registry() -> Vec<FunctionalEntry> {
    let e = |name, params, formula| FunctionalEntry { name, params, formula };
    vec![
        e("zero", "", "0"),
        e("constant", "c: real", "c"),
        e("brownian", "", "w_t"),
        e("time", "", "t"),
        e("running_max", "", "max_{s<=t} w_s"),
        e("square", "", "w_t^2"),
        e("call", "strike: real", "max(w_t - strike, 0)"),
        e("put", "strike: real", "max(strike - w_t, 0)"),
        e("lookback", "strike: real", "max(max_{s<=t} w_s - strike, 0)"),
        e("sin", "k: real", "sin(k*w_t)"),
        e("cos_decay", "k: real", "cos(k*w_t) - t"),
        e("uniform", "lo, hi: real", "iid uniform on [lo, hi] per node, seeded"),
        e("table", "values: {address: real}, default: real?", "explicit node values"),
    ]
}

/// Where a process under test comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSource {
    /// `oracle + offset + time_shift (T - t)`.
    Oracle {
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        time_shift: f64,
    },
    Functional { functional: Functional },
}

impl Default for ProcessSource {
    fn default() -> Self {
        ProcessSource::Oracle { offset: 0.0, time_shift: 0.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    pub u: ProcessSource,
    pub v: ProcessSource,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSpec {
    pub subject: ProcessSource,
    pub role: Option<Role>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxPrincipleSpec {
    /// Defaults to the Pucci-extremal oracle for the terminal condition.
    pub subject: Option<ProcessSource>,
    pub params: MaxPrincipleParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Sup,
    Inf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizeSpec {
    pub n: f64,
    pub mode: Extremum,
}

impl Default for RegularizeSpec {
    fn default() -> Self {
        RegularizeSpec { n: 4.0, mode: Extremum::Sup }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpectSpec {
    pub mode: Extremum,
}

impl Default for ExpectSpec {
    fn default() -> Self {
        ExpectSpec { mode: Extremum::Sup }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tree: TreeSpec,
    /// Subcommand run by `ppde-lab run`; must match when given elsewhere.
    #[serde(default)]
    pub operation: Option<String>,
    #[serde(default = "zero_generator")]
    pub generator: Builtin<f64>,
    #[serde(default)]
    pub terminal: Option<Functional>,
    #[serde(default)]
    pub obstacle: Option<Functional>,
    /// Drift bound `L` of the nonlinear expectation for `expect`, `snell`
    /// and `decompose`; defaults to the generator's Lipschitz constant.
    #[serde(default, rename = "L")]
    pub drift_bound: Option<f64>,
    #[serde(default)]
    pub family_spec: Option<FamilySpec>,
    #[serde(default)]
    pub sampling: JetSampling,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub compare: CompareSpec,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub maxprinciple: MaxPrincipleSpec,
    #[serde(default)]
    pub regularize: RegularizeSpec,
    #[serde(default)]
    pub expect: ExpectSpec,
}

fn zero_generator() -> Builtin<f64> {
    Builtin::Zero
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("field `{path}`: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.tree.build().context("field `tree`")?;
        self.generator.validate().context("field `generator`")?;
        if let Some(l) = self.drift_bound {
            if !(l >= 0.0 && l.is_finite()) {
                bail!("field `L`: drift bound must be finite and nonnegative, got {l}");
            }
        }
        let l = self.max_rate();
        let h = self.tree.dt.sqrt();
        if l * h > 1.0 {
            bail!("field `tree.dt`: L*sqrt(dt) = {} exceeds 1 (L = {l}, dt = {})", l * h, self.tree.dt);
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("field `tol`: must be finite and nonnegative, got {t}");
            }
        }
        if !(self.regularize.n > 0.0 && self.regularize.n.is_finite()) {
            bail!("field `regularize.n`: penalty must be positive, got {}", self.regularize.n);
        }
        if let Some(fam) = &self.family_spec {
            for (i, JetTriple { horizon, .. }) in fam.jets.iter().enumerate() {
                if let HorizonSpec::Level { level } = horizon {
                    if *level == 0 || *level > self.tree.depth {
                        bail!("field `family_spec.jets[{i}].horizon.level`: {level} outside 1..={}", self.tree.depth);
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest drift rate the configuration can use.
    pub fn max_rate(&self) -> f64 {
        self.generator.lipschitz().max(self.drift_bound.unwrap_or(0.0))
    }

    pub fn drift(&self) -> f64 {
        self.drift_bound.unwrap_or_else(|| self.generator.lipschitz())
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn tree(&self) -> Result<Tree> {
        Ok(self.tree.build()?)
    }

    pub fn terminal(&self) -> Result<&Functional> {
        self.terminal.as_ref().context("field `terminal`: required by this subcommand")
    }

    pub fn obstacle(&self) -> Result<&Functional> {
        self.obstacle.as_ref().context("field `obstacle`: required by this subcommand")
    }

    /// The ladder used when the config names no family.
    pub fn family(&self) -> FamilySpec {
        self.family_spec.clone().unwrap_or_else(|| FamilySpec {
            shifts: vec![0.2, 0.1, 0.05, 0.0],
            jets: vec![],
            upper_slack: 0.1,
        })
    }
}
