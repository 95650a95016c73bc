use anyhow::{bail, Context, Result};
use ppde_lab::decomp::backward_reflection;
use ppde_lab::regularize::{exactness_threshold, inf_convolution, sup_convolution};
use ppde_lab::snell::{brute_force_snell, snell_envelope, SnellResult, BRUTE_FORCE_MAX_DEPTH};
use ppde_lab::solver::{
    build_subsolution_family, comparison_check, default_tolerance, perron_construct, ppde_solve, pucci_extremal,
    pucci_max_principle, time_shift, ComparisonReport, Dropped, FamilySpec, MaxPrincipleReport, TerminalCondition,
};
use ppde_lab::viscosity::{
    check_solution, check_subsolution, check_supersolution, registry, Builtin, CheckReport, Generator, Role,
};
use ppde_lab::{Expectation, Process, StoppingRegion, Tree, TreeSpec};
use serde::Serialize;

use crate::config::{functional_registry, Extremum, ExperimentConfig, ProcessSource};
use crate::output::{fmt12, Artifacts, Summary, Table};
use crate::row;

/// Exact DP identities are asserted up to this relative roundoff.
const IDENTITY_TOL: f64 = 1e-9;

pub struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub tree: Tree,
    pub seed: u64,
    pub tol: Option<f64>,
}

impl<'a> Ctx<'a> {
    pub fn new(cfg: &'a ExperimentConfig, seed: Option<u64>, tol: Option<f64>) -> Result<Self> {
        if let Some(t) = tol {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("--tol must be finite and nonnegative, got {t}");
            }
        }
        Ok(Ctx { cfg, tree: cfg.tree()?, seed: cfg.seed(seed), tol: tol.or(cfg.tol) })
    }

    fn terminal(&self) -> Result<TerminalCondition<f64>> {
        let p = self.cfg.terminal()?.process(&self.tree, self.seed, true).context("field `terminal`")?;
        Ok(TerminalCondition::new(&self.tree, p.leaf_values().to_vec())?)
    }

    fn obstacle(&self) -> Result<Process> {
        self.cfg.obstacle()?.process(&self.tree, self.seed, false).context("field `obstacle`")
    }

    fn viscosity_tol(&self, l: f64, xi: &TerminalCondition<f64>) -> f64 {
        self.tol.unwrap_or_else(|| default_tolerance(self.tree.dt(), l, xi.sup_norm()))
    }

    fn identity_tol(&self) -> f64 {
        self.tol.unwrap_or(IDENTITY_TOL)
    }

    fn oracle(&self, xi: &TerminalCondition<f64>) -> Result<Process> {
        Ok(ppde_solve(&self.cfg.generator, xi, &self.tree)?)
    }

    fn resolve(&self, src: &ProcessSource, oracle: &Process) -> Result<Process> {
        match src {
            ProcessSource::Oracle { offset, time_shift: c } => Ok(time_shift(oracle, *c).map(|x| x + offset)),
            ProcessSource::Functional { functional } => functional.process(&self.tree, self.seed, false),
        }
    }

    fn expectation(&self) -> Result<Expectation> {
        Ok(Expectation::new(&self.tree, self.cfg.drift())?)
    }

    fn header(&self, s: &mut Summary) {
        s.add("depth", self.tree.depth()).add("dt", self.tree.dt());
    }
}

/// Table with one row per node: address, level, time, `ω_t`, then columns.
fn node_table(tree: &Tree, columns: &[(&str, &Process)]) -> Table {
    let mut header = vec!["node", "level", "time", "omega"];
    header.extend(columns.iter().map(|(h, _)| *h));
    let mut t = Table::new(&header);
    for n in tree.nodes() {
        let mut r = row![n.address(), n.level(), tree.time(n), tree.value(n)];
        r.extend(columns.iter().map(|(_, p)| p[n].into()));
        t.row(r);
    }
    t
}

fn verdict(s: &mut Summary, passed: bool) -> bool {
    s.add("passed", passed);
    passed
}

#[derive(Serialize)]
struct SolveReport<'a> {
    generator: String,
    tree: TreeSpec,
    terminal: serde_json::Value,
    tol: f64,
    root: f64,
    sub_check: &'a CheckReport,
    super_check: &'a CheckReport,
    passed: bool,
}

pub fn solve(ctx: &Ctx, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let g = ctx.cfg.generator;
    let xi = ctx.terminal()?;
    let tol = ctx.viscosity_tol(g.lipschitz(), &xi);
    let u = ctx.oracle(&xi)?;
    let sampling = &ctx.cfg.sampling;
    let (sub, sup) =
        rayon::join(|| check_subsolution(&u, &g, sampling, tol), || check_supersolution(&u, &g, sampling, tol));
    let (sub, sup) = (sub?, sup?);
    let passed = sub.passed && sup.passed;
    out.csv("u.csv", &node_table(&ctx.tree, &[("u", &u)]))?;
    out.json(
        "solve.json",
        &SolveReport {
            generator: g.name(),
            tree: TreeSpec::from(&ctx.tree),
            terminal: ctx.cfg.terminal()?.to_value(),
            tol,
            root: u.root(),
            sub_check: &sub,
            super_check: &sup,
            passed,
        },
    )?;
    ctx.header(s);
    s.add("generator", g.name()).add("tol", tol).add("u_0", u.root());
    s.add("sub violations", sub.violations.len()).add("super violations", sup.violations.len());
    Ok(verdict(s, passed))
}

#[derive(Serialize)]
struct PerronReport<'a> {
    generator: String,
    family_spec: &'a FamilySpec,
    tol: f64,
    members: Vec<String>,
    dropped: &'a [Dropped],
    root_oracle: f64,
    root_perron: f64,
    root_gap: f64,
    max_gap: f64,
    /// `max (perron - oracle)`; bounded by `upper_slack T + tol`.
    max_excess: f64,
    check: CheckReport,
    passed: bool,
}

pub fn perron(ctx: &Ctx, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let g = ctx.cfg.generator;
    let xi = ctx.terminal()?;
    let tol = ctx.viscosity_tol(g.lipschitz(), &xi);
    let spec = ctx.cfg.family();
    let family = build_subsolution_family(&g, &xi, &ctx.tree, &spec, &ctx.cfg.sampling, tol)?;
    let oracle = ctx.oracle(&xi)?;
    let perron = perron_construct(&family).with_context(|| {
        format!("every candidate was dropped: {:?}", family.dropped.iter().map(|d| &d.reason).collect::<Vec<_>>())
    })?;
    let check = check_subsolution(&perron.value, &g, &ctx.cfg.sampling, tol)?;
    let gap = oracle.zip_with(&perron.value, |a, b| a - b)?;
    let max_gap = gap.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_excess = gap.values().iter().map(|x| -x).fold(f64::NEG_INFINITY, f64::max);
    let passed = check.passed && max_excess <= spec.upper_slack * ctx.tree.horizon() + tol;

    let mut t = Table::new(&["node", "level", "time", "omega", "oracle", "perron", "gap", "member"]);
    for n in ctx.tree.nodes() {
        t.row(row![
            n.address(),
            n.level(),
            ctx.tree.time(n),
            ctx.tree.value(n),
            oracle[n],
            perron.value[n],
            gap[n],
            perron.provenance_at(n)
        ]);
    }
    out.csv("perron.csv", &t)?;
    let report = PerronReport {
        generator: g.name(),
        family_spec: &spec,
        tol,
        members: family.members.iter().map(|m| m.provenance.clone()).collect(),
        dropped: &family.dropped,
        root_oracle: oracle.root(),
        root_perron: perron.value.root(),
        root_gap: gap.root(),
        max_gap,
        max_excess,
        check,
        passed,
    };
    out.json("perron.json", &report)?;
    ctx.header(s);
    s.add("generator", g.name()).add("tol", tol);
    s.add("members", report.members.len()).add("dropped", report.dropped.len());
    s.add("oracle_0", oracle.root()).add("perron_0", perron.value.root()).add("gap_0", gap.root());
    Ok(verdict(s, passed))
}

#[derive(Serialize)]
struct CompareOut<'a> {
    generator: String,
    u: &'a ProcessSource,
    v: &'a ProcessSource,
    #[serde(flatten)]
    report: &'a ComparisonReport,
}

pub fn compare(ctx: &Ctx, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let g = ctx.cfg.generator;
    let xi = ctx.terminal()?;
    let tol = ctx.viscosity_tol(g.lipschitz(), &xi);
    let oracle = ctx.oracle(&xi)?;
    let spec = &ctx.cfg.compare;
    let u = ctx.resolve(&spec.u, &oracle).context("field `compare.u`")?;
    let v = ctx.resolve(&spec.v, &oracle).context("field `compare.v`")?;
    let report = comparison_check(&u, &v, &g, &ctx.cfg.sampling, tol)?;
    let gap = u.zip_with(&v, |a, b| a - b)?;
    out.csv("compare.csv", &node_table(&ctx.tree, &[("u", &u), ("v", &v), ("gap", &gap)]))?;
    out.json("compare.json", &CompareOut { generator: g.name(), u: &spec.u, v: &spec.v, report: &report })?;
    ctx.header(s);
    s.add("generator", g.name()).add("tol", tol).add("max(u - v)", report.max_gap);
    s.add("preconditions", report.preconditions_ok).add("terminal ok", report.terminal_ok);
    s.add("violations", report.violations.len());
    Ok(verdict(s, report.passed))
}

#[derive(Serialize)]
struct MaxPrincipleOut<'a> {
    #[serde(rename = "L")]
    l: f64,
    subject: String,
    #[serde(flatten)]
    report: &'a MaxPrincipleReport,
}

pub fn maxprinciple(ctx: &Ctx, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let l = ctx.cfg.drift();
    let xi = ctx.terminal()?;
    let tol = ctx.viscosity_tol(l, &xi);
    let spec = &ctx.cfg.maxprinciple;
    let (u, subject) = match &spec.subject {
        None => (ppde_solve(pucci_extremal(l).as_ref(), &xi, &ctx.tree)?, format!("oracle of pucci_plus(L={l})")),
        Some(src) => {
            let oracle = ctx.oracle(&xi)?;
            (ctx.resolve(src, &oracle).context("field `maxprinciple.subject`")?, serde_json::to_string(src)?)
        }
    };
    let report = pucci_max_principle(&u, l, spec.params, &ctx.cfg.sampling, tol)?;
    out.csv("maxprinciple.csv", &node_table(&ctx.tree, &[("u", &u)]))?;
    out.json("maxprinciple.json", &MaxPrincipleOut { l, subject, report: &report })?;
    ctx.header(s);
    s.add("L", l).add("tol", tol).add("max u", report.max_u).add("max u_T", report.max_terminal);
    s.add("max(u^n - v)", report.max_un_minus_v).add("violations", report.violations.len());
    Ok(verdict(s, report.passed))
}

#[derive(Serialize)]
struct SnellReport {
    #[serde(rename = "L")]
    l: f64,
    obstacle: serde_json::Value,
    tol: f64,
    value: f64,
    /// Maximum over every stopping rule; present for depth <= 5.
    brute_force: Option<f64>,
    /// `min (Y - X)`.
    min_y_minus_x: f64,
    /// `max |Y - X|` on the leaves.
    terminal_gap: f64,
    /// `max (E̅-step of Y - Y)` over interior nodes.
    supermartingale_excess: f64,
    stopping_nodes: usize,
    passed: bool,
}

fn run_snell(ctx: &Ctx) -> Result<(Expectation, Process, SnellResult<f64>)> {
    let e = ctx.expectation()?;
    let x = ctx.obstacle()?;
    let snell = snell_envelope(&e, &x, &StoppingRegion::leaves(ctx.tree.depth()))?;
    Ok((e, x, snell))
}

pub fn snell(ctx: &Ctx, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let (e, x, res) = run_snell(ctx)?;
    let y = &res.envelope;
    let tree = ctx.tree;
    let tol = ctx.identity_tol() * (1.0 + x.sup_norm());
    let brute = (tree.depth() <= BRUTE_FORCE_MAX_DEPTH)
        .then(|| brute_force_snell(&e, &x, &res.horizon))
        .transpose()?;
    let min_y_minus_x = tree.nodes().map(|n| y[n] - x[n]).fold(f64::INFINITY, f64::min);
    let terminal_gap = tree.leaves().map(|n| (y[n] - x[n]).abs()).fold(0.0, f64::max);
    let supermartingale_excess = tree
        .interior_nodes()
        .map(|n| e.one_step_sup(y[n.up()], y[n.down()]) - y[n])
        .fold(f64::NEG_INFINITY, f64::max);
    let passed = min_y_minus_x >= -tol
        && terminal_gap <= tol
        && supermartingale_excess <= tol
        && brute.is_none_or(|b| (b - res.value).abs() <= tol);

    let mut t = Table::new(&["node", "level", "time", "omega", "X", "Y", "stop"]);
    for n in tree.nodes() {
        t.row(row![n.address(), n.level(), tree.time(n), tree.value(n), x[n], y[n], res.optimal.is_marked(n)]);
    }
    out.csv("snell.csv", &t)?;
    out.csv("tau.csv", &tau_table(&tree, &res, &x))?;
    let report = SnellReport {
        l: e.bound(),
        obstacle: ctx.cfg.obstacle()?.to_value(),
        tol,
        value: res.value,
        brute_force: brute,
        min_y_minus_x,
        terminal_gap,
        supermartingale_excess,
        stopping_nodes: res.optimal.marked_nodes().count(),
        passed,
    };
    out.json("snell.json", &report)?;
    ctx.header(s);
    s.add("L", e.bound()).add("Y_0", res.value);
    if let Some(b) = brute {
        s.add("brute force", b);
    }
    Ok(verdict(s, passed))
}

/// `τ*` along each leaf path.
fn tau_table(tree: &Tree, res: &SnellResult<f64>, x: &Process) -> Table {
    let mut t = Table::new(&["leaf", "stop_node", "stop_level", "stop_time", "X_stop"]);
    for leaf in tree.leaves() {
        let stop = res.optimal.stop_of(leaf).unwrap_or(leaf);
        t.row(row![leaf.address(), stop.address(), stop.level(), tree.time(stop), x[stop]]);
    }
    t
}

#[derive(Serialize)]
struct DecomposeReport {
    #[serde(rename = "L")]
    l: f64,
    obstacle: serde_json::Value,
    tol: f64,
    value: f64,
    /// `max |Y - (Y_0 + M - A)|`.
    identity_error: f64,
    /// `max |A*_{τ*}|` over leaf paths.
    a_at_tau: f64,
    /// `max |κ̄_t - (A*_T - A*_t)|`.
    reflection_deviation: f64,
    worst_leaf: String,
    worst_level: usize,
    passed: bool,
}

pub fn decompose(ctx: &Ctx, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let (e, x, res) = run_snell(ctx)?;
    let tree = ctx.tree;
    let y = &res.envelope;
    let mu = e.argmax_control(y);
    let refl = backward_reflection(&e, &x, &res, &mu)?;
    let (m, a) = (&refl.decomposition.m, &refl.decomposition.a);
    let tol = ctx.identity_tol() * (1.0 + x.sup_norm());
    let identity_error = tree.nodes().map(|n| (y[n] - (y.root() + m[n] - a[n])).abs()).fold(0.0, f64::max);
    let a_at_tau = tree.leaves().map(|l| a[res.optimal.stop_of(l).unwrap_or(l)].abs()).fold(0.0, f64::max);
    let passed = identity_error <= tol && a_at_tau <= tol && refl.max_deviation <= tol;

    let mut t = Table::new(&["node", "level", "time", "omega", "X", "Y", "M", "A", "mu_star"]);
    for n in tree.nodes() {
        let drift = if tree.is_leaf(n) { String::new() } else { fmt12(mu.get(n)) };
        t.row(row![n.address(), n.level(), tree.time(n), tree.value(n), x[n], y[n], m[n], a[n], drift]);
    }
    out.csv("decompose.csv", &t)?;
    let mut k = Table::new(&["leaf", "level", "time", "kappa_bar", "A_T_minus_A_t"]);
    for (leaf, kb) in tree.leaves().zip(&refl.kappa_bar) {
        let mut anc = leaf;
        let mut path = vec![leaf];
        while let Some(p) = anc.parent() {
            path.push(p);
            anc = p;
        }
        path.reverse();
        for (lvl, (&kv, &n)) in kb.iter().zip(&path).enumerate() {
            k.row(row![leaf.address(), lvl, tree.time(n), kv, a[leaf] - a[n]]);
        }
    }
    out.csv("kappa.csv", &k)?;
    let (wl, wt) = refl.worst;
    let report = DecomposeReport {
        l: e.bound(),
        obstacle: ctx.cfg.obstacle()?.to_value(),
        tol,
        value: res.value,
        identity_error,
        a_at_tau,
        reflection_deviation: refl.max_deviation,
        worst_leaf: wl.address(),
        worst_level: wt,
        passed,
    };
    out.json("decompose.json", &report)?;
    ctx.header(s);
    s.add("L", e.bound()).add("Y_0", res.value).add("identity error", identity_error);
    s.add("A at tau*", a_at_tau).add("reflection deviation", refl.max_deviation);
    Ok(verdict(s, passed))
}

#[derive(Serialize)]
struct RegularizeReport {
    mode: Extremum,
    n: f64,
    source: serde_json::Value,
    bound: f64,
    /// Above this penalty the convolution returns its input.
    exactness_threshold: f64,
    /// `max (u - u^n)` for `sup`, `max (v_n - v)` for `inf`; never positive.
    wrong_side: f64,
    /// `max |u^n|`; bounded by the sup-norm of the input.
    max_abs: f64,
    changed_nodes: usize,
    passed: bool,
}

pub fn regularize(ctx: &Ctx, n: Option<f64>, mode: Option<Extremum>, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let n = n.unwrap_or(ctx.cfg.regularize.n);
    let mode = mode.unwrap_or(ctx.cfg.regularize.mode);
    let (src, field) = match (&ctx.cfg.obstacle, &ctx.cfg.terminal) {
        (Some(f), _) => (f, "obstacle"),
        (None, Some(f)) => (f, "terminal"),
        (None, None) => bail!("field `obstacle`: regularize needs an obstacle or terminal functional"),
    };
    let u = src.process(&ctx.tree, ctx.seed, false).with_context(|| format!("field `{field}`"))?;
    let res = match mode {
        Extremum::Sup => sup_convolution(&u, n)?,
        Extremum::Inf => inf_convolution(&u, n)?,
    };
    let r = &res.regularized;
    let sign = if mode == Extremum::Sup { 1.0 } else { -1.0 };
    let tree = ctx.tree;
    let wrong_side = tree.nodes().map(|k| sign * (u[k] - r[k])).fold(f64::NEG_INFINITY, f64::max);
    let max_abs = r.sup_norm();
    let threshold = exactness_threshold(&u);
    let changed = tree.nodes().filter(|&k| r[k] != u[k]).count();
    let passed = wrong_side <= 0.0 && max_abs <= res.bound && (n <= threshold || changed == 0);

    out.csv("regularize.csv", &node_table(&tree, &[("original", &u), ("regularized", r)]))?;
    let report = RegularizeReport {
        mode,
        n,
        source: src.to_value(),
        bound: res.bound,
        exactness_threshold: threshold,
        wrong_side,
        max_abs,
        changed_nodes: changed,
        passed,
    };
    out.json("regularize.json", &report)?;
    ctx.header(s);
    s.add("mode", format!("{mode:?}").to_lowercase()).add("n", n).add("changed nodes", changed);
    s.add("exactness threshold", threshold);
    Ok(verdict(s, passed))
}

/// `name` alone (parameters taken from the config generator when the names
/// agree) or an inline JSON object.
pub fn parse_generator(arg: &str, cfg: &Builtin<f64>) -> Result<Builtin<f64>> {
    let text = arg.trim();
    let g: Builtin<f64> = if text.starts_with('{') {
        serde_json::from_str(text).with_context(|| format!("--generator {text}"))?
    } else {
        let from_cfg = serde_json::to_value(cfg)?;
        if from_cfg["name"] == text {
            *cfg
        } else {
            serde_json::from_value(serde_json::json!({ "name": text }))
                .with_context(|| format!("--generator {text}: unknown name or missing parameters"))?
        }
    };
    g.validate()?;
    Ok(g)
}

pub fn check(
    ctx: &Ctx,
    role: Option<Role>,
    generator: Option<&str>,
    out: &mut Artifacts,
    s: &mut Summary,
) -> Result<bool> {
    let g = match generator {
        Some(arg) => parse_generator(arg, &ctx.cfg.generator)?,
        None => ctx.cfg.generator,
    };
    let l = g.lipschitz();
    if l * ctx.tree.h() > 1.0 {
        bail!("--generator: L*sqrt(dt) = {} exceeds 1", l * ctx.tree.h());
    }
    let role = role.or(ctx.cfg.check.role).unwrap_or(Role::Sub);
    let xi = ctx.terminal()?;
    let tol = ctx.viscosity_tol(l, &xi);
    let oracle = ctx.oracle(&xi)?;
    let u = ctx.resolve(&ctx.cfg.check.subject, &oracle).context("field `check.subject`")?;
    let report = check_solution(&u, &g, &ctx.cfg.sampling, tol, role)?;
    out.json("check.json", &report)?;
    ctx.header(s);
    s.add("role", format!("{role:?}").to_lowercase()).add("generator", g.name()).add("tol", tol);
    s.add("samples", report.samples).add("violations", report.violations.len());
    s.add("worst margin", report.worst_margin());
    if let Some(w) = &report.worst {
        s.add("worst node", w.node.clone()).add("worst beta", w.beta);
    }
    Ok(verdict(s, report.passed))
}

#[derive(Serialize)]
struct ExpectReport {
    mode: Extremum,
    #[serde(rename = "L")]
    l: f64,
    terminal: serde_json::Value,
    tol: f64,
    root: f64,
    /// Root value under the reported drift; must equal `root`.
    attained: f64,
    /// Root value under zero drift; `inf <= linear <= sup`.
    linear: f64,
    control: std::collections::BTreeMap<String, f64>,
    passed: bool,
}

pub fn expect(ctx: &Ctx, mode: Option<Extremum>, out: &mut Artifacts, s: &mut Summary) -> Result<bool> {
    let mode = mode.unwrap_or(ctx.cfg.expect.mode);
    let e = ctx.expectation()?;
    let tree = ctx.tree;
    let xi = ctx.terminal()?;
    let x = Process::from_leaves(&tree, xi.values())?;
    let horizon = StoppingRegion::leaves(tree.depth());
    let (y, control) = match mode {
        Extremum::Sup => {
            let y = e.conditional_sup(&x, &horizon)?;
            let c = e.argmax_control(&y);
            (y, c)
        }
        Extremum::Inf => {
            let y = e.conditional_inf(&x, &horizon)?;
            let c = e.argmin_control(&y);
            (y, c)
        }
    };
    let attained = e.conditional_tilted(&x, &control, &horizon)?;
    let linear = Expectation::new(&tree, 0.0)?.conditional_sup(&x, &horizon)?.root();
    let tol = ctx.identity_tol() * (1.0 + xi.sup_norm());
    let ordered = match mode {
        Extremum::Sup => y.root() >= linear - tol,
        Extremum::Inf => y.root() <= linear + tol,
    };
    let passed = y.max_abs_diff(&attained) <= tol && ordered;

    let mut t = Table::new(&["node", "level", "time", "omega", "value", "drift"]);
    for n in tree.nodes() {
        let drift = if tree.is_leaf(n) { String::new() } else { fmt12(control.get(n)) };
        t.row(row![n.address(), n.level(), tree.time(n), tree.value(n), y[n], drift]);
    }
    out.csv("expect.csv", &t)?;
    let report = ExpectReport {
        mode,
        l: e.bound(),
        terminal: ctx.cfg.terminal()?.to_value(),
        tol,
        root: y.root(),
        attained: attained.root(),
        linear,
        control: control.to_map(),
        passed,
    };
    out.json("expect.json", &report)?;
    ctx.header(s);
    s.add("mode", format!("{mode:?}").to_lowercase()).add("L", e.bound()).add("value_0", y.root());
    Ok(verdict(s, passed))
}

#[derive(Serialize)]
struct RegistryOut {
    generators: Vec<ppde_lab::viscosity::RegistryEntry>,
    functionals: Vec<FunctionalOut>,
}

#[derive(Serialize)]
struct FunctionalOut {
    name: &'static str,
    params: &'static str,
    formula: &'static str,
}

pub fn registry_text(json: bool) -> Result<String> {
    if json {
        let out = RegistryOut {
            generators: registry(),
            functionals: functional_registry()
                .into_iter()
                .map(|f| FunctionalOut { name: f.name, params: f.params, formula: f.formula })
                .collect(),
        };
        return crate::output::to_json(&out);
    }
    let mut text = String::from("generators (F(theta, y, z)):\n");
    for g in registry() {
        let params: Vec<String> = g.params.iter().map(|(n, t)| format!("{n}: {t}")).collect();
        text += &format!(
            "  {:<12} params [{}]  {}  Lipschitz {}  modulus {}\n",
            g.name,
            params.join(", "),
            g.formula,
            g.lipschitz,
            g.modulus
        );
    }
    text += "terminal / obstacle functionals:\n";
    for f in functional_registry() {
        text += &format!("  {:<12} params [{}]  {}\n", f.name, f.params, f.formula);
    }
    Ok(text)
}
