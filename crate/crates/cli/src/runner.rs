//! Loads a config, validates it, runs its tasks in order and emits records.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nonlocal_core::domain::DomainLimits;
use nonlocal_core::energy::{Energy, EnergyParams};
use nonlocal_core::kernel::{check_dini, check_scaling_bounds, log_grid, DiniOptions};
use nonlocal_core::profiles::{bump, RandomSmooth};
use nonlocal_core::solver::{range_bounds_check, solve_dirichlet, weak_residual, SolveOptions, SolveResult, Start};
use nonlocal_core::stability::{bbm_energy_curve, local_limit_solution_study, LocalLimitOptions, Profile1d};
use nonlocal_core::tail::{compute_tail, FarField};
use nonlocal_core::verify::{
    caccioppoli_report, embedding_report, harnack_report, holder_exponent_fit, local_boundedness_report, log_estimate_report,
    log_oscillation_report, sobolev_poincare_report, weak_harnack_report, HolderFit, InequalityReport, Setting,
};
use nonlocal_core::{DiscreteDomain, GridFunction, KernelSpec, PhiTable, PhiVariant};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    locate_key, locate_task, DataSource, ExperimentConfig, FunctionRef, ProfileSpec, ReportSpec, StabilityStudy, Task, TaskKind,
    SCHEMA_VERSION,
};
use crate::expr::Expr;
use crate::report::{emit_report, Record, ReportRow, Table};
use crate::svg::{Plot, Series, Style};

type ProfileFn = Box<dyn Fn(f64) -> f64 + Sync>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or inconsistent config; the message starts with `file:line`.
    #[error("{0}")]
    Schema(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<nonlocal_core::Error> for CliError {
    fn from(e: nonlocal_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

type Res<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Run only tasks of this kind; a default task is used when the config
    /// has none and the kind needs no parameters.
    pub only: Option<TaskKind>,
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    /// Added to the seed of every random test function.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<Record>,
    pub files: Vec<PathBuf>,
    pub all_passed: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.all_passed {
            0
        } else {
            1
        }
    }
}

/// Exit status for a finished or failed run.
pub fn exit_status(result: &Res<RunOutcome>) -> i32 {
    match result {
        Ok(o) => o.exit_code(),
        Err(e) => e.exit_code(),
    }
}

pub fn parse_config(text: &str, origin: &str) -> Res<ExperimentConfig> {
    let cfg: ExperimentConfig =
        serde_json::from_str(text).map_err(|e| CliError::Schema(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    if cfg.version != SCHEMA_VERSION {
        return Err(schema_at(
            origin,
            locate_key(text, "version"),
            format!("unsupported config version {}, expected {SCHEMA_VERSION}", cfg.version),
        ));
    }
    Ok(cfg)
}

fn schema_at(origin: &str, line: Option<usize>, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("{origin}:{}: {msg}", line.unwrap_or(1)))
}

/// Reads, validates and runs the config at `path`. Relative output
/// directories are resolved against the config file's directory.
pub fn run_config(path: &Path, opts: &RunOptions) -> Res<RunOutcome> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{origin}:1: cannot read config: {e}")))?;
    let base = path.parent().unwrap_or(Path::new("."));
    run_config_text(&text, &origin, base, opts)
}

pub fn run_config_text(text: &str, origin: &str, base: &Path, opts: &RunOptions) -> Res<RunOutcome> {
    let cfg = parse_config(text, origin)?;
    let tasks = select_tasks(&cfg, text, origin, opts.only)?;
    let ctx = Context::new(&cfg, text, origin, opts.seed)?;
    for (index, task) in &tasks {
        ctx.validate_task(task, &tasks, *index)
            .map_err(|m| schema_at(origin, index.and_then(|i| locate_task(text, i)), m))?;
    }
    let records = ctx.run(&tasks)?;
    let dir = match &opts.out {
        Some(d) => d.clone(),
        None if cfg.output.directory.is_absolute() => cfg.output.directory.clone(),
        None => base.join(&cfg.output.directory),
    };
    let files = emit_report(&records, &cfg.output.formats, &dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let all_passed = records.iter().all(|r| r.pass);
    Ok(RunOutcome {
        records,
        files,
        all_passed,
    })
}

/// Tasks to run with their index in the config (`None` for synthesized ones).
fn select_tasks(cfg: &ExperimentConfig, text: &str, origin: &str, only: Option<TaskKind>) -> Res<Vec<(Option<usize>, Task)>> {
    let picked: Vec<(Option<usize>, Task)> = cfg
        .tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| only.is_none_or(|k| t.kind() == k))
        .map(|(i, t)| (Some(i), t.clone()))
        .collect();
    if !picked.is_empty() || only.is_none() {
        return Ok(picked);
    }
    let synthesized = match only {
        Some(TaskKind::CheckKernel) => Task::CheckKernel {
            name: None,
            t_min: 1e-6,
            t_max: 1e3,
            points: 91,
            tolerance: 1e-9,
        },
        Some(TaskKind::Solve) => Task::Solve {
            name: None,
            tol_g: None,
            tol_e: None,
            max_iter: None,
            start: None,
        },
        Some(kind) => {
            return Err(schema_at(
                origin,
                locate_key(text, "tasks"),
                format!("config has no {kind:?} task to run"),
            ))
        }
        None => unreachable!(),
    };
    Ok(vec![(None, synthesized)])
}

fn point(x0: &[f64]) -> [f64; 2] {
    [x0.first().copied().unwrap_or(0.0), x0.get(1).copied().unwrap_or(0.0)]
}

/// The kernel with its order `s` replaced.
pub fn kernel_with_s(spec: &KernelSpec, s: f64) -> KernelSpec {
    let mut out = spec.clone();
    out.s = s;
    out.phi = match spec.phi.clone() {
        PhiVariant::Power { .. } => PhiVariant::Power { s },
        PhiVariant::Sum { s2, .. } => PhiVariant::Sum { s, s2 },
        PhiVariant::Min { s2, .. } => PhiVariant::Min { s, s2 },
        PhiVariant::LogPerturbedPower { gamma, .. } => PhiVariant::LogPerturbedPower { s, gamma },
        PhiVariant::LogBorderline { gamma, .. } => PhiVariant::LogBorderline { gamma, s },
        other => other,
    };
    out
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    domain: DiscreteDomain,
    g_ext: Vec<f64>,
    g_expr: Option<Expr>,
    far: FarField,
    seed: u64,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig, text: &str, origin: &str, seed: u64) -> Res<Self> {
        cfg.kernel
            .validate()
            .map_err(|e| schema_at(origin, locate_key(text, "kernel"), e))?;
        let d = &cfg.domain;
        let at_domain = |m: String| schema_at(origin, locate_key(text, "domain"), m);
        if d.shape.dim() != cfg.kernel.dim {
            return Err(at_domain(format!(
                "domain dimension {} differs from kernel dimension {}",
                d.shape.dim(),
                cfg.kernel.dim
            )));
        }
        let limits = d
            .max_nodes
            .map_or_else(DomainLimits::default, |max_nodes| DomainLimits { max_nodes });
        let domain =
            DiscreteDomain::build_with_limits(d.shape.clone(), d.h, d.r_trunc, limits).map_err(|e| at_domain(e.to_string()))?;
        let at_data = |m: String| schema_at(origin, locate_key(text, "data"), m);
        let (g_ext, g_expr) = match &cfg.data.g {
            DataSource::Expr(src) => {
                let e = Expr::parse(src).map_err(|e| at_data(format!("exterior data: {e}")))?;
                (domain.sample_exterior(|x| e.eval(x[0], x[1])), Some(e))
            }
            DataSource::Table { table } => {
                if table.len() != domain.n_exterior() {
                    return Err(at_data(format!(
                        "exterior table has {} values, the grid has {} exterior nodes",
                        table.len(),
                        domain.n_exterior()
                    )));
                }
                (table.clone(), None)
            }
        };
        if g_ext.iter().any(|v| !v.is_finite()) {
            return Err(at_data("exterior data is not finite on every node".into()));
        }
        let far = cfg
            .data
            .far_field
            .unwrap_or_else(|| match g_expr.as_ref().and_then(Expr::constant_value) {
                Some(value) if value != 0.0 => FarField::Constant { value },
                _ => FarField::Zero,
            });
        Ok(Self {
            cfg,
            domain,
            g_ext,
            g_expr,
            far,
            seed,
        })
    }

    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn validate_task(&self, task: &Task, all: &[(Option<usize>, Task)], index: Option<usize>) -> std::result::Result<(), String> {
        let n = self.dim();
        let check_x0 = |x0: &[f64]| {
            if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
                Err(format!("x0 must have {n} finite coordinates"))
            } else {
                Ok(())
            }
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        let check_function = |f: &FunctionRef| -> std::result::Result<(), String> {
            match f {
                FunctionRef::Named(s) if s == "solution" => Ok(()),
                FunctionRef::Named(s) if s.starts_with("solution:") => {
                    let target = &s["solution:".len()..];
                    let found = all.iter().any(|(i, t)| {
                        t.kind() == TaskKind::Solve
                            && t.name() == Some(target)
                            && index.is_none_or(|me| i.is_some_and(|i| i < me))
                    });
                    let exists = self
                        .cfg
                        .tasks
                        .iter()
                        .any(|t| t.kind() == TaskKind::Solve && t.name() == Some(target));
                    if found || exists {
                        Ok(())
                    } else {
                        Err(format!("no solve task named '{target}'"))
                    }
                }
                FunctionRef::Named(s) if s == "data" => {
                    if self.g_expr.is_some() {
                        Ok(())
                    } else {
                        Err("function \"data\" needs exterior data given as an expression".into())
                    }
                }
                FunctionRef::Named(s) => Expr::parse(s).map(|_| ()).map_err(|e| format!("function: {e}")),
                FunctionRef::Random { random_smooth } => {
                    if random_smooth.modes == 0 {
                        return Err("random_smooth needs at least one mode".into());
                    }
                    if let Some(l) = random_smooth.length {
                        positive("random_smooth.length", l)?;
                    }
                    Ok(())
                }
            }
        };
        match task {
            Task::CheckKernel {
                t_min,
                t_max,
                points,
                tolerance,
                ..
            } => {
                positive("t_min", *t_min)?;
                if t_max <= t_min || t_max.is_nan() || t_min.is_nan() || *points < 2 {
                    return Err("need t_min < t_max and at least two points".into());
                }
                positive("tolerance", *tolerance)
            }
            Task::Solve {
                tol_g,
                tol_e,
                max_iter,
                start,
                ..
            } => {
                if let Some(t) = tol_g {
                    positive("tol_g", *t)?;
                }
                if let Some(t) = tol_e {
                    positive("tol_e", *t)?;
                }
                if *max_iter == Some(0) {
                    return Err("max_iter must be positive".into());
                }
                if let Some(Start::Given(v)) = start {
                    if v.len() != self.domain.n_interior() {
                        return Err(format!("start values must number {}", self.domain.n_interior()));
                    }
                }
                Ok(())
            }
            Task::Tail { x0, r, function, .. } => {
                check_x0(x0)?;
                positive("r", *r)?;
                check_function(function)
            }
            Task::Verify {
                function,
                s_list,
                ceiling,
                reports,
                ..
            } => {
                check_function(function)?;
                if let Some(c) = ceiling {
                    positive("ceiling", *c)?;
                }
                if let Some(list) = s_list {
                    if list.is_empty() {
                        return Err("s_list must not be empty".into());
                    }
                    for &s in list {
                        kernel_with_s(&self.cfg.kernel, s)
                            .validate()
                            .map_err(|e| format!("s = {s}: {e}"))?;
                    }
                }
                if reports.is_empty() {
                    return Err("verify task lists no reports".into());
                }
                for rep in reports {
                    check_x0(rep.x0()).map_err(|e| format!("{}: {e}", rep.name()))?;
                }
                Ok(())
            }
            Task::Stability { study, .. } => match study {
                StabilityStudy::Bbm { profile, r, s_list } => {
                    positive("r", *r)?;
                    if s_list.len() < 3 || s_list.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
                        return Err("s_list needs at least three values in (0,1)".into());
                    }
                    match profile {
                        ProfileSpec::Bump { radius, .. } => positive("radius", *radius),
                        ProfileSpec::Expression { expr, support } => {
                            Expr::parse(expr).map_err(|e| format!("profile: {e}"))?;
                            if support.1 > support.0 {
                                Ok(())
                            } else {
                                Err("profile support must be a nonempty interval".into())
                            }
                        }
                    }
                }
                StabilityStudy::LocalLimit { g, s_list, r_trunc, .. } => {
                    Expr::parse(g).map_err(|e| format!("g: {e}"))?;
                    if s_list.is_empty() || s_list.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
                        return Err("s_list needs values in (0,1)".into());
                    }
                    if let Some(rt) = r_trunc {
                        positive("r_trunc", *rt)?;
                    }
                    Ok(())
                }
            },
        }
    }

    fn run(&self, tasks: &[(Option<usize>, Task)]) -> Res<Vec<Record>> {
        let mut records = Vec::new();
        let mut solutions: BTreeMap<String, SolveResult> = BTreeMap::new();
        let mut latest: Option<String> = None;
        for (_, task) in tasks {
            let label = task.label();
            match task {
                Task::CheckKernel {
                    t_min,
                    t_max,
                    points,
                    tolerance,
                    ..
                } => {
                    records.push(self.check_kernel(&label, *t_min, *t_max, *points, *tolerance));
                }
                Task::Solve { .. } => {
                    let sol = self.solve(&self.cfg.kernel, &solve_options(task))?;
                    records.push(self.solve_record(&label, &sol)?);
                    solutions.insert(label.clone(), sol);
                    latest = Some(label);
                }
                Task::Tail { x0, r, function, .. } => {
                    let (values, far) = self.function_values(function, &self.cfg.kernel, &solutions, latest.as_deref())?;
                    let table = PhiTable::new(&self.cfg.kernel)?;
                    let t = compute_tail(&table, &self.domain, &values, &far, point(x0), *r)?;
                    let mut body = serde_json::to_value(t).unwrap_or(Value::Null);
                    body["x0"] = json!(x0);
                    body["r"] = json!(r);
                    records.push(Record::new(label, body));
                }
                Task::Verify {
                    function,
                    s_list,
                    ceiling,
                    reports,
                    ..
                } => {
                    let sweep = s_list.is_some();
                    let s_values = s_list.clone().unwrap_or_else(|| vec![self.cfg.kernel.s]);
                    let batches: Vec<Res<Vec<Record>>> = s_values
                        .par_iter()
                        .map(|&s| {
                            let spec = kernel_with_s(&self.cfg.kernel, s);
                            let (values, far) = self.function_values(function, &spec, &solutions, latest.as_deref())?;
                            let table = PhiTable::new(&spec)?;
                            let mut set = Setting::new(&self.domain, &table, &values, far)?;
                            if let Some(c) = ceiling {
                                set = set.with_ceiling(*c);
                            }
                            let suffix = if sweep { format!("_s{s}") } else { String::new() };
                            let mut out = Vec::new();
                            for rep in reports {
                                out.extend(self.verify_one(&set, rep, &label, &suffix)?);
                            }
                            Ok(out)
                        })
                        .collect();
                    for b in batches {
                        records.extend(b?);
                    }
                }
                Task::Stability { study, .. } => records.push(self.stability(&label, study)?),
            }
        }
        Ok(records)
    }

    fn check_kernel(&self, label: &str, t_min: f64, t_max: f64, points: usize, tolerance: f64) -> Record {
        let spec = &self.cfg.kernel;
        let dini = check_dini(spec, DiniOptions::default());
        let grid = log_grid(t_min, t_max, points);
        let samples: Vec<(f64, f64)> = log_grid(t_min, t_max, 13)
            .into_iter()
            .map(|t| (t, spec.phi_eval(t).unwrap_or(f64::NAN)))
            .collect();
        let mut body = json!({
            "dini": { "pass": dini.pass, "value": dini.value, "partial_sum": dini.partial_sum, "decay_exponent": dini.decay_exponent },
            "phi_samples": samples.iter().map(|&(t, v)| [t, v]).collect::<Vec<_>>(),
        });
        match check_scaling_bounds(spec, &grid, tolerance) {
            Ok(sc) => {
                body["L_dec"] = json!(sc.l_dec);
                body["L_inc"] = json!(sc.l_inc);
                body["scaling_pass"] = json!(sc.pass);
            }
            Err(e) => body["scaling_error"] = json!(e.to_string()),
        }
        if dini.pass {
            match PhiTable::new(spec).and_then(|t| t.exterior_kernel_mass(1.0)) {
                Ok(m) => body["exterior_kernel_mass_r1"] = serde_json::to_value(m).unwrap_or(Value::Null),
                Err(e) => body["kernel_mass_error"] = json!(e.to_string()),
            }
        }
        let mut rec = Record::new(label, body);
        rec.tables.push(Table {
            suffix: "_phi".into(),
            header: vec!["t".into(), "phi".into()],
            rows: samples.iter().map(|&(t, v)| vec![t, v]).collect(),
        });
        rec
    }

    fn solve(&self, spec: &KernelSpec, opts: &SolveOptions) -> Res<SolveResult> {
        let scale = 1.0 + self.g_ext.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let params = EnergyParams::with_default_reg(spec.clone(), scale)?;
        let energy = Energy::new(&self.domain, params)?;
        Ok(solve_dirichlet(&energy, &self.g_ext, opts)?)
    }

    fn solve_record(&self, label: &str, sol: &SolveResult) -> Res<Record> {
        let params = EnergyParams::with_default_reg(self.cfg.kernel.clone(), 1.0)?;
        let energy = Energy::new(&self.domain, params)?;
        let residual = weak_residual(&energy, sol.u.values())?;
        let osc = self.g_ext.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let range = range_bounds_check(&sol.u, self.domain.n_interior(), 1e-6 * (1.0 + osc));
        let body = json!({
            "iterations": sol.iterations,
            "converged": sol.converged,
            "final_energy": sol.final_energy,
            "grad_norm": sol.grad_norm,
            "tol_g": sol.tol_g,
            "restarts": sol.restarts,
            "weak_residual": residual,
            "range_check": range,
            "h": self.domain.h(),
            "n_interior": self.domain.n_interior(),
        });
        let mut rec = Record::new(label, body);
        rec.pass = sol.converged && range.pass;
        rec.tables.push(self.grid_table("_solution", &sol.u));
        if !sol.trace.is_empty() {
            rec.tables.push(Table {
                suffix: "_trace".into(),
                header: vec!["iteration".into(), "energy".into(), "grad_norm".into()],
                rows: sol
                    .trace
                    .iter()
                    .map(|t| vec![t.iteration as f64, t.energy, t.grad_norm])
                    .collect(),
            });
        }
        Ok(rec)
    }

    fn grid_table(&self, suffix: &str, u: &GridFunction) -> Table {
        let two = self.dim() == 2;
        let header = if two { vec!["x", "y", "value"] } else { vec!["x", "value"] };
        let rows = self
            .domain
            .coords()
            .iter()
            .zip(u.values())
            .map(|(x, &v)| if two { vec![x[0], x[1], v] } else { vec![x[0], v] })
            .collect();
        Table {
            suffix: suffix.into(),
            header: header.into_iter().map(String::from).collect(),
            rows,
        }
    }

    /// Nodal values of the referenced function for the kernel `spec`, with
    /// the far-field model that goes with them.
    fn function_values(
        &self,
        f: &FunctionRef,
        spec: &KernelSpec,
        solutions: &BTreeMap<String, SolveResult>,
        latest: Option<&str>,
    ) -> Res<(Vec<f64>, FarField)> {
        let nodes = self.domain.coords();
        match f {
            FunctionRef::Named(name) if name == "solution" || name.starts_with("solution:") => {
                let target = name
                    .strip_prefix("solution:")
                    .map(str::to_string)
                    .or_else(|| latest.map(str::to_string));
                let task = target
                    .as_deref()
                    .and_then(|t| self.cfg.tasks.iter().find(|k| k.kind() == TaskKind::Solve && k.label() == t));
                let cached = target.as_deref().and_then(|t| solutions.get(t));
                let values = match cached {
                    Some(sol) if spec == &self.cfg.kernel => sol.u.values().to_vec(),
                    _ => {
                        let opts = task.map_or_else(
                            || SolveOptions {
                                record_trace: false,
                                ..SolveOptions::default()
                            },
                            solve_options,
                        );
                        self.solve(spec, &opts)?.u.values().to_vec()
                    }
                };
                Ok((values, self.far))
            }
            FunctionRef::Named(name) if name == "data" => {
                let e = self
                    .g_expr
                    .as_ref()
                    .ok_or_else(|| CliError::Schema("function \"data\" needs an expression".into()))?;
                Ok((nodes.iter().map(|x| e.eval(x[0], x[1])).collect(), self.far))
            }
            FunctionRef::Named(src) => {
                let e = Expr::parse(src).map_err(|e| CliError::Schema(format!("function: {e}")))?;
                let far = match e.constant_value() {
                    Some(value) => FarField::Constant { value },
                    None => self.far,
                };
                Ok((nodes.iter().map(|x| e.eval(x[0], x[1])).collect(), far))
            }
            FunctionRef::Random { random_smooth } => {
                let length = random_smooth.length.unwrap_or_else(|| self.domain.shape().diameter());
                let rs = RandomSmooth::new(self.seed.wrapping_add(random_smooth.seed_offset), random_smooth.modes, length);
                let bound: f64 = rs
                    .terms
                    .iter()
                    .enumerate()
                    .map(|(k, t)| (t.0.abs() + t.1.abs() + t.2.abs() + t.3.abs()) / ((k + 1) as f64).powi(2))
                    .sum();
                Ok((
                    nodes.iter().map(|&x| rs.eval(x)).collect(),
                    FarField::Power { a: bound, beta: 0.0 },
                ))
            }
        }
    }

    fn verify_one(&self, set: &Setting, rep: &ReportSpec, label: &str, suffix: &str) -> Res<Vec<Record>> {
        let x0 = point(rep.x0());
        let reports: Vec<InequalityReport> = match *rep {
            ReportSpec::SobolevPoincare { r, exponent, .. } => vec![sobolev_poincare_report(set, x0, r, exponent)?],
            ReportSpec::Caccioppoli { k, sign, rho, r, .. } => vec![caccioppoli_report(set, x0, k, sign, rho, r)?],
            ReportSpec::LogEstimate { d, r, big_r, .. } => vec![log_estimate_report(set, x0, d, r, big_r)?],
            ReportSpec::LogOscillation { a, b, d, r, big_r, .. } => vec![log_oscillation_report(set, x0, a, b, d, r, big_r)?],
            ReportSpec::LocalBoundedness { r, eps, .. } => vec![local_boundedness_report(set, x0, r, eps)?],
            ReportSpec::Harnack { r, big_r, .. } => vec![harnack_report(set, x0, r, big_r)?],
            ReportSpec::WeakHarnack { r, big_r, t, .. } => vec![weak_harnack_report(set, x0, r, big_r, t)?],
            ReportSpec::Embedding { r, .. } => embedding_report(set, x0, r)?,
            ReportSpec::Holder { r, min_radius, .. } => {
                let fit = holder_exponent_fit(set.domain, set.values, x0, r, min_radius)?;
                return Ok(vec![holder_record(&format!("{label}_holder{suffix}"), &fit, set)]);
            }
        };
        Ok(reports
            .into_iter()
            .map(|r| {
                let mut body = serde_json::to_value(&r).unwrap_or(Value::Null);
                body["x0"] = json!(rep.x0());
                let mut rec = Record::new(format!("{label}_{}{suffix}", r.name), body);
                rec.pass = r.pass;
                rec.rows.push(ReportRow {
                    report: r.name.clone(),
                    s: set.table.spec().s,
                    h: set.domain.h(),
                    lhs: r.lhs,
                    rhs_parts: r.rhs_parts.clone(),
                    constant: r.measured_constant,
                    pass: r.pass,
                });
                rec
            })
            .collect())
    }

    fn stability(&self, label: &str, study: &StabilityStudy) -> Res<Record> {
        let p = self.cfg.kernel.p;
        match study {
            StabilityStudy::Bbm { profile, r, s_list } => {
                let (f, support): (ProfileFn, (f64, f64)) = match profile {
                    ProfileSpec::Bump { center, radius } => {
                        let (c, rad) = (*center, *radius);
                        (Box::new(move |x| bump([x, 0.0], [c, 0.0], rad)), (c - rad, c + rad))
                    }
                    ProfileSpec::Expression { expr, support } => {
                        let e = Expr::parse(expr).map_err(|e| CliError::Schema(format!("profile: {e}")))?;
                        let (lo, hi) = *support;
                        (
                            Box::new(move |x| if x < lo || x > hi { 0.0 } else { e.eval(x, 0.0) }),
                            *support,
                        )
                    }
                };
                let prof = Profile1d { f: &*f, support };
                let curve = bbm_energy_curve(&prof, p, *r, s_list)?;
                let mut rec = Record::new(label, serde_json::to_value(&curve).unwrap_or(Value::Null));
                rec.tables.push(Table {
                    suffix: "_curve".into(),
                    header: ["s", "normalized_energy", "near", "far", "far_bound"]
                        .map(String::from)
                        .to_vec(),
                    rows: curve
                        .points
                        .iter()
                        .map(|q| vec![q.s, q.normalized_energy, q.near, q.far, q.far_bound])
                        .collect(),
                });
                let (lo, hi) = s_list.iter().fold((1.0f64, 0.0f64), |(a, b), &s| (a.min(s), b.max(s)));
                let fit = |s: f64| curve.extrapolated_limit + curve.slope * (1.0 - s);
                rec.plot = Some(Plot {
                    title: format!("normalized energy vs s (p = {p}, r = {r})"),
                    x_label: "s".into(),
                    y_label: "normalized energy".into(),
                    log_x: false,
                    log_y: false,
                    series: vec![
                        Series {
                            label: "energy".into(),
                            points: curve.points.iter().map(|q| (q.s, q.normalized_energy)).collect(),
                            style: Style::Line,
                        },
                        Series {
                            label: format!("linear fit, limit {:.4}", curve.extrapolated_limit),
                            points: vec![(lo, fit(lo)), (hi.max(lo), fit(hi.max(lo))), (1.0, fit(1.0))],
                            style: Style::Line,
                        },
                    ],
                });
                Ok(rec)
            }
            StabilityStudy::LocalLimit {
                g,
                mesh,
                s_list,
                r_trunc,
                far_positive,
            } => {
                let e = Expr::parse(g).map_err(|e| CliError::Schema(format!("g: {e}")))?;
                let far_positive = far_positive.unwrap_or_else(|| match e.constant_value() {
                    Some(c) if c > 0.0 => FarField::Constant { value: c },
                    _ => FarField::Zero,
                });
                let opts = LocalLimitOptions {
                    p,
                    r_trunc: r_trunc.unwrap_or(self.cfg.domain.r_trunc),
                    mesh: *mesh,
                    far_positive,
                };
                let rows = local_limit_solution_study(|x| e.eval(x, 0.0), s_list, &opts)?;
                let mut rec = Record::new(label, json!({ "p": p, "rows": rows }));
                rec.pass = rows.iter().all(|r| r.converged);
                rec.tables.push(Table {
                    suffix: "_curve".into(),
                    header: ["s", "h", "distance", "tail", "iterations", "converged"]
                        .map(String::from)
                        .to_vec(),
                    rows: rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.s,
                                r.h,
                                r.distance,
                                r.tail,
                                r.iterations as f64,
                                if r.converged { 1.0 } else { 0.0 },
                            ]
                        })
                        .collect(),
                });
                rec.plot = Some(Plot {
                    title: format!("distance to the local solution (p = {p})"),
                    x_label: "s".into(),
                    y_label: "L^p distance".into(),
                    log_x: false,
                    log_y: false,
                    series: vec![Series {
                        label: "distance".into(),
                        points: rows.iter().map(|r| (r.s, r.distance)).collect(),
                        style: Style::Line,
                    }],
                });
                Ok(rec)
            }
        }
    }
}

fn solve_options(task: &Task) -> SolveOptions {
    let mut o = SolveOptions::default();
    if let Task::Solve {
        tol_g,
        tol_e,
        max_iter,
        start,
        ..
    } = task
    {
        o.tol_g = *tol_g;
        if let Some(t) = tol_e {
            o.tol_e = *t;
        }
        if let Some(m) = max_iter {
            o.max_iter = *m;
        }
        if let Some(s) = start {
            o.start = s.clone();
        }
    }
    o
}

fn holder_record(name: &str, fit: &HolderFit, set: &Setting) -> Record {
    let mut body = serde_json::to_value(fit).unwrap_or(Value::Null);
    body["status"] = json!(fit.status());
    let mut rec = Record::new(name, body);
    let ok = fit.degenerate || (fit.alpha_hat > 0.0 && fit.alpha_hat.is_finite());
    rec.pass = ok;
    rec.rows.push(ReportRow {
        report: "holder".into(),
        s: set.table.spec().s,
        h: set.domain.h(),
        lhs: fit.alpha_hat,
        rhs_parts: BTreeMap::new(),
        constant: fit.c_hat,
        pass: ok,
    });
    let data: Vec<(f64, f64)> = fit.radii.iter().copied().zip(fit.osc.iter().copied()).collect();
    let mut series = vec![Series {
        label: "osc".into(),
        points: data,
        style: Style::Points,
    }];
    if !fit.degenerate {
        let m = fit.radii.len() as f64;
        let mean = |v: &[f64]| v.iter().map(|x| x.ln()).sum::<f64>() / m;
        let intercept = mean(&fit.osc) - fit.alpha_hat * mean(&fit.radii);
        let line = fit
            .radii
            .iter()
            .map(|&rho| (rho, (intercept + fit.alpha_hat * rho.ln()).exp()))
            .collect();
        series.push(Series {
            label: format!("fit, alpha = {:.4}", fit.alpha_hat),
            points: line,
            style: Style::Line,
        });
    }
    rec.plot = Some(Plot {
        title: "oscillation decay".into(),
        x_label: "rho".into(),
        y_label: "osc".into(),
        log_x: true,
        log_y: true,
        series,
    });
    rec
}
