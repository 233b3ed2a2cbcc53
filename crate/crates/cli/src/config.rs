//! Experiment configuration: one versioned JSON document.

use std::path::PathBuf;

use nonlocal_core::solver::Start;
use nonlocal_core::stability::{MeshRule, DEFAULT_S_LIST};
use nonlocal_core::tail::FarField;
use nonlocal_core::verify::{Exponent, Sign};
use nonlocal_core::{KernelSpec, Shape};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kernel: KernelSpec,
    pub domain: DomainBlock,
    #[serde(default)]
    pub data: DataBlock,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBlock {
    pub shape: Shape,
    pub h: f64,
    pub r_trunc: f64,
    #[serde(default)]
    pub max_nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    /// Exterior data: an expression in `x, y` or a table of exterior values.
    #[serde(default = "zero_data")]
    pub g: DataSource,
    /// Model of `g` beyond the truncated universe. Defaults to the constant
    /// value for constant expressions and to zero otherwise.
    #[serde(default)]
    pub far_field: Option<FarField>,
}

fn zero_data() -> DataSource {
    DataSource::Expr("0".into())
}

impl Default for DataBlock {
    fn default() -> Self {
        Self {
            g: zero_data(),
            far_field: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    Expr(String),
    Table { table: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn all_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv, Format::Svg]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: all_formats(),
        }
    }
}

/// Which function a tail or verify task evaluates.
///
/// As a string: `"solution"` (the latest solve), `"solution:<task name>"`,
/// `"data"` (the exterior expression on every node) or any expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionRef {
    Named(String),
    Random { random_smooth: RandomSpec },
}

impl Default for FunctionRef {
    fn default() -> Self {
        FunctionRef::Named("solution".into())
    }
}

/// Seeded random trigonometric sum; the run seed is added to `seed_offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub seed_offset: u64,
    /// Base period; defaults to the domain diameter.
    #[serde(default)]
    pub length: Option<f64>,
}

fn default_modes() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    CheckKernel {
        #[serde(default)]
        name: Option<String>,
        #[serde(default = "default_t_min")]
        t_min: f64,
        #[serde(default = "default_t_max")]
        t_max: f64,
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default = "default_scaling_tol")]
        tolerance: f64,
    },
    Solve {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        tol_g: Option<f64>,
        #[serde(default)]
        tol_e: Option<f64>,
        #[serde(default)]
        max_iter: Option<usize>,
        #[serde(default)]
        start: Option<Start>,
    },
    Tail {
        #[serde(default)]
        name: Option<String>,
        x0: Vec<f64>,
        r: f64,
        #[serde(default)]
        function: FunctionRef,
    },
    Verify {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        function: FunctionRef,
        /// Replaces `s` in the kernel; one independent job per value.
        #[serde(default)]
        s_list: Option<Vec<f64>>,
        #[serde(default)]
        ceiling: Option<f64>,
        reports: Vec<ReportSpec>,
    },
    Stability {
        #[serde(default)]
        name: Option<String>,
        study: StabilityStudy,
    },
}

fn default_t_min() -> f64 {
    1e-6
}
fn default_t_max() -> f64 {
    1e3
}
fn default_points() -> usize {
    91
}
fn default_scaling_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TaskKind {
    CheckKernel,
    Solve,
    Tail,
    Verify,
    Stability,
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::CheckKernel { .. } => TaskKind::CheckKernel,
            Task::Solve { .. } => TaskKind::Solve,
            Task::Tail { .. } => TaskKind::Tail,
            Task::Verify { .. } => TaskKind::Verify,
            Task::Stability { .. } => TaskKind::Stability,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            Task::CheckKernel { name, .. }
            | Task::Solve { name, .. }
            | Task::Tail { name, .. }
            | Task::Verify { name, .. }
            | Task::Stability { name, .. } => name.as_deref(),
        }
    }

    /// Name used for output files when the task has none.
    pub fn default_name(&self) -> &'static str {
        match self.kind() {
            TaskKind::CheckKernel => "check_kernel",
            TaskKind::Solve => "solve",
            TaskKind::Tail => "tail",
            TaskKind::Verify => "verify",
            TaskKind::Stability => "stability",
        }
    }

    pub fn label(&self) -> String {
        self.name().unwrap_or(self.default_name()).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "report", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReportSpec {
    SobolevPoincare {
        x0: Vec<f64>,
        r: f64,
        #[serde(default)]
        exponent: Exponent,
    },
    Caccioppoli {
        x0: Vec<f64>,
        k: f64,
        sign: Sign,
        rho: f64,
        r: f64,
    },
    LogEstimate {
        x0: Vec<f64>,
        d: f64,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    LogOscillation {
        x0: Vec<f64>,
        a: f64,
        b: f64,
        d: f64,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    LocalBoundedness {
        x0: Vec<f64>,
        r: f64,
        eps: f64,
    },
    Harnack {
        x0: Vec<f64>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
    },
    WeakHarnack {
        x0: Vec<f64>,
        r: f64,
        #[serde(rename = "R")]
        big_r: f64,
        t: f64,
    },
    Holder {
        x0: Vec<f64>,
        r: f64,
        #[serde(default)]
        min_radius: f64,
    },
    Embedding {
        x0: Vec<f64>,
        r: f64,
    },
}

impl ReportSpec {
    pub fn x0(&self) -> &[f64] {
        match self {
            ReportSpec::SobolevPoincare { x0, .. }
            | ReportSpec::Caccioppoli { x0, .. }
            | ReportSpec::LogEstimate { x0, .. }
            | ReportSpec::LogOscillation { x0, .. }
            | ReportSpec::LocalBoundedness { x0, .. }
            | ReportSpec::Harnack { x0, .. }
            | ReportSpec::WeakHarnack { x0, .. }
            | ReportSpec::Holder { x0, .. }
            | ReportSpec::Embedding { x0, .. } => x0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReportSpec::SobolevPoincare { .. } => "sobolev_poincare",
            ReportSpec::Caccioppoli { .. } => "caccioppoli",
            ReportSpec::LogEstimate { .. } => "log_estimate",
            ReportSpec::LogOscillation { .. } => "log_oscillation",
            ReportSpec::LocalBoundedness { .. } => "local_boundedness",
            ReportSpec::Harnack { .. } => "harnack",
            ReportSpec::WeakHarnack { .. } => "weak_harnack",
            ReportSpec::Holder { .. } => "holder",
            ReportSpec::Embedding { .. } => "embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StabilityStudy {
    /// Normalized energies of a 1D profile along the power family.
    Bbm {
        profile: ProfileSpec,
        r: f64,
        #[serde(default = "default_s_list")]
        s_list: Vec<f64>,
    },
    /// Nonlocal solutions on (-1, 1) against the local p-harmonic one.
    LocalLimit {
        g: String,
        mesh: MeshRule,
        #[serde(default = "default_s_list")]
        s_list: Vec<f64>,
        #[serde(default)]
        r_trunc: Option<f64>,
        #[serde(default)]
        far_positive: Option<FarField>,
    },
}

fn default_s_list() -> Vec<f64> {
    DEFAULT_S_LIST.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Bump { center: f64, radius: f64 },
    Expression { expr: String, support: (f64, f64) },
}

/// One-based line of the first occurrence of `"key"` in `text`.
pub fn locate_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// One-based line of the `index`-th element of the top-level `"tasks"` array.
pub fn locate_task(text: &str, index: usize) -> Option<usize> {
    let start = text.find("\"tasks\"")?;
    let bytes = text.as_bytes();
    let mut i = start + text[start..].find('[')? + 1;
    let (mut depth, mut seen) = (0usize, 0usize);
    let mut in_str = false;
    while i < bytes.len() {
        let c = bytes[i];
        if in_str {
            if c == b'\\' {
                i += 1;
            } else if c == b'"' {
                in_str = false;
            }
        } else {
            match c {
                b'"' => in_str = true,
                b'{' | b'[' => {
                    if depth == 0 {
                        if seen == index {
                            return Some(text[..i].matches('\n').count() + 1);
                        }
                        seen += 1;
                    }
                    depth += 1;
                }
                b'}' | b']' => {
                    if depth == 0 {
                        return None;
                    }
                    depth -= 1;
                }
                _ => {}
            }
        }
        i += 1;
    }
    None
}
