//! Scenario files.
//!
//! A file is a TOML document holding one or more `[[scenario]]` tables; see
//! the README for the full grammar. Loading validates every scenario up
//! front so that a bad field is reported with its line before anything runs.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use givp::func::{catalog, parse_objective, Flags, ScalarFunction};
use givp::group::{GroupAction, GroupSpec};
use givp::separation::BodySpec;
use givp::NormSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config defines no [[scenario]] tables")]
    Empty,
    #[error("line {line}: scenario `{scenario}`: {field}: {message}")]
    Invalid {
        line: usize,
        scenario: String,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Symmetrize,
    CheckInvariance,
    CheckGconvexity,
    Ekeland,
    PalaisSmale,
    DenseRange,
    Separate,
    BishopPhelps,
    BronstedRockafellar,
    DualDescription,
}

impl TaskKind {
    pub const ALL: [TaskKind; 10] = [
        TaskKind::Symmetrize,
        TaskKind::CheckInvariance,
        TaskKind::CheckGconvexity,
        TaskKind::Ekeland,
        TaskKind::PalaisSmale,
        TaskKind::DenseRange,
        TaskKind::Separate,
        TaskKind::BishopPhelps,
        TaskKind::BronstedRockafellar,
        TaskKind::DualDescription,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Symmetrize => "symmetrize",
            TaskKind::CheckInvariance => "check-invariance",
            TaskKind::CheckGconvexity => "check-gconvexity",
            TaskKind::Ekeland => "ekeland",
            TaskKind::PalaisSmale => "palais-smale",
            TaskKind::DenseRange => "dense-range",
            TaskKind::Separate => "separate",
            TaskKind::BishopPhelps => "bishop-phelps",
            TaskKind::BronstedRockafellar => "bronsted-rockafellar",
            TaskKind::DualDescription => "dual-description",
        }
    }

    fn needs_objective(self) -> bool {
        !matches!(self, TaskKind::Symmetrize | TaskKind::Separate | TaskKind::BishopPhelps)
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a check task is expected to find.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Holds,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrizeParams {
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckParams {
    #[serde(default = "d_count")]
    pub count: usize,
    #[serde(default = "d_radius")]
    pub radius: f64,
    #[serde(default = "d_lattice")]
    pub lattice_per_axis: usize,
    #[serde(default)]
    pub expect: Expect,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EkelandTask {
    pub epsilon: f64,
    pub delta: f64,
    pub x0: Vec<f64>,
    pub inner_budget: Option<usize>,
    pub starts: Option<usize>,
    pub stop_step: Option<f64>,
    pub verification_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PalaisSmaleTask {
    pub x0: Vec<f64>,
    #[serde(default = "d_n_max")]
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseRangeTask {
    pub k: f64,
    pub c: f64,
    pub targets: Vec<Vec<f64>>,
    #[serde(default = "d_n_max")]
    pub iters: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparateTask {
    pub a: BodySpec,
    pub b: BodySpec,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "d_points")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BishopPhelpsTask {
    pub f: Vec<f64>,
    pub body: BodySpec,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BronstedRockafellarTask {
    pub x0: Vec<f64>,
    pub x0star: Vec<f64>,
    pub epsilon: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualDescriptionTask {
    #[serde(default = "d_dd_samples")]
    pub samples: usize,
}

fn d_count() -> usize {
    1000
}
fn d_radius() -> f64 {
    2.0
}
fn d_lattice() -> usize {
    9
}
fn d_n_max() -> usize {
    50
}
fn d_points() -> usize {
    10_000
}
fn d_dd_samples() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Symmetrize(SymmetrizeParams),
    CheckInvariance(CheckParams),
    CheckGconvexity(CheckParams),
    Ekeland(EkelandTask),
    PalaisSmale(PalaisSmaleTask),
    DenseRange(DenseRangeTask),
    Separate(SeparateTask),
    BishopPhelps(BishopPhelpsTask),
    BronstedRockafellar(BronstedRockafellarTask),
    DualDescription(DualDescriptionTask),
}

impl Task {
    pub fn kind(&self) -> TaskKind {
        match self {
            Task::Symmetrize(_) => TaskKind::Symmetrize,
            Task::CheckInvariance(_) => TaskKind::CheckInvariance,
            Task::CheckGconvexity(_) => TaskKind::CheckGconvexity,
            Task::Ekeland(_) => TaskKind::Ekeland,
            Task::PalaisSmale(_) => TaskKind::PalaisSmale,
            Task::DenseRange(_) => TaskKind::DenseRange,
            Task::Separate(_) => TaskKind::Separate,
            Task::BishopPhelps(_) => TaskKind::BishopPhelps,
            Task::BronstedRockafellar(_) => TaskKind::BronstedRockafellar,
            Task::DualDescription(_) => TaskKind::DualDescription,
        }
    }

    /// Vectors whose length must equal the scenario dimension.
    fn vectors(&self) -> Vec<(&'static str, &[f64])> {
        match self {
            Task::Symmetrize(p) => vec![("params.x", &p.x)],
            Task::Ekeland(p) => vec![("params.x0", &p.x0)],
            Task::PalaisSmale(p) => vec![("params.x0", &p.x0)],
            Task::DenseRange(p) => p.targets.iter().map(|t| ("params.targets", t.as_slice())).collect(),
            Task::BishopPhelps(p) => vec![("params.f", &p.f)],
            Task::BronstedRockafellar(p) => vec![("params.x0", &p.x0), ("params.x0star", &p.x0star)],
            _ => Vec::new(),
        }
    }

    fn bodies(&self) -> Vec<(&'static str, &BodySpec)> {
        match self {
            Task::Separate(p) => vec![("params.a", &p.a), ("params.b", &p.b)],
            Task::BishopPhelps(p) => vec![("params.body", &p.body)],
            _ => Vec::new(),
        }
    }
}

/// Norm by name (`"l1"`, `"l2"`, `"linf"`) or as a table
/// (`{ kind = "weighted_l2", weights = [...] }`).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NormField {
    Name(String),
    Spec(NormSpec),
}

/// Flags an expression objective cannot infer on its own.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Declared {
    #[serde(default)]
    pub convex: bool,
    #[serde(default)]
    pub bounded_below: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    dimension: usize,
    norm: Option<NormField>,
    group: GroupSpec,
    objective: Option<String>,
    #[serde(default)]
    declare: Declared,
    task: TaskKind,
    params: Option<Spanned<toml::Table>>,
    #[serde(default)]
    seed: u64,
    tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    scenario: Vec<Spanned<RawScenario>>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    /// 1-based line of the `[[scenario]]` table.
    pub line: usize,
    pub dimension: usize,
    pub norm: NormSpec,
    pub group: GroupSpec,
    pub objective: Option<String>,
    pub declare: Declared,
    pub task: Task,
    pub seed: u64,
    /// Overrides the task's default acceptance tolerance.
    pub tol: Option<f64>,
}

impl Scenario {
    pub fn group_action(&self) -> GroupAction {
        self.group.build(&self.norm).expect("validated at load")
    }

    /// The objective, by catalog name or as an expression.
    pub fn objective_fn(&self) -> Option<ScalarFunction> {
        self.objective.as_deref().map(|src| resolve_objective(src, self.dimension, self.declare).expect("validated at load"))
    }
}

fn resolve_objective(src: &str, n: usize, declare: Declared) -> Result<ScalarFunction, String> {
    let f = if catalog::entry(src.trim()).is_some() {
        catalog::get(src.trim(), n).map_err(|e| e.to_string())?
    } else {
        parse_objective(src, n).map_err(|e| e.to_string())?
    };
    let flags = f.flags();
    Ok(f.with_flags(Flags {
        declared_convex: flags.declared_convex || declare.convex,
        bounded_below: flags.bounded_below || declare.bounded_below,
        ..flags
    }))
}

fn parse_norm(n: Option<NormField>) -> Result<NormSpec, String> {
    match n {
        None => Ok(NormSpec::L2),
        Some(NormField::Spec(NormSpec::WeightedL2 { weights })) => NormSpec::weighted(weights).map_err(|e| e.to_string()),
        Some(NormField::Spec(s)) => Ok(s),
        Some(NormField::Name(s)) => match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NormSpec::L1),
            "l2" => Ok(NormSpec::L2),
            "linf" => Ok(NormSpec::Linf),
            other => Err(format!("unknown norm `{other}` (expected l1, l2, linf or a weighted_l2 table)")),
        },
    }
}

fn typed<T: DeserializeOwned>(t: toml::Table) -> Result<T, String> {
    toml::Value::Table(t).try_into().map_err(|e: toml::de::Error| e.message().to_string())
}

fn build_task(kind: TaskKind, params: toml::Table) -> Result<Task, String> {
    Ok(match kind {
        TaskKind::Symmetrize => Task::Symmetrize(typed(params)?),
        TaskKind::CheckInvariance => Task::CheckInvariance(typed(params)?),
        TaskKind::CheckGconvexity => Task::CheckGconvexity(typed(params)?),
        TaskKind::Ekeland => Task::Ekeland(typed(params)?),
        TaskKind::PalaisSmale => Task::PalaisSmale(typed(params)?),
        TaskKind::DenseRange => Task::DenseRange(typed(params)?),
        TaskKind::Separate => Task::Separate(typed(params)?),
        TaskKind::BishopPhelps => Task::BishopPhelps(typed(params)?),
        TaskKind::BronstedRockafellar => Task::BronstedRockafellar(typed(params)?),
        TaskKind::DualDescription => Task::DualDescription(typed(params)?),
    })
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Parses and validates a scenario file held in memory.
pub fn parse(src: &str) -> Result<Vec<Scenario>, ConfigError> {
    let raw: RawFile = toml::from_str(src).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    if raw.scenario.is_empty() {
        return Err(ConfigError::Empty);
    }
    let mut names = BTreeSet::new();
    let mut out = Vec::with_capacity(raw.scenario.len());
    for spanned in raw.scenario {
        let line = line_of(src, spanned.span().start);
        let r = spanned.into_inner();
        let name = r.name.clone();
        let bad = |line: usize, field: &str, message: String| ConfigError::Invalid {
            line,
            scenario: name.clone(),
            field: field.to_string(),
            message,
        };
        if !names.insert(r.name.clone()) {
            return Err(bad(line, "name", "duplicate scenario name".into()));
        }
        let norm = parse_norm(r.norm).map_err(|m| bad(line, "norm", m))?;
        let g = r.group.build(&norm).map_err(|e| bad(line, "group", e.to_string()))?;
        if g.dim() != r.dimension {
            return Err(bad(line, "group", format!("acts on ℝ^{}, scenario dimension is {}", g.dim(), r.dimension)));
        }
        let (params, params_line) = match r.params {
            Some(p) => {
                let l = line_of(src, p.span().start);
                (p.into_inner(), l)
            }
            None => (toml::Table::new(), line),
        };
        let task = build_task(r.task, params).map_err(|m| bad(params_line, "params", m))?;
        for (field, xs) in task.vectors() {
            if xs.len() != r.dimension {
                return Err(bad(params_line, field, format!("has {} entries, dimension is {}", xs.len(), r.dimension)));
            }
        }
        for (field, body) in task.bodies() {
            match body.build(&norm) {
                Ok(b) if b.dim() != r.dimension => {
                    return Err(bad(params_line, field, format!("body lives in ℝ^{}, dimension is {}", b.dim(), r.dimension)))
                }
                Ok(_) => {}
                Err(e) => return Err(bad(params_line, field, e.to_string())),
            }
        }
        match (&r.objective, r.task.needs_objective()) {
            (Some(src), _) => {
                resolve_objective(src, r.dimension, r.declare).map_err(|m| bad(line, "objective", m))?;
            }
            (None, true) => return Err(bad(line, "objective", format!("required by task `{}`", r.task))),
            (None, false) => {}
        }
        if let Some(t) = r.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(bad(line, "tol", format!("must be a finite non-negative number, got {t}")));
            }
        }
        out.push(Scenario {
            name: r.name,
            line,
            dimension: r.dimension,
            norm,
            group: r.group,
            objective: r.objective,
            declare: r.declare,
            task,
            seed: r.seed,
            tol: r.tol,
        });
    }
    Ok(out)
}

/// Reads and validates a scenario file.
pub fn load(path: &Path) -> Result<Vec<Scenario>, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&src)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EKELAND: &str = r#"
[[scenario]]
name = "bench"
dimension = 3
group = { preset = "sym", n = 3 }
objective = "sq_norm_plus_one"
task = "ekeland"
seed = 4

[scenario.params]
epsilon = 0.1
delta = 0.01
x0 = [0.3, 0.1, 0.2]
"#;

    fn invalid(src: &str) -> (usize, String) {
        match parse(src).unwrap_err() {
            ConfigError::Invalid { line, field, .. } => (line, field),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn parses_an_ekeland_scenario() {
        let s = &parse(EKELAND).unwrap()[0];
        assert_eq!((s.name.as_str(), s.line, s.seed), ("bench", 2, 4));
        assert_eq!(s.norm, NormSpec::L2);
        let Task::Ekeland(p) = &s.task else { panic!() };
        assert_eq!(p.x0, vec![0.3, 0.1, 0.2]);
        assert_eq!(s.group_action().order(), 6);
    }

    #[test]
    fn wrong_vector_length_names_the_field() {
        let src = EKELAND.replace("[0.3, 0.1, 0.2]", "[0.3, 0.1]");
        assert_eq!(invalid(&src), (10, "params.x0".to_string()));
    }

    #[test]
    fn unknown_param_is_rejected() {
        let src = EKELAND.replace("delta = 0.01", "delta = 0.01\ndelat = 1.0");
        let (line, field) = invalid(&src);
        assert_eq!((line, field.as_str()), (10, "params"));
    }

    #[test]
    fn group_dimension_mismatch() {
        let src = EKELAND.replace("\"sym\", n = 3", "\"sym\", n = 2");
        assert_eq!(invalid(&src).1, "group");
    }

    #[test]
    fn objective_errors() {
        let src = EKELAND.replace("\"sq_norm_plus_one\"", "\"x1 + * x2\"");
        assert_eq!(invalid(&src).1, "objective");
        let src = EKELAND.replace("objective = \"sq_norm_plus_one\"\n", "");
        assert_eq!(invalid(&src).1, "objective");
    }

    #[test]
    fn syntax_error_carries_a_position() {
        let e = parse("[[scenario]\nname = 1").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax(ref m) if m.contains("line 1")), "{e}");
        assert!(matches!(parse("").unwrap_err(), ConfigError::Empty));
    }

    #[test]
    fn norms_by_name_and_table() {
        assert_eq!(parse_norm(Some(NormField::Name("Linf".into()))).unwrap(), NormSpec::Linf);
        assert!(parse_norm(Some(NormField::Name("l3".into()))).is_err());
        let w = NormField::Spec(NormSpec::WeightedL2 { weights: vec![1.0, -1.0] });
        assert!(parse_norm(Some(w)).is_err());
    }

    #[test]
    fn declared_flags_extend_expressions() {
        let f = resolve_objective("x1^2", 1, Declared { convex: true, bounded_below: true }).unwrap();
        assert!(f.flags().declared_convex && f.flags().bounded_below);
        let g = resolve_objective("x1^2", 1, Declared::default()).unwrap();
        assert!(!g.flags().bounded_below);
    }
}
