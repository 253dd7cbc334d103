//! Job configuration: a single JSON document, validated and completed with
//! defaults at parse time.

use std::fmt;
use std::str::FromStr;

use markovgeom::geometry::GaugeElement;
use markovgeom::opspace::{c, CMatrix};
use markovgeom::{DynamicalParams, QfiConvention, TangentVector};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::CliError;

/// Row-major matrix of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Info,
    Qfi,
    Decompose,
    Connection,
    Symplectic,
    LanCheck,
    EquivCheck,
    CovConverge,
    OutputOverlap,
}

impl Command {
    pub fn needs_convention(self) -> bool {
        matches!(self, Command::Qfi | Command::LanCheck)
    }

    fn default_t_grid(self) -> Option<Vec<f64>> {
        match self {
            Command::LanCheck => Some(vec![50.0, 100.0, 200.0, 400.0]),
            Command::CovConverge | Command::OutputOverlap => {
                Some(vec![25.0, 50.0, 100.0, 200.0])
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}' (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    #[serde(rename = "four_x")]
    FourX,
    #[serde(rename = "metric")]
    Metric,
}

impl From<Convention> for QfiConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::FourX => QfiConvention::FourX,
            Convention::Metric => QfiConvention::Metric,
        }
    }
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<QfiConvention>() {
            Ok(QfiConvention::FourX) => Ok(Convention::FourX),
            Ok(QfiConvention::Metric) => Ok(Convention::Metric),
            Err(e) => Err(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    TwoLevel {
        alpha: f64,
        delta: f64,
        omega: f64,
        theta: f64,
        #[serde(default)]
        v: [f64; 3],
    },
    Random {
        dim: usize,
        channels: usize,
        seed: u64,
    },
}

/// Exactly one of `preset` or (`h`, `l`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<MatrixJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentJson {
    pub dh: MatrixJson,
    pub dl: Vec<MatrixJson>,
}

/// A named tangent set or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TangentsSpec {
    Named(String),
    Explicit(Vec<TangentJson>),
}

pub const TANGENT_SETS: [&str; 5] = ["physical", "vertical", "auxiliary", "gauge", "one_param"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub w: MatrixJson,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Times in units of the mixing time `1/gap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<Vec<f64>>,
    /// Quadrature intervals per unit `‖𝕎‖·t` for the finite-time covariance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complete_with_j: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model2: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangents: Option<TangentsSpec>,
    #[serde(default)]
    pub options: Options,
}

/// Command-line flags that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub format: Option<Format>,
    pub out: Option<String>,
    pub convention: Option<Convention>,
    pub tol: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_QUAD_DENSITY: f64 = 4.0;

pub fn parse_config(text: &str) -> Result<JobConfig, CliError> {
    parse_config_with(text, &Overrides::default())
}

/// Parses, applies overrides, validates and fills every default.
pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<JobConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut job: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::parse(
            inner.to_string(),
            json!({ "field": path, "line": inner.line(), "column": inner.column() }),
        )
    })?;
    let o = &mut job.options;
    if overrides.format.is_some() {
        o.format = overrides.format;
    }
    if overrides.out.is_some() {
        o.out = overrides.out.clone();
    }
    if overrides.convention.is_some() {
        o.convention = overrides.convention;
    }
    if overrides.tol.is_some() {
        o.tol = overrides.tol;
    }
    if overrides.t_grid.is_some() {
        o.t_grid = overrides.t_grid.clone();
    }
    validate(&mut job)?;
    Ok(job)
}

fn validate(job: &mut JobConfig) -> Result<(), CliError> {
    let base = build_model(&job.model, "model")?;
    if let Some(m2) = &job.model2 {
        let other = build_model(m2, "model2")?;
        if other.dim() != base.dim() || other.channels() != base.channels() {
            return Err(CliError::field(
                "model2",
                format!(
                    "shape ({}, {}) differs from model ({}, {})",
                    other.dim(),
                    other.channels(),
                    base.dim(),
                    base.channels()
                ),
            ));
        }
    }
    if let Some(g) = &job.gauge {
        build_gauge(g, base.dim())?;
    }
    let cmd = job.command;
    if matches!(cmd, Command::EquivCheck | Command::OutputOverlap)
        && job.model2.is_none()
        && job.gauge.is_none()
    {
        return Err(CliError::field(
            "model2",
            "this command compares two models: give model2 or gauge",
        ));
    }

    let o = &mut job.options;
    if cmd.needs_convention() && o.convention.is_none() {
        return Err(CliError::field(
            "options.convention",
            "the convention flag (--convention four_x|metric) is mandatory for this command",
        ));
    }
    let tol = *o.tol.get_or_insert(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(CliError::field("options.tol", "tol must be positive"));
    }
    o.format.get_or_insert(Format::Json);
    if o.t_grid.is_none() {
        o.t_grid = cmd.default_t_grid();
    }
    if let Some(grid) = &o.t_grid {
        if grid.is_empty() || grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(CliError::field("options.t_grid", "t_grid needs positive finite entries"));
        }
    }
    if matches!(cmd, Command::CovConverge) {
        let q = *o.quad_density.get_or_insert(DEFAULT_QUAD_DENSITY);
        if !(q > 0.0) {
            return Err(CliError::field("options.quad_density", "quad_density must be positive"));
        }
    }
    if matches!(cmd, Command::Symplectic) {
        o.complete_with_j.get_or_insert(false);
    }

    let needs_tangents = !matches!(cmd, Command::Info | Command::EquivCheck | Command::OutputOverlap);
    if needs_tangents && job.tangents.is_none() {
        job.tangents = match &job.model.preset {
            Some(Preset::TwoLevel { .. }) => Some(TangentsSpec::Named("physical".into())),
            _ => {
                return Err(CliError::field(
                    "tangents",
                    "tangents are required for this command unless the model is the two_level preset",
                ))
            }
        };
    }
    let n_tangents = match &job.tangents {
        Some(spec) => build_tangents(spec, &job.model, &base)?.len(),
        None => 0,
    };
    if matches!(cmd, Command::LanCheck) {
        let o = &mut job.options;
        let u = o.u.get_or_insert_with(|| {
            let mut u = vec![0.0; n_tangents];
            u[0] = 1.0;
            u
        });
        if u.len() != n_tangents {
            return Err(CliError::field("options.u", format!("u needs {n_tangents} entries")));
        }
        let u2 = o.u2.get_or_insert_with(|| vec![0.0; n_tangents]);
        if u2.len() != n_tangents {
            return Err(CliError::field("options.u2", format!("u2 needs {n_tangents} entries")));
        }
    }
    Ok(())
}

pub fn to_cmatrix(m: &MatrixJson, field: &str) -> Result<CMatrix, CliError> {
    let rows = m.len();
    if rows == 0 {
        return Err(CliError::field(field, "matrix is empty"));
    }
    let cols = m[0].len();
    if let Some(i) = m.iter().position(|r| r.len() != cols) {
        return Err(CliError::field(field, format!("row {i} has {} entries, expected {cols}", m[i].len())));
    }
    if rows != cols {
        return Err(CliError::field(field, format!("matrix is {rows}x{cols}, expected square")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| c(m[i][j][0], m[i][j][1])))
}

pub fn from_cmatrix(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Builds and validates the dynamical parameter of a model source.
pub fn build_model(spec: &ModelSpec, field: &str) -> Result<DynamicalParams, CliError> {
    let core = |e| CliError::core("lindblad", e, json!({ "field": field }));
    match (&spec.preset, &spec.h, &spec.l) {
        (Some(p), None, None) => match p {
            Preset::TwoLevel {
                alpha,
                delta,
                omega,
                theta,
                v,
            } => {
                let tl = markovgeom::models::TwoLevelParams::new(*alpha, *delta, *omega, *theta)
                    .with_aux(*v);
                markovgeom::models::two_level(&tl)
                    .map_err(|e| CliError::core("models", e, json!({ "field": field })))
            }
            Preset::Random {
                dim,
                channels,
                seed,
            } => {
                if !(1..=8).contains(dim) || *channels == 0 {
                    return Err(CliError::field(
                        &format!("{field}.preset"),
                        "random preset needs 1 <= dim <= 8 and channels >= 1",
                    ));
                }
                use rand::SeedableRng;
                let mut rng = rand::rngs::StdRng::seed_from_u64(*seed);
                Ok(markovgeom::random::ergodic_point(&mut rng, *dim, *channels)
                    .params()
                    .clone())
            }
        },
        (None, Some(h), Some(l)) => {
            let h = to_cmatrix(h, &format!("{field}.h"))?;
            let l = l
                .iter()
                .enumerate()
                .map(|(i, m)| to_cmatrix(m, &format!("{field}.l[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            DynamicalParams::new(h, l).map_err(|e| {
                let sub = match e {
                    markovgeom::Error::NotHermitian { .. } => format!("{field}.h"),
                    _ => field.to_string(),
                };
                let mut err = core(e);
                err.context["field"] = json!(sub);
                err.kind = crate::error::ErrorKind::Parse;
                err
            })
        }
        _ => Err(CliError::field(
            field,
            "give exactly one model source: preset, or both h and l",
        )),
    }
}

pub fn build_gauge(g: &GaugeSpec, dim: usize) -> Result<GaugeElement, CliError> {
    let w = to_cmatrix(&g.w, "gauge.w")?;
    if w.nrows() != dim {
        return Err(CliError::field("gauge.w", format!("expected a {dim}x{dim} unitary")));
    }
    GaugeElement::new(w, g.a).map_err(|e| {
        let mut err = CliError::core("geometry", e, json!({ "field": "gauge.w" }));
        err.kind = crate::error::ErrorKind::Parse;
        err
    })
}

/// Labels and vectors of a tangent set at `base`.
pub fn build_tangents(
    spec: &TangentsSpec,
    model: &ModelSpec,
    base: &DynamicalParams,
) -> Result<Vec<(String, TangentVector)>, CliError> {
    let two_level = match &model.preset {
        Some(Preset::TwoLevel {
            alpha,
            delta,
            omega,
            theta,
            v,
        }) if *v == [0.0; 3] => Some(markovgeom::models::TwoLevelParams::new(
            *alpha, *delta, *omega, *theta,
        )),
        _ => None,
    };
    let labelled = |names: [&str; 4], ts: [TangentVector; 4]| {
        names
            .iter()
            .map(|s| s.to_string())
            .zip(ts)
            .collect::<Vec<_>>()
    };
    match spec {
        TangentsSpec::Named(name) => match name.as_str() {
            "physical" | "vertical" | "auxiliary" => {
                let p = two_level.ok_or_else(|| {
                    CliError::field(
                        "tangents",
                        format!("tangent set '{name}' needs the two_level preset with v = 0"),
                    )
                })?;
                let t = markovgeom::models::two_level_tangents(&p);
                Ok(match name.as_str() {
                    "physical" => labelled(["delta", "omega", "alpha", "theta"], t.physical),
                    "vertical" => labelled(["x", "y", "z", "phase"], t.vertical),
                    _ => labelled(["v0", "v1", "v2", "q1"], t.auxiliary),
                })
            }
            "gauge" => {
                let point = markovgeom::ErgodicPoint::new(base.clone())
                    .map_err(|e| CliError::core("lindblad", e, json!({ "field": "model" })))?;
                let basis = markovgeom::geometry::vertical_basis(&point);
                let n = basis.len();
                Ok(basis
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let label = if i + 1 == n {
                            "phase".to_string()
                        } else {
                            format!("gell_mann_{i}")
                        };
                        (label, t)
                    })
                    .collect())
            }
            "one_param" => Ok(markovgeom::models::one_param_presets(base)
                .into_iter()
                .map(|m| (m.kind.name().to_string(), m.tangent()))
                .collect()),
            other => Err(CliError::field(
                "tangents",
                format!("unknown tangent set '{other}' (expected one of {TANGENT_SETS:?})"),
            )),
        },
        TangentsSpec::Explicit(list) => {
            if list.is_empty() {
                return Err(CliError::field("tangents", "tangent list is empty"));
            }
            list.iter()
                .enumerate()
                .map(|(i, t)| {
                    let field = format!("tangents[{i}]");
                    let dh = to_cmatrix(&t.dh, &format!("{field}.dh"))?;
                    let dl = t
                        .dl
                        .iter()
                        .enumerate()
                        .map(|(j, m)| to_cmatrix(m, &format!("{field}.dl[{j}]")))
                        .collect::<Result<Vec<_>, _>>()?;
                    if dh.nrows() != base.dim() || dl.len() != base.channels() {
                        return Err(CliError::field(
                            &field,
                            format!(
                                "tangent shape does not match the model (dim {}, {} channels)",
                                base.dim(),
                                base.channels()
                            ),
                        ));
                    }
                    let tv = TangentVector::new(dh, dl).map_err(|e| {
                        let mut err = CliError::core("geometry", e, json!({ "field": field }));
                        err.kind = crate::error::ErrorKind::Parse;
                        err
                    })?;
                    Ok((format!("t{i}"), tv))
                })
                .collect()
        }
    }
}

impl fmt::Display for JobConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serde_json::to_string(self).map_err(|_| fmt::Error)?)
    }
}
