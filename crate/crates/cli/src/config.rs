//! Run configuration: JSON in, validated domain types out.
//!
//! Structural checks run inside deserialization, so serde_json attaches a
//! line and column to every message. Complex entries may be written as a
//! number, a rational string (`"p/q"`) or a `[re, im]` pair of either.

use std::f64::consts::PI;
use std::path::Path;

use holocurve::curve::{CurveSpec, InnerMap};
use holocurve::projective::{DivisorSystem, GaussianRational, LinearForm};
use holocurve::{Measure, C64};
use num_complex::Complex;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Analysis {
    Admissible,
    Analyze,
    Remplissage,
    VerifyExample,
    LemmaDemo,
    Counterexample,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Admissible => "admissible",
            Analysis::Analyze => "analyze",
            Analysis::Remplissage => "remplissage",
            Analysis::VerifyExample => "verify_example",
            Analysis::LemmaDemo => "lemma_demo",
            Analysis::Counterexample => "counterexample",
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPart {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(RawPart),
    Pair([RawPart; 2]),
}

/// A complex entry, kept exactly: numbers are converted through their
/// binary value, strings through rational parsing.
#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawEntry")]
pub struct Entry {
    pub exact: GaussianRational,
    pub value: C64,
}

fn part(p: RawPart) -> Result<GaussianRational, String> {
    match p {
        RawPart::Number(x) => GaussianRational::from_f64(x, 0.0).map_err(|e| e.to_string()),
        RawPart::Text(s) => {
            let mut g = GaussianRational::from_integer(0);
            g.re = GaussianRational::parse_real(&s).map_err(|e| e.to_string())?;
            Ok(g)
        }
    }
}

impl TryFrom<RawEntry> for Entry {
    type Error = String;

    fn try_from(raw: RawEntry) -> Result<Self, String> {
        let exact = match raw {
            RawEntry::Real(p) => part(p)?,
            RawEntry::Pair([re, im]) => {
                let (re, im) = (part(re)?, part(im)?);
                GaussianRational::new(re.re, im.re)
            }
        };
        let value = exact.to_complex();
        Ok(Self { exact, value })
    }
}

fn values(entries: Vec<Entry>) -> Vec<C64> {
    entries.into_iter().map(|e| e.value).collect()
}

// Parse-time only; the exact entries make variants uneven in size.
#[allow(clippy::large_enum_variant)]
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawInner {
    Polynomial {
        coefficients: Vec<Entry>,
    },
    Exponential {
        slope: Entry,
        #[serde(default)]
        offset: Option<Entry>,
    },
}

#[allow(clippy::large_enum_variant)]
#[derive(Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawCurve {
    Exponential {
        slopes: Vec<Entry>,
        #[serde(default)]
        offsets: Option<Vec<Entry>>,
    },
    SineSymmetric {
        order: usize,
    },
    Polynomial {
        coefficients: Vec<Vec<Entry>>,
    },
    Composed {
        inner: RawInner,
        outer: Box<RawCurve>,
    },
}

fn build_curve(raw: RawCurve) -> CurveSpec {
    match raw {
        RawCurve::Exponential { slopes, offsets } => {
            let slopes = values(slopes);
            let offsets = offsets.map(values).unwrap_or_else(|| vec![Complex::new(0.0, 0.0); slopes.len()]);
            CurveSpec::Exponential { slopes, offsets }
        }
        RawCurve::SineSymmetric { order } => CurveSpec::SineSymmetric { order },
        RawCurve::Polynomial { coefficients } => {
            CurveSpec::Polynomial { coefficients: coefficients.into_iter().map(values).collect() }
        }
        RawCurve::Composed { inner, outer } => {
            let inner = match inner {
                RawInner::Polynomial { coefficients } => InnerMap::Polynomial { coefficients: values(coefficients) },
                RawInner::Exponential { slope, offset } => InnerMap::Exponential {
                    slope: slope.value,
                    offset: offset.map_or(Complex::new(0.0, 0.0), |e| e.value),
                },
            };
            CurveSpec::Composed { inner, outer: Box::new(build_curve(*outer)) }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawCurve")]
pub struct CurveConfig(pub CurveSpec);

impl TryFrom<RawCurve> for CurveConfig {
    type Error = String;

    fn try_from(raw: RawCurve) -> Result<Self, String> {
        let spec = build_curve(raw);
        spec.validate().map_err(|e| format!("curve: {e}"))?;
        Ok(Self(spec))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    order: usize,
    forms: Vec<Vec<Entry>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct SystemConfig(pub DivisorSystem);

impl TryFrom<RawSystem> for SystemConfig {
    type Error = String;

    fn try_from(raw: RawSystem) -> Result<Self, String> {
        let forms = raw
            .forms
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                LinearForm::from_exact(row.into_iter().map(|e| e.exact).collect())
                    .map_err(|e| format!("system.forms[{i}]: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        DivisorSystem::new(forms, raw.order).map(Self).map_err(|e| format!("system: {e}"))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawNamedMeasure")]
pub struct NamedMeasure {
    pub name: String,
    pub measure: Measure,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNamedMeasure {
    name: String,
    measure: Value,
}

/// Rewrites complex entries and nested curves of a measure document into
/// the library's wire form, so measures accept the same spellings as the
/// top-level curve.
fn normalize_measure(v: &mut Value) -> Result<(), String> {
    let Value::Object(map) = v else { return Ok(()) };
    for key in ["point", "center", "scale"] {
        if let Some(x) = map.get_mut(key) {
            let e: Entry = serde_json::from_value(x.clone()).map_err(|e| format!("{key}: {e}"))?;
            *x = serde_json::json!([e.value.re, e.value.im]);
        }
    }
    if map.get("kind").and_then(Value::as_str) == Some("curve") {
        if let Some(c) = map.get_mut("curve") {
            let spec: CurveConfig = serde_json::from_value(c.clone()).map_err(|e| e.to_string())?;
            *c = serde_json::to_value(spec.0).map_err(|e| e.to_string())?;
        }
    }
    for key in ["atoms", "parts"] {
        if let Some(Value::Array(items)) = map.get_mut(key) {
            items.iter_mut().try_for_each(normalize_measure)?;
        }
    }
    if let Some(inner) = map.get_mut("inner") {
        normalize_measure(inner)?;
    }
    Ok(())
}

impl TryFrom<RawNamedMeasure> for NamedMeasure {
    type Error = String;

    fn try_from(raw: RawNamedMeasure) -> Result<Self, String> {
        let mut doc = raw.measure;
        normalize_measure(&mut doc).map_err(|e| format!("measure {:?}: {e}", raw.name))?;
        let measure: Measure = serde_json::from_value(doc).map_err(|e| format!("measure {:?}: {e}", raw.name))?;
        measure.validate().map_err(|e| format!("measure {:?}: {e}", raw.name))?;
        Ok(Self { name: raw.name, measure })
    }
}

/// Numeric knobs. Every field has a default; ranges are checked on load.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawNumeric {
    boundary_nodes: usize,
    quad_points: usize,
    radii: Vec<f64>,
    t: f64,
    m_range: [i32; 2],
    sample_budget: usize,
    deviation_radius: f64,
    deviation_grid: usize,
    grid_density: usize,
    refine_rounds: usize,
    hit_threshold: u32,
    cluster_tol: f64,
    remplissage_m_range: [i32; 2],
    sector_degrees: Vec<[f64; 2]>,
    sector_radii: Vec<f64>,
    expected_omitted: Option<Vec<Vec<usize>>>,
    schedule: Vec<f64>,
    symmetry_samples: usize,
    symmetry_radius: f64,
    disc_samples: usize,
    max_relative_radius: f64,
    julia_equivariance: bool,
}

impl Default for RawNumeric {
    fn default() -> Self {
        Self {
            boundary_nodes: 4096,
            quad_points: 16,
            radii: vec![1.0, 2.0, 5.0, 10.0, 20.0],
            t: 2.0,
            m_range: [0, 8],
            sample_budget: 20_000,
            deviation_radius: 30.0,
            deviation_grid: 41,
            grid_density: 200,
            refine_rounds: 2,
            hit_threshold: 1,
            cluster_tol: 0.15,
            remplissage_m_range: [2, 9],
            sector_degrees: vec![[0.0, 60.0], [45.0, 135.0]],
            sector_radii: vec![12.0, 16.0, 20.0, 24.0],
            expected_omitted: None,
            schedule: vec![16.0, 64.0, 256.0, 1024.0],
            symmetry_samples: 1000,
            symmetry_radius: 50.0,
            disc_samples: 200,
            max_relative_radius: 0.1,
            julia_equivariance: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(try_from = "RawNumeric")]
pub struct Numeric {
    pub boundary_nodes: usize,
    pub quad_points: usize,
    pub radii: Vec<f64>,
    pub t: f64,
    pub m_range: (i32, i32),
    pub sample_budget: usize,
    pub deviation_radius: f64,
    pub deviation_grid: usize,
    pub grid_density: usize,
    pub refine_rounds: usize,
    pub hit_threshold: u32,
    pub cluster_tol: f64,
    pub remplissage_m_range: (i32, i32),
    /// Sector bounds in radians.
    pub sectors: Vec<(f64, f64)>,
    pub sector_radii: Vec<f64>,
    pub expected_omitted: Option<Vec<Vec<usize>>>,
    pub schedule: Vec<f64>,
    pub symmetry_samples: usize,
    pub symmetry_radius: f64,
    pub disc_samples: usize,
    pub max_relative_radius: f64,
    /// Also rerun the remplissage search with cyclically shifted forms and
    /// compare directions (doubles the cost of `verify_example`).
    pub julia_equivariance: bool,
}

impl Default for Numeric {
    fn default() -> Self {
        Numeric::try_from(RawNumeric::default()).expect("defaults are valid")
    }
}

fn in_range<T: PartialOrd + std::fmt::Display + Copy>(name: &str, v: T, lo: T, hi: T) -> Result<(), String> {
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(format!("numeric.{name} = {v} outside [{lo}, {hi}]"))
    }
}

fn index_range(name: &str, r: [i32; 2]) -> Result<(i32, i32), String> {
    in_range(name, r[0], -60, 60)?;
    in_range(name, r[1], -60, 60)?;
    if r[1] < r[0] || r[1] - r[0] > 80 {
        return Err(format!("numeric.{name} = [{}, {}] must be ordered and span at most 80 indices", r[0], r[1]));
    }
    Ok((r[0], r[1]))
}

fn positive_list(name: &str, xs: &[f64], hi: f64) -> Result<(), String> {
    if xs.is_empty() {
        return Err(format!("numeric.{name} must not be empty"));
    }
    for &x in xs {
        if !(x > 0.0 && x <= hi) {
            return Err(format!("numeric.{name} entry {x} outside (0, {hi}]"));
        }
    }
    Ok(())
}

impl TryFrom<RawNumeric> for Numeric {
    type Error = String;

    fn try_from(raw: RawNumeric) -> Result<Self, String> {
        in_range("boundary_nodes", raw.boundary_nodes, 64, 1 << 22)?;
        in_range("quad_points", raw.quad_points, 2, 4096)?;
        positive_list("radii", &raw.radii, 1e4)?;
        if !(raw.t > 1.0 && raw.t <= 16.0) {
            return Err(format!("numeric.t = {} outside (1, 16]", raw.t));
        }
        let m_range = index_range("m_range", raw.m_range)?;
        in_range("sample_budget", raw.sample_budget, 16, 10_000_000)?;
        if !(raw.deviation_radius > 0.0 && raw.deviation_radius <= 1e4) {
            return Err(format!("numeric.deviation_radius = {} outside (0, 1e4]", raw.deviation_radius));
        }
        in_range("deviation_grid", raw.deviation_grid, 2, 1001)?;
        in_range("grid_density", raw.grid_density, 100, 1_000_000)?;
        in_range("refine_rounds", raw.refine_rounds, 0, 8)?;
        in_range("hit_threshold", raw.hit_threshold, 1, 10_000)?;
        if !(raw.cluster_tol > 0.0 && raw.cluster_tol < PI) {
            return Err(format!("numeric.cluster_tol = {} outside (0, π)", raw.cluster_tol));
        }
        let remplissage_m_range = index_range("remplissage_m_range", raw.remplissage_m_range)?;
        if raw.sector_degrees.is_empty() {
            return Err("numeric.sector_degrees must not be empty".into());
        }
        for s in &raw.sector_degrees {
            if !(s[0].is_finite() && s[1] > s[0] && s[1] - s[0] < 360.0) {
                return Err(format!("numeric.sector_degrees entry [{}, {}] is not a proper sector", s[0], s[1]));
            }
        }
        positive_list("sector_radii", &raw.sector_radii, 1e4)?;
        if let Some(expected) = &raw.expected_omitted {
            if expected.len() != raw.sector_degrees.len() {
                return Err(format!(
                    "numeric.expected_omitted has {} lists for {} sectors",
                    expected.len(),
                    raw.sector_degrees.len()
                ));
            }
        }
        positive_list("schedule", &raw.schedule, 1e8)?;
        if raw.schedule.len() < 2 || raw.schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err("numeric.schedule must be strictly increasing with at least two radii".into());
        }
        in_range("symmetry_samples", raw.symmetry_samples, 1, 1_000_000)?;
        if !(raw.symmetry_radius > 0.0 && raw.symmetry_radius <= 1e3) {
            return Err(format!("numeric.symmetry_radius = {} outside (0, 1000]", raw.symmetry_radius));
        }
        in_range("disc_samples", raw.disc_samples, 1, 1_000_000)?;
        if !(raw.max_relative_radius > 0.0 && raw.max_relative_radius < 1.0) {
            return Err(format!("numeric.max_relative_radius = {} outside (0, 1)", raw.max_relative_radius));
        }
        let sectors = raw.sector_degrees.iter().map(|s| (s[0].to_radians(), s[1].to_radians())).collect();
        Ok(Self {
            boundary_nodes: raw.boundary_nodes,
            quad_points: raw.quad_points,
            radii: raw.radii,
            t: raw.t,
            m_range,
            sample_budget: raw.sample_budget,
            deviation_radius: raw.deviation_radius,
            deviation_grid: raw.deviation_grid,
            grid_density: raw.grid_density,
            refine_rounds: raw.refine_rounds,
            hit_threshold: raw.hit_threshold,
            cluster_tol: raw.cluster_tol,
            remplissage_m_range,
            sectors,
            sector_radii: raw.sector_radii,
            expected_omitted: raw.expected_omitted,
            schedule: raw.schedule,
            symmetry_samples: raw.symmetry_samples,
            symmetry_radius: raw.symmetry_radius,
            disc_samples: raw.disc_samples,
            max_relative_radius: raw.max_relative_radius,
            julia_equivariance: raw.julia_equivariance,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    analysis: Option<Analysis>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    curve: Option<CurveConfig>,
    #[serde(default)]
    system: Option<SystemConfig>,
    #[serde(default)]
    numeric: Numeric,
    #[serde(default)]
    measures: Option<Vec<NamedMeasure>>,
    #[serde(default)]
    output_dir: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub analysis: Analysis,
    pub seed: u64,
    pub curve: Option<CurveSpec>,
    pub system: Option<DivisorSystem>,
    pub numeric: Numeric,
    pub measures: Option<Vec<NamedMeasure>>,
    pub output_dir: Option<String>,
    /// The parsed document with the effective seed and analysis filled in;
    /// embedded in every report.
    pub echo: Value,
}

fn invalid(source: &str, line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{source}:{line}: {msg}"))
}

/// First line mentioning `"key"`, for checks that span several fields.
fn line_of_key(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

/// serde_json positions a semantic error where the parser stopped, which may
/// be past the offending value; our own messages name their key, so anchor
/// those on the key instead.
fn located(text: &str, source: &str, e: &serde_json::Error) -> CliError {
    let full = e.to_string();
    let msg = full.rfind(" at line ").map_or(full.as_str(), |i| &full[..i]);
    let key = if msg.starts_with("system.forms[") {
        Some("forms")
    } else if let Some(rest) = msg.strip_prefix("numeric.") {
        rest.split([' ', '.']).next()
    } else if msg.starts_with("system:") {
        Some("system")
    } else if msg.starts_with("curve:") {
        Some("curve")
    } else if msg.starts_with("measure \"") {
        msg.split('"').nth(1)
    } else {
        None
    };
    match key {
        Some(k) if e.is_data() && text.contains(&format!("\"{k}\"")) => invalid(source, line_of_key(text, k), msg),
        _ => CliError::Config(format!("{source}:{}:{}: {msg}", e.line(), e.column())),
    }
}

impl RunConfig {
    pub fn load(path: &Path, analysis: Analysis, seed: Option<u64>) -> Result<Self, CliError> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{source}: {e}")))?;
        Self::parse(&text, &source, analysis, seed)
    }

    pub fn parse(text: &str, source: &str, analysis: Analysis, seed: Option<u64>) -> Result<Self, CliError> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| located(text, source, &e))?;
        let mut echo: Value = serde_json::from_str(text).expect("already parsed");

        if let Some(declared) = raw.analysis {
            if declared != analysis {
                return Err(invalid(
                    source,
                    line_of_key(text, "analysis"),
                    format!("config declares analysis `{}` but `{}` was requested", declared.name(), analysis.name()),
                ));
            }
        }
        let needs_curve = matches!(analysis, Analysis::Analyze | Analysis::Remplissage | Analysis::VerifyExample);
        let needs_system = needs_curve || analysis == Analysis::Admissible;
        if needs_curve && raw.curve.is_none() {
            return Err(invalid(source, 1, format!("`curve` is required for `{}`", analysis.name())));
        }
        if needs_system && raw.system.is_none() {
            return Err(invalid(source, 1, format!("`system` is required for `{}`", analysis.name())));
        }
        let curve = raw.curve.map(|c| c.0);
        let system = raw.system.map(|s| s.0);
        if let (Some(c), Some(s)) = (&curve, &system) {
            use holocurve::curve::Curve;
            if c.components() != s.ambient_dim() + 1 {
                return Err(invalid(
                    source,
                    line_of_key(text, "system"),
                    format!("curve has {} components but the forms have {}", c.components(), s.ambient_dim() + 1),
                ));
            }
        }
        if analysis == Analysis::VerifyExample && !matches!(curve, Some(CurveSpec::SineSymmetric { .. })) {
            return Err(invalid(source, line_of_key(text, "curve"), "verify_example needs a sine_symmetric curve"));
        }

        let seed = seed.unwrap_or(raw.seed);
        if let Value::Object(map) = &mut echo {
            map.insert("seed".into(), Value::from(seed));
            map.insert("analysis".into(), Value::from(analysis.name()));
            map.remove("output_dir");
        } else {
            return Err(invalid(source, 1, "top level must be an object"));
        }
        Ok(Self {
            analysis,
            seed,
            curve,
            system,
            numeric: raw.numeric,
            measures: raw.measures,
            output_dir: raw.output_dir,
            echo,
        })
    }
}
