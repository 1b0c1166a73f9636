//! Experiment configuration: one JSON file per run.

use serde::{Deserialize, Serialize};
use udwq_core::field::{SmearingSpec, SpatialProfile, TemporalKind};
use udwq_core::Error as CoreError;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    pub alice: AliceConfig,
    pub bob: BobConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    #[serde(default)]
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKindConfig {
    Tensor,
    Radial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub kind: GridKindConfig,
    pub cutoff: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Gaussian { center: Vec<f64>, width: f64 },
    Bump { center: Vec<f64>, radius: f64 },
}

impl ProfileConfig {
    pub fn to_profile(&self) -> SpatialProfile {
        match self {
            ProfileConfig::Gaussian { center, width } => SpatialProfile::gaussian(center.clone(), *width),
            ProfileConfig::Bump { center, radius } => SpatialProfile::bump(center.clone(), *radius),
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            ProfileConfig::Gaussian { center, .. } | ProfileConfig::Bump { center, .. } => center,
        }
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        let shift = |c: &[f64]| c.iter().zip(offset).map(|(a, b)| a + b).collect();
        match self {
            ProfileConfig::Gaussian { center, width } => ProfileConfig::Gaussian { center: shift(center), width: *width },
            ProfileConfig::Bump { center, radius } => ProfileConfig::Bump { center: shift(center), radius: *radius },
        }
    }

    /// Radius of the ball treated as the support (6σ for Gaussians).
    pub fn support_radius(&self) -> f64 {
        self.to_profile().extent()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalConfig {
    Delta,
    DeltaPrime,
}

impl TemporalConfig {
    pub fn at(self, t: f64) -> TemporalKind {
        match self {
            TemporalConfig::Delta => TemporalKind::Delta(t),
            TemporalConfig::DeltaPrime => TemporalKind::DeltaPrime(t),
        }
    }
}

fn delta() -> TemporalConfig {
    TemporalConfig::Delta
}

fn delta_prime() -> TemporalConfig {
    TemporalConfig::DeltaPrime
}

fn default_threshold() -> f64 {
    udwq_core::protocol::DEFAULT_MARGIN_THRESHOLD
}

/// Alice's two smearings. Couplings are λ₁ = cλ₂ on f₁ and λ₂ on f₂; λ₂ is
/// given directly or through λ₂²w₂, and c is given or solved from the
/// fine-tuning condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliceConfig {
    pub profile: ProfileConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_f2: Option<ProfileConfig>,
    #[serde(default)]
    pub time: f64,
    #[serde(default = "delta")]
    pub f1: TemporalConfig,
    #[serde(default = "delta_prime")]
    pub f2: TemporalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2_sq_w2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<u64>,
    #[serde(default = "default_threshold")]
    pub margin_threshold: f64,
}

impl AliceConfig {
    /// Unit-coupling specs of f₁ and f₂.
    pub fn unit_specs(&self) -> [SmearingSpec; 2] {
        let p2 = self.profile_f2.as_ref().unwrap_or(&self.profile);
        [
            SmearingSpec::new(1.0, self.f1.at(self.time), self.profile.to_profile()),
            SmearingSpec::new(1.0, self.f2.at(self.time), p2.to_profile()),
        ]
    }

    pub fn profiles(&self) -> [&ProfileConfig; 2] {
        [&self.profile, self.profile_f2.as_ref().unwrap_or(&self.profile)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmearingConfig {
    pub profile: ProfileConfig,
    pub temporal: TemporalConfig,
    pub time: f64,
    pub coupling: f64,
}

impl SmearingConfig {
    pub fn to_spec(&self) -> SmearingSpec {
        SmearingSpec::new(self.coupling, self.temporal.at(self.time), self.profile.to_profile())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BobConfig {
    /// g = f
    Ideal,
    /// decoding smearings solved at `time`
    Solve { time: f64 },
    Explicit { g1: SmearingConfig, g2: SmearingConfig },
    /// copies of Alice's smearings moved by `offset` and to `time`
    #[serde(alias = "spacelike_offset")]
    Offset {
        offset: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Lambda2SqW2,
    Lambda2,
    C,
    Branch,
    BobTime,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Lambda2SqW2 => "lambda2_sq_w2",
            SweepParameter::Lambda2 => "lambda2",
            SweepParameter::C => "c",
            SweepParameter::Branch => "branch",
            SweepParameter::BobTime => "bob_time",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn default_models() -> usize {
    20
}

fn default_truncation() -> usize {
    udwq_core::fock::DEFAULT_TRUNCATION
}

fn default_max_modes() -> usize {
    2
}

fn default_max_amplitude() -> f64 {
    2.0
}

fn default_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_models")]
    pub models: usize,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_max_modes")]
    pub max_modes: usize,
    #[serde(default = "default_max_amplitude")]
    pub max_amplitude: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            models: default_models(),
            truncation: default_truncation(),
            max_modes: default_max_modes(),
            max_amplitude: default_max_amplitude(),
            tolerance: default_tolerance(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

/// Raw config text kept for anchoring validation errors to lines.
#[derive(Debug, Clone)]
pub struct Source {
    text: String,
}

impl Source {
    pub fn new(text: String) -> Self {
        Self { text }
    }

    /// 1-based line of the first `"key"` in the file.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        let needle = format!("\"{key}\"");
        self.text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config { line: self.line_of(key), message: message.into() }
    }

    /// Core errors caused by bad input become config errors anchored at
    /// `key`; the rest are numerical contract failures.
    pub fn core(&self, key: &str, err: CoreError) -> CliError {
        core_error(err, self.line_of(key))
    }
}

pub fn core_error(err: CoreError, line: Option<usize>) -> CliError {
    match err {
        CoreError::InvalidParameter(_)
        | CoreError::MasslessOneDim
        | CoreError::GridMismatch(_)
        | CoreError::OutOfRange { .. }
        | CoreError::Unsupported(_) => CliError::Config { line, message: err.to_string() },
        other => CliError::contract(contract_name(&other), other.to_string()),
    }
}

fn contract_name(err: &CoreError) -> &'static str {
    match err {
        CoreError::InvalidTable(_) => "bilinear table validity",
        CoreError::InvalidState(_) => "density matrix validity",
        CoreError::NotPositive { .. } => "output positivity",
        CoreError::FineTuningViolated { .. } => "fine-tuning",
        CoreError::CausalOverlap { .. } => "causal disconnection",
        CoreError::NoSolution => "fine-tuning solvability",
        CoreError::SingularNode { .. } => "decoding solve",
        CoreError::TruncationTooSmall { .. } => "Fock truncation",
        CoreError::MemoryBound { .. } => "memory bound",
        _ => "input validation",
    }
}

pub fn parse(text: &str) -> CliResult<(ExperimentConfig, Source)> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config {
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    let src = Source::new(text.to_string());
    validate(&cfg, &src)?;
    Ok((cfg, src))
}

fn check_profile(p: &ProfileConfig, dim: usize, src: &Source) -> CliResult<()> {
    if p.center().len() != dim {
        return Err(src.error("center", format!("profile centre has {} components, model has {dim}", p.center().len())));
    }
    p.to_profile().validate(dim).map_err(|e| src.core("kind", e))
}

pub fn validate(cfg: &ExperimentConfig, src: &Source) -> CliResult<()> {
    let dim = cfg.model.dimension;
    udwq_core::field::SpacetimeModel::minkowski(dim, cfg.model.mass).map_err(|e| src.core("model", e))?;
    let a = &cfg.alice;
    for p in a.profiles() {
        check_profile(p, dim, src)?;
    }
    match (a.lambda2, a.lambda2_sq_w2) {
        (Some(l), None) if l > 0.0 && l.is_finite() => {}
        (None, Some(x)) if x > 0.0 && x.is_finite() => {}
        (Some(_), Some(_)) => return Err(src.error("alice", "give exactly one of lambda2 and lambda2_sq_w2")),
        (None, None) => return Err(src.error("alice", "one of lambda2 and lambda2_sq_w2 is required")),
        _ => return Err(src.error("alice", "coupling strengths must be positive and finite")),
    }
    if let Some(c) = a.c {
        if !(c > 0.0 && c.is_finite()) {
            return Err(src.error("c", format!("c must be positive, got {c}")));
        }
        if a.branch.is_some() {
            return Err(src.error("branch", "branch only applies when c is solved"));
        }
    }
    if !(a.margin_threshold >= 0.0) {
        return Err(src.error("margin_threshold", "margin threshold must be >= 0"));
    }
    if let Some(g) = &cfg.grid {
        if g.kind == GridKindConfig::Radial && dim != 3 {
            return Err(src.error("grid", "radial grids need three spatial dimensions"));
        }
    }
    match &cfg.bob {
        BobConfig::Ideal => {}
        BobConfig::Solve { time } if !time.is_finite() => return Err(src.error("bob", "time must be finite")),
        BobConfig::Solve { .. } => {}
        BobConfig::Explicit { g1, g2 } => {
            for g in [g1, g2] {
                check_profile(&g.profile, dim, src)?;
                if !(g.coupling.is_finite() && g.time.is_finite()) {
                    return Err(src.error("coupling", "Bob's couplings and times must be finite"));
                }
            }
        }
        BobConfig::Offset { offset, time } => {
            if offset.len() != dim {
                return Err(src.error("offset", format!("offset has {} components, model has {dim}", offset.len())));
            }
            if time.is_some_and(|t| !t.is_finite()) {
                return Err(src.error("bob", "time must be finite"));
            }
        }
    }
    if let Some(s) = &cfg.sweep {
        if s.values.is_empty() {
            return Err(src.error("values", "sweep needs at least one value"));
        }
        if s.values.iter().any(|v| !v.is_finite()) {
            return Err(src.error("values", "sweep values must be finite"));
        }
        match s.parameter {
            SweepParameter::Branch => {
                if a.c.is_some() {
                    return Err(src.error("parameter", "branch sweeps need c to be solved"));
                }
                if s.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                    return Err(src.error("values", "branch values must be non-negative integers"));
                }
            }
            SweepParameter::BobTime => {
                if !matches!(cfg.bob, BobConfig::Solve { .. } | BobConfig::Offset { .. }) {
                    return Err(src.error("parameter", "bob_time sweeps need bob mode solve or offset"));
                }
            }
            SweepParameter::Lambda2SqW2 | SweepParameter::Lambda2 | SweepParameter::C => {
                if s.values.iter().any(|v| *v <= 0.0) {
                    return Err(src.error("values", "coupling sweep values must be positive"));
                }
            }
        }
    }
    if let Some(o) = &cfg.oracle {
        if o.models == 0 || o.max_modes == 0 || !(o.max_amplitude >= 0.0) || !(o.tolerance > 0.0) {
            return Err(src.error("oracle", "oracle settings must be positive"));
        }
    }
    Ok(())
}

/// Copy of `cfg` with one sweep parameter set.
pub fn with_parameter(cfg: &ExperimentConfig, p: SweepParameter, v: f64) -> ExperimentConfig {
    let mut out = cfg.clone();
    out.sweep = None;
    match p {
        SweepParameter::Lambda2SqW2 => {
            out.alice.lambda2 = None;
            out.alice.lambda2_sq_w2 = Some(v);
        }
        SweepParameter::Lambda2 => {
            out.alice.lambda2 = Some(v);
            out.alice.lambda2_sq_w2 = None;
        }
        SweepParameter::C => {
            out.alice.c = Some(v);
            out.alice.branch = None;
        }
        SweepParameter::Branch => out.alice.branch = Some(v as u64),
        SweepParameter::BobTime => match &mut out.bob {
            BobConfig::Solve { time } => *time = v,
            BobConfig::Offset { time, .. } => *time = Some(v),
            _ => {}
        },
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "model": {"dimension": 3, "mass": 0.0},
  "alice": {
    "profile": {"kind": "gaussian", "center": [0, 0, 0], "width": 1.0},
    "lambda2_sq_w2": 0.01
  },
  "bob": {"mode": "ideal"}
}"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let (cfg, _) = parse(BASE).unwrap();
        assert_eq!(cfg.alice.f1, TemporalConfig::Delta);
        assert_eq!(cfg.alice.f2, TemporalConfig::DeltaPrime);
        assert_eq!(cfg.alice.margin_threshold, 100.0);
        let echo = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(parse(&echo).unwrap().0, cfg);
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let bad = BASE.replace("\"mass\": 0.0}", "\"mass\": }");
        match parse(&bad) {
            Err(CliError::Config { line: Some(2), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_sweep_is_rejected_at_its_line() {
        let text = BASE.replace(
            "\"bob\": {\"mode\": \"ideal\"}",
            "\"bob\": {\"mode\": \"ideal\"},\n  \"sweep\": {\"parameter\": \"lambda2\",\n    \"values\": []}",
        );
        match parse(&text) {
            Err(CliError::Config { line: Some(9), message }) => assert!(message.contains("at least one")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_sweep_parameter_is_rejected() {
        let text = BASE.replace(
            "\"bob\": {\"mode\": \"ideal\"}",
            "\"bob\": {\"mode\": \"ideal\"},\n  \"sweep\": {\"parameter\": \"nope\", \"values\": [1]}",
        );
        assert!(matches!(parse(&text), Err(CliError::Config { line: Some(8), .. })));
    }

    #[test]
    fn exactly_one_coupling_source() {
        let both = BASE.replace("\"lambda2_sq_w2\": 0.01", "\"lambda2_sq_w2\": 0.01, \"lambda2\": 1.0");
        assert!(matches!(parse(&both), Err(CliError::Config { line: Some(3), .. })));
        let neither = BASE.replace(",\n    \"lambda2_sq_w2\": 0.01", "");
        assert!(parse(&neither).is_err());
    }

    #[test]
    fn massless_one_dimension_is_a_config_error() {
        let text = BASE.replace("\"dimension\": 3", "\"dimension\": 1").replace("[0, 0, 0]", "[0]");
        assert!(matches!(parse(&text), Err(CliError::Config { line: Some(2), .. })));
    }

    #[test]
    fn sweep_override_replaces_the_coupling_source() {
        let (cfg, _) = parse(BASE).unwrap();
        let v = with_parameter(&cfg, SweepParameter::Lambda2, 0.3);
        assert_eq!(v.alice.lambda2, Some(0.3));
        assert_eq!(v.alice.lambda2_sq_w2, None);
    }
}
