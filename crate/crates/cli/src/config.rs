//! Experiment configuration: one TOML file describing the generator
//! sequence and the knobs of every subcommand.

use std::fmt;
use std::path::{Path, PathBuf};

use blaschke::composition::DEFAULT_DEGREE_CAP;
use blaschke::counterexample::{build_sequence, RadiiSpec};
use blaschke::families::{constant_generators, geometric_generators, random_generators};
use blaschke::verify::VerifyConfig;
use blaschke::{BlaschkeProduct, Complex64, CompositionSequence};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config:\n{0}")]
    Invalid(Violations),
}

/// Every validation failure found in a config, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violations(pub Vec<String>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexValue> for Complex64 {
    fn from(c: ComplexValue) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        ComplexValue { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default = "one_u32")]
    pub origin_multiplicity: u32,
    #[serde(default = "unit")]
    pub rotation: ComplexValue,
    #[serde(default)]
    pub zeros: Vec<ComplexValue>,
}

/// The generator sequence `b₁, b₂, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SequenceSpec {
    Explicit {
        generators: Vec<GeneratorSpec>,
    },
    /// `1 − |aₖ| = ratioᵏ`, `arg aₖ = k·angle_step`.
    Geometric {
        count: usize,
        #[serde(default = "half")]
        ratio: f64,
        #[serde(default = "one_f64")]
        angle_step: f64,
    },
    Constant {
        count: usize,
        radius: f64,
        #[serde(default = "one_f64")]
        angle_step: f64,
    },
    /// Radii `1 − rₙ = 1/((n + offset)·log(n + offset)^exponent)` with
    /// zero arguments given by the running Frostman sums.
    Counterexample {
        count: usize,
        #[serde(default = "two")]
        offset: f64,
        #[serde(default = "two")]
        exponent: f64,
    },
    /// Same construction with explicit radii.
    CounterexampleRadii {
        radii: Vec<f64>,
    },
    /// Random generators with a simple zero at the origin; falls back to
    /// the top-level seed.
    Random {
        count: usize,
        #[serde(default = "two_usize")]
        degree: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

impl SequenceSpec {
    pub fn len(&self) -> usize {
        match self {
            SequenceSpec::Explicit { generators } => generators.len(),
            SequenceSpec::CounterexampleRadii { radii } => radii.len(),
            SequenceSpec::Geometric { count, .. }
            | SequenceSpec::Constant { count, .. }
            | SequenceSpec::Counterexample { count, .. }
            | SequenceSpec::Random { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn is_stochastic(&self) -> bool {
        matches!(self, SequenceSpec::Random { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComposeOptions {
    /// Composites to materialize; defaults to the whole sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    pub tail_threshold: f64,
    /// `[n, m]` pairs for `sup|B_{n+m} − Bₙ|`.
    pub gauge_pairs: Vec<[usize; 2]>,
    pub gauge_radius: f64,
    pub grid_radii: usize,
    pub grid_angles: usize,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        DiagnoseOptions {
            terms: None,
            tail_threshold: blaschke::diagnostics::DEFAULT_TAIL_THRESHOLD,
            gauge_pairs: Vec::new(),
            gauge_radius: 0.5,
            grid_radii: 64,
            grid_angles: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryOptions {
    /// Starting angles of the recorded orbits, radians.
    pub orbit_angles: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit_steps: Option<usize>,
    /// `[n, m]` pairs for `‖ψ_{n+m} − ψₙ‖₁`.
    pub l1_pairs: Vec<[usize; 2]>,
    pub nodes: usize,
    /// Steps `n` at which the pushforward under `ψₙ` is tested.
    pub ks_steps: Vec<usize>,
    pub ks_samples: usize,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions {
            orbit_angles: Vec::new(),
            orbit_steps: None,
            l1_pairs: Vec::new(),
            nodes: 4096,
            ks_steps: Vec::new(),
            ks_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleOptions {
    /// Report length; defaults to the whole sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    pub angles: usize,
    pub window: usize,
    pub gauge_span: usize,
    pub gauge_radius: f64,
    pub gauge_points: usize,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        CounterexampleOptions {
            terms: None,
            angles: 100,
            window: 1000,
            gauge_span: 1,
            gauge_radius: 0.5,
            gauge_points: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub ks_seed: u64,
    pub ks_samples: usize,
    pub counterexample_terms: usize,
    pub counterexample_angles: usize,
    pub window: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let v = VerifyConfig::default();
        VerifyOptions {
            ks_seed: v.ks_seed,
            ks_samples: v.ks_samples,
            counterexample_terms: v.counterexample_terms,
            counterexample_angles: v.counterexample_angles,
            window: v.window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub directory: PathBuf,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            directory: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_cap")]
    pub degree_cap: u64,
    pub sequence: SequenceSpec,
    #[serde(default)]
    pub compose: ComposeOptions,
    #[serde(default)]
    pub diagnose: DiagnoseOptions,
    #[serde(default)]
    pub boundary: BoundaryOptions,
    #[serde(default)]
    pub counterexample: CounterexampleOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default)]
    pub output: OutputOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: Some(42),
            degree_cap: DEFAULT_DEGREE_CAP,
            sequence: SequenceSpec::Random {
                count: 8,
                degree: 2,
                seed: None,
            },
            compose: ComposeOptions::default(),
            diagnose: DiagnoseOptions::default(),
            boundary: BoundaryOptions::default(),
            counterexample: CounterexampleOptions::default(),
            verify: VerifyOptions::default(),
            output: OutputOptions::default(),
        }
    }
}

fn one_u32() -> u32 {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn two_usize() -> usize {
    2
}
fn half() -> f64 {
    0.5
}
fn unit() -> ComplexValue {
    ComplexValue { re: 1.0, im: 0.0 }
}
fn default_cap() -> u64 {
    DEFAULT_DEGREE_CAP
}

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// A built sequence together with the unreduced zero arguments when the
/// family defines them.
#[derive(Debug, Clone)]
pub struct BuiltSequence {
    pub sequence: CompositionSequence,
    pub zero_angles: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// Parse and validate.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg = Self::parse(text)?;
        cfg.validate().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    /// Parse without validating, so command-line overrides can be applied
    /// first.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Seed used by the random family, if any.
    pub fn sequence_seed(&self) -> Option<u64> {
        match &self.sequence {
            SequenceSpec::Random { seed, .. } => seed.or(self.seed),
            _ => self.seed,
        }
    }

    /// Check every invariant and report all violations at once.
    pub fn validate(&self) -> Result<(), Violations> {
        let mut v = Vec::new();
        let len = self.sequence.len();
        if len == 0 {
            v.push("sequence: no generators".to_string());
        }
        match &self.sequence {
            SequenceSpec::Explicit { generators } => {
                for (i, g) in generators.iter().enumerate() {
                    let k = i + 1;
                    if g.origin_multiplicity == 0 {
                        v.push(format!("generator {k}: does not fix the origin (origin_multiplicity = 0)"));
                    }
                    let rot = Complex64::from(g.rotation).norm();
                    if (rot - 1.0).abs() > 1e-9 {
                        v.push(format!("generator {k}: rotation has modulus {rot}, expected 1"));
                    }
                    for (j, z) in g.zeros.iter().enumerate() {
                        let r = Complex64::from(*z).norm();
                        if !in_unit_interval(r) {
                            v.push(format!(
                                "generator {k}, zero {}: modulus {r} is not in (0, 1)",
                                j + 1
                            ));
                        }
                    }
                }
            }
            SequenceSpec::Geometric { ratio, .. } => {
                if !in_unit_interval(*ratio) {
                    v.push(format!("sequence: geometric ratio {ratio} is not in (0, 1)"));
                }
            }
            SequenceSpec::Constant { radius, .. } => {
                if !in_unit_interval(*radius) {
                    v.push(format!("sequence: constant radius {radius} is not in (0, 1)"));
                }
            }
            SequenceSpec::Counterexample { offset, exponent, .. } => {
                if !(*offset > 0.0) {
                    v.push(format!("sequence: offset {offset} must be positive"));
                }
                if !exponent.is_finite() {
                    v.push(format!("sequence: exponent {exponent} must be finite"));
                }
            }
            SequenceSpec::CounterexampleRadii { radii } => {
                for (i, r) in radii.iter().enumerate() {
                    if !in_unit_interval(*r) {
                        v.push(format!("generator {}: radius {r} is not in (0, 1)", i + 1));
                    }
                }
            }
            SequenceSpec::Random { degree, .. } => {
                if *degree == 0 {
                    v.push("sequence: random generators need degree ≥ 1".to_string());
                }
            }
        }
        if self.sequence.is_stochastic() && self.sequence_seed().is_none() {
            v.push("sequence: random family selected but no seed given".to_string());
        }
        if !self.boundary.ks_steps.is_empty() && self.seed.is_none() {
            v.push("boundary: KS tests selected but no seed given".to_string());
        }
        if self.degree_cap == 0 {
            v.push("degree_cap must be at least 1".to_string());
        }

        let fits = |n: usize| n <= len;
        if let Some(s) = self.compose.steps {
            if !fits(s) {
                v.push(format!("compose: steps {s} exceed {len} generators"));
            }
        }
        if let Some(t) = self.diagnose.terms {
            if !fits(t) {
                v.push(format!("diagnose: terms {t} exceed {len} generators"));
            }
        }
        for [n, m] in &self.diagnose.gauge_pairs {
            if !fits(n + m) {
                v.push(format!("diagnose: gauge pair [{n}, {m}] exceeds {len} generators"));
            }
        }
        if !(self.diagnose.gauge_radius >= 0.0 && self.diagnose.gauge_radius < 1.0) {
            v.push(format!("diagnose: gauge_radius {} is not in [0, 1)", self.diagnose.gauge_radius));
        }
        if self.diagnose.grid_radii == 0 || self.diagnose.grid_angles == 0 {
            v.push("diagnose: grid needs at least one radius and one angle".to_string());
        }
        if let Some(s) = self.boundary.orbit_steps {
            if !fits(s) {
                v.push(format!("boundary: orbit_steps {s} exceed {len} generators"));
            }
        }
        for [n, m] in &self.boundary.l1_pairs {
            if !fits(n + m) {
                v.push(format!("boundary: l1 pair [{n}, {m}] exceeds {len} generators"));
            }
        }
        if self.boundary.nodes < blaschke::boundary::MIN_QUADRATURE_NODES {
            v.push(format!(
                "boundary: nodes {} below the minimum {}",
                self.boundary.nodes,
                blaschke::boundary::MIN_QUADRATURE_NODES
            ));
        }
        for n in &self.boundary.ks_steps {
            if !fits(*n) {
                v.push(format!("boundary: ks step {n} exceeds {len} generators"));
            }
        }
        if !self.boundary.ks_steps.is_empty() && self.boundary.ks_samples < blaschke::boundary::MIN_KS_SAMPLES {
            v.push(format!(
                "boundary: ks_samples {} below the minimum {}",
                self.boundary.ks_samples,
                blaschke::boundary::MIN_KS_SAMPLES
            ));
        }
        let ce = &self.counterexample;
        let terms = ce.terms.unwrap_or(len);
        if !fits(terms) {
            v.push(format!("counterexample: terms {terms} exceed {len} generators"));
        }
        if ce.window < 2 {
            v.push(format!("counterexample: window {} must be at least 2", ce.window));
        }
        if ce.gauge_span > ce.window {
            v.push(format!("counterexample: gauge_span {} exceeds window {}", ce.gauge_span, ce.window));
        }
        if !(ce.gauge_radius >= 0.0 && ce.gauge_radius < 1.0) {
            v.push(format!("counterexample: gauge_radius {} is not in [0, 1)", ce.gauge_radius));
        }
        if ce.angles == 0 || ce.gauge_points == 0 {
            v.push("counterexample: angles and gauge_points must be positive".to_string());
        }
        if self.verify.window < 2 || self.verify.counterexample_terms < self.verify.window {
            v.push("verify: need counterexample_terms ≥ window ≥ 2".to_string());
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(Violations(v))
        }
    }

    pub fn build_sequence(&self) -> blaschke::Result<BuiltSequence> {
        let (generators, zero_angles) = match &self.sequence {
            SequenceSpec::Explicit { generators } => (
                generators
                    .iter()
                    .map(|g| {
                        BlaschkeProduct::new(
                            g.rotation.into(),
                            g.origin_multiplicity,
                            g.zeros.iter().map(|&z| z.into()).collect(),
                        )
                    })
                    .collect::<blaschke::Result<Vec<_>>>()?,
                None,
            ),
            SequenceSpec::Geometric {
                count,
                ratio,
                angle_step,
            } => (geometric_generators(*count, *ratio, *angle_step)?, None),
            SequenceSpec::Constant {
                count,
                radius,
                angle_step,
            } => (constant_generators(*count, *radius, *angle_step)?, None),
            SequenceSpec::Counterexample {
                count,
                offset,
                exponent,
            } => {
                let spec = RadiiSpec::Default {
                    offset: *offset,
                    exponent: *exponent,
                };
                let ce = build_sequence(&spec, *count)?;
                (ce.sequence.generators().to_vec(), Some(ce.angles))
            }
            SequenceSpec::CounterexampleRadii { radii } => {
                let ce = build_sequence(&RadiiSpec::Explicit(radii.clone()), radii.len())?;
                (ce.sequence.generators().to_vec(), Some(ce.angles))
            }
            SequenceSpec::Random { count, degree, .. } => {
                let seed = self.sequence_seed().ok_or_else(|| {
                    blaschke::Error::InvalidInput("random family needs a seed".into())
                })?;
                (random_generators(seed, *count, *degree), None)
            }
        };
        Ok(BuiltSequence {
            sequence: CompositionSequence::new(generators)?.with_degree_cap(self.degree_cap),
            zero_angles,
        })
    }

    pub fn verify_config(&self) -> VerifyConfig {
        let d = VerifyConfig::default();
        VerifyConfig {
            seed: self.seed.unwrap_or(d.seed),
            ks_seed: self.verify.ks_seed,
            ks_samples: self.verify.ks_samples,
            counterexample_terms: self.verify.counterexample_terms,
            counterexample_angles: self.verify.counterexample_angles,
            window: self.verify.window,
            degree_cap: self.degree_cap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_toml("[sequence]\nfamily = \"geometric\"\ncount = 5\n").unwrap();
        assert_eq!(
            cfg.sequence,
            SequenceSpec::Geometric {
                count: 5,
                ratio: 0.5,
                angle_step: 1.0
            }
        );
        assert_eq!(cfg.degree_cap, DEFAULT_DEGREE_CAP);
        assert_eq!(cfg.counterexample.window, 1000);
    }

    #[test]
    fn explicit_generators_parse() {
        let text = r#"
            [sequence]
            family = "explicit"

            [[sequence.generators]]
            zeros = [{ re = 0.5, im = 0.0 }]

            [[sequence.generators]]
            origin_multiplicity = 2
            rotation = { re = 0.0, im = 1.0 }
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let built = cfg.build_sequence().unwrap();
        assert_eq!(built.sequence.degree(2), Some(4));
    }

    #[test]
    fn all_violations_are_listed() {
        let text = r#"
            [sequence]
            family = "explicit"

            [[sequence.generators]]
            zeros = [{ re = 0.5, im = 0.0 }]

            [[sequence.generators]]
            origin_multiplicity = 0
            zeros = [{ re = 1.5, im = 0.0 }, { re = 0.2, im = 0.0 }]

            [boundary]
            ks_steps = [1]
        "#;
        let Err(ConfigError::Invalid(v)) = ExperimentConfig::from_toml(text) else {
            panic!("expected validation failure");
        };
        assert_eq!(v.0.len(), 3, "{v}");
        assert!(v.0[0].starts_with("generator 2: does not fix the origin"));
        assert!(v.0[1].starts_with("generator 2, zero 1: modulus 1.5"));
        assert!(v.0[2].contains("no seed"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[sequence]\nfamily = \"geometric\"\ncount = 5\n[diagnose]\ntems = 3\n";
        assert!(matches!(ExperimentConfig::from_toml(text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn random_family_needs_a_seed() {
        let text = "[sequence]\nfamily = \"random\"\ncount = 3\n";
        assert!(matches!(ExperimentConfig::from_toml(text), Err(ConfigError::Invalid(_))));
        let seeded = "seed = 9\n[sequence]\nfamily = \"random\"\ncount = 3\n";
        assert_eq!(ExperimentConfig::from_toml(seeded).unwrap().sequence_seed(), Some(9));
    }

    #[test]
    fn counterexample_family_carries_angles() {
        let cfg = ExperimentConfig::from_toml("[sequence]\nfamily = \"counterexample\"\ncount = 10\n").unwrap();
        let built = cfg.build_sequence().unwrap();
        assert_eq!(built.zero_angles.unwrap().len(), 10);
    }
}
