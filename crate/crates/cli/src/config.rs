//! Line-oriented `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key has a default and
//! unknown keys are rejected. [`RunConfig::to_text`] writes every key, so a
//! parsed config survives a round trip unchanged.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};
use spinwave::entanglement::EntropyMode;
use spinwave::groundstate::{Engine, QuadratureSpec};
use spinwave::model::{Boundary, CouplingParams, LatticeSpec};

/// Where a config value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(n) => write!(f, "--set #{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key '{key}' ({origin})")]
    UnknownKey { key: String, origin: Origin },
    #[error("expected 'key = value' ({origin})")]
    Syntax { origin: Origin },
    #[error("duplicate key '{key}' ({origin})")]
    Duplicate { key: String, origin: Origin },
    #[error("invalid value for '{key}' ({origin}): {reason}")]
    Value {
        key: String,
        origin: Origin,
        reason: String,
    },
    /// A constraint violation on a key left at its default.
    #[error("invalid value for '{key}' (default): {reason}")]
    Default { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    /// Infinite engine for infinite lattices, FFT for periodic, dense for open.
    Auto,
    Dense,
    Fft,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    CountAll,
    DegenerateOnce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryChoice {
    Periodic,
    Open,
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub omega: f64,
    pub kappa: f64,
    pub n_atoms: u32,
    pub g1: f64,
    pub g2: f64,
    pub side: usize,
    pub boundary: BoundaryChoice,
    pub engine: EngineChoice,
    pub entropy_mode: ModeChoice,
    pub degeneracy_tol: f64,
    pub block_sizes: Vec<usize>,
    pub extent: usize,
    pub g_min: f64,
    pub g_max: f64,
    pub g_points: usize,
    pub step: f64,
    pub sides: Vec<usize>,
    pub quad_order: usize,
    pub quad_tol: f64,
    pub quad_refinements: u32,
    pub oracle_atoms: Vec<u32>,
    pub oracle_blocks: usize,
    pub seed: u64,
    pub format: Format,
    pub output: String,
    pub output_dir: String,
    pub workers: usize,
}

/// Every key, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: [&str; 27] = [
    "omega",
    "kappa",
    "n_atoms",
    "g1",
    "g2",
    "side",
    "boundary",
    "engine",
    "entropy_mode",
    "degeneracy_tol",
    "block_sizes",
    "extent",
    "g_min",
    "g_max",
    "g_points",
    "step",
    "sides",
    "quad_order",
    "quad_tol",
    "quad_refinements",
    "oracle_atoms",
    "oracle_blocks",
    "seed",
    "format",
    "output",
    "output_dir",
    "workers",
];

impl Default for RunConfig {
    fn default() -> Self {
        let quad = QuadratureSpec::default();
        Self {
            omega: 500.0,
            kappa: 1.0,
            n_atoms: 1000,
            g1: 0.0,
            g2: 0.0,
            side: 80,
            boundary: BoundaryChoice::Periodic,
            engine: EngineChoice::Auto,
            entropy_mode: ModeChoice::DegenerateOnce,
            degeneracy_tol: spinwave::entanglement::DEFAULT_DEGENERACY_TOL,
            block_sizes: (1..=10).map(|i| 2 * i).collect(),
            extent: 3,
            g_min: 0.0,
            g_max: 1.7,
            g_points: 18,
            step: spinwave::scan::DEFAULT_STEP,
            sides: vec![21, 31, 41],
            quad_order: quad.order,
            quad_tol: quad.rel_tol,
            quad_refinements: quad.max_refinements,
            oracle_atoms: vec![10, 20, 40],
            oracle_blocks: 50,
            seed: 7,
            format: Format::Csv,
            output: "-".into(),
            output_dir: "out".into(),
            workers: 0,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| format!("'{}' is not a valid list entry", item.trim()))
        })
        .collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn number<T: std::str::FromStr>(value: &str, what: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("'{value}' is not {what}"))
}

fn real(value: &str) -> Result<f64, String> {
    let x: f64 = number(value, "a number")?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{value}' is not finite"))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parse `text`, then apply `overrides` (each a `key = value` line).
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        let mut origins: HashMap<String, Origin> = HashMap::new();
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (Origin::Line(i + 1), l))
            .chain(overrides.iter().enumerate().map(|(i, l)| (Origin::Override(i + 1), l.as_str())));
        for (origin, raw) in lines {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { origin });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    key: key.into(),
                    origin,
                });
            }
            if matches!(origin, Origin::Line(_)) && origins.contains_key(key) {
                return Err(ConfigError::Duplicate {
                    key: key.into(),
                    origin,
                });
            }
            config.set(key, value).map_err(|reason| ConfigError::Value {
                key: key.into(),
                origin,
                reason,
            })?;
            origins.insert(key.into(), origin);
        }
        config.validate().map_err(|(key, reason)| match origins.get(key) {
            Some(&origin) => ConfigError::Value {
                key: key.into(),
                origin,
                reason,
            },
            None => ConfigError::Default {
                key: key.into(),
                reason,
            },
        })?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "omega" => self.omega = real(value)?,
            "kappa" => self.kappa = real(value)?,
            "n_atoms" => self.n_atoms = number(value, "a positive integer")?,
            "g1" => self.g1 = real(value)?,
            "g2" => self.g2 = real(value)?,
            "side" => self.side = number(value, "a non-negative integer")?,
            "boundary" => {
                self.boundary = match value {
                    "periodic" => BoundaryChoice::Periodic,
                    "open" => BoundaryChoice::Open,
                    "infinite" => BoundaryChoice::Infinite,
                    _ => return Err(format!("'{value}' is not periodic, open or infinite")),
                }
            }
            "engine" => {
                self.engine = match value {
                    "auto" => EngineChoice::Auto,
                    "dense" => EngineChoice::Dense,
                    "fft" => EngineChoice::Fft,
                    "infinite" => EngineChoice::Infinite,
                    _ => return Err(format!("'{value}' is not auto, dense, fft or infinite")),
                }
            }
            "entropy_mode" => {
                self.entropy_mode = match value {
                    "count_all" => ModeChoice::CountAll,
                    "degenerate_once" => ModeChoice::DegenerateOnce,
                    _ => return Err(format!("'{value}' is not count_all or degenerate_once")),
                }
            }
            "degeneracy_tol" => self.degeneracy_tol = real(value)?,
            "block_sizes" => self.block_sizes = parse_list(value)?,
            "extent" => self.extent = number(value, "a non-negative integer")?,
            "g_min" => self.g_min = real(value)?,
            "g_max" => self.g_max = real(value)?,
            "g_points" => self.g_points = number(value, "a positive integer")?,
            "step" => self.step = real(value)?,
            "sides" => self.sides = parse_list(value)?,
            "quad_order" => self.quad_order = number(value, "a positive integer")?,
            "quad_tol" => self.quad_tol = real(value)?,
            "quad_refinements" => self.quad_refinements = number(value, "a non-negative integer")?,
            "oracle_atoms" => self.oracle_atoms = parse_list(value)?,
            "oracle_blocks" => self.oracle_blocks = number(value, "a non-negative integer")?,
            "seed" => self.seed = number(value, "a non-negative integer")?,
            "format" => {
                self.format = match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(format!("'{value}' is not csv or json")),
                }
            }
            "output" => self.output = value.into(),
            "output_dir" => self.output_dir = value.into(),
            "workers" => self.workers = number(value, "a non-negative integer")?,
            _ => unreachable!("key checked against KEYS"),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "omega" => self.omega.to_string(),
            "kappa" => self.kappa.to_string(),
            "n_atoms" => self.n_atoms.to_string(),
            "g1" => self.g1.to_string(),
            "g2" => self.g2.to_string(),
            "side" => self.side.to_string(),
            "boundary" => self.boundary_spec().as_str().into(),
            "engine" => match self.engine {
                EngineChoice::Auto => "auto".into(),
                EngineChoice::Dense => "dense".into(),
                EngineChoice::Fft => "fft".into(),
                EngineChoice::Infinite => "infinite".into(),
            },
            "entropy_mode" => self.entropy_mode().as_str().into(),
            "degeneracy_tol" => self.degeneracy_tol.to_string(),
            "block_sizes" => join(&self.block_sizes),
            "extent" => self.extent.to_string(),
            "g_min" => self.g_min.to_string(),
            "g_max" => self.g_max.to_string(),
            "g_points" => self.g_points.to_string(),
            "step" => self.step.to_string(),
            "sides" => join(&self.sides),
            "quad_order" => self.quad_order.to_string(),
            "quad_tol" => self.quad_tol.to_string(),
            "quad_refinements" => self.quad_refinements.to_string(),
            "oracle_atoms" => join(&self.oracle_atoms),
            "oracle_blocks" => self.oracle_blocks.to_string(),
            "seed" => self.seed.to_string(),
            "format" => match self.format {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            },
            "output" => self.output.clone(),
            "output_dir" => self.output_dir.clone(),
            "workers" => self.workers.to_string(),
            _ => unreachable!("key checked against KEYS"),
        }
    }

    /// Canonical text form listing every key.
    pub fn to_text(&self) -> String {
        KEYS.iter().map(|k| format!("{k} = {}\n", self.get(k))).collect()
    }

    /// Hex SHA-256 of [`RunConfig::to_text`].
    pub fn digest(&self) -> String {
        Sha256::digest(self.to_text().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        if let Err(e) = CouplingParams::new(self.omega, self.kappa, self.n_atoms, self.g1, self.g2) {
            let key = match &e {
                spinwave::Error::InvalidParameter { name, .. } => match *name {
                    "omega" => "omega",
                    "kappa" => "kappa",
                    "n_atoms" => "n_atoms",
                    "g1" => "g1",
                    _ => "g2",
                },
                _ => "omega",
            };
            return Err((key, e.to_string()));
        }
        let lattice = self.lattice().map_err(|e| ("side", e.to_string()))?;
        self.engine_for(&lattice).map_err(|e| ("engine", e.to_string()))?;
        if self.block_sizes.contains(&0) || self.block_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(("block_sizes", "must be positive and strictly increasing".into()));
        }
        if !lattice.is_infinite() && self.block_sizes.last().is_some_and(|&l| l > lattice.side()) {
            return Err(("block_sizes", format!("largest block exceeds side {}", lattice.side())));
        }
        if !(self.degeneracy_tol > 0.0) {
            return Err(("degeneracy_tol", "must be > 0".into()));
        }
        if self.g_points == 0 {
            return Err(("g_points", "must be >= 1".into()));
        }
        if self.g_min > self.g_max {
            return Err(("g_min", format!("exceeds g_max = {}", self.g_max)));
        }
        if !(self.step > 0.0) {
            return Err(("step", "must be > 0".into()));
        }
        if let Some(bad) = self.sides.iter().find(|&&m| m < 5 || m % 2 == 0) {
            return Err(("sides", format!("{bad} is not odd and >= 5")));
        }
        if self.quad_order < 16 {
            return Err(("quad_order", "must be >= 16".into()));
        }
        if !(self.quad_tol > 0.0) {
            return Err(("quad_tol", "must be > 0".into()));
        }
        if let Some(bad) = self
            .oracle_atoms
            .iter()
            .find(|&&n| n == 0 || n > spinwave::oracle::MAX_ATOMS)
        {
            return Err((
                "oracle_atoms",
                format!("{bad} outside 1..={}", spinwave::oracle::MAX_ATOMS),
            ));
        }
        if self.output.is_empty() {
            return Err(("output", "must be a path or '-'".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> CouplingParams {
        CouplingParams::new(self.omega, self.kappa, self.n_atoms, self.g1, self.g2)
            .expect("validated at parse time")
    }

    fn boundary_spec(&self) -> Boundary {
        match self.boundary {
            BoundaryChoice::Periodic => Boundary::Periodic,
            BoundaryChoice::Open => Boundary::Open,
            BoundaryChoice::Infinite => Boundary::Infinite,
        }
    }

    pub fn lattice(&self) -> spinwave::Result<LatticeSpec> {
        match self.boundary_spec() {
            Boundary::Infinite => Ok(LatticeSpec::infinite()),
            b => LatticeSpec::new(self.side, b),
        }
    }

    pub fn engine_for(&self, lattice: &LatticeSpec) -> spinwave::Result<Engine> {
        let engine = match self.engine {
            EngineChoice::Auto => match lattice.boundary() {
                Boundary::Infinite => Engine::Infinite,
                Boundary::Periodic => Engine::Fft,
                Boundary::Open => Engine::Dense,
            },
            EngineChoice::Dense => Engine::Dense,
            EngineChoice::Fft => Engine::Fft,
            EngineChoice::Infinite => Engine::Infinite,
        };
        engine.supports(lattice)?;
        Ok(engine)
    }

    pub fn entropy_mode(&self) -> EntropyMode {
        match self.entropy_mode {
            ModeChoice::CountAll => EntropyMode::CountAll,
            ModeChoice::DegenerateOnce => EntropyMode::DegenerateOnce {
                rel_tol: self.degeneracy_tol,
            },
        }
    }

    pub fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            order: self.quad_order,
            rel_tol: self.quad_tol,
            max_refinements: self.quad_refinements,
        }
    }

    /// `g_points` equally spaced values on `[g_min, g_max]`.
    pub fn g_grid(&self) -> Vec<f64> {
        spinwave::scan::linspace(self.g_min, self.g_max, self.g_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# only a comment\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn paper_parameters() {
        let c = RunConfig::parse("omega = 500\nn_atoms = 1000").unwrap();
        assert_eq!(c.omega, 500.0);
        assert_eq!(c.n_atoms, 1000);
        assert_eq!(c.kappa, 1.0);
    }

    #[test]
    fn unknown_key_names_line() {
        let err = RunConfig::parse("boundry = periodic").unwrap_err();
        assert_eq!(err.to_string(), "unknown key 'boundry' (line 1)");
    }

    #[test]
    fn type_mismatch_names_key_and_line() {
        let err = RunConfig::parse("# c\nomega = fast").unwrap_err();
        assert_eq!(err.to_string(), "invalid value for 'omega' (line 2): 'fast' is not a number");
    }

    #[test]
    fn constraint_violation_names_key_and_line() {
        let err = RunConfig::parse("side = 80\nboundary = periodic\nsides = 21,32").unwrap_err();
        assert!(err.to_string().starts_with("invalid value for 'sides' (line 3)"), "{err}");
        let err = RunConfig::parse("kappa = -1").unwrap_err();
        assert!(err.to_string().contains("'kappa' (line 1)"), "{err}");
        let err = RunConfig::parse("boundary = open\nengine = fft").unwrap_err();
        assert!(err.to_string().contains("'engine' (line 2)"), "{err}");
    }

    #[test]
    fn syntax_and_duplicates() {
        assert_eq!(
            RunConfig::parse("omega 500").unwrap_err(),
            ConfigError::Syntax {
                origin: Origin::Line(1)
            }
        );
        assert!(matches!(
            RunConfig::parse("g1 = 1\ng1 = 2").unwrap_err(),
            ConfigError::Duplicate { .. }
        ));
    }

    #[test]
    fn inline_comments_and_overrides() {
        let c = RunConfig::parse_with_overrides("g1 = 1.0 # horizontal", &["g1 = 1.5".into()]).unwrap();
        assert_eq!(c.g1, 1.5);
        let err = RunConfig::parse_with_overrides("", &["nope = 1".into()]).unwrap_err();
        assert_eq!(err.to_string(), "unknown key 'nope' (--set #1)");
    }

    #[test]
    fn round_trip() {
        let text = "omega = 250.5\ng1 = 0.1\ng2 = 1e-3\nboundary = infinite\nentropy_mode = count_all\n\
                    block_sizes = 1,3,7\nsides = 5,7\nformat = json\noutput = out.json\nquad_tol = 1e-11";
        let c = RunConfig::parse(text).unwrap();
        let again = RunConfig::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.digest(), again.digest());
        assert_ne!(c.digest(), RunConfig::default().digest());
        assert_eq!(c.digest().len(), 64);
    }

    #[test]
    fn auto_engine_follows_boundary() {
        let c = RunConfig::parse("boundary = open\nside = 6\nblock_sizes = 2").unwrap();
        assert_eq!(c.engine_for(&c.lattice().unwrap()).unwrap(), Engine::Dense);
        let c = RunConfig::parse("boundary = infinite").unwrap();
        assert_eq!(c.engine_for(&c.lattice().unwrap()).unwrap(), Engine::Infinite);
    }
}
