//! Experiment configuration, read from TOML or JSON.
//!
//! ```toml
//! solvers = ["fd", "mc", "walk-measured"]
//! seed = 7
//! output_dir = "out"
//! geometry_file = "bypass.toml"   # or an inline [geometry] table
//!
//! [mc]
//! particles = 500000
//! mode = "lattice"
//!
//! [walk_measured]
//! steps = 10
//! shots = 1000
//!
//! [slice]
//! axis = "x"
//! coordinate = 5.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{FdOptions, McMode, McOptions};
use crate::error::{Error, Result};
use crate::geometry::{bypass_problem, ConfigFormat, GeometryConfig, Problem};
use crate::strategies::{AbsorbMode, GroverK, MeasuredWalkOptions};

use super::metrics::Axis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Mc,
    Fd,
    WalkMeasured,
    WalkAmplified,
    SwapScore,
}

impl Solver {
    pub const ALL: [Solver; 5] = [
        Solver::Mc,
        Solver::Fd,
        Solver::WalkMeasured,
        Solver::WalkAmplified,
        Solver::SwapScore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Mc => "mc",
            Solver::Fd => "fd",
            Solver::WalkMeasured => "walk-measured",
            Solver::WalkAmplified => "walk-amplified",
            Solver::SwapScore => "swap-score",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Solver::Mc | Solver::WalkMeasured | Solver::SwapScore)
    }

    /// Produces a flux map that takes part in pairwise comparisons.
    pub fn is_flux(self) -> bool {
        matches!(self, Solver::Mc | Solver::Fd | Solver::WalkMeasured)
    }

    /// Fixed stream id, so adding a solver never shifts another's draws.
    pub fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub particles: u64,
    pub max_collisions: u32,
    pub mode: McMode,
    pub batch_size: u64,
    pub seed: Option<u64>,
}

impl Default for McConfig {
    fn default() -> Self {
        let d = McOptions::default();
        Self {
            particles: d.n_particles,
            max_collisions: d.max_collisions,
            mode: d.mode,
            batch_size: d.batch_size,
            seed: None,
        }
    }
}

impl McConfig {
    pub fn options(&self) -> McOptions {
        McOptions {
            n_particles: self.particles,
            max_collisions: self.max_collisions,
            mode: self.mode,
            batch_size: self.batch_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdConfig {
    pub tol: f64,
    pub floor: f64,
    pub max_iterations: usize,
    /// Partial sum over this many kernel applications instead of the fixed
    /// point.
    pub iterations: Option<usize>,
}

impl Default for FdConfig {
    fn default() -> Self {
        let d = FdOptions::default();
        Self {
            tol: d.tol,
            floor: d.floor,
            max_iterations: d.max_iterations,
            iterations: None,
        }
    }
}

impl FdConfig {
    pub fn options(&self) -> FdOptions {
        FdOptions {
            tol: self.tol,
            floor: self.floor,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasuredConfig {
    pub steps: usize,
    pub shots: u64,
    pub absorb_mode: AbsorbMode,
    pub gate_level_coin: bool,
    pub seed: Option<u64>,
}

impl Default for MeasuredConfig {
    fn default() -> Self {
        let d = MeasuredWalkOptions::default();
        Self {
            steps: d.n_steps,
            shots: d.n_shots,
            absorb_mode: d.absorb_mode,
            gate_level_coin: d.gate_level_coin,
            seed: None,
        }
    }
}

impl MeasuredConfig {
    pub fn options(&self) -> MeasuredWalkOptions {
        MeasuredWalkOptions {
            n_steps: self.steps,
            n_shots: self.shots,
            absorb_mode: self.absorb_mode,
            gate_level_coin: self.gate_level_coin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplifiedConfig {
    pub steps: usize,
    pub k: GroverK,
    /// Good-subspace cells; the problem detector when absent.
    pub detector: Option<Vec<[usize; 2]>>,
}

impl Default for AmplifiedConfig {
    fn default() -> Self {
        Self {
            steps: 2,
            k: GroverK::Auto,
            detector: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwapConfig {
    pub steps: usize,
    pub shots: u64,
    /// Scored cells; the detector region when absent.
    pub region: Option<Vec<[usize; 2]>>,
    pub seed: Option<u64>,
}

impl Default for SwapConfig {
    fn default() -> Self {
        Self {
            steps: 2,
            shots: 10_000,
            region: None,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceConfig {
    pub axis: Axis,
    /// Defaults to the domain midline.
    pub coordinate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub solvers: Vec<Solver>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Geometry document, relative to the experiment config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub fd: FdConfig,
    #[serde(default)]
    pub walk_measured: MeasuredConfig,
    #[serde(default)]
    pub walk_amplified: AmplifiedConfig,
    #[serde(default)]
    pub swap_score: SwapConfig,
    #[serde(default)]
    pub slice: SliceConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            solvers: Vec::new(),
            seed: None,
            output_dir: default_output_dir(),
            geometry_file: None,
            geometry: None,
            mc: McConfig::default(),
            fd: FdConfig::default(),
            walk_measured: MeasuredConfig::default(),
            walk_amplified: AmplifiedConfig::default(),
            swap_score: SwapConfig::default(),
            slice: SliceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, format: ConfigFormat) -> Result<Self> {
        Ok(match format {
            ConfigFormat::Toml => toml::from_str(text)?,
            ConfigFormat::Json => serde_json::from_str(text)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, ConfigFormat::from_path(path))
    }

    pub fn to_text(&self, format: ConfigFormat) -> Result<String> {
        Ok(match format {
            ConfigFormat::Toml => toml::to_string(self)?,
            ConfigFormat::Json => serde_json::to_string_pretty(self)? + "\n",
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::Config("no solver selected".into()));
        }
        for (i, s) in self.solvers.iter().enumerate() {
            if self.solvers[..i].contains(s) {
                return Err(Error::Config(format!("solver `{s}` listed twice")));
            }
            if s.is_stochastic() && self.seed_for(*s).is_none() {
                return Err(Error::Config(format!("solver `{s}` needs a seed")));
            }
        }
        if self.geometry.is_some() && self.geometry_file.is_some() {
            return Err(Error::Config("give either `geometry` or `geometry_file`, not both".into()));
        }
        Ok(())
    }

    /// Per-solver seed, falling back to the global one.
    pub fn seed_for(&self, solver: Solver) -> Option<u64> {
        let own = match solver {
            Solver::Mc => self.mc.seed,
            Solver::WalkMeasured => self.walk_measured.seed,
            Solver::SwapScore => self.swap_score.seed,
            Solver::Fd | Solver::WalkAmplified => None,
        };
        own.or(self.seed)
    }

    /// The configured problem; the 8x8 bypass problem when none is given.
    /// Relative paths resolve against `base_dir`.
    pub fn problem(&self, base_dir: &Path) -> Result<Problem> {
        match (&self.geometry, &self.geometry_file) {
            (Some(g), None) => g.build(),
            (None, Some(path)) => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                GeometryConfig::parse(&text, ConfigFormat::from_path(&path))?.build()
            }
            (None, None) => bypass_problem(3, 3),
            (Some(_), Some(_)) => Err(Error::Config(
                "give either `geometry` or `geometry_file`, not both".into(),
            )),
        }
    }
}
