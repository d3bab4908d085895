//! Experiment configuration file (TOML).

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use lorentz_core::acceptance::AcceptanceConfig;
use lorentz_core::geometry::{BoundaryMode, Disk, ScattererLattice};
use lorentz_core::limit::Intensity;
use lorentz_core::sim::WallDynamics;
use lorentz_core::{AlphaSchedule, CrossingMode, HoleSchedule, LorentzConfig, Regime, WallConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n: usize,
    pub samples: usize,
    /// Grid size of the limit samplers.
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    /// QRBM truncation time; `1 / sqrt(grid_n)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// Trajectories written out in full.
    #[serde(default = "default_record_limit")]
    pub record_limit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub lattice: LatticeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall: Option<WallSpec>,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub limit: LimitSpec,
    /// Acceptance suite sizes; its seed always follows `seed`.
    #[serde(default)]
    pub verify: AcceptanceConfig,
}

fn default_grid() -> usize {
    10_000
}

fn default_record_limit() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(default)]
    pub boundary_mode: BoundaryMode,
    pub disks: Vec<Disk>,
    /// Previously certified free-path bound; the horizon sweep runs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_free_path: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSpec {
    pub components: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub regime: Regime,
    pub alpha: AlphaSchedule,
    #[serde(default)]
    pub crossing_mode: CrossingMode,
    #[serde(default)]
    pub count_wall_hits: bool,
    #[serde(default)]
    pub dynamics: WallDynamics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    pub intensity: Intensity,
    pub c: f64,
    pub sigma: f64,
}

impl Default for LimitSpec {
    fn default() -> Self {
        Self {
            intensity: Intensity::LocalTimeOverSqrtT,
            c: 1.0,
            sigma: 1.0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text)?;
        cfg.verify.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.verify.seed = seed;
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, ignoring where outputs go.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let digest = Sha256::digest(canonical.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        self.output_dir
            .clone()
            .ok_or_else(|| anyhow!("output_dir: not set in the config and no --out given"))
    }

    pub fn truncation(&self) -> f64 {
        self.t0
            .unwrap_or_else(|| lorentz_core::limit::default_truncation(self.grid_n))
    }

    /// Checks the parts every command needs.
    pub fn validate_common(&self) -> Result<()> {
        if self.n == 0 {
            bail!("n: must be at least 1");
        }
        if self.samples == 0 {
            bail!("samples: must be at least 1");
        }
        Ok(())
    }

    /// Builds and validates the billiard with its wall and schedule.
    pub fn lorentz(&self) -> Result<(LorentzConfig, HoleSchedule)> {
        self.validate_common()?;
        let lattice = ScattererLattice::new(self.lattice.disks.clone(), self.lattice.boundary_mode)
            .map_err(|e| anyhow!("lattice.disks: {e}"))?;
        let mut cfg = match self.lattice.max_free_path {
            Some(bound) => LorentzConfig::with_bound(lattice, bound),
            None => LorentzConfig::new(lattice, Default::default()),
        }
        .map_err(|e| anyhow!("lattice: {e}"))?;
        if let Some(w) = &self.wall {
            let wall = WallConfig::new(w.components.clone()).map_err(|e| anyhow!("wall.components: {e}"))?;
            wall.validate_against(&cfg.lattice)
                .map_err(|e| anyhow!("wall.components: {e}"))?;
            cfg.wall = wall;
        }
        cfg.count_wall_hits = self.schedule.count_wall_hits;
        cfg.dynamics = self.schedule.dynamics;
        let schedule = HoleSchedule::new(
            self.schedule.regime,
            self.schedule.alpha,
            self.schedule.crossing_mode,
        );
        schedule
            .validate(&cfg.wall, self.n, self.n)
            .map_err(|e| anyhow!("schedule.alpha: {e}"))?;
        Ok((cfg, schedule))
    }

    pub fn walk(&self) -> Result<lorentz_core::WalkConfig> {
        use lorentz_core::WalkRegime;
        self.validate_common()?;
        let regime = match self.schedule.regime {
            Regime::Shrinking => WalkRegime::Shrinking,
            Regime::DoubleArray => WalkRegime::DoubleArray,
            Regime::NoWall => bail!("schedule.regime: the walk needs shrinking or double_array"),
        };
        lorentz_core::WalkConfig::new(regime, self.schedule.alpha, self.n)
            .map_err(|e| anyhow!("schedule.alpha: {e}"))
    }

    pub fn validate_limit(&self) -> Result<()> {
        self.validate_common()?;
        if self.grid_n < lorentz_core::limit::MIN_GRID {
            bail!("grid_n: must be at least {}", lorentz_core::limit::MIN_GRID);
        }
        if !(self.limit.sigma > 0.0) {
            bail!("limit.sigma: must be positive");
        }
        if !(self.limit.c >= 0.0) {
            bail!("limit.c: must be nonnegative");
        }
        let t0 = self.truncation();
        if !(0.0..1.0).contains(&t0) {
            bail!("t0: must lie in [0, 1)");
        }
        Ok(())
    }
}
