//! Scenario file: sectioned `key = value` text (TOML) carrying every model
//! parameter. All keys are optional and default to the reference microcell;
//! unknown keys are rejected so typos surface immediately.

use serde::{Deserialize, Serialize};

use crate::channel::RadioParams;
use crate::energy::PlatformParams;
use crate::error::{invalid, Error, Result};
use crate::geometry::{build_layout, Heights, ScenarioLayout};
use crate::planner::{RandomMode, TerrestrialMode};
use crate::traffic::{default_profile, TemporalMode, TrafficModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    pub cell_side_m: f64,
    /// Nominal side of the covered area. Informational only: the grid
    /// dimensions and cell side define the geometry.
    pub area_side_m: f64,
    pub h1_m: f64,
    pub h2_m: f64,
    pub h3_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let h = Heights::default();
        GeometryConfig {
            rows: 9,
            cols: 9,
            cell_side_m: 20.0,
            area_side_m: 160.0,
            h1_m: h.bs_ut,
            h2_m: h.site_bs,
            h3_m: h.site_ut,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub base_mean: f64,
    pub sigma_log: f64,
    pub threshold_fraction: f64,
    pub epochs: usize,
    /// Explicit per-epoch multipliers; when non-empty it overrides the
    /// default sinusoidal profile and must have `epochs` entries.
    pub epoch_profile: Vec<f64>,
    pub temporal: TemporalMode,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        let m = TrafficModel::default();
        TrafficConfig {
            base_mean: m.base_mean,
            sigma_log: m.sigma_log,
            threshold_fraction: m.threshold_fraction,
            epochs: m.epochs(),
            epoch_profile: Vec::new(),
            temporal: m.temporal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Fleet size M.
    pub uavs: usize,
    pub terrestrial_mode: TerrestrialMode,
    pub random_mode: RandomMode,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            uavs: 10,
            terrestrial_mode: TerrestrialMode::Epoch1,
            random_mode: RandomMode::Direct,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub geometry: GeometryConfig,
    pub radio: RadioParams,
    pub platform: PlatformParams,
    pub traffic: TrafficConfig,
    pub solver: SolverConfig,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("scenario is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.layout()?;
        self.radio.validate()?;
        self.platform.validate()?;
        self.traffic_model(self.traffic.sigma_log)?;
        if self.solver.max_iterations == 0 {
            return Err(invalid("solver.max_iterations must be at least 1"));
        }
        Ok(())
    }

    pub fn heights(&self) -> Heights {
        Heights {
            bs_ut: self.geometry.h1_m,
            site_bs: self.geometry.h2_m,
            site_ut: self.geometry.h3_m,
        }
    }

    pub fn layout(&self) -> Result<ScenarioLayout> {
        let g = &self.geometry;
        build_layout(g.rows, g.cols, g.cell_side_m, self.heights())
    }

    /// Traffic model with the log-scale spread replaced by `sigma`.
    pub fn traffic_model(&self, sigma: f64) -> Result<TrafficModel> {
        let t = &self.traffic;
        let epoch_profile = if t.epoch_profile.is_empty() {
            if t.epochs == 0 {
                return Err(invalid("traffic.epochs must be at least 1"));
            }
            default_profile(t.epochs)
        } else {
            if t.epoch_profile.len() != t.epochs {
                return Err(invalid(format!(
                    "traffic.epoch_profile has {} entries but traffic.epochs = {}",
                    t.epoch_profile.len(),
                    t.epochs
                )));
            }
            t.epoch_profile.clone()
        };
        let model = TrafficModel {
            base_mean: t.base_mean,
            sigma_log: sigma,
            epoch_profile,
            threshold_fraction: t.threshold_fraction,
            temporal: t.temporal,
        };
        model.validate()?;
        Ok(model)
    }
}
