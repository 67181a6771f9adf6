//! JSON run configuration.
//!
//! Only `simulation_budget` is required; everything else falls back to the
//! reference setup. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "agent": "dqn",
//!   "mode": "symmetric",
//!   "seed": 3,
//!   "simulation_budget": 2000,
//!   "dqn": {"train_every": 4},
//!   "transfer": {"spread": 0.2, "pretrain_budget": 1500,
//!                "finetune_target": {"scale": {"inductance": 0.95}},
//!                "finetune_budget": 800}
//! }
//! ```

use super::HarnessError;
use crate::agents::{DqnConfig, GaParams};
use crate::environment::EnvConfig;
use crate::geometry::{Canvas, Layout, Mode, Point};
use crate::reward::{TargetSpec, DEFAULT_INVALID_PENALTY};
use crate::simulator::external::ExternalToolConfig;
use crate::simulator::{simulate, MaterialParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Environment variable consulted when no `--config` flag is given.
pub const CONFIG_ENV: &str = "INDUCTOR_DRAW_CONFIG";

/// Half-loop drawn by hand on the reference canvas: a 60 x 50 um rectangle
/// fed by a 10 um lead from each port.
pub const REFERENCE_LOOP: [u8; 11] = [2, 0, 2, 4, 2, 2, 2, 2, 4, 2, 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    #[default]
    Dqn,
    Ga,
    Random,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Dqn => "dqn",
            AgentKind::Ga => "ga",
            AgentKind::Random => "random",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dqn" => Ok(AgentKind::Dqn),
            "ga" => Ok(AgentKind::Ga),
            "random" => Ok(AgentKind::Random),
            other => Err(HarnessError::Config(format!("unknown agent '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CanvasConfig {
    pub width: f64,
    pub height: f64,
    pub grid_pitch: f64,
    pub input_port: [f64; 2],
    pub output_port: [f64; 2],
    pub wire_width: f64,
    pub wire_thickness: f64,
    pub layer: u32,
}

impl Default for CanvasConfig {
    fn default() -> Self {
        let c = Canvas::reference();
        CanvasConfig {
            width: c.width,
            height: c.height,
            grid_pitch: c.grid_pitch,
            input_port: [c.input_port.x, c.input_port.y],
            output_port: [c.output_port.x, c.output_port.y],
            wire_width: c.wire_width,
            wire_thickness: c.wire_thickness,
            layer: c.layer,
        }
    }
}

impl CanvasConfig {
    pub fn to_canvas(&self) -> Result<Canvas, HarnessError> {
        let mut c = Canvas::new(
            self.width,
            self.height,
            Point::new(self.input_port[0], self.input_port[1]),
            Point::new(self.output_port[0], self.output_port[1]),
            self.grid_pitch,
            self.wire_width,
            self.wire_thickness,
        )
        .map_err(|e| HarnessError::Config(e.to_string()))?;
        c.layer = self.layer;
        Ok(c)
    }
}

/// Multipliers applied to the base target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetScale {
    pub inductance: f64,
    pub resistance: f64,
    pub srf: f64,
}

impl Default for TargetScale {
    fn default() -> Self {
        TargetScale {
            inductance: 1.0,
            resistance: 1.0,
            srf: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetChoice {
    Scaled { scale: TargetScale },
    Explicit(TargetSpec),
}

impl TargetChoice {
    pub fn resolve(&self, base: &TargetSpec) -> TargetSpec {
        match self {
            TargetChoice::Explicit(t) => *t,
            TargetChoice::Scaled { scale } => TargetSpec {
                inductance: base.inductance * scale.inductance,
                resistance: base.resistance * scale.resistance,
                srf: base.srf * scale.srf,
                ..*base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    /// Relative half-width of the uniform pre-training target distribution.
    pub spread: f64,
    pub pretrain_budget: u64,
    pub finetune_target: TargetChoice,
    pub finetune_budget: u64,
    /// Exploration rate the fine-tuned agent starts from.
    #[serde(default = "default_finetune_epsilon")]
    pub finetune_epsilon_start: f64,
    #[serde(default)]
    pub pretrain_max_env_steps: Option<u64>,
}

fn default_finetune_epsilon() -> f64 {
    0.2
}

fn default_budget_cap() -> Option<u64> {
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub canvas: CanvasConfig,
    #[serde(default)]
    pub material: MaterialParams,
    /// Defaults to the metrics of the hand-drawn reference loop.
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub agent: AgentKind,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    pub simulation_budget: u64,
    /// Hard stop on environment steps, for budgets the agent cannot exhaust.
    #[serde(default = "default_budget_cap")]
    pub max_env_steps: Option<u64>,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_max_steps_ns")]
    pub max_steps_non_symmetric: usize,
    #[serde(default = "default_penalty")]
    pub invalid_penalty: f64,
    #[serde(default)]
    pub target_conditioned: bool,
    #[serde(default)]
    pub dqn: DqnConfig,
    #[serde(default)]
    pub ga: GaParams,
    #[serde(default)]
    pub transfer: Option<TransferConfig>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Pre-existing cache file merged before the run.
    #[serde(default)]
    pub cache_file: Option<PathBuf>,
    #[serde(default)]
    pub external_tool: Option<ExternalToolConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_mode() -> Mode {
    Mode::Symmetric
}
fn default_resolution() -> f64 {
    2.5
}
fn default_max_steps() -> usize {
    15
}
fn default_max_steps_ns() -> usize {
    30
}
fn default_penalty() -> f64 {
    DEFAULT_INVALID_PENALTY
}
fn default_top_k() -> usize {
    5
}

impl RunConfig {
    pub fn with_budget(simulation_budget: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "simulation_budget": simulation_budget }))
            .expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.simulation_budget == 0 {
            return bad("simulation_budget must be positive".into());
        }
        let canvas = self.canvas.to_canvas()?;
        if self.mode == Mode::Symmetric && !canvas.supports_symmetric() {
            return bad("symmetric mode needs mirror-image ports".into());
        }
        self.material
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(t) = &self.target {
            t.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        if !(self.resolution > 0.0) {
            return bad("resolution must be positive".into());
        }
        if self.max_steps == 0 || self.max_steps_non_symmetric == 0 {
            return bad("step caps must be positive".into());
        }
        let d = &self.dqn;
        if d.batch_size == 0 || d.replay_capacity == 0 || d.conv_stride == 0 || d.hidden == 0 {
            return bad("dqn sizes must be positive".into());
        }
        if self.ga.population < 2 {
            return bad("ga population must be at least 2".into());
        }
        if let Some(t) = &self.transfer {
            if t.pretrain_budget == 0 || t.finetune_budget == 0 {
                return bad("transfer budgets must be positive".into());
            }
            if !(0.0..1.0).contains(&t.spread) {
                return bad("transfer spread must lie in [0, 1)".into());
            }
        }
        if let Some(p) = &self.cache_file {
            if !p.exists() {
                return bad(format!("cache file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn canvas(&self) -> Result<Canvas, HarnessError> {
        self.canvas.to_canvas()
    }

    /// Configured target, or the metrics of the reference loop.
    pub fn resolved_target(&self) -> Result<TargetSpec, HarnessError> {
        match self.target {
            Some(t) => Ok(t),
            None => reference_target(&self.canvas()?, &self.material),
        }
    }

    pub fn env_config(&self, target_conditioned: bool) -> Result<EnvConfig, HarnessError> {
        let mut env = EnvConfig::new(self.canvas()?, self.resolved_target()?);
        env.params = self.material;
        env.resolution = self.resolution;
        env.max_steps = self.max_steps;
        env.max_steps_non_symmetric = self.max_steps_non_symmetric;
        env.invalid_penalty = self.invalid_penalty;
        env.target_conditioned = target_conditioned;
        Ok(env)
    }
}

/// Target equal to the simulated metrics of [`REFERENCE_LOOP`], with the
/// whole canvas as area budget and equal weights.
pub fn reference_target(canvas: &Canvas, params: &MaterialParams) -> Result<TargetSpec, HarnessError> {
    let actions = REFERENCE_LOOP
        .iter()
        .map(|&a| crate::geometry::Action::new(a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let layout = Layout::from_actions(*canvas, Mode::Symmetric, &actions)
        .map_err(|(i, e)| HarnessError::Config(format!("reference loop does not fit the canvas (step {i}: {e})")))?;
    let m = simulate(&layout, params).map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(TargetSpec::new(m.inductance, m.resistance, m.srf, canvas.area()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = RunConfig::from_json(r#"{"simulation_budget": 10}"#).unwrap();
        assert_eq!(cfg.agent, AgentKind::Dqn);
        assert_eq!(cfg.mode, Mode::Symmetric);
        assert_eq!(cfg.top_k, 5);
        assert_eq!(cfg.dqn, DqnConfig::default());
        assert_eq!(cfg, RunConfig::with_budget(10));
    }

    #[test]
    fn rejects_unknown_keys_and_zero_budget() {
        assert!(RunConfig::from_json(r#"{"simulation_budget": 10, "sead": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"simulation_budget": 10, "dqn": {"lr": 1}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"simulation_budget": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"seed": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"simulation_budget": 1, "cache_file": "/nonexistent/x.jsonl"}"#).is_err());
    }

    #[test]
    fn reference_target_matches_loop() {
        let t = RunConfig::with_budget(1).resolved_target().unwrap();
        assert_eq!(t.area_max, 10_000.0);
        assert!(t.inductance > 50e-12 && t.inductance < 200e-12, "{}", t.inductance);
        // 220 um of wire: 44 squares at 0.01 ohm.
        assert!((t.resistance - 0.44).abs() < 1e-12);
    }

    #[test]
    fn finetune_target_forms() {
        let base = TargetSpec::new(100e-12, 1.0, 100e9, 1e4);
        let scaled: TargetChoice = serde_json::from_str(r#"{"scale": {"inductance": 0.95}}"#).unwrap();
        let t = scaled.resolve(&base);
        assert!((t.inductance - 95e-12).abs() < 1e-24);
        assert_eq!(t.resistance, 1.0);
        let explicit: TargetChoice = serde_json::from_str(
            r#"{"L_T_h": 1e-10, "R_T_ohm": 1, "SRF_T_hz": 1e11, "area_max_um2": 5000, "weights": [1,1,1,1]}"#,
        )
        .unwrap();
        assert_eq!(explicit.resolve(&base).area_max, 5000.0);
    }
}
