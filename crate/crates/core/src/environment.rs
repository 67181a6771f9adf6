//! Episodic drawing environment.
//!
//! An episode draws one inductor. Rewards are sparse: zero on every
//! non-terminal step, the target reward on a completed design, and the invalid
//! penalty when the drawing gets boxed in or runs out of steps. With a
//! discount of one the episode return equals the final reward.

use crate::cache::{CacheError, SimCache};
use crate::geometry::{
    paint_segment, raster_shape, Action, BoolImage, Canvas, GeometryError, Heading, Layout, Mode,
    Status,
};
use crate::reward::{self, TargetSpec, DEFAULT_INVALID_PENALTY};
use crate::simulator::{simulate, MaterialParams, Metrics, SimError};
use rand::Rng;
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("action {0} is masked in the current state")]
    IllegalAction(u8),
    #[error("episode already finished")]
    EpisodeFinished,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("trace write failed: {0}")]
    Trace(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub canvas: Canvas,
    pub params: MaterialParams,
    /// Raster resolution in um per pixel.
    pub resolution: f64,
    /// Step cap for symmetric (half) drawings.
    pub max_steps: usize,
    /// Step cap for non-symmetric (full) drawings.
    pub max_steps_non_symmetric: usize,
    pub invalid_penalty: f64,
    /// Reference target; target features are normalized by it.
    pub reference: TargetSpec,
    /// Adds normalized target features to observations.
    pub target_conditioned: bool,
}

impl EnvConfig {
    pub fn new(canvas: Canvas, reference: TargetSpec) -> Self {
        EnvConfig {
            canvas,
            params: MaterialParams::default(),
            resolution: 2.5,
            max_steps: 15,
            max_steps_non_symmetric: 30,
            invalid_penalty: DEFAULT_INVALID_PENALTY,
            reference,
            target_conditioned: false,
        }
    }

    pub fn max_steps_for(&self, mode: Mode) -> usize {
        match mode {
            Mode::Symmetric => self.max_steps,
            Mode::NonSymmetric => self.max_steps_non_symmetric,
        }
    }

    pub fn raster_shape(&self) -> Result<(usize, usize), GeometryError> {
        raster_shape(&self.canvas, self.resolution)
    }
}

/// What the agent sees.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub occupancy: BoolImage,
    pub head: BoolImage,
    pub heading: [bool; 8],
    pub target_features: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub status: Status,
    /// Legal actions in the resulting state (all false once done).
    pub mask: [bool; Action::COUNT],
    /// Simulator invocations made through the shared cache so far.
    pub simulations_used: u64,
    pub was_simulated: bool,
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Serialize)]
struct TraceLine {
    episode: u64,
    step: usize,
    action: u8,
    mask: [bool; Action::COUNT],
    reward: f64,
    done: bool,
}

pub struct Environment {
    config: EnvConfig,
    cache: Arc<SimCache>,
    layout: Layout,
    target: TargetSpec,
    occupancy: BoolImage,
    mask: [bool; Action::COUNT],
    steps: usize,
    done: bool,
    episode: u64,
    trace: Option<Box<dyn Write + Send>>,
    evaluator: Option<Evaluator>,
}

/// Replacement for the built-in surrogate simulator.
pub type Evaluator = Arc<dyn Fn(&Layout) -> Result<Metrics, SimError> + Send + Sync>;

impl Environment {
    pub fn new(config: EnvConfig, cache: Arc<SimCache>) -> Result<Self, EnvError> {
        config.canvas.validate()?;
        let (cols, rows) = config.raster_shape()?;
        let layout = Layout::new(config.canvas, Mode::Symmetric);
        let target = config.reference;
        let mut env = Environment {
            config,
            cache,
            layout,
            target,
            occupancy: BoolImage::new(cols, rows),
            mask: [false; Action::COUNT],
            steps: 0,
            done: true,
            episode: 0,
            trace: None,
            evaluator: None,
        };
        env.mask = env.compute_mask();
        Ok(env)
    }

    /// Logs one JSON line per step to `sink`.
    pub fn set_trace(&mut self, sink: Box<dyn Write + Send>) {
        self.trace = Some(sink);
    }

    /// Routes cache misses through `f` instead of the surrogate simulator.
    pub fn set_evaluator(&mut self, f: Evaluator) {
        self.evaluator = Some(f);
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn cache(&self) -> &Arc<SimCache> {
        &self.cache
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    /// Starts a new episode at the input port, heading North.
    pub fn reset(&mut self, mode: Mode, target: TargetSpec) -> Observation {
        self.layout = Layout::new(self.config.canvas, mode);
        self.target = target;
        self.occupancy.data.fill(false);
        self.steps = 0;
        self.done = false;
        self.episode += 1;
        self.mask = self.compute_mask();
        self.observe()
    }

    pub fn observe(&self) -> Observation {
        let res = self.config.resolution;
        let mut head = BoolImage::new(self.occupancy.cols, self.occupancy.rows);
        let p = self.layout.head_point();
        let col = ((p.x / res).floor() as usize).min(head.cols - 1);
        let row = ((p.y / res).floor() as usize).min(head.rows - 1);
        head.set(col, row, true);
        let mut heading = [false; 8];
        heading[self.layout.heading().index()] = true;
        let target_features = self.config.target_conditioned.then(|| {
            let r = &self.config.reference;
            [
                self.target.inductance / r.inductance,
                self.target.resistance / r.resistance,
                self.target.srf / r.srf,
            ]
        });
        Observation {
            occupancy: self.occupancy.clone(),
            head,
            heading,
            target_features,
        }
    }

    /// Geometric legality plus a one-step look-ahead that rejects completing
    /// moves whose mirror image would overlap the drawn half.
    fn compute_mask(&self) -> [bool; Action::COUNT] {
        let mut mask = [false; Action::COUNT];
        if self.layout.status() != Status::InProgress {
            return mask;
        }
        for a in Action::all() {
            mask[a.index()] = match self.layout.append(a) {
                Ok(next) if next.mode() == Mode::Symmetric && next.status() == Status::Complete => {
                    next.mirror().is_ok()
                }
                Ok(_) => true,
                Err(_) => false,
            };
        }
        mask
    }

    pub fn action_mask(&self) -> Result<[bool; Action::COUNT], EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        Ok(self.mask)
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let used_mask = self.mask;
        if !used_mask[action.index()] {
            return Err(EnvError::IllegalAction(action.value()));
        }
        self.layout = self.layout.append(action)?;
        self.steps += 1;
        let seg = self.layout.segment(self.layout.segment_count() - 1);
        paint_segment(&mut self.occupancy, &seg, self.config.resolution);

        let penalty = self.config.invalid_penalty;
        let mut was_simulated = false;
        let mut metrics = None;
        let reward = if self.layout.status() == Status::Complete {
            self.done = true;
            match self.evaluate() {
                Ok((m, fresh)) => {
                    was_simulated = fresh;
                    metrics = Some(m);
                    reward::reward(&m, &self.target).unwrap_or(penalty)
                }
                Err(fresh) => {
                    was_simulated = fresh;
                    self.layout = self.layout.with_status(Status::Invalid);
                    penalty
                }
            }
        } else {
            self.mask = self.compute_mask();
            if self.steps >= self.config.max_steps_for(self.layout.mode()) || !self.mask.contains(&true) {
                self.done = true;
                self.layout = self.layout.with_status(Status::Invalid);
                penalty
            } else {
                0.0
            }
        };
        if self.done {
            self.mask = [false; Action::COUNT];
        }

        if let Some(trace) = self.trace.as_mut() {
            let line = TraceLine {
                episode: self.episode,
                step: self.steps,
                action: action.value(),
                mask: used_mask,
                reward,
                done: self.done,
            };
            let text = serde_json::to_string(&line).map_err(std::io::Error::other)?;
            writeln!(trace, "{text}")?;
        }

        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.done,
            info: StepInfo {
                status: self.layout.status(),
                mask: self.mask,
                simulations_used: self.cache.simulations(),
                was_simulated,
                metrics,
            },
        })
    }

    /// Metrics of the finished drawing; `Err(was_simulated)` marks an invalid design.
    fn evaluate(&self) -> Result<(Metrics, bool), bool> {
        if self.layout.full_inductor().is_err() {
            return Err(false);
        }
        let params = self.config.params;
        let outcome = match &self.evaluator {
            Some(f) => self.cache.get_or_simulate(&self.layout, |l| f(l)),
            None => self.cache.get_or_simulate(&self.layout, |l| simulate(l, &params)),
        };
        match outcome {
            Ok(hit) => Ok(hit),
            Err(CacheError::Simulation { was_simulated, .. }) => Err(was_simulated),
            Err(CacheError::Io(e)) => {
                log::error!("cache write failed: {e}");
                Err(false)
            }
        }
    }

    pub fn flush_trace(&mut self) -> Result<(), EnvError> {
        if let Some(t) = self.trace.as_mut() {
            t.flush()?;
        }
        Ok(())
    }
}

/// Draws L, R and SRF targets independently and uniformly within
/// `spread` of the reference. Area budget and weights are kept.
pub fn sample_target<R: Rng + ?Sized>(reference: &TargetSpec, spread: f64, rng: &mut R) -> TargetSpec {
    if spread <= 0.0 {
        return *reference;
    }
    let mut draw = |v: f64| rng.gen_range((1.0 - spread) * v..=(1.0 + spread) * v);
    TargetSpec {
        inductance: draw(reference.inductance),
        resistance: draw(reference.resistance),
        srf: draw(reference.srf),
        ..*reference
    }
}

/// Heading of the drawing head as a one-hot index, for callers that only
/// have the observation.
pub fn heading_of(obs: &Observation) -> Option<Heading> {
    obs.heading.iter().position(|&b| b).map(Heading::from_index)
}
