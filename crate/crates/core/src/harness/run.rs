//! Budgeted training runs for the three agents.

use super::config::{AgentKind, RunConfig};
use super::svg::render_svg;
use super::HarnessError;
use crate::agents::dqn::encode;
use crate::agents::{ga_decode, ga_evolve, random_policy, DqnAgent, Genome, Transition};
use crate::cache::{canonical_key, SimCache};
use crate::environment::{sample_target, Environment, Evaluator};
use crate::geometry::{Layout, Mode, Status};
use crate::layout_file::LayoutRecord;
use crate::reward::{self, TargetSpec};
use crate::simulator::external::external_adapter;
use crate::simulator::{Metrics, SimError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub const METRICS_HEADER: &str = "env_step,simulations,episode_reward,best_reward_so_far";

/// Step cap applied when a config sets none: generous enough never to bind
/// before the budget unless the agent stops finding new designs.
pub fn default_step_cap(budget: u64) -> u64 {
    budget.saturating_mul(200).max(10_000)
}

/// One metrics CSV row, written after every episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRow {
    pub env_step: u64,
    pub simulations: u64,
    pub episode_reward: f64,
    pub best_reward_so_far: f64,
}

/// One line of `actions.jsonl`; enough to replay the episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: u64,
    pub mode: Mode,
    pub target: TargetSpec,
    pub actions: Vec<u8>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub agent: AgentKind,
    pub mode: Mode,
    pub seed: u64,
    pub simulation_budget: u64,
    pub simulations: u64,
    pub env_steps: u64,
    pub episodes: u64,
    pub best_reward: f64,
    pub best_actions: Vec<u8>,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedDesign {
    pub layout: Layout,
    pub metrics: Metrics,
    /// Reward against the run's base target.
    pub reward: f64,
}

pub struct RunOutcome {
    pub summary: RunSummary,
    pub rows: Vec<EpisodeRow>,
    pub episodes: Vec<EpisodeLog>,
    pub top: Vec<RankedDesign>,
    pub cache: Arc<SimCache>,
    pub agent: Option<DqnAgent>,
}

/// Where each episode's target comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSource {
    Fixed(TargetSpec),
    Sampled { reference: TargetSpec, spread: f64 },
}

impl TargetSource {
    fn base(&self) -> TargetSpec {
        match *self {
            TargetSource::Fixed(t) => t,
            TargetSource::Sampled { reference, .. } => reference,
        }
    }
}

/// Everything that varies between a plain run and the transfer stages.
pub struct Session {
    pub agent: AgentKind,
    pub mode: Mode,
    pub budget: u64,
    pub max_env_steps: u64,
    pub targets: TargetSource,
    pub target_conditioned: bool,
    pub cache: Arc<SimCache>,
    /// Starting DQN agent; a fresh one is built when absent.
    pub dqn: Option<DqnAgent>,
    pub rng: ChaCha8Rng,
    pub out: Option<PathBuf>,
}

impl Session {
    pub fn from_config(cfg: &RunConfig) -> Result<Session, HarnessError> {
        cfg.validate()?;
        let cache = SimCache::new();
        if let Some(p) = &cfg.cache_file {
            let report = cache.merge_file(p)?;
            log::info!("preloaded {} cached designs from {}", report.loaded, p.display());
        }
        Ok(Session {
            agent: cfg.agent,
            mode: cfg.mode,
            budget: cfg.simulation_budget,
            max_env_steps: cfg.max_env_steps.unwrap_or_else(|| default_step_cap(cfg.simulation_budget)),
            targets: TargetSource::Fixed(cfg.resolved_target()?),
            target_conditioned: cfg.target_conditioned,
            cache: Arc::new(cache),
            dqn: None,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            out: cfg.output_dir.clone(),
        })
    }
}

/// Runs the configured agent until the simulation budget is spent and
/// writes artifacts when `output_dir` is set.
pub fn run_training(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    run_session(cfg, Session::from_config(cfg)?)
}

struct Tracker {
    rows: Vec<EpisodeRow>,
    episodes: Vec<EpisodeLog>,
    best: f64,
    best_actions: Vec<u8>,
    env_steps: u64,
    seen: HashSet<String>,
    designs: Vec<RankedDesign>,
    base: TargetSpec,
}

impl Tracker {
    fn record(&mut self, env: &Environment, layout: &Layout, steps: u64, reward: f64, metrics: Option<Metrics>) {
        self.env_steps += steps;
        let actions: Vec<u8> = layout.actions().iter().map(|a| a.value()).collect();
        if self.rows.is_empty() || reward > self.best {
            self.best = reward;
            self.best_actions = actions.clone();
        }
        self.rows.push(EpisodeRow {
            env_step: self.env_steps,
            simulations: env.cache().simulations(),
            episode_reward: reward,
            best_reward_so_far: self.best,
        });
        self.episodes.push(EpisodeLog {
            episode: self.episodes.len() as u64 + 1,
            mode: layout.mode(),
            target: *env.target(),
            actions,
            reward,
        });
        if let (Status::Complete, Some(m)) = (layout.status(), metrics) {
            if self.seen.insert(canonical_key(layout)) {
                let r = reward::reward(&m, &self.base).unwrap_or(f64::NEG_INFINITY);
                self.designs.push(RankedDesign {
                    layout: layout.clone(),
                    metrics: m,
                    reward: r,
                });
            }
        }
    }
}

fn external_evaluator(cfg: &RunConfig, dir: &Path) -> Result<Option<Evaluator>, HarnessError> {
    let Some(tool) = cfg.external_tool.clone() else {
        return Ok(None);
    };
    let dir = dir.join("external");
    fs::create_dir_all(&dir)?;
    let counter = Arc::new(AtomicU64::new(0));
    let f = move |layout: &Layout| -> Result<Metrics, SimError> {
        let n = counter.fetch_add(1, Ordering::SeqCst);
        let request = dir.join(format!("request_{n}.json"));
        let response = dir.join(format!("response_{n}.json"));
        LayoutRecord::from_layout(layout)?
            .write(&request)
            .map_err(|e| SimError::External(e.to_string()))?;
        external_adapter(&tool, &request, &response).map_err(|e| SimError::External(e.to_string()))
    };
    Ok(Some(Arc::new(f)))
}

pub fn run_session(cfg: &RunConfig, mut s: Session) -> Result<RunOutcome, HarnessError> {
    let env_cfg = cfg.env_config(s.target_conditioned)?;
    let (cols, rows) = env_cfg.raster_shape()?;
    let mut env = Environment::new(env_cfg, Arc::clone(&s.cache))?;

    if let Some(out) = &s.out {
        fs::create_dir_all(out)?;
        let cache_path = out.join("cache.jsonl");
        s.cache.persist(&cache_path)?;
        s.cache.append_to(&cache_path)?;
        env.set_trace(Box::new(BufWriter::new(File::create(out.join("trace.jsonl"))?)));
        if let Some(f) = external_evaluator(cfg, out)? {
            env.set_evaluator(f);
        }
    } else if let Some(f) = external_evaluator(cfg, &std::env::temp_dir().join("inductor-draw"))? {
        env.set_evaluator(f);
    }

    let mut t = Tracker {
        rows: Vec::new(),
        episodes: Vec::new(),
        best: f64::NEG_INFINITY,
        best_actions: Vec::new(),
        env_steps: 0,
        seen: HashSet::new(),
        designs: Vec::new(),
        base: s.targets.base(),
    };
    let rng = &mut s.rng;
    let done = |env: &Environment, t: &Tracker| {
        env.cache().simulations() >= s.budget || t.env_steps >= s.max_env_steps
    };
    let next_target = |rng: &mut ChaCha8Rng| match s.targets {
        TargetSource::Fixed(t) => t,
        TargetSource::Sampled { reference, spread } => sample_target(&reference, spread, rng),
    };

    let mut agent = None;
    match s.agent {
        AgentKind::Dqn => {
            let mut a = match s.dqn.take() {
                Some(a) => a,
                None => DqnAgent::new(cfg.dqn.clone(), cfg.dqn.arch(cols, rows, s.target_conditioned), rng),
            };
            while !done(&env, &t) {
                let target = next_target(rng);
                let mut input = encode::<f32>(&env.reset(s.mode, target));
                let mut steps = 0;
                loop {
                    let mask = env.action_mask()?;
                    let action = a.act(&input, &mask, rng)?;
                    let r = env.step(action)?;
                    steps += 1;
                    let next = encode::<f32>(&r.observation);
                    a.observe(
                        Transition {
                            obs: std::mem::replace(&mut input, next.clone()),
                            action: action.value(),
                            reward: r.reward as f32,
                            next_obs: next,
                            done: r.done,
                            next_mask: r.info.mask,
                        },
                        rng,
                    );
                    if r.done {
                        t.record(&env, &env.layout().clone(), steps, r.reward, r.info.metrics);
                        break;
                    }
                }
            }
            agent = Some(a);
        }
        AgentKind::Random => {
            while !done(&env, &t) {
                let target = next_target(rng);
                env.reset(s.mode, target);
                let mut steps = 0;
                loop {
                    let action = random_policy(&env.action_mask()?, rng)?;
                    let r = env.step(action)?;
                    steps += 1;
                    if r.done {
                        t.record(&env, &env.layout().clone(), steps, r.reward, r.info.metrics);
                        break;
                    }
                }
            }
        }
        AgentKind::Ga => {
            let mut population: Vec<Genome> = (0..cfg.ga.population).map(|_| Genome::random(rng)).collect();
            'generations: loop {
                let mut fitness = Vec::with_capacity(population.len());
                for g in &population {
                    if done(&env, &t) {
                        break 'generations;
                    }
                    let target = next_target(rng);
                    let d = ga_decode(g, &mut env, s.mode, target)?;
                    t.record(&env, &d.layout, d.env_steps as u64, d.reward, d.metrics);
                    fitness.push(d.reward);
                }
                population = ga_evolve(&population, &fitness, rng, &cfg.ga)?;
            }
        }
    }
    env.flush_trace()?;

    t.designs.sort_by(|a, b| b.reward.total_cmp(&a.reward));
    t.designs.truncate(cfg.top_k);
    let summary = RunSummary {
        agent: s.agent,
        mode: s.mode,
        seed: cfg.seed,
        simulation_budget: s.budget,
        simulations: s.cache.simulations(),
        env_steps: t.env_steps,
        episodes: t.rows.len() as u64,
        best_reward: t.best,
        best_actions: t.best_actions.clone(),
        budget_exhausted: s.cache.simulations() >= s.budget,
    };
    let outcome = RunOutcome {
        summary,
        rows: t.rows,
        episodes: t.episodes,
        top: t.designs,
        cache: s.cache,
        agent,
    };
    if let Some(out) = &s.out {
        write_artifacts(out, &outcome, &t.base)?;
    }
    Ok(outcome)
}

pub fn metrics_csv(rows: &[EpisodeRow]) -> String {
    let mut s = String::from(METRICS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.env_step, r.simulations, r.episode_reward, r.best_reward_so_far
        ));
    }
    s
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<EpisodeRow>, HarnessError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(METRICS_HEADER) {
        return Err(HarnessError::Parse("metrics CSV header mismatch".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let bad = || HarnessError::Parse(format!("bad metrics row '{l}'"));
            if f.len() != 4 {
                return Err(bad());
            }
            Ok(EpisodeRow {
                env_step: f[0].parse().map_err(|_| bad())?,
                simulations: f[1].parse().map_err(|_| bad())?,
                episode_reward: f[2].parse().map_err(|_| bad())?,
                best_reward_so_far: f[3].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

fn write_artifacts(out: &Path, o: &RunOutcome, base: &TargetSpec) -> Result<(), HarnessError> {
    fs::write(out.join("metrics.csv"), metrics_csv(&o.rows))?;
    let mut w = BufWriter::new(File::create(out.join("actions.jsonl"))?);
    for e in &o.episodes {
        writeln!(w, "{}", serde_json::to_string(e).map_err(std::io::Error::other)?)?;
    }
    w.flush()?;
    fs::write(
        out.join("run.json"),
        serde_json::to_string_pretty(&o.summary).map_err(std::io::Error::other)? + "\n",
    )?;
    if let Some(agent) = &o.agent {
        agent
            .network()
            .write_checkpoint(BufWriter::new(File::create(out.join("checkpoint.bin"))?))?;
    }
    let dir = out.join("top_k");
    fs::create_dir_all(&dir)?;
    for (i, d) in o.top.iter().enumerate() {
        let mut rec = LayoutRecord::from_layout(&d.layout)?;
        rec.metrics = Some(d.metrics);
        rec.target = Some(*base);
        rec.write(&dir.join(format!("rank_{}.json", i + 1)))?;
        fs::write(dir.join(format!("rank_{}.svg", i + 1)), render_svg(&rec)?)?;
    }
    Ok(())
}

/// Replays logged episodes against `cache`, returning the rewards obtained.
pub fn replay_episodes(
    cfg: &RunConfig,
    episodes: &[EpisodeLog],
    cache: Arc<SimCache>,
) -> Result<Vec<f64>, HarnessError> {
    let mut env = Environment::new(cfg.env_config(cfg.target_conditioned)?, cache)?;
    let penalty = cfg.invalid_penalty;
    let mut rewards = Vec::with_capacity(episodes.len());
    for e in episodes {
        env.reset(e.mode, e.target);
        let mut reward = penalty;
        for &a in &e.actions {
            let action = crate::geometry::Action::new(a)?;
            if !env.action_mask()?[action.index()] {
                break;
            }
            let r = env.step(action)?;
            if r.done {
                reward = r.reward;
                break;
            }
        }
        rewards.push(reward);
    }
    Ok(rewards)
}
