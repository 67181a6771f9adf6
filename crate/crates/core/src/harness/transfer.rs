//! Pre-train on a target distribution, fine-tune on a new target, and compare
//! against an agent trained from scratch on that target.

use super::config::{AgentKind, RunConfig};
use super::run::{default_step_cap, metrics_csv, run_session, EpisodeRow, RunOutcome, Session, TargetSource};
use super::HarnessError;
use crate::agents::DqnConfig;
use crate::cache::SimCache;
use crate::reward::TargetSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub seed: u64,
    pub reference: TargetSpec,
    pub finetune_target: TargetSpec,
    pub pretrain_simulations: u64,
    /// Best reward any pre-training design achieves on the new target.
    pub best_cached: Option<f64>,
    /// Final best reward of the scratch agent.
    pub threshold: f64,
    pub finetune_best: f64,
    pub scratch_best: f64,
    pub finetune_sims_to_threshold: Option<u64>,
    pub scratch_sims_to_threshold: Option<u64>,
}

pub struct TransferOutcome {
    pub summary: TransferSummary,
    pub pretrain: RunOutcome,
    pub finetune: RunOutcome,
    pub scratch: RunOutcome,
}

/// Simulations spent when `best_reward_so_far` first reaches `threshold`.
pub fn sims_to_threshold(rows: &[EpisodeRow], threshold: f64) -> Option<u64> {
    rows.iter()
        .find(|r| r.best_reward_so_far >= threshold)
        .map(|r| r.simulations)
}

fn stage_rng(seed: u64, stage: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng
}

pub fn run_transfer(cfg: &RunConfig) -> Result<TransferOutcome, HarnessError> {
    let pre = pretrain(cfg)?;
    let tc = cfg.transfer.as_ref().ok_or(HarnessError::MissingTransferBlock)?;
    let new_target = tc.finetune_target.resolve(&cfg.resolved_target()?);
    fine_tune_and_compare(cfg, pre, new_target)
}

/// Stage 1: DQN on targets drawn around the reference each episode.
pub fn pretrain(cfg: &RunConfig) -> Result<RunOutcome, HarnessError> {
    cfg.validate()?;
    let tc = cfg.transfer.clone().ok_or(HarnessError::MissingTransferBlock)?;
    let reference = cfg.resolved_target()?;
    let cache = SimCache::new();
    if let Some(p) = &cfg.cache_file {
        cache.merge_file(p)?;
    }
    run_session(
        cfg,
        Session {
            agent: AgentKind::Dqn,
            mode: cfg.mode,
            budget: tc.pretrain_budget,
            max_env_steps: tc
                .pretrain_max_env_steps
                .unwrap_or_else(|| default_step_cap(tc.pretrain_budget)),
            targets: TargetSource::Sampled {
                reference,
                spread: tc.spread,
            },
            target_conditioned: true,
            cache: Arc::new(cache),
            dqn: None,
            rng: stage_rng(cfg.seed, 0),
            out: cfg.output_dir.as_ref().map(|o| o.join("pretrain")),
        },
    )
}

/// Stages 2 and 3: fine-tune a copy of the pre-trained agent on `new_target`
/// and train a fresh agent on it with the same budget.
pub fn fine_tune_and_compare(
    cfg: &RunConfig,
    pretrain: RunOutcome,
    new_target: TargetSpec,
) -> Result<TransferOutcome, HarnessError> {
    let tc = cfg.transfer.clone().ok_or(HarnessError::MissingTransferBlock)?;
    let reference = cfg.resolved_target()?;
    new_target
        .validate()
        .map_err(|e| HarnessError::Config(format!("finetune target: {e}")))?;
    let out = cfg.output_dir.as_deref();
    let sub = |name: &str| out.map(|o| o.join(name));
    let best_cached = pretrain.cache.best_reward(&new_target);

    let ft_cfg = DqnConfig {
        epsilon_start: tc.finetune_epsilon_start,
        ..cfg.dqn.clone()
    };
    let pretrained = pretrain.agent.as_ref().ok_or_else(|| HarnessError::Config("pre-training kept no agent".into()))?;
    let step_cap = cfg.max_env_steps.unwrap_or_else(|| default_step_cap(tc.finetune_budget));
    let finetune = run_session(
        cfg,
        Session {
            agent: AgentKind::Dqn,
            mode: cfg.mode,
            budget: tc.finetune_budget,
            max_env_steps: step_cap,
            targets: TargetSource::Fixed(new_target),
            target_conditioned: true,
            cache: Arc::new(pretrain.cache.snapshot()),
            dqn: Some(pretrained.fine_tune(ft_cfg)),
            rng: stage_rng(cfg.seed, 1),
            out: sub("finetune"),
        },
    )?;
    let scratch = run_session(
        cfg,
        Session {
            agent: AgentKind::Dqn,
            mode: cfg.mode,
            budget: tc.finetune_budget,
            max_env_steps: step_cap,
            targets: TargetSource::Fixed(new_target),
            target_conditioned: true,
            cache: Arc::new(SimCache::new()),
            dqn: None,
            rng: stage_rng(cfg.seed, 2),
            out: sub("scratch"),
        },
    )?;

    let threshold = scratch.summary.best_reward;
    let summary = TransferSummary {
        seed: cfg.seed,
        reference,
        finetune_target: new_target,
        pretrain_simulations: pretrain.summary.simulations,
        best_cached,
        threshold,
        finetune_best: finetune.summary.best_reward,
        scratch_best: scratch.summary.best_reward,
        finetune_sims_to_threshold: sims_to_threshold(&finetune.rows, threshold),
        scratch_sims_to_threshold: sims_to_threshold(&scratch.rows, threshold),
    };
    if let Some(o) = out {
        write_transfer(o, &summary, &finetune, &scratch)?;
    }
    Ok(TransferOutcome {
        summary,
        pretrain,
        finetune,
        scratch,
    })
}

fn write_transfer(out: &Path, s: &TransferSummary, ft: &RunOutcome, sc: &RunOutcome) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out)?;
    std::fs::write(
        out.join("transfer.json"),
        serde_json::to_string_pretty(s).map_err(std::io::Error::other)? + "\n",
    )?;
    let mut csv = String::from("run,");
    let mut first = true;
    for (name, o) in [("finetune", ft), ("scratch", sc)] {
        let body = metrics_csv(&o.rows);
        let mut lines = body.lines();
        let header = lines.next().unwrap_or_default();
        if first {
            csv.push_str(header);
            csv.push_str(",best_cached\n");
            first = false;
        }
        let cached = s.best_cached.map(|v| v.to_string()).unwrap_or_default();
        for l in lines {
            csv.push_str(&format!("{name},{l},{cached}\n"));
        }
    }
    std::fs::write(out.join("curves.csv"), csv)?;
    Ok(())
}
