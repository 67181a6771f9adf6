//! Genetic algorithm over fixed-length action genomes.

use super::AgentError;
use crate::environment::{EnvError, Environment};
use crate::geometry::{Action, Layout, Mode, Status};
use crate::reward::TargetSpec;
use crate::simulator::Metrics;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub const GENOME_LEN: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome(Vec<Action>);

impl Genome {
    pub fn new(genes: Vec<Action>) -> Result<Genome, AgentError> {
        if genes.len() != GENOME_LEN {
            return Err(AgentError::InvalidGenome(format!(
                "expected {GENOME_LEN} genes, got {}",
                genes.len()
            )));
        }
        Ok(Genome(genes))
    }

    pub fn from_values(values: &[u8]) -> Result<Genome, AgentError> {
        let genes = values
            .iter()
            .map(|&v| Action::new(v).map_err(|e| AgentError::InvalidGenome(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Genome::new(genes)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Genome {
        Genome((0..GENOME_LEN).map(|_| random_gene(rng)).collect())
    }

    pub fn genes(&self) -> &[Action] {
        &self.0
    }
}

fn random_gene<R: Rng + ?Sized>(rng: &mut R) -> Action {
    Action::new(rng.gen_range(0..Action::COUNT as u8)).expect("in range")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population: usize,
    pub tournament: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 50,
            tournament: 3,
            crossover: 0.7,
            mutation: 0.1,
            elitism: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub layout: Layout,
    pub reward: f64,
    /// Genes actually played.
    pub env_steps: usize,
    pub was_simulated: bool,
    pub metrics: Option<Metrics>,
}

/// Plays genes until the episode ends. Genes after completion are ignored;
/// a masked gene or running out of genes yields an invalid design.
pub fn ga_decode(genome: &Genome, env: &mut Environment, mode: Mode, target: TargetSpec) -> Result<Decoded, EnvError> {
    env.reset(mode, target);
    let penalty = env.config().invalid_penalty;
    let mut steps = 0;
    for &gene in genome.genes() {
        let mask = env.action_mask()?;
        if !mask[gene.index()] {
            break;
        }
        let r = env.step(gene)?;
        steps += 1;
        if r.done {
            return Ok(Decoded {
                layout: env.layout().clone(),
                reward: r.reward,
                env_steps: steps,
                was_simulated: r.info.was_simulated,
                metrics: r.info.metrics,
            });
        }
    }
    Ok(Decoded {
        layout: env.layout().with_status(Status::Invalid),
        reward: penalty,
        env_steps: steps,
        was_simulated: false,
        metrics: None,
    })
}

fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.gen_range(0..fitness.len());
    for _ in 1..size.max(1) {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Next generation: elites copied, the rest bred by tournament selection,
/// single-point crossover and per-gene uniform mutation.
pub fn ga_evolve<R: Rng + ?Sized>(
    population: &[Genome],
    fitness: &[f64],
    rng: &mut R,
    params: &GaParams,
) -> Result<Vec<Genome>, AgentError> {
    if population.len() != fitness.len() {
        return Err(AgentError::SizeMismatch {
            population: population.len(),
            fitness: fitness.len(),
        });
    }
    if population.len() < 2 {
        return Err(AgentError::InvalidGenome("population needs at least two genomes".into()));
    }
    let n = population.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    let mut next: Vec<Genome> = order
        .iter()
        .take(params.elitism.min(n))
        .map(|&i| population[i].clone())
        .collect();
    while next.len() < n {
        let p1 = &population[tournament(fitness, params.tournament, rng)];
        let p2 = &population[tournament(fitness, params.tournament, rng)];
        let mut genes = if rng.gen::<f64>() < params.crossover {
            let cut = rng.gen_range(1..GENOME_LEN);
            p1.0[..cut].iter().chain(&p2.0[cut..]).copied().collect()
        } else {
            p1.0.clone()
        };
        for g in genes.iter_mut() {
            if rng.gen::<f64>() < params.mutation {
                *g = random_gene(rng);
            }
        }
        next.push(Genome(genes));
    }
    Ok(next)
}
