//! Generational loop: elitism, tournament selection, single-point crossover and
//! per-bit mutation, driven by one seeded RNG stream.
//!
//! Fitness of a generation may be evaluated on any number of workers. The RNG is
//! only touched by selection and variation, so results do not depend on the
//! worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ga::chromosome::{decode, Chromosome, N_GENES};
use crate::ga::fitness::{evaluate_config, FitnessReport, Problem};
use crate::waveguide::MatchingConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population_m: usize,
    pub generations_max: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub tournament_size: usize,
    pub seed: u64,
    /// Stop after this many generations without improvement; 0 disables the check.
    pub stagnation_window: usize,
    /// Fitness worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_m: 64,
            generations_max: 200,
            crossover_rate: 0.9,
            mutation_rate: 0.02,
            elite_count: 1,
            tournament_size: 2,
            seed: 42,
            stagnation_window: 40,
            workers: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_m < 2 || self.population_m % 2 != 0 {
            return Err(Error::invalid("ga.population", "must be even and >= 2"));
        }
        if self.elite_count > self.population_m {
            return Err(Error::invalid("ga.elite_count", "must not exceed the population"));
        }
        for (name, p) in [
            ("ga.crossover_rate", self.crossover_rate),
            ("ga.mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(name, format!("{p} is not a probability")));
            }
        }
        if self.tournament_size == 0 {
            return Err(Error::invalid("ga.tournament_size", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GaState {
    pub population: Vec<Chromosome>,
    pub fitness: Vec<f64>,
    pub generation: usize,
    pub best: Chromosome,
    pub best_fitness: f64,
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl GaState {
    /// Random initial population, evaluated.
    pub fn initialize<F>(params: &GaParams, n_genes: usize, eval: F) -> Self
    where
        F: Fn(&[Chromosome]) -> Vec<f64>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let population: Vec<_> = (0..params.population_m)
            .map(|_| Chromosome::random(&mut rng, n_genes))
            .collect();
        Self::from_population(population, params.seed, rng, eval)
    }

    /// Wraps an explicit population; the RNG is seeded from `seed`.
    pub fn with_population<F>(population: Vec<Chromosome>, seed: u64, eval: F) -> Self
    where
        F: Fn(&[Chromosome]) -> Vec<f64>,
    {
        Self::from_population(population, seed, ChaCha8Rng::seed_from_u64(seed), eval)
    }

    fn from_population<F>(population: Vec<Chromosome>, seed: u64, rng: ChaCha8Rng, eval: F) -> Self
    where
        F: Fn(&[Chromosome]) -> Vec<f64>,
    {
        let fitness = eval(&population);
        let b = argmin(&fitness);
        Self {
            best: population[b].clone(),
            best_fitness: fitness[b],
            population,
            fitness,
            generation: 0,
            seed,
            rng,
        }
    }

    pub fn mean_fitness(&self) -> f64 {
        self.fitness.iter().sum::<f64>() / self.fitness.len() as f64
    }

    /// Best fitness within the current population.
    pub fn generation_best(&self) -> f64 {
        self.fitness[argmin(&self.fitness)]
    }
}

fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("population is never empty")
}

fn tournament(rng: &mut ChaCha8Rng, fitness: &[f64], size: usize) -> usize {
    let mut winner = rng.gen_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.gen_range(0..fitness.len());
        if fitness[c] < fitness[winner] {
            winner = c;
        }
    }
    winner
}

fn mutate(rng: &mut ChaCha8Rng, chrom: &mut Chromosome, rate: f64) {
    if rate <= 0.0 {
        return;
    }
    for i in 0..chrom.len_bits() {
        if rng.gen::<f64>() < rate {
            chrom.flip_bit(i);
        }
    }
}

/// Produces and evaluates the next generation.
pub fn evolve<F>(mut state: GaState, params: &GaParams, eval: F) -> GaState
where
    F: Fn(&[Chromosome]) -> Vec<f64>,
{
    let m = state.population.len();
    let mut next = Vec::with_capacity(m);

    // Elites keep their original population order.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| state.fitness[a].total_cmp(&state.fitness[b]).then(a.cmp(&b)));
    let mut elites: Vec<usize> = order[..params.elite_count.min(m)].to_vec();
    elites.sort_unstable();
    next.extend(elites.iter().map(|&i| state.population[i].clone()));

    let rng = &mut state.rng;
    while next.len() < m {
        let pa = tournament(rng, &state.fitness, params.tournament_size);
        let pb = tournament(rng, &state.fitness, params.tournament_size);
        let (mut ca, mut cb) = if rng.gen::<f64>() < params.crossover_rate {
            let n_bits = state.population[pa].len_bits();
            let point = rng.gen_range(1..n_bits);
            state.population[pa].crossover(&state.population[pb], point)
        } else {
            (state.population[pa].clone(), state.population[pb].clone())
        };
        mutate(rng, &mut ca, params.mutation_rate);
        mutate(rng, &mut cb, params.mutation_rate);
        next.push(ca);
        if next.len() < m {
            next.push(cb);
        }
    }

    let fitness = eval(&next);
    let b = argmin(&fitness);
    if fitness[b] < state.best_fitness {
        state.best = next[b].clone();
        state.best_fitness = fitness[b];
    }
    state.population = next;
    state.fitness = fitness;
    state.generation += 1;
    state
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best-so-far aggregate fitness.
    pub best: f64,
    pub mean: f64,
    pub best_config: MatchingConfig,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub best: FitnessReport,
    pub best_chromosome: Chromosome,
    pub history: Vec<GenerationRecord>,
    pub seed: u64,
}

/// Runs the loop until `generations_max` or stagnation.
pub fn optimize(problem: &Problem, params: &GaParams) -> Result<OptimizeOutcome> {
    params.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.workers)
        .build()
        .map_err(|e| Error::invalid("ga.workers", e.to_string()))?;

    let decode_ok = |c: &Chromosome| decode(c, &problem.space).expect("chromosome length fixed");
    let eval = |pop: &[Chromosome]| -> Vec<f64> {
        pool.install(|| {
            pop.par_iter()
                .map(|c| evaluate_config(&decode_ok(c), problem).aggregate)
                .collect()
        })
    };
    let record = |s: &GaState| GenerationRecord {
        generation: s.generation,
        best: s.best_fitness,
        mean: s.mean_fitness(),
        best_config: decode_ok(&s.best),
    };

    let mut state = GaState::initialize(params, N_GENES, eval);
    let mut history = vec![record(&state)];
    let mut last_improvement = 0;
    while state.generation < params.generations_max {
        let before = state.best_fitness;
        state = evolve(state, params, eval);
        if state.best_fitness < before {
            last_improvement = state.generation;
        }
        history.push(record(&state));
        if params.stagnation_window > 0
            && state.generation - last_improvement >= params.stagnation_window
        {
            break;
        }
    }

    let best = evaluate_config(&decode_ok(&state.best), problem);
    Ok(OptimizeOutcome {
        best,
        best_chromosome: state.best,
        history,
        seed: params.seed,
    })
}
