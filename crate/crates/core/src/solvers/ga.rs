//! Genetic algorithm over feasible placement matrices.
//!
//! Each generation keeps `N_e` elites, breeds `N_c = round(f_c (N_p - N_e))`
//! children by two-point column crossover and `N_m = N_p - N_e - N_c` by
//! single-row flips. Parents are drawn by stochastic universal sampling over
//! linear rank weights. Every operator ends with the same repair: drop the
//! highest-ranked cached files, then add the lowest-ranked uncached ones.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PlacementMatrix;
use crate::objective::{check_eta, Evaluator, ObjectivePoint};

use super::support_rows;

/// Smallest best-fitness decrease that resets the stall counter.
pub const STALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_count: usize,
    pub crossover_fraction: f64,
    pub max_generations: usize,
    pub stall_generations: usize,
    pub seed: u64,
    /// Put the MPC and LB-LCD placements into the initial population.
    pub seed_with_canonical: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            elite_count: 10,
            crossover_fraction: 0.85,
            max_generations: 100,
            stall_generations: 20,
            seed: 1,
            seed_with_canonical: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("ga.population_size", "must be >= 2"));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::invalid("ga.elite_count", "must be below ga.population_size"));
        }
        if !(0.0..=1.0).contains(&self.crossover_fraction) {
            return Err(Error::invalid("ga.crossover_fraction", "must lie in [0, 1]"));
        }
        if self.max_generations == 0 {
            return Err(Error::invalid("ga.max_generations", "must be >= 1"));
        }
        if self.stall_generations == 0 {
            return Err(Error::invalid("ga.stall_generations", "must be >= 1"));
        }
        Ok(())
    }

    /// `N_c`.
    pub fn crossover_count(&self) -> usize {
        (self.crossover_fraction * (self.population_size - self.elite_count) as f64).round() as usize
    }

    /// `N_m`.
    pub fn mutation_count(&self) -> usize {
        self.population_size - self.elite_count - self.crossover_count()
    }
}

/// One generation of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct GaPopulation {
    pub individuals: Vec<PlacementMatrix>,
    pub fitness: Vec<f64>,
    pub generation: usize,
    pub best: PlacementMatrix,
    pub best_fitness: f64,
}

impl GaPopulation {
    fn evaluate(individuals: Vec<PlacementMatrix>, ev: &Evaluator, eta: f64, generation: usize) -> Result<Self> {
        let fitness =
            individuals.par_iter().map(|a| ev.evaluate(a, eta).map(|p| p.value)).collect::<Result<Vec<_>>>()?;
        let order = ranked(&individuals, &fitness);
        let best = individuals[order[0]].clone();
        let best_fitness = fitness[order[0]];
        Ok(Self { individuals, fitness, generation, best, best_fitness })
    }

    pub fn mean_fitness(&self) -> f64 {
        self.fitness.iter().sum::<f64>() / self.fitness.len() as f64
    }
}

/// Indices sorted by fitness, ties broken by [`PlacementMatrix::cmp_by_columns`].
fn ranked(individuals: &[PlacementMatrix], fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..individuals.len()).collect();
    order.sort_by(|&a, &b| {
        fitness[a].total_cmp(&fitness[b]).then_with(|| individuals[a].cmp_by_columns(&individuals[b]))
    });
    order
}

/// Per-column repair: while over capacity clear the highest cached row,
/// while under capacity set the lowest uncached row.
pub fn repair(a: &mut PlacementMatrix, cache_sizes: &[usize]) {
    for (n, &m) in cache_sizes.iter().enumerate() {
        let mut sum = a.column_sum(n);
        let mut l = a.files();
        while sum > m {
            l -= 1;
            if a.get(l, n) {
                a.set(l, n, false);
                sum -= 1;
            }
        }
        let mut l = 0;
        while sum < m {
            if !a.get(l, n) {
                a.set(l, n, true);
                sum += 1;
            }
            l += 1;
        }
    }
}

/// `N_p` random feasible individuals with support in the first `L'` rows;
/// with canonical seeding the first two are MPC and LB-LCD.
pub fn initial_population<R: Rng + ?Sized>(
    config: &GaConfig,
    ev: &Evaluator,
    rng: &mut R,
) -> Result<Vec<PlacementMatrix>> {
    let s = ev.scenario();
    let rows = support_rows(s);
    let sizes = s.layout().cache_sizes();
    if let Some(n) = sizes.iter().position(|&m| m > rows) {
        return Err(Error::invalid(format!("layout.cache_sizes[{n}]"), format!("exceeds L' = {rows}")));
    }
    let mut pop: Vec<PlacementMatrix> = (0..config.population_size)
        .map(|_| {
            let mut a = PlacementMatrix::zeros(s.files(), sizes.len());
            for (n, &m) in sizes.iter().enumerate() {
                for l in rand::seq::index::sample(rng, rows, m) {
                    a.set(l, n, true);
                }
            }
            a
        })
        .collect();
    if config.seed_with_canonical {
        pop[0] = ev.mpc();
        if pop.len() > 1 {
            pop[1] = ev.lb_lcd();
        }
    }
    Ok(pop)
}

/// Two-point crossover per column on rows `[0, L')`, then repair.
///
/// With `l1 < l2` the child is `a1` with rows `l1..=l2` taken from `a2`;
/// otherwise it is `a2` with rows `l2..=l1` taken from `a1`.
pub fn crossover<R: Rng + ?Sized>(
    a1: &PlacementMatrix,
    a2: &PlacementMatrix,
    support: usize,
    cache_sizes: &[usize],
    rng: &mut R,
) -> PlacementMatrix {
    let mut child = PlacementMatrix::zeros(a1.files(), a1.rrhs());
    for n in 0..a1.rrhs() {
        let (l1, l2) = if support >= 2 {
            let l1 = rng.random_range(0..support);
            let mut l2 = rng.random_range(0..support - 1);
            if l2 >= l1 {
                l2 += 1;
            }
            (l1, l2)
        } else {
            (0, 0)
        };
        let (base, donor, lo, hi) = if l1 <= l2 { (a1, a2, l1, l2) } else { (a2, a1, l2, l1) };
        for l in 0..a1.files() {
            let src = if (lo..=hi).contains(&l) { donor } else { base };
            child.set(l, n, src.get(l, n));
        }
    }
    repair(&mut child, cache_sizes);
    child
}

/// Flips one row in `[0, L')` per column, then repairs.
pub fn mutate<R: Rng + ?Sized>(
    a: &PlacementMatrix,
    support: usize,
    cache_sizes: &[usize],
    rng: &mut R,
) -> PlacementMatrix {
    let mut child = a.clone();
    for n in 0..a.rrhs() {
        let l = rng.random_range(0..support);
        child.set(l, n, !child.get(l, n));
    }
    repair(&mut child, cache_sizes);
    child
}

/// Linear rank weights `N - r + 1` (best rank `r = 1`); tied fitness values
/// share the mean weight of their ranks.
pub fn rank_weights(fitness: &[f64]) -> Vec<f64> {
    let n = fitness.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
    let mut weights = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && fitness[order[end]] == fitness[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let mean_rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            weights[i] = n as f64 - mean_rank + 1.0;
        }
        start = end;
    }
    weights
}

/// Stochastic universal sampling: `count` equally spaced pointers over the
/// rank-weight wheel, one uniform offset. Returns indices in wheel order.
pub fn sus_select<R: Rng + ?Sized>(fitness: &[f64], count: usize, rng: &mut R) -> Vec<usize> {
    let weights = rank_weights(fitness);
    let total: f64 = weights.iter().sum();
    let step = total / count as f64;
    let mut pointer = rng.random::<f64>() * step;
    let mut picks = Vec::with_capacity(count);
    let mut cumulative = 0.0;
    let mut i = 0;
    for _ in 0..count {
        while i + 1 < weights.len() && cumulative + weights[i] <= pointer {
            cumulative += weights[i];
            i += 1;
        }
        picks.push(i);
        pointer += step;
    }
    picks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: PlacementMatrix,
    pub point: ObjectivePoint,
    /// Populations evaluated, including the initial one.
    pub generations: usize,
    /// Generation (1-based) at which the best fitness last improved by more than [`STALL_TOL`].
    pub last_improvement: usize,
    /// `N_p * generations`.
    pub evaluations: usize,
    pub history: Vec<GenerationRecord>,
}

/// Minimizes `eta * outage + (1 - eta) * fronthaul`.
///
/// Stops after `max_generations` populations or once the best fitness has
/// improved by less than [`STALL_TOL`] for `stall_generations` consecutive
/// generations. Fitness evaluation runs in parallel; all randomness comes
/// from one seeded stream, so results do not depend on the thread count.
pub fn ga_optimize(ev: &Evaluator, eta: f64, config: &GaConfig) -> Result<GaOutcome> {
    check_eta(eta)?;
    config.validate()?;
    let s = ev.scenario();
    let support = support_rows(s);
    let sizes = s.layout().cache_sizes().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut pop = GaPopulation::evaluate(initial_population(config, ev, &mut rng)?, ev, eta, 1)?;
    let mut history = vec![GenerationRecord { best: pop.best_fitness, mean: pop.mean_fitness() }];
    let (mut stall, mut last_improvement) = (0, 1);
    let (nc, nm) = (config.crossover_count(), config.mutation_count());

    while pop.generation < config.max_generations && stall < config.stall_generations {
        let order = ranked(&pop.individuals, &pop.fitness);
        let mut next: Vec<PlacementMatrix> =
            order[..config.elite_count].iter().map(|&i| pop.individuals[i].clone()).collect();
        let mut parents = sus_select(&pop.fitness, 2 * nc + nm, &mut rng);
        parents.shuffle(&mut rng);
        for pair in parents[..2 * nc].chunks_exact(2) {
            let (a1, a2) = (&pop.individuals[pair[0]], &pop.individuals[pair[1]]);
            next.push(crossover(a1, a2, support, &sizes, &mut rng));
        }
        for &i in &parents[2 * nc..] {
            next.push(mutate(&pop.individuals[i], support, &sizes, &mut rng));
        }

        let previous = pop.best_fitness;
        pop = GaPopulation::evaluate(next, ev, eta, pop.generation + 1)?;
        if previous - pop.best_fitness < STALL_TOL {
            stall += 1;
        } else {
            stall = 0;
            last_improvement = pop.generation;
        }
        history.push(GenerationRecord { best: pop.best_fitness, mean: pop.mean_fitness() });
    }

    Ok(GaOutcome {
        point: ev.evaluate(&pop.best, eta)?,
        best: pop.best,
        generations: pop.generation,
        last_improvement,
        evaluations: config.population_size * pop.generation,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioFile;

    fn table_v() -> Evaluator {
        Evaluator::new(ScenarioFile::preset("fig5_pareto").unwrap().build().unwrap())
    }

    #[test]
    fn table_iv_counts() {
        let c = GaConfig::default();
        assert_eq!((c.crossover_count(), c.mutation_count()), (34, 6));
        assert_eq!(c.elite_count + c.crossover_count() + c.mutation_count(), c.population_size);
    }

    #[test]
    fn repair_examples() {
        // full column, flip 0 -> 1 at row 4: highest-index file dropped
        let mut a = PlacementMatrix::from_columns(9, &[vec![0, 2, 4]]).unwrap();
        repair(&mut a, &[2]);
        assert_eq!(a.cached_files(0), vec![0, 2]);
        // flip 1 -> 0: lowest-index uncached file added
        let mut a = PlacementMatrix::from_columns(9, &[vec![3]]).unwrap();
        repair(&mut a, &[2]);
        assert_eq!(a.cached_files(0), vec![0, 3]);
    }

    #[test]
    fn crossover_trace_replay() {
        // parents with 1-based columns {1,3,5},{2,4,6} and {1,1,1},{2,2,2}:
        // as rows, parent 1 caches ranks 1 and 2 at RRH 1, 3 and 4 at RRH 2,
        // 5 and 6 at RRH 3; parent 2 caches ranks 1 and 2 everywhere
        let p1 = PlacementMatrix::from_columns(9, &[vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let p2 = PlacementMatrix::from_columns(9, &[vec![0, 1], vec![0, 1], vec![0, 1]]).unwrap();
        let sizes = [2, 2, 2];
        for seed in 0..200 {
            let child = crossover(&p1, &p2, 6, &sizes, &mut ChaCha8Rng::seed_from_u64(seed));
            // replay with an identical stream
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut expected = PlacementMatrix::zeros(9, 3);
            for n in 0..3 {
                let l1 = rng.random_range(0..6usize);
                let mut l2 = rng.random_range(0..5usize);
                if l2 >= l1 {
                    l2 += 1;
                }
                let mut col: Vec<bool> = if l1 < l2 {
                    (0..9).map(|l| if (l1..=l2).contains(&l) { p2.get(l, n) } else { p1.get(l, n) }).collect()
                } else {
                    (0..9).map(|l| if (l2..=l1).contains(&l) { p1.get(l, n) } else { p2.get(l, n) }).collect()
                };
                while col.iter().filter(|&&c| c).count() > 2 {
                    let l = col.iter().rposition(|&c| c).unwrap();
                    col[l] = false;
                }
                while col.iter().filter(|&&c| c).count() < 2 {
                    let l = col.iter().position(|&c| !c).unwrap();
                    col[l] = true;
                }
                for (l, c) in col.into_iter().enumerate() {
                    expected.set(l, n, c);
                }
            }
            assert_eq!(child, expected, "seed {seed}");
            child.validate(9, &sizes).unwrap();
            assert!(child.support_end() <= 6);
        }
    }

    #[test]
    fn identical_parents_clone() {
        let p = PlacementMatrix::from_columns(9, &[vec![0, 4], vec![1, 5], vec![2, 3]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(crossover(&p, &p, 6, &[2, 2, 2], &mut rng), p);
        }
    }

    #[test]
    fn mutation_hamming_bound() {
        let p = PlacementMatrix::from_columns(9, &[vec![0, 4], vec![1, 5], vec![2, 3]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let total: usize = (0..10_000).map(|_| mutate(&p, 6, &[2, 2, 2], &mut rng).hamming(&p)).sum();
        assert!(total as f64 / 10_000.0 <= 6.0);
    }

    #[test]
    fn two_individual_rank_probabilities() {
        assert_eq!(rank_weights(&[0.1, 0.2]), vec![2.0, 1.0]);
        assert_eq!(rank_weights(&[0.3, 0.1, 0.3]), vec![1.5, 3.0, 1.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut first = 0;
        let spins = 30_000;
        for _ in 0..spins {
            first += sus_select(&[0.1, 0.2], 1, &mut rng).iter().filter(|&&i| i == 0).count();
        }
        let freq = first as f64 / spins as f64;
        assert!((freq - 2.0 / 3.0).abs() < 0.01, "{freq}");
    }

    #[test]
    fn sus_counts_within_one_of_expectation() {
        let fitness: Vec<f64> = (0..17).map(|i| ((i * 7) % 17) as f64).collect();
        let weights = rank_weights(&fitness);
        let total: f64 = weights.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for count in [1, 5, 17, 40] {
            let picks = sus_select(&fitness, count, &mut rng);
            for (i, w) in weights.iter().enumerate() {
                let expected = w / total * count as f64;
                let got = picks.iter().filter(|&&p| p == i).count() as f64;
                assert!((got - expected).abs() < 1.0, "count {count} idx {i}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn canonical_seeding_and_determinism() {
        let ev = table_v();
        let cfg = GaConfig::default();
        let a = initial_population(&cfg, &ev, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = initial_population(&cfg, &ev, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(&ev.mpc()) && a.contains(&ev.lb_lcd()));
        for x in &a {
            x.validate(9, &[2, 2, 2]).unwrap();
            assert!(x.support_end() <= 6);
        }
    }

    #[test]
    fn eta_one_returns_mpc() {
        let ev = table_v();
        let out = ga_optimize(&ev, 1.0, &GaConfig::default()).unwrap();
        assert_eq!(out.best, ev.mpc());
        assert_eq!(out.evaluations, 50 * out.generations);
        assert_eq!(out.history.len(), out.generations);
        assert!(out.history.windows(2).all(|w| w[1].best <= w[0].best));
    }
}
