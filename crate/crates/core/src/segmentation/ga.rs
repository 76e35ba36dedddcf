//! Genetic search over segment boundaries.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::score::SegmentScorer;
use super::GaConfig;
use crate::error::{invalid, Error, Result};
use crate::geometry::VelocitySeries;

/// Candidate division: the `k - 1` sorted segment start indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub indices: Vec<usize>,
    pub fitness: f64,
}

impl Individual {
    pub fn new(indices: Vec<usize>) -> Self {
        Self {
            indices,
            fitness: f64::NEG_INFINITY,
        }
    }
}

/// Sorts `indices` and pushes them apart so every segment of a length-`len`
/// series is at least `min_len` long. Moves are rightward first, then
/// leftward where the upper end overflows.
pub fn repair(indices: &mut [usize], len: usize, min_len: usize) {
    indices.sort_unstable();
    let mut lower = min_len;
    for b in indices.iter_mut() {
        *b = (*b).max(lower);
        lower = *b + min_len;
    }
    let mut upper = len.saturating_sub(min_len);
    for b in indices.iter_mut().rev() {
        *b = (*b).min(upper);
        upper = b.saturating_sub(min_len);
    }
}

/// Uniformly drawn feasible boundaries for `k` segments.
pub fn random_individual<R: Rng + ?Sized>(len: usize, k: usize, min_len: usize, rng: &mut R) -> Individual {
    let slack = len - k * min_len;
    let mut offsets: Vec<usize> = (0..k - 1).map(|_| rng.random_range(0..=slack)).collect();
    offsets.sort_unstable();
    let indices = offsets
        .into_iter()
        .enumerate()
        .map(|(i, u)| u + (i + 1) * min_len)
        .collect();
    Individual::new(indices)
}

/// Moves one random boundary by one step in a random direction, then repairs.
pub fn mutate<R: Rng + ?Sized>(ind: &Individual, len: usize, min_len: usize, rng: &mut R) -> Individual {
    let mut indices = ind.indices.clone();
    mutate_in_place(&mut indices, len, min_len, rng);
    Individual::new(indices)
}

fn mutate_in_place<R: Rng + ?Sized>(indices: &mut [usize], len: usize, min_len: usize, rng: &mut R) {
    if indices.is_empty() {
        return;
    }
    let i = rng.random_range(0..indices.len());
    if rng.random_bool(0.5) {
        indices[i] += 1;
    } else {
        indices[i] = indices[i].saturating_sub(1);
    }
    let lower = if i == 0 { min_len } else { indices[i - 1] + min_len };
    let upper = indices.get(i + 1).map_or(len, |&b| b).saturating_sub(min_len);
    // repair is a no-op on a feasible division
    if indices[i] < lower || indices[i] > upper {
        repair(indices, len, min_len);
    }
}

/// One-point crossover at a uniformly drawn cut `j` in `2..=k-2` (genes are
/// counted from one): the first `j` genes come from one parent and the rest
/// from the other. Parents with fewer than three genes are returned as is.
pub fn crossover<R: Rng + ?Sized>(
    a: &Individual,
    b: &Individual,
    len: usize,
    min_len: usize,
    rng: &mut R,
) -> (Individual, Individual) {
    let genes = a.indices.len();
    if genes < 3 || b.indices.len() != genes {
        return (Individual::new(a.indices.clone()), Individual::new(b.indices.clone()));
    }
    let j = rng.random_range(2..=genes - 1);
    crossover_at(a, b, j, len, min_len)
}

pub(crate) fn crossover_at(
    a: &Individual,
    b: &Individual,
    j: usize,
    len: usize,
    min_len: usize,
) -> (Individual, Individual) {
    let mut c1: Vec<usize> = a.indices[..j].iter().chain(&b.indices[j..]).copied().collect();
    let mut c2: Vec<usize> = b.indices[..j].iter().chain(&a.indices[j..]).copied().collect();
    repair(&mut c1, len, min_len);
    repair(&mut c2, len, min_len);
    (Individual::new(c1), Individual::new(c2))
}

/// Roulette weights: fitness mapped affinely onto `[1, 2]` and normalized
/// to sum to one. Equal fitness gives equal weight.
pub fn selection_probabilities(fitness: &[f64]) -> Vec<f64> {
    if fitness.is_empty() {
        return Vec::new();
    }
    let lo = fitness.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = if hi > lo {
        fitness.iter().map(|f| 1.0 + (f - lo) / (hi - lo)).collect()
    } else {
        vec![1.0; fitness.len()]
    };
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn roulette<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().unwrap();
    let r = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1)
}

/// Keeps the best `ceil(elite_fraction * size)` individuals of `pool` and
/// fills the remaining slots by fitness-proportional draws (with
/// replacement) from the rest of the pool.
pub fn next_generation<R: Rng + ?Sized>(
    pool: Vec<Individual>,
    elite_fraction: f64,
    size: usize,
    rng: &mut R,
) -> Vec<Individual> {
    let fitness: Vec<f64> = pool.iter().map(|i| i.fitness).collect();
    select(&fitness, elite_fraction, size, rng)
        .into_iter()
        .map(|i| pool[i].clone())
        .collect()
}

/// Pool positions of the next generation, best first.
fn select<R: Rng + ?Sized>(fitness: &[f64], elite_fraction: f64, size: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    // best first; ties keep pool order
    let by_rank = |a: &usize, b: &usize| fitness[*b].total_cmp(&fitness[*a]).then(a.cmp(b));
    let elite = ((elite_fraction * size as f64 - 1e-9).ceil() as usize).clamp(1, size);
    if order.len() <= elite || elite == size {
        order.sort_unstable_by(by_rank);
        order.truncate(size);
        return order;
    }
    order.select_nth_unstable_by(elite, by_rank);
    order[..elite].sort_unstable_by(by_rank);
    let rest = order.split_off(elite);
    let probs = selection_probabilities(&rest.iter().map(|&i| fitness[i]).collect::<Vec<_>>());
    let cumulative: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let mut next = order;
    while next.len() < size {
        next.push(rest[roulette(&cumulative, rng)]);
    }
    next
}

/// Change in the alternating sum when `parent` becomes `child`; only the
/// segments touching a moved boundary are rescored.
fn mutation_delta(scorer: &SegmentScorer, parent: &[usize], child: &[usize]) -> f64 {
    let Some(lo) = parent.iter().zip(child).position(|(a, b)| a != b) else {
        return 0.0;
    };
    let hi = parent.len()
        - 1
        - parent
            .iter()
            .rev()
            .zip(child.iter().rev())
            .position(|(a, b)| a != b)
            .unwrap();
    let n = scorer.len();
    let bound = |ind: &[usize], j: usize| {
        if j == 0 {
            0
        } else if j > ind.len() {
            n
        } else {
            ind[j - 1]
        }
    };
    let mut delta = 0.0;
    for seg in lo..=hi + 1 {
        let sign = if seg % 2 == 0 { 1.0 } else { -1.0 };
        let new = scorer.score(bound(child, seg), bound(child, seg + 1));
        let old = scorer.score(bound(parent, seg), bound(parent, seg + 1));
        delta += sign * (new - old);
    }
    delta
}

/// Best individual found and the best-so-far fitness after each generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaResult {
    pub k: usize,
    pub best: Individual,
    pub history: Vec<f64>,
}

/// Searches `k`-segment divisions of `vel` maximizing the better-phase
/// objective. Deterministic in `(cfg.seed, k)`.
pub fn ga_optimize(vel: &VelocitySeries, k: usize, cfg: &GaConfig) -> Result<GaResult> {
    cfg.validate()?;
    let n = vel.len();
    let m = cfg.min_segment_length;
    if k < 2 {
        return Err(invalid("genetic search needs k >= 2"));
    }
    if k * m > n {
        return Err(Error::Infeasible {
            segments: k,
            min_len: m,
            len: n,
        });
    }
    let scorer = SegmentScorer::new(vel);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(k as u64);

    let size = cfg.population_size;
    let genes = k - 1;
    // individuals live in one flat buffer, `genes` indices each
    let mut population: Vec<usize> = Vec::with_capacity(size * genes);
    // signed alternating sums; fitness is the better of the two label phases
    let mut signed: Vec<f64> = Vec::with_capacity(size);
    for _ in 0..size {
        let ind = random_individual(n, k, m, &mut rng);
        signed.push(scorer.alternating_sum(&ind.indices));
        population.extend(ind.indices);
    }
    let mut fitness: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
    let first = (0..size).fold(0, |b, i| if fitness[i] > fitness[b] { i } else { b });
    let mut best = Individual {
        indices: population[first * genes..(first + 1) * genes].to_vec(),
        fitness: fitness[first],
    };
    let mut history = Vec::with_capacity(cfg.generations);
    let mut order: Vec<usize> = (0..size).collect();
    let mut next_population = Vec::with_capacity(size * genes);

    for _ in 0..cfg.generations {
        for p in 0..size {
            if rng.random_bool(cfg.mutation_rate) {
                let start = population.len();
                population.extend_from_within(p * genes..(p + 1) * genes);
                mutate_in_place(&mut population[start..], n, m, &mut rng);
                let (parents, child) = population.split_at(start);
                let value = signed[p] + mutation_delta(&scorer, &parents[p * genes..(p + 1) * genes], child);
                signed.push(value);
            }
        }
        if genes >= 3 {
            order.shuffle(&mut rng);
            for pair in order.chunks_exact(2) {
                if rng.random_bool(cfg.crossover_rate) {
                    let (a, b) = (pair[0] * genes, pair[1] * genes);
                    let j = rng.random_range(2..=genes - 1);
                    let start = population.len();
                    population.extend_from_within(a..a + j);
                    population.extend_from_within(b + j..b + genes);
                    population.extend_from_within(b..b + j);
                    population.extend_from_within(a + j..a + genes);
                    repair(&mut population[start..start + genes], n, m);
                    repair(&mut population[start + genes..], n, m);
                    signed.push(scorer.alternating_sum(&population[start..start + genes]));
                    signed.push(scorer.alternating_sum(&population[start + genes..]));
                }
            }
        }
        fitness.clear();
        fitness.extend(signed.iter().map(|v| v.abs()));

        let chosen = select(&fitness, cfg.elite_fraction, size, &mut rng);
        next_population.clear();
        for &i in &chosen {
            next_population.extend_from_slice(&population[i * genes..(i + 1) * genes]);
        }
        std::mem::swap(&mut population, &mut next_population);
        signed = chosen.iter().map(|&i| signed[i]).collect();

        // selection puts the generation's best first
        if signed[0].abs() > best.fitness {
            best = Individual {
                indices: population[..genes].to_vec(),
                fitness: signed[0].abs(),
            };
        }
        history.push(best.fitness);
    }
    // incremental updates may drift in the last bits
    best.fitness = scorer.alternating_sum(&best.indices).abs();
    Ok(GaResult { k, best, history })
}
