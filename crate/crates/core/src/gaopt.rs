//! Queen-based genetic search over tuples of codebook indices.
//!
//! Each iteration evaluates a population of `S` genomes, keeps the best one
//! seen so far (the Queen), and builds the next population from the Queen,
//! `J` mutants of the Queen, and `S − J − 1` fresh uniform draws. There is no
//! crossover. The objective is supplied by the caller and maximized.
//!
//! [`exhaustive_optimize`] enumerates the whole search space and serves as the
//! reference the GA is checked against.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::{neighbors, BeamIndex};
use crate::error::{Error, Result};

/// Largest search space [`exhaustive_optimize`] agrees to enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    /// Genomes evaluated per iteration, `S`.
    pub population_size: usize,
    /// Mutants generated around the Queen per iteration, `J`.
    pub elite_children: usize,
    /// How far (in codebook steps) a mutation may move a beam.
    pub neighbor_radius: usize,
    pub iterations: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: 8,
            elite_children: 3,
            neighbor_radius: 1,
            iterations: 150,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::key("ga.population_size", "must be at least 1"));
        }
        if self.elite_children == 0 {
            return Err(Error::key("ga.elite_children", "must be at least 1"));
        }
        if self.elite_children >= self.population_size {
            return Err(Error::key(
                "ga.elite_children",
                format!(
                    "must be below population_size ({}) so that S - J - 1 >= 0",
                    self.population_size
                ),
            ));
        }
        if self.neighbor_radius == 0 {
            return Err(Error::key("ga.neighbor_radius", "must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(Error::key("ga.iterations", "must be at least 1"));
        }
        Ok(())
    }

    /// Uniform draws per iteration after the first, `S − J − 1`.
    pub fn random_children(&self) -> usize {
        self.population_size - self.elite_children - 1
    }
}

/// One candidate: a beam index per slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Genome(pub Vec<BeamIndex>);

impl Genome {
    pub fn indices(&self) -> &[BeamIndex] {
        &self.0
    }

    fn random<R: Rng + ?Sized>(rng: &mut R, length: usize, codebook_size: usize) -> Self {
        Genome((0..length).map(|_| BeamIndex(rng.random_range(0..codebook_size))).collect())
    }
}

/// Best objective value after each iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTrace(pub Vec<f64>);

impl ConvergenceTrace {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[1] >= w[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    /// The Queen after the last iteration.
    pub genome: Genome,
    pub value: f64,
    pub trace: ConvergenceTrace,
}

/// Runs the Queen GA for `params.iterations` iterations and returns the best
/// genome ever evaluated. On equal values the incumbent Queen is kept.
pub fn ga_optimize<F, R>(
    mut objective: F,
    genome_length: usize,
    codebook_size: usize,
    params: &GaParams,
    rng: &mut R,
) -> Result<GaOutcome>
where
    F: FnMut(&Genome) -> f64,
    R: Rng + ?Sized,
{
    params.validate()?;
    if genome_length == 0 {
        return Err(Error::InvalidConfig("genome length must be at least 1".into()));
    }
    // fails early when the codebook is too small for the mutation radius
    neighbors(BeamIndex(0), params.neighbor_radius, codebook_size)?;

    // neighbor lists per beam, shared by every mutation
    let neighborhood: Vec<Vec<BeamIndex>> = (0..codebook_size)
        .map(|q| neighbors(BeamIndex(q), params.neighbor_radius, codebook_size))
        .collect::<Result<_>>()?;

    let mut population: Vec<Genome> = (0..params.population_size)
        .map(|_| Genome::random(rng, genome_length, codebook_size))
        .collect();
    let mut queen: Option<(Genome, f64)> = None;
    let mut trace = Vec::with_capacity(params.iterations);

    for iteration in 0..params.iterations {
        for genome in population.drain(..) {
            let value = objective(&genome);
            let better = match &queen {
                None => true,
                Some((_, best)) => value > *best,
            };
            if better {
                queen = Some((genome, value));
            }
        }
        let (queen_genome, queen_value) = queen.as_ref().expect("population is never empty");
        trace.push(*queen_value);

        if iteration + 1 == params.iterations {
            break;
        }
        // the Queen itself carries over implicitly; its value is already known
        for _ in 0..params.elite_children {
            let mutant = queen_genome
                .0
                .iter()
                .map(|idx| {
                    let options = &neighborhood[idx.0];
                    options[rng.random_range(0..options.len())]
                })
                .collect();
            population.push(Genome(mutant));
        }
        for _ in 0..params.random_children() {
            population.push(Genome::random(rng, genome_length, codebook_size));
        }
    }

    let (genome, value) = queen.expect("at least one iteration ran");
    Ok(GaOutcome {
        genome,
        value,
        trace: ConvergenceTrace(trace),
    })
}

/// Global maximizer by full enumeration in lexicographic order; the smallest
/// index tuple wins ties.
pub fn exhaustive_optimize<F>(mut objective: F, genome_length: usize, codebook_size: usize) -> Result<(Genome, f64)>
where
    F: FnMut(&Genome) -> f64,
{
    if genome_length == 0 || codebook_size == 0 {
        return Err(Error::InvalidConfig(
            "genome length and codebook size must be at least 1".into(),
        ));
    }
    let space = u32::try_from(genome_length)
        .ok()
        .and_then(|len| (codebook_size as u64).checked_pow(len));
    match space {
        Some(n) if n <= EXHAUSTIVE_LIMIT => {}
        _ => {
            return Err(Error::InvalidInput(format!(
                "search space {codebook_size}^{genome_length} exceeds the exhaustive limit of {EXHAUSTIVE_LIMIT}"
            )))
        }
    }

    let mut current = Genome(vec![BeamIndex(0); genome_length]);
    let mut best = (current.clone(), objective(&current));
    loop {
        // odometer step, last slot fastest
        let mut slot = genome_length;
        loop {
            if slot == 0 {
                return Ok(best);
            }
            slot -= 1;
            current.0[slot].0 += 1;
            if current.0[slot].0 < codebook_size {
                break;
            }
            current.0[slot].0 = 0;
        }
        let value = objective(&current);
        if value > best.1 {
            best = (current.clone(), value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(s: usize, j: usize, iterations: usize) -> GaParams {
        GaParams {
            population_size: s,
            elite_children: j,
            neighbor_radius: 1,
            iterations,
        }
    }

    /// Pseudo-random landscape over genomes, fixed by `salt`.
    fn landscape(salt: u64) -> impl Fn(&Genome) -> f64 {
        move |g: &Genome| {
            let mut h = salt ^ 0x9E37_79B9_7F4A_7C15;
            for idx in g.indices() {
                h = (h ^ idx.0 as u64).wrapping_mul(0x1000_0000_01B3);
                h ^= h >> 29;
            }
            (h % 10_000) as f64
        }
    }

    #[test]
    fn defaults_are_valid() {
        let p = GaParams::default();
        p.validate().unwrap();
        assert_eq!(p.iterations, 150);
        assert_eq!(p.random_children(), 4);
    }

    #[test]
    fn invalid_parameters() {
        assert!(params(4, 4, 10).validate().is_err());
        assert!(params(4, 5, 10).validate().is_err());
        assert!(params(4, 0, 10).validate().is_err());
        assert!(params(4, 2, 0).validate().is_err());
        let mut p = params(4, 3, 10);
        p.validate().unwrap();
        assert_eq!(p.random_children(), 0);
        p.neighbor_radius = 0;
        assert!(p.validate().is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(ga_optimize(|_| 0.0, 1, 8, &params(3, 3, 5), &mut rng).is_err());
        // radius 1 needs at least three beams
        assert!(ga_optimize(|_| 0.0, 1, 2, &params(4, 2, 5), &mut rng).is_err());
        assert!(ga_optimize(|_| 0.0, 0, 8, &params(4, 2, 5), &mut rng).is_err());
    }

    #[test]
    fn matches_exhaustive_on_small_space() {
        let objective = landscape(17);
        let (_, optimum) = exhaustive_optimize(&objective, 1, 8).unwrap();
        // independent brute force over the eight single-beam genomes
        let brute = (0..8)
            .map(|q| objective(&Genome(vec![BeamIndex(q)])))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(optimum, brute);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = ga_optimize(&objective, 1, 8, &params(4, 2, 60), &mut rng).unwrap();
            assert_eq!(out.value, optimum, "seed {seed}");
            assert_eq!(objective(&out.genome), out.value);
        }
    }

    #[test]
    fn constant_objective_settles_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = ga_optimize(|_| 2.5, 3, 16, &GaParams::default(), &mut rng).unwrap();
        assert_eq!(out.trace.values().len(), 150);
        assert!(out.trace.values().iter().all(|&v| v == 2.5));
        assert_eq!(out.value, 2.5);
    }

    #[test]
    fn evaluates_population_size_genomes_per_iteration() {
        let mut calls = 0;
        let p = params(8, 3, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        ga_optimize(
            |_| {
                calls += 1;
                0.0
            },
            2,
            16,
            &p,
            &mut rng,
        )
        .unwrap();
        // first population is S, later ones skip the already-scored Queen
        assert_eq!(calls, 8 + 9 * 7);
    }

    #[test]
    fn same_seed_same_result() {
        let objective = landscape(5);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ga_optimize(&objective, 3, 16, &GaParams::default(), &mut rng).unwrap()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn exhaustive_examples() {
        let (g, v) = exhaustive_optimize(|g| -((g.0[0].0 as f64) - 3.0).abs(), 1, 8).unwrap();
        assert_eq!(g, Genome(vec![BeamIndex(3)]));
        assert_eq!(v, 0.0);

        // separable: best of each coordinate independently
        let weights = [[0.1, 0.9, 0.3, 0.2], [0.5, 0.4, 0.4, 0.8]];
        let (g, v) = exhaustive_optimize(|g| weights[0][g.0[0].0] + weights[1][g.0[1].0], 2, 4).unwrap();
        assert_eq!(g, Genome(vec![BeamIndex(1), BeamIndex(3)]));
        assert!((v - 1.7).abs() < 1e-12);

        // all ties: lexicographically smallest
        let (g, _) = exhaustive_optimize(|_| 1.0, 3, 5).unwrap();
        assert_eq!(g, Genome(vec![BeamIndex(0); 3]));
    }

    #[test]
    fn exhaustive_refuses_huge_spaces() {
        assert!(exhaustive_optimize(|_| 0.0, 4, 64).is_err());
        assert!(exhaustive_optimize(|_| 0.0, 2, 1000).is_ok());
        assert!(exhaustive_optimize(|_| 0.0, 0, 8).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn trace_never_decreases_and_never_beats_exhaustive(seed in any::<u64>(), salt in any::<u64>(), len in 1usize..=3) {
            let objective = landscape(salt);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = ga_optimize(&objective, len, 12, &params(6, 2, 40), &mut rng).unwrap();
            prop_assert!(out.trace.is_non_decreasing());
            prop_assert_eq!(out.trace.values().len(), 40);
            prop_assert_eq!(*out.trace.values().last().unwrap(), out.value);
            let (_, optimum) = exhaustive_optimize(&objective, len, 12).unwrap();
            prop_assert!(out.value <= optimum);
        }
    }
}
