//! Genetic-algorithm feature selection.
//!
//! A chromosome is one bit per gene of a [`GeneCatalogue`]; its fitness is
//! the mean span F-measure of k-fold cross-validation, training a CRF on
//! the selected macros. Each generation keeps the elite, then fills the
//! pool with size-2 tournament selection, single-point crossover and
//! per-bit mutation. The run stops at `max_generations` or once the best
//! fitness has not changed for `stagnation_generations` generations.
//!
//! Every random draw comes from a ChaCha stream keyed by
//! `(seed, generation, slot)`, and fitness evaluation itself is
//! deterministic, so parallel evaluation never changes the result.

use std::collections::HashMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::Sentence;
use crate::crf::{tag_sentence, train, TrainConfig};
use crate::error::{Error, Result};
use crate::evaluation::{score, Mode};
use crate::features::{build_frequency_table, refresh_frequency_bins, BioTag};
use crate::template::{chromosome_to_template, GeneCatalogue};

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub bits: Vec<bool>,
    /// Mean fold F-measure, once evaluated.
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(bits: Vec<bool>) -> Self {
        Chromosome { bits, fitness: None }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `0`/`1` string, gene 0 first.
    pub fn bit_string(&self) -> String {
        bits_to_string(&self.bits)
    }

    fn fitness_or_zero(&self) -> f64 {
        self.fitness.unwrap_or(0.0)
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn bits_from_string(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Input(format!("invalid bit {other:?}"))),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / chromosome length`.
    pub mutation_rate: Option<f64>,
    pub elitism_count: usize,
    pub max_generations: usize,
    pub stagnation_generations: usize,
    pub folds: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 20,
            crossover_rate: 0.8,
            mutation_rate: None,
            elitism_count: 2,
            max_generations: 50,
            stagnation_generations: 5,
            folds: 3,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if self.elitism_count >= self.population_size {
            return bad("elitism_count must be smaller than population_size");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate must lie in [0, 1]");
        }
        if let Some(r) = self.mutation_rate {
            if !(0.0..=1.0).contains(&r) {
                return bad("mutation_rate must lie in [0, 1]");
            }
        }
        if self.max_generations == 0 {
            return bad("max_generations must be positive");
        }
        if self.stagnation_generations == 0 {
            return bad("stagnation_generations must be positive");
        }
        if self.folds == 0 {
            return bad("folds must be positive");
        }
        Ok(())
    }

    pub fn mutation_rate_for(&self, length: usize) -> f64 {
        self.mutation_rate.unwrap_or(1.0 / length.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_bits: Vec<bool>,
}

/// Random stream for one `(generation, slot)` pair.
pub fn rng_for(seed: u64, generation: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((generation << 32) | (slot & 0xffff_ffff));
    rng
}

/// Partition sentence indices into `k` folds with balanced token counts:
/// seeded shuffle, then largest sentence first into the lightest fold.
/// Indices inside each fold are sorted.
pub fn fold_indices(lengths: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Input("number of folds must be positive".into()));
    }
    if lengths.len() < k {
        return Err(Error::Input(format!(
            "cannot split {} sentences into {k} folds",
            lengths.len()
        )));
    }
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.shuffle(&mut rng_for(seed, u64::MAX >> 32, 0));
    order.sort_by(|&a, &b| lengths[b].cmp(&lengths[a]));
    let mut folds = vec![Vec::new(); k];
    let mut load = vec![0usize; k];
    for i in order {
        let lightest = (0..k).min_by_key(|&f| (load[f], f)).expect("k > 0");
        load[lightest] += lengths[i];
        folds[lightest].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// `k` disjoint sentence lists covering the corpus.
pub fn split_folds(corpus: &[Sentence], k: usize, seed: u64) -> Result<Vec<Vec<Sentence>>> {
    let lengths: Vec<usize> = corpus.iter().map(Vec::len).collect();
    Ok(fold_indices(&lengths, k, seed)?
        .into_iter()
        .map(|idx| idx.into_iter().map(|i| corpus[i].clone()).collect())
        .collect())
}

/// Train/test material for one fold. The frequency-bin column of both
/// sides is recomputed from the training side's words.
pub fn fold_partition(corpus: &[Sentence], folds: &[Vec<usize>], test_fold: usize) -> (Vec<Sentence>, Vec<Sentence>) {
    let mut train: Vec<Sentence> = if folds.len() == 1 {
        folds[0].iter().map(|&i| corpus[i].clone()).collect()
    } else {
        folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != test_fold)
            .flat_map(|(_, idx)| idx.iter().map(|&i| corpus[i].clone()))
            .collect()
    };
    let mut test: Vec<Sentence> = folds[test_fold].iter().map(|&i| corpus[i].clone()).collect();
    let table = build_frequency_table(train.iter().flatten().map(|r| r.word.as_str()));
    for s in train.iter_mut().chain(test.iter_mut()) {
        refresh_frequency_bins(s, &table);
    }
    (train, test)
}

/// Mean span F-measure over the folds (train on the others, test on
/// one). With a single fold the model is scored on its training data.
/// An all-zero chromosome scores 0 without training.
pub fn evaluate_fitness(
    bits: &[bool],
    corpus: &[Sentence],
    catalogue: &GeneCatalogue,
    folds: &[Vec<usize>],
    train_config: &TrainConfig,
) -> Result<f64> {
    let template = chromosome_to_template(bits, catalogue)?;
    if !bits.iter().any(|&b| b) {
        return Ok(0.0);
    }
    if folds.is_empty() {
        return Err(Error::Input("no folds given".into()));
    }
    let mut total = 0.0;
    for f in 0..folds.len() {
        let (train_set, test_set) = fold_partition(corpus, folds, f);
        let model = train(&train_set, &template, train_config)?;
        let gold: Vec<Vec<BioTag>> = test_set.iter().map(|s| s.iter().map(|r| r.label).collect()).collect();
        let predicted = test_set
            .iter()
            .map(|s| tag_sentence(&model, s))
            .collect::<Result<Vec<_>>>()?;
        total += score(&gold, &predicted, Mode::Span)?.f_measure;
    }
    Ok(total / folds.len() as f64)
}

/// Uniform random bit strings; all-zero draws are redrawn.
pub fn initialize_population(config: &GaConfig, length: usize) -> Vec<Chromosome> {
    assert!(length > 0, "chromosome length must be positive");
    (0..config.population_size)
        .map(|slot| {
            let mut rng = rng_for(config.seed, 0, slot as u64);
            loop {
                let bits: Vec<bool> = (0..length).map(|_| rng.random_bool(0.5)).collect();
                if bits.iter().any(|&b| b) {
                    break Chromosome::new(bits);
                }
            }
        })
        .collect()
}

/// Size-2 tournament; ties go to the first draw.
pub fn select_parent<'a, R: Rng>(pool: &'a [Chromosome], rng: &mut R) -> &'a Chromosome {
    assert!(!pool.is_empty(), "selection pool is empty");
    let first = &pool[rng.random_range(0..pool.len())];
    let second = &pool[rng.random_range(0..pool.len())];
    if second.fitness_or_zero() > first.fitness_or_zero() {
        second
    } else {
        first
    }
}

/// Swap tails at `point` (bits `point..` are exchanged).
pub fn crossover_at(a: &Chromosome, b: &Chromosome, point: usize) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() {
        return Err(Error::Input(format!("parent lengths differ: {} vs {}", a.len(), b.len())));
    }
    let point = point.min(a.len());
    let mut x = a.bits[..point].to_vec();
    x.extend_from_slice(&b.bits[point..]);
    let mut y = b.bits[..point].to_vec();
    y.extend_from_slice(&a.bits[point..]);
    Ok((Chromosome::new(x), Chromosome::new(y)))
}

/// Single-point crossover with probability `rate`, otherwise copies.
pub fn crossover<R: Rng>(a: &Chromosome, b: &Chromosome, rate: f64, rng: &mut R) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() {
        return Err(Error::Input(format!("parent lengths differ: {} vs {}", a.len(), b.len())));
    }
    if a.len() >= 2 && rng.random_bool(rate) {
        let point = rng.random_range(1..a.len());
        crossover_at(a, b, point)
    } else {
        Ok((Chromosome::new(a.bits.clone()), Chromosome::new(b.bits.clone())))
    }
}

/// Flip each bit with probability `rate`; an all-zero result gets one
/// random bit set.
pub fn mutate<R: Rng>(c: &Chromosome, rate: f64, rng: &mut R) -> Chromosome {
    let mut bits: Vec<bool> = c.bits.iter().map(|&b| b ^ rng.random_bool(rate)).collect();
    if !bits.is_empty() && !bits.iter().any(|&b| b) {
        let i = rng.random_range(0..bits.len());
        bits[i] = true;
    }
    Chromosome::new(bits)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Chromosome,
    pub history: Vec<GenerationRecord>,
    /// Number of distinct chromosomes actually trained.
    pub evaluations: usize,
}

/// Run the search from a random initial population.
pub fn run_ga(
    corpus: &[Sentence],
    catalogue: &GeneCatalogue,
    config: &GaConfig,
    train_config: &TrainConfig,
) -> Result<GaOutcome> {
    let initial = initialize_population(config, catalogue.len());
    run_ga_from(corpus, catalogue, config, train_config, initial, |_| {})
}

/// Run the search from `initial`, calling `on_generation` after each
/// generation is recorded.
pub fn run_ga_from<F>(
    corpus: &[Sentence],
    catalogue: &GeneCatalogue,
    config: &GaConfig,
    train_config: &TrainConfig,
    initial: Vec<Chromosome>,
    mut on_generation: F,
) -> Result<GaOutcome>
where
    F: FnMut(&GenerationRecord),
{
    config.validate()?;
    train_config.validate()?;
    if initial.len() != config.population_size {
        return Err(Error::Input(format!(
            "initial population has {} members, expected {}",
            initial.len(),
            config.population_size
        )));
    }
    if let Some(c) = initial.iter().find(|c| c.len() != catalogue.len()) {
        return Err(Error::Input(format!(
            "chromosome has {} bits but the catalogue has {} genes",
            c.len(),
            catalogue.len()
        )));
    }
    let lengths: Vec<usize> = corpus.iter().map(Vec::len).collect();
    let folds = fold_indices(&lengths, config.folds, config.seed)?;
    let mutation_rate = config.mutation_rate_for(catalogue.len());

    let mut memo: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut pool = initial;
    let mut history: Vec<GenerationRecord> = Vec::new();
    let mut best: Option<Chromosome> = None;
    let mut unchanged = 0;

    for generation in 0..config.max_generations {
        let mut pending: Vec<Vec<bool>> = Vec::new();
        for c in &pool {
            if !memo.contains_key(&c.bits) && !pending.contains(&c.bits) {
                pending.push(c.bits.clone());
            }
        }
        let scores = pending
            .par_iter()
            .map(|bits| evaluate_fitness(bits, corpus, catalogue, &folds, train_config))
            .collect::<Result<Vec<f64>>>()?;
        memo.extend(pending.into_iter().zip(scores));
        for c in &mut pool {
            c.fitness = Some(memo[&c.bits]);
        }

        let (best_idx, _) = pool
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bf), (i, c)| {
                let f = c.fitness_or_zero();
                if f > bf { (i, f) } else { (bi, bf) }
            });
        let record = GenerationRecord {
            generation,
            best_fitness: pool[best_idx].fitness_or_zero(),
            mean_fitness: pool.iter().map(Chromosome::fitness_or_zero).sum::<f64>() / pool.len() as f64,
            best_bits: pool[best_idx].bits.clone(),
        };
        if best.as_ref().is_none_or(|b| record.best_fitness > b.fitness_or_zero()) {
            best = Some(pool[best_idx].clone());
        }
        if let Some(prev) = history.last() {
            if prev.best_fitness == record.best_fitness {
                unchanged += 1;
            } else {
                unchanged = 0;
            }
        }
        on_generation(&record);
        history.push(record);
        if unchanged >= config.stagnation_generations || generation + 1 == config.max_generations {
            break;
        }

        let mut ranked: Vec<&Chromosome> = pool.iter().collect();
        ranked.sort_by(|a, b| b.fitness_or_zero().total_cmp(&a.fitness_or_zero()));
        let mut next: Vec<Chromosome> = ranked[..config.elitism_count].iter().map(|c| (*c).clone()).collect();
        let mut slot = 0u64;
        while next.len() < config.population_size {
            let mut rng = rng_for(config.seed, generation as u64 + 1, slot);
            slot += 1;
            let a = select_parent(&pool, &mut rng);
            let b = select_parent(&pool, &mut rng);
            let (x, y) = crossover(a, b, config.crossover_rate, &mut rng)?;
            for child in [x, y] {
                if next.len() < config.population_size {
                    next.push(mutate(&child, mutation_rate, &mut rng));
                }
            }
        }
        pool = next;
    }

    Ok(GaOutcome {
        best: best.expect("at least one generation runs"),
        history,
        evaluations: memo.len(),
    })
}

pub const HISTORY_HEADER: [&str; 4] = ["generation", "best_fitness", "mean_fitness", "best_bits"];

/// CSV with header `generation,best_fitness,mean_fitness,best_bits`.
pub fn write_history_csv<W: Write>(history: &[GenerationRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HISTORY_HEADER).map_err(csv_error)?;
    for r in history {
        w.write_record([
            r.generation.to_string(),
            r.best_fitness.to_string(),
            r.mean_fitness.to_string(),
            bits_to_string(&r.best_bits),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_csv<R: Read>(source: R) -> Result<Vec<GenerationRecord>> {
    let mut r = csv::Reader::from_reader(source);
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != HISTORY_HEADER {
        return Err(Error::parse(1, format!("unexpected history header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_error)?;
        let field = |k: usize| rec.get(k).ok_or_else(|| Error::parse(line, "missing field"));
        let num = |k: usize| -> Result<f64> {
            field(k)?.parse().map_err(|_| Error::parse(line, format!("bad number in column {}", HISTORY_HEADER[k])))
        };
        out.push(GenerationRecord {
            generation: field(0)?.parse().map_err(|_| Error::parse(line, "bad generation index"))?,
            best_fitness: num(1)?,
            mean_fitness: num(2)?,
            best_bits: bits_from_string(field(3)?).map_err(|e| Error::parse(line, e.to_string()))?,
        });
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use crate::features::{TokenRecord, COL_DIGIT, FEATURE_COLUMNS};

    use proptest::prelude::*;

    fn chrom(s: &str, fitness: Option<f64>) -> Chromosome {
        Chromosome { bits: bits_from_string(s).unwrap(), fitness }
    }

    #[test]
    fn folds_balance_equal_sentences() {
        let folds = fold_indices(&[5; 9], 3, 1).unwrap();
        assert!(folds.iter().all(|f| f.len() == 3));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn single_fold_is_corpus() {
        let folds = fold_indices(&[3, 1, 4], 1, 9).unwrap();
        assert_eq!(folds, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn too_few_sentences() {
        assert!(matches!(fold_indices(&[3, 1], 3, 0), Err(Error::Input(_))));
        assert!(fold_indices(&[3], 0, 0).is_err());
    }

    #[test]
    fn folds_deterministic_per_seed() {
        let lengths: Vec<usize> = (0..50).map(|i| 1 + (i * 7) % 13).collect();
        assert_eq!(fold_indices(&lengths, 3, 4).unwrap(), fold_indices(&lengths, 3, 4).unwrap());
    }

    #[test]
    fn crossover_at_point_three() {
        let (x, y) = crossover_at(&chrom("11111111", None), &chrom("00000000", None), 3).unwrap();
        assert_eq!(x.bit_string(), "11100000");
        assert_eq!(y.bit_string(), "00011111");
    }

    #[test]
    fn crossover_identical_parents() {
        let mut rng = rng_for(1, 2, 3);
        let p = chrom("10110", None);
        for _ in 0..20 {
            let (x, y) = crossover(&p, &p, 1.0, &mut rng).unwrap();
            assert_eq!(x.bits, p.bits);
            assert_eq!(y.bits, p.bits);
        }
    }

    #[test]
    fn crossover_length_mismatch() {
        let mut rng = rng_for(0, 0, 0);
        assert!(crossover(&chrom("10", None), &chrom("101", None), 1.0, &mut rng).is_err());
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = rng_for(0, 0, 0);
        let c = chrom("0101", Some(3.0));
        assert_eq!(mutate(&c, 0.0, &mut rng).bits, c.bits);
        assert_eq!(mutate(&c, 1.0, &mut rng).bit_string(), "1010");
        let z = mutate(&chrom("1111", None), 1.0, &mut rng);
        assert_eq!(z.count_ones(), 1);
    }

    #[test]
    fn mutation_flip_count_binomial() {
        let mut rng = rng_for(42, 0, 0);
        let rate = 1.0 / 38.0;
        let c = Chromosome::new(vec![true; 38]);
        let trials = 10_000;
        let flips: usize = (0..trials)
            .map(|_| 38 - mutate(&c, rate, &mut rng).count_ones())
            .sum();
        let n = (trials * 38) as f64;
        let mean = n * rate;
        let sd = (n * rate * (1.0 - rate)).sqrt();
        assert!((flips as f64 - mean).abs() < 3.0 * sd, "{flips} vs {mean}±{sd}");
    }

    #[test]
    fn tournament_single_member() {
        let pool = vec![chrom("1", Some(1.0))];
        let mut rng = rng_for(0, 0, 0);
        assert_eq!(select_parent(&pool, &mut rng), &pool[0]);
    }

    #[test]
    fn tournament_fitter_always_wins() {
        let pool = vec![chrom("10", Some(10.0)), chrom("01", Some(90.0))];
        let mut rng = rng_for(5, 0, 0);
        let mut weak = 0;
        for _ in 0..10_000 {
            // replay the two draws to see what the tournament contained
            let mut probe = rng.clone();
            let i = probe.random_range(0..2);
            let j = probe.random_range(0..2);
            let winner = select_parent(&pool, &mut rng);
            if i != j {
                assert_eq!(winner.fitness, Some(90.0));
            }
            if winner.fitness == Some(10.0) {
                weak += 1;
            }
        }
        // weak one wins only when drawn twice: probability 1/4
        assert!((weak as f64 - 2500.0).abs() < 3.0 * (10_000f64 * 0.25 * 0.75).sqrt());
    }

    #[test]
    fn tournament_uniform_when_tied() {
        let pool: Vec<Chromosome> = (0..4).map(|i| Chromosome { bits: vec![i % 2 == 0, i >= 2], fitness: Some(5.0) }).collect();
        let mut rng = rng_for(8, 0, 0);
        let mut counts = [0usize; 4];
        for _ in 0..10_000 {
            let w = select_parent(&pool, &mut rng);
            counts[pool.iter().position(|c| c.bits == w.bits).unwrap()] += 1;
        }
        let sd = (10_000f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 2500.0).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn population_initialization() {
        let config = GaConfig { seed: 17, ..GaConfig::default() };
        let a = initialize_population(&config, 38);
        assert_eq!(a, initialize_population(&config, 38));
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|c| c.len() == 38 && !c.is_all_zero()));
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        let c = GaConfig { elitism_count: 20, ..GaConfig::default() };
        assert!(c.validate().is_err());
        let c = GaConfig { crossover_rate: 1.5, ..GaConfig::default() };
        assert!(c.validate().is_err());
        assert!((GaConfig::default().mutation_rate_for(38) - 1.0 / 38.0).abs() < 1e-15);
    }

    #[test]
    fn history_csv_round_trip() {
        let history = vec![
            GenerationRecord { generation: 0, best_fitness: 50.125, mean_fitness: 20.0 / 3.0, best_bits: vec![true, false] },
            GenerationRecord { generation: 1, best_fitness: 60.0, mean_fitness: 30.0, best_bits: vec![true, true] },
        ];
        let mut buf = Vec::new();
        write_history_csv(&history, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("generation,best_fitness,mean_fitness,best_bits\n0,50.125,"));
        assert_eq!(read_history_csv(buf.as_slice()).unwrap(), history);
        assert!(read_history_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    fn digit_row(digit: bool, label: BioTag) -> TokenRecord {
        let mut cells = vec!["w".to_string(); FEATURE_COLUMNS];
        for c in &mut cells[12..21] {
            *c = "0".into();
        }
        cells[COL_DIGIT] = if digit { "1".into() } else { "0".into() };
        let refs: Vec<&str> = cells.iter().map(String::as_str).collect();
        TokenRecord::from_cells(&refs, label).unwrap()
    }

    #[test]
    fn all_zero_chromosome_scores_zero() {
        let cat = GeneCatalogue::default();
        let corpus = vec![vec![digit_row(true, BioTag::Begin)]; 3];
        let folds = fold_indices(&[1, 1, 1], 3, 0).unwrap();
        assert_eq!(evaluate_fitness(&[false; 38], &corpus, &cat, &folds, &TrainConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn constant_pool_stops_by_stagnation() {
        let cat = GeneCatalogue::default();
        let corpus: Vec<Sentence> = (0..6)
            .map(|i| vec![digit_row(false, BioTag::O), digit_row(true, BioTag::Begin), digit_row(i % 2 == 0, if i % 2 == 0 { BioTag::Begin } else { BioTag::O })])
            .collect();
        let mut bits = vec![false; 38];
        bits[cat.position("digit").unwrap()] = true;
        let config = GaConfig {
            population_size: 4,
            crossover_rate: 0.0,
            mutation_rate: Some(0.0),
            elitism_count: 1,
            max_generations: 50,
            stagnation_generations: 3,
            folds: 3,
            seed: 1,
        };
        let initial = vec![Chromosome::new(bits.clone()); 4];
        let tc = TrainConfig { max_iterations: 50, ..TrainConfig::default() };
        let out = run_ga_from(&corpus, &cat, &config, &tc, initial, |_| {}).unwrap();
        assert_eq!(out.history.len(), 4);
        assert!(out.history.windows(2).all(|w| w[0].best_fitness == w[1].best_fitness));
        assert_eq!(out.evaluations, 1);
        assert_eq!(out.best.bits, bits);
    }

    proptest! {
        #[test]
        fn crossover_conserves_positions(
            pair in (1usize..40).prop_flat_map(|n| (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n))),
            seed in any::<u64>(),
        ) {
            let (a, b) = (Chromosome::new(pair.0), Chromosome::new(pair.1));
            let mut rng = rng_for(seed, 0, 0);
            let (x, y) = crossover(&a, &b, 0.8, &mut rng).unwrap();
            prop_assert_eq!(x.len(), a.len());
            prop_assert_eq!(y.len(), a.len());
            for i in 0..a.len() {
                let mut before = [a.bits[i], b.bits[i]];
                let mut after = [x.bits[i], y.bits[i]];
                before.sort();
                after.sort();
                prop_assert_eq!(before, after);
            }
            let m = mutate(&x, 0.3, &mut rng);
            prop_assert_eq!(m.len(), x.len());
            prop_assert!(!m.is_all_zero());
        }

        #[test]
        fn folds_partition(lengths in prop::collection::vec(1usize..30, 3..60), k in 1usize..4, seed in any::<u64>()) {
            let folds = fold_indices(&lengths, k, seed).unwrap();
            prop_assert_eq!(folds.len(), k);
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..lengths.len()).collect::<Vec<_>>());
        }

        #[test]
        fn initial_members_never_all_zero(seed in any::<u64>(), length in 1usize..6) {
            let config = GaConfig { seed, population_size: 8, elitism_count: 1, ..GaConfig::default() };
            prop_assert!(initialize_population(&config, length).iter().all(|c| !c.is_all_zero()));
        }
    }
}
