//! Seeded day-by-day simulation of the two-type process and Monte Carlo
//! ensembles.
//!
//! Randomness for replicate `r` of master seed `s` on day `d` comes from a
//! ChaCha8 stream keyed by `(s, r)` with stream number `d`, so any replicate
//! can be regenerated in isolation and ensembles do not depend on how the
//! replicates are scheduled across threads.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Contamination, InitialPopulation, ModelConfig, OffspringLaw};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("population exploded on day {day}: {population} contaminated exceeds cap {cap}")]
    Explosion { day: usize, population: u64, cap: u64 },
    #[error("invalid simulation request: {0}")]
    Config(String),
    #[error("all {reps} replicates exploded")]
    AllExploded { reps: usize },
    #[error("failed to write output: {0}")]
    Io(String),
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

const KEY_TAG: &[u8; 16] = b"covbranch/day-v1";

/// Random stream for one day of one replicate.
pub fn day_rng(seed: u64, replicate: u64, day: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replicate.to_le_bytes());
    key[16..].copy_from_slice(KEY_TAG);
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(day);
    rng
}

fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p in (0, 1)").sample(rng)
    }
}

/// Uniform draw on `(0, 1]`.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

// Above this many reproducers the untruncated geometric total is drawn as a
// negative binomial in one go instead of one geometric per individual.
const AGGREGATE_THRESHOLD: u64 = 1024;

/// Population size that first went past the cap (saturating).
struct Overflow(u64);

fn add_capped(total: &mut u64, add: u64, cap: u64) -> Result<(), Overflow> {
    let t = total.saturating_add(add);
    if t <= cap {
        *total = t;
        Ok(())
    } else {
        Err(Overflow(t))
    }
}

fn offspring_of_reproducers<R: Rng + ?Sized>(
    law: &OffspringLaw,
    reproducers: u64,
    cap: u64,
    rng: &mut R,
) -> Result<u64, Overflow> {
    // every reproducer contributes at least one
    if reproducers > cap {
        return Err(Overflow(reproducers));
    }
    let mut total = 0u64;
    match law.contamination() {
        Contamination::Finite(masses) => {
            let last = masses.iter().rposition(|&p| p > 0.0).unwrap_or(0);
            let mut remaining = reproducers;
            let mut left: f64 = masses.iter().sum();
            for (i, &pj) in masses.iter().enumerate().take(last + 1) {
                if remaining == 0 {
                    break;
                }
                let count = if i == last {
                    remaining
                } else {
                    binomial(remaining, (pj / left).clamp(0.0, 1.0), rng)
                };
                remaining -= count;
                left -= pj;
                add_capped(&mut total, count.saturating_mul(i as u64 + 1), cap)?;
            }
        }
        Contamination::Geometric { p, truncate: None } if reproducers > AGGREGATE_THRESHOLD => {
            // sum of `r` shifted geometrics = r + NegBin(r, 1 - p), drawn as a gamma-poisson mixture
            let rate = Gamma::new(reproducers as f64, p / (1.0 - p))
                .expect("positive shape and scale")
                .sample(rng);
            let extra = if rate > 0.0 {
                let draw: f64 = Poisson::new(rate).map_err(|_| Overflow(u64::MAX))?.sample(rng);
                draw as u64
            } else {
                0
            };
            add_capped(&mut total, reproducers, cap)?;
            add_capped(&mut total, extra, cap)?;
        }
        Contamination::Geometric { p, truncate } => {
            let log_p = p.ln();
            for _ in 0..reproducers {
                let j = loop {
                    let j = 1 + (open_uniform(rng).ln() / log_p).floor() as u64;
                    match truncate {
                        Some(k) if j > u64::from(*k) => continue,
                        _ => break j,
                    }
                };
                add_capped(&mut total, j, cap)?;
            }
        }
        Contamination::Poisson { lambda, truncate } => {
            let lambda = *lambda;
            let zero = (-lambda).exp();
            let positive = -(-lambda).exp_m1();
            for _ in 0..reproducers {
                let j = loop {
                    // inverse cdf of the zero-truncated Poisson
                    let target = rng.random::<f64>() * positive;
                    let mut j = 1u64;
                    let mut pj = zero * lambda;
                    let mut cum = pj;
                    while cum < target && pj > 0.0 {
                        j += 1;
                        pj *= lambda / j as f64;
                        cum += pj;
                    }
                    match truncate {
                        Some(k) if j > u64::from(*k) => continue,
                        _ => break j,
                    }
                };
                add_capped(&mut total, j, cap)?;
            }
        }
    }
    Ok(total)
}

/// One day of the process: each of the `z1_prev` contaminated individuals is
/// independently registered (probability `q`), leaves (probability `p0`) or
/// contaminates `j` new individuals (probability `p_j`).
///
/// Returns `(z1, z2)` for the new day. `day` only labels the explosion error.
pub fn step<R: Rng + ?Sized>(
    law: &OffspringLaw,
    day: usize,
    z1_prev: u64,
    cap: u64,
    rng: &mut R,
) -> Result<(u64, u64), SimError> {
    if z1_prev == 0 {
        return Ok((0, 0));
    }
    let z2 = binomial(z1_prev, law.q(), rng);
    let rest = z1_prev - z2;
    let contamination = law.contamination_total();
    let stay = law.p0() + contamination;
    let reproducers = if stay > 0.0 {
        binomial(rest, contamination / stay, rng)
    } else {
        0
    };
    let z1 = offspring_of_reproducers(law, reproducers, cap, rng)
        .map_err(|Overflow(population)| SimError::Explosion { day, population, cap })?;
    Ok((z1, z2))
}

fn draw_initial<R: Rng + ?Sized>(init: &InitialPopulation, rng: &mut R) -> u64 {
    if let Some(n) = init.as_fixed() {
        return n;
    }
    let pmf = init.pmf();
    let u = rng.random::<f64>();
    let mut cum = 0.0;
    for &(k, p) in &pmf {
        cum += p;
        if u < cum {
            return k;
        }
    }
    pmf.last().map(|&(k, _)| k).unwrap_or(1)
}

/// One simulated path. Both vectors are indexed by day `0..=days`;
/// `z2[0] = 0` since nobody is registered before the first day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub z1: Vec<u64>,
    pub z2: Vec<u64>,
}

impl Trajectory {
    pub fn days(&self) -> usize {
        self.z1.len().saturating_sub(1)
    }

    /// Registered counts for days `1..=days`.
    pub fn registered(&self) -> &[u64] {
        &self.z2[1..]
    }

    /// CSV with columns `day,z1,z2`, one row per day including day 0.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["day", "z1", "z2"])?;
        for (day, (z1, z2)) in self.z1.iter().zip(&self.z2).enumerate() {
            w.write_record([day.to_string(), z1.to_string(), z2.to_string()])?;
        }
        w.flush().map_err(|e| SimError::Io(e.to_string()))
    }
}

/// Simulates replicate `replicate` of master seed `seed`.
pub fn simulate_replicate(config: &ModelConfig, seed: u64, replicate: u64) -> Result<Trajectory, SimError> {
    if config.days == 0 {
        return Err(SimError::Config("days must be at least 1".into()));
    }
    let mut z1 = Vec::with_capacity(config.days + 1);
    let mut z2 = Vec::with_capacity(config.days + 1);
    let start = draw_initial(&config.init, &mut day_rng(seed, replicate, 0));
    if start > config.cap {
        return Err(SimError::Explosion { day: 0, population: start, cap: config.cap });
    }
    z1.push(start);
    z2.push(0);
    let mut current = start;
    for day in 1..=config.days {
        let mut rng = day_rng(seed, replicate, day as u64);
        let (next, registered) = step(&config.law, day, current, config.cap, &mut rng)?;
        z1.push(next);
        z2.push(registered);
        current = next;
    }
    Ok(Trajectory { z1, z2 })
}

/// Deterministic function of `(config, seed)`; identical to replicate 0 of an
/// ensemble with master seed `seed`.
pub fn simulate_trajectory(config: &ModelConfig, seed: u64) -> Result<Trajectory, SimError> {
    simulate_replicate(config, seed, 0)
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Count histogram of one day across replicates.
#[derive(Debug, Clone, Default)]
struct Histogram(BTreeMap<u64, u64>);

impl Histogram {
    fn add(&mut self, v: u64) {
        *self.0.entry(v).or_insert(0) += 1;
    }

    fn mean(&self, n: u64) -> f64 {
        let mut s = CompensatedSum::default();
        for (&v, &c) in &self.0 {
            s.add(v as f64 * c as f64);
        }
        s.value() / n as f64
    }

    fn variance(&self, n: u64, mean: f64) -> f64 {
        if n < 2 {
            return 0.0;
        }
        let mut s = CompensatedSum::default();
        for (&v, &c) in &self.0 {
            let d = v as f64 - mean;
            s.add(c as f64 * d * d);
        }
        s.value() / (n - 1) as f64
    }

    /// Smallest value whose empirical cdf reaches `p`.
    fn quantile(&self, n: u64, p: f64) -> u64 {
        let rank = ((p * n as f64).ceil() as u64).clamp(1, n);
        let mut cum = 0;
        for (&v, &c) in &self.0 {
            cum += c;
            if cum >= rank {
                return v;
            }
        }
        self.0.keys().next_back().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaySummary {
    pub day: usize,
    pub mean_z1: f64,
    pub mean_z2: f64,
    pub var_z1: f64,
    pub var_z2: f64,
    pub q025: u64,
    pub q50: u64,
    pub q975: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplodedPath {
    pub replicate: u64,
    pub day: usize,
}

/// Aggregate statistics over the non-exploded replicates of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    /// One entry per day `0..=days`.
    pub per_day: Vec<DaySummary>,
    /// Replicates that entered the statistics.
    pub reps: usize,
    pub requested: usize,
    /// Replicates excluded because they exceeded the population cap.
    pub exploded: Vec<ExplodedPath>,
    /// Share of the counted replicates with no contaminated left at the horizon.
    pub extinct_fraction: f64,
}

impl EnsembleSummary {
    /// Standard error of `mean_z1` on `day`.
    pub fn se_z1(&self, day: usize) -> f64 {
        (self.per_day[day].var_z1 / self.reps as f64).sqrt()
    }

    pub fn se_z2(&self, day: usize) -> f64 {
        (self.per_day[day].var_z2 / self.reps as f64).sqrt()
    }

    /// CSV with columns `day,mean_z1,mean_z2,var_z1,q025,q50,q975` for days `1..=days`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["day", "mean_z1", "mean_z2", "var_z1", "q025", "q50", "q975"])?;
        for d in self.per_day.iter().skip(1) {
            w.write_record([
                d.day.to_string(),
                d.mean_z1.to_string(),
                d.mean_z2.to_string(),
                d.var_z1.to_string(),
                d.q025.to_string(),
                d.q50.to_string(),
                d.q975.to_string(),
            ])?;
        }
        w.flush().map_err(|e| SimError::Io(e.to_string()))
    }
}

const CHUNK: usize = 4096;

/// Runs `reps` replicates, in parallel on the current rayon pool, and
/// summarises them. The result depends only on `(config, reps, master_seed)`.
pub fn monte_carlo(config: &ModelConfig, reps: usize, master_seed: u64) -> Result<EnsembleSummary, SimError> {
    if reps == 0 {
        return Err(SimError::Config("reps must be at least 1".into()));
    }
    if config.days == 0 {
        return Err(SimError::Config("days must be at least 1".into()));
    }
    let days = config.days;
    let mut z1_hist = vec![Histogram::default(); days + 1];
    let mut z2_hist = vec![Histogram::default(); days + 1];
    let mut exploded = Vec::new();
    let mut extinct = 0u64;
    let mut counted = 0u64;

    for chunk_start in (0..reps).step_by(CHUNK) {
        let chunk_end = (chunk_start + CHUNK).min(reps);
        let results: Vec<_> = (chunk_start..chunk_end)
            .into_par_iter()
            .map(|r| simulate_replicate(config, master_seed, r as u64))
            .collect();
        for (offset, result) in results.into_iter().enumerate() {
            match result {
                Ok(path) => {
                    counted += 1;
                    if path.z1[days] == 0 {
                        extinct += 1;
                    }
                    for day in 0..=days {
                        z1_hist[day].add(path.z1[day]);
                        z2_hist[day].add(path.z2[day]);
                    }
                }
                Err(SimError::Explosion { day, .. }) => exploded.push(ExplodedPath {
                    replicate: (chunk_start + offset) as u64,
                    day,
                }),
                Err(e) => return Err(e),
            }
        }
    }
    if counted == 0 {
        return Err(SimError::AllExploded { reps });
    }

    let per_day = (0..=days)
        .map(|day| {
            let mean_z1 = z1_hist[day].mean(counted);
            let mean_z2 = z2_hist[day].mean(counted);
            DaySummary {
                day,
                mean_z1,
                mean_z2,
                var_z1: z1_hist[day].variance(counted, mean_z1),
                var_z2: z2_hist[day].variance(counted, mean_z2),
                q025: z1_hist[day].quantile(counted, 0.025),
                q50: z1_hist[day].quantile(counted, 0.5),
                q975: z1_hist[day].quantile(counted, 0.975),
            }
        })
        .collect();
    Ok(EnsembleSummary {
        per_day,
        reps: counted as usize,
        requested: reps,
        exploded,
        extinct_fraction: extinct as f64 / counted as f64,
    })
}
