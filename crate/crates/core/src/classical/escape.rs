use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::dynamics::{classical_step, ClassicalPoint};
use crate::fit::weighted_least_squares;
use crate::maps::Opening;
use crate::{Error, Result};

pub const MIN_SAMPLES: usize = 10_000;
pub const MIN_STEPS: usize = 10;
pub const BOOTSTRAP_REPLICATES: usize = 200;
/// Stream reserved for the bootstrap; particle streams use their index.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeEstimate {
    /// Classical escape rate `γ_cl`.
    pub gamma: f64,
    pub stderr: f64,
    pub samples: usize,
    pub steps: usize,
    /// `survivors[t]` particles are still inside after `t` steps.
    pub survivors: Vec<u64>,
}

/// Escape rate from a uniform ensemble.
///
/// Each particle draws its initial point from its own ChaCha8 stream keyed
/// by `(seed, index)`, so the result does not depend on scheduling. The rate
/// is the slope of `ln S(t)` over `t ∈ [steps/2, steps]`, weighted by the
/// survivor counts. The standard error comes from a multinomial bootstrap of
/// the escape-time histogram.
///
/// Dyadic steps are exact in floating point but consume one mantissa bit
/// each, so `steps` beyond about 50 is meaningless for the dyadic family.
pub fn escape_rate_mc(opening: Opening, samples: usize, steps: usize, seed: u64) -> Result<EscapeEstimate> {
    opening.validate()?;
    if samples < MIN_SAMPLES {
        return Err(Error::Config(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if steps < MIN_STEPS {
        return Err(Error::Config(format!("need at least {MIN_STEPS} steps, got {steps}")));
    }

    let escape_times: Vec<usize> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut x = ClassicalPoint::new(rng.random::<f64>(), rng.random::<f64>()).expect("finite sample");
            for t in 0..steps {
                let (y, escaped) = classical_step(x, opening);
                if escaped {
                    return t;
                }
                x = y;
            }
            steps
        })
        .collect();

    // histogram[t] = escapes during step t; histogram[steps] = survivors
    let mut histogram = vec![0u64; steps + 1];
    for t in escape_times {
        histogram[t] += 1;
    }
    let survivors = survivor_curve(&histogram);
    if survivors[steps] == 0 {
        let last = survivors.iter().rposition(|&s| s > 0).unwrap_or(0);
        return Err(Error::Numerical(format!(
            "no survivors after step {last} of {steps}; increase samples or reduce steps"
        )));
    }
    let gamma = fit_rate(&survivors, steps)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BOOTSTRAP_STREAM);
    let mut rates = Vec::with_capacity(BOOTSTRAP_REPLICATES);
    for _ in 0..BOOTSTRAP_REPLICATES {
        let resampled = multinomial(&histogram, samples as u64, &mut rng)?;
        let s = survivor_curve(&resampled);
        if s[steps] > 0 {
            rates.push(fit_rate(&s, steps)?);
        }
    }
    if rates.len() < 2 {
        return Err(Error::Numerical("bootstrap produced too few usable replicates".into()));
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (rates.len() - 1) as f64;

    Ok(EscapeEstimate {
        gamma,
        stderr: var.sqrt(),
        samples,
        steps,
        survivors,
    })
}

fn survivor_curve(histogram: &[u64]) -> Vec<u64> {
    let steps = histogram.len() - 1;
    let mut s = vec![0u64; steps + 1];
    let mut alive: u64 = histogram.iter().sum();
    for t in 0..=steps {
        s[t] = alive;
        if t < steps {
            alive -= histogram[t];
        }
    }
    s
}

fn fit_rate(survivors: &[u64], steps: usize) -> Result<f64> {
    let pts: Vec<(f64, f64, f64)> = (steps / 2..=steps)
        .filter(|&t| survivors[t] > 0)
        .map(|t| (t as f64, (survivors[t] as f64).ln(), survivors[t] as f64))
        .collect();
    Ok(-weighted_least_squares(&pts)?.slope)
}

/// Multinomial draw with the empirical cell probabilities, by sequential
/// conditional binomials.
fn multinomial(counts: &[u64], total: u64, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let mut out = vec![0u64; counts.len()];
    let mut remaining_n = total;
    let mut remaining_mass: u64 = counts.iter().sum();
    for (o, &c) in out.iter_mut().zip(counts) {
        if remaining_n == 0 || remaining_mass == 0 {
            break;
        }
        let p = (c as f64 / remaining_mass as f64).min(1.0);
        let draw = Binomial::new(remaining_n, p)
            .map_err(|e| Error::Numerical(format!("bootstrap binomial: {e}")))?
            .sample(rng);
        *o = draw;
        remaining_n -= draw;
        remaining_mass -= c;
    }
    Ok(out)
}
