use std::collections::BTreeSet;

use num_rational::Ratio;

use super::dynamics::ClassicalPoint;
use crate::{Error, Result};

const MAX_RUN_LIMIT: u32 = 16;
const MAX_PERIOD: usize = 20;
const ENTROPY_TOLERANCE: f64 = 1e-12;
const MAX_POWER_ITERATIONS: usize = 1_000_000;

/// Binary shift pruned of the runs `0^l` and `1^l`.
///
/// States are words of length `l − 1`, encoded as integers with the oldest
/// symbol in the most significant bit.
#[derive(Debug, Clone)]
pub struct SymbolicSystem {
    run_limit: u32,
    /// Successor states of each state.
    successors: Vec<Vec<usize>>,
    leading_eigenvalue: f64,
}

impl SymbolicSystem {
    pub fn run_limit(&self) -> u32 {
        self.run_limit
    }

    pub fn state_count(&self) -> usize {
        self.successors.len()
    }

    pub fn transition(&self, from: usize, to: usize) -> bool {
        self.successors[from].contains(&to)
    }

    pub fn successors(&self, state: usize) -> &[usize] {
        &self.successors[state]
    }

    pub fn leading_eigenvalue(&self) -> f64 {
        self.leading_eigenvalue
    }

    /// Topological entropy `λ_T = ln ρ(T)`.
    pub fn entropy(&self) -> f64 {
        self.leading_eigenvalue.ln()
    }
}

/// Transition matrix of the shift pruned of `0^l` and `1^l`.
pub fn transition_matrix(l: u32) -> Result<SymbolicSystem> {
    if !(2..=MAX_RUN_LIMIT).contains(&l) {
        return Err(Error::Config(format!("run limit must be in 2..={MAX_RUN_LIMIT}, got {l}")));
    }
    let width = l - 1;
    let states = 1usize << width;
    let mask = states - 1;
    let full = (1usize << l) - 1;
    let successors: Vec<Vec<usize>> = (0..states)
        .map(|w| {
            (0..2)
                .filter_map(|bit| {
                    let word = (w << 1) | bit;
                    (word != 0 && word != full).then_some(word & mask)
                })
                .collect()
        })
        .collect();
    let leading_eigenvalue = perron_root(&successors)?;
    Ok(SymbolicSystem {
        run_limit: l,
        successors,
        leading_eigenvalue,
    })
}

/// Perron root by power iteration on `T + I`, which is aperiodic even when
/// `T` is not.
fn perron_root(successors: &[Vec<usize>]) -> Result<f64> {
    let n = successors.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut estimate = 0.0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let mut w = v.clone();
        for (i, succ) in successors.iter().enumerate() {
            for &j in succ {
                w[j] += v[i];
            }
        }
        let sum: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= sum);
        let next = sum / v.iter().sum::<f64>() - 1.0;
        // the mass ratio can stall for a step before the vector settles
        let shift = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let top = w.iter().cloned().fold(0.0, f64::max);
        v = w;
        if (next - estimate).abs() <= ENTROPY_TOLERANCE * next.abs() && shift <= ENTROPY_TOLERANCE * top {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Numerical("power iteration for the transition matrix did not converge".into()))
}

/// Orbit point with exact rational coordinates in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactPoint {
    pub q: Ratio<u64>,
    pub p: Ratio<u64>,
}

impl ExactPoint {
    pub fn to_point(self) -> ClassicalPoint {
        let f = |r: Ratio<u64>| *r.numer() as f64 / *r.denom() as f64;
        ClassicalPoint::new(f(self.q), f(self.p)).expect("rational coordinates are finite")
    }

    /// Closed dyadic baker step in exact arithmetic.
    pub fn dyadic_step(self) -> Self {
        let two = Ratio::from_integer(2u64);
        let q2 = self.q * two;
        let digit = q2.floor();
        Self {
            q: q2 - digit,
            p: (self.p + digit) / two,
        }
    }
}

/// Periodic orbit of the binary shift, given by its primitive itinerary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicOrbit {
    pub itinerary: Vec<u8>,
    /// `points[k]` has future `itinerary[k..]` and past `itinerary[..k]`
    /// reversed, both repeated periodically.
    pub points: Vec<ExactPoint>,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.itinerary.len()
    }
}

/// Periodic orbits whose period divides `n`, one per primitive cyclic word.
///
/// `run_limit = Some(l)` keeps only itineraries whose periodic extension
/// avoids `0^l` and `1^l`; `None` keeps the full shift. The constant
/// itineraries `0` and `1` both land on the torus point `(0, 0)`.
pub fn periodic_orbits(n: usize, run_limit: Option<u32>) -> Result<Vec<PeriodicOrbit>> {
    if !(1..=MAX_PERIOD).contains(&n) {
        return Err(Error::Config(format!("period must be in 1..={MAX_PERIOD}, got {n}")));
    }
    if let Some(l) = run_limit {
        if l < 2 {
            return Err(Error::Config(format!("run limit must be at least 2, got {l}")));
        }
    }
    let mut roots = BTreeSet::new();
    for code in 0u32..(1 << n) {
        let word: Vec<u8> = (0..n).map(|i| ((code >> (n - 1 - i)) & 1) as u8).collect();
        let root = primitive_root(&word);
        if run_limit.is_none_or(|l| cyclic_allowed(&root, l as usize)) {
            roots.insert(canonical_rotation(&root));
        }
    }
    Ok(roots
        .into_iter()
        .map(|itinerary| {
            let points = (0..itinerary.len()).map(|k| orbit_point(&itinerary, k)).collect();
            PeriodicOrbit { itinerary, points }
        })
        .collect())
}

fn primitive_root(word: &[u8]) -> Vec<u8> {
    let n = word.len();
    (1..=n)
        .find(|&d| n.is_multiple_of(d) && (0..n).all(|i| word[i] == word[i % d]))
        .map(|d| word[..d].to_vec())
        .expect("the word itself is a period")
}

fn canonical_rotation(word: &[u8]) -> Vec<u8> {
    (0..word.len())
        .map(|r| word[r..].iter().chain(&word[..r]).copied().collect::<Vec<u8>>())
        .min()
        .expect("non-empty word")
}

fn cyclic_allowed(word: &[u8], l: usize) -> bool {
    let n = word.len();
    if word.iter().all(|&s| s == word[0]) {
        return false;
    }
    (0..n).all(|start| (1..l).any(|k| word[(start + k) % n] != word[start]))
}

fn orbit_point(word: &[u8], k: usize) -> ExactPoint {
    let d = word.len();
    let denom = (1u64 << d) - 1;
    let future = (0..d).fold(0u64, |acc, i| (acc << 1) | word[(k + i) % d] as u64);
    let past = (0..d).fold(0u64, |acc, i| (acc << 1) | word[(k + d - 1 - i) % d] as u64);
    // 0.(1…1) repeated is 1 ≡ 0 on the torus
    let frac = |v: u64| Ratio::new(v % denom, denom);
    ExactPoint {
        q: frac(future),
        p: frac(past),
    }
}
