//! Coherent states on the antiperiodic torus and phase-space grids built from
//! them: Husimi functions, resonance distributions `h_i(q,p)` and the
//! coherent-state autocorrelation `⟨q,p|Ũⁿ|q,p⟩`.
//!
//! Grid cell `(a, b)` is sampled at `q = (a+½)/Nq`, `p = (b+½)/Np` and stored
//! row-major at index `a * Np + b`.

use std::f64::consts::PI;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::linalg::{self, ComplexMatrix};
use crate::maps::{QuantumMap, TorusHilbert};
use crate::spectral::{Resonance, ResonanceSet, OVERLAP_FLOOR};
use crate::{Error, Result};

/// Number of periodic images on each side of the fundamental cell.
pub const IMAGE_RANGE: i32 = 4;
/// Image terms with `πN x² > GAUSSIAN_CUTOFF` are below `e^-50` relative and
/// are skipped on grids.
const GAUSSIAN_CUTOFF: f64 = 50.0;
pub const DEFAULT_GRID: usize = 256;

/// Unit-norm torus coherent state centred at `(q0, p0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub center: (f64, f64),
    pub vector: Vec<C64>,
}

/// Coherent state `|q0,p0⟩` with squeezing 1 and antiperiodic image phases.
pub fn coherent_state(h: TorusHilbert, q0: f64, p0: f64) -> Result<CoherentState> {
    if !(0.0..1.0).contains(&q0) || !(0.0..1.0).contains(&p0) {
        return Err(Error::Domain(format!("coherent-state center ({q0}, {p0}) is outside [0,1)²")));
    }
    Ok(CoherentState {
        center: (q0, p0),
        vector: coherent_amplitudes(h, q0, p0),
    })
}

/// Normalized position amplitudes of `|q0,p0⟩` for any real center.
///
/// Unlike [`coherent_state`] this does not reduce or check the center, so it
/// exposes the torus periodicity directly.
pub fn coherent_amplitudes(h: TorusHilbert, q0: f64, p0: f64) -> Vec<C64> {
    let basis = ImageBasis::new(h, q0, None);
    let (support, mut amp) = basis.state(p0);
    let mut full = vec![C64::new(0.0, 0.0); h.dim()];
    linalg::normalize(&mut amp);
    for (j, a) in support.into_iter().zip(amp) {
        full[j] = a;
    }
    full
}

/// Image-sum terms for one position center. Only the momentum phase depends
/// on `p0`, so a grid row reuses one basis for every column.
struct ImageBasis {
    dim: usize,
    /// `(position index, (−1)^m e^{−πN x²}, x)`, grouped by index.
    terms: Vec<(usize, f64, f64)>,
    support: Vec<usize>,
}

impl ImageBasis {
    fn new(h: TorusHilbert, q0: f64, cutoff: Option<f64>) -> Self {
        let n = h.dim();
        let nf = n as f64;
        let mut terms = Vec::new();
        let mut support = Vec::new();
        for j in 0..n {
            let qj = h.position(j);
            let before = terms.len();
            for m in -IMAGE_RANGE..=IMAGE_RANGE {
                let x = qj + m as f64 - q0;
                let e = PI * nf * x * x;
                if cutoff.is_some_and(|c| e > c) {
                    continue;
                }
                let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                terms.push((j, sign * (-e).exp(), x));
            }
            if terms.len() > before {
                support.push(j);
            }
        }
        Self { dim: n, terms, support }
    }

    /// Unnormalized amplitudes on `support`.
    fn state(&self, p0: f64) -> (Vec<usize>, Vec<C64>) {
        let k = 2.0 * PI * self.dim as f64 * p0;
        let mut amp = Vec::with_capacity(self.support.len());
        let mut cur = usize::MAX;
        for &(j, g, x) in &self.terms {
            let t = C64::from_polar(g, k * x);
            if j == cur {
                *amp.last_mut().expect("open accumulator") += t;
            } else {
                amp.push(t);
                cur = j;
            }
        }
        (self.support.clone(), amp)
    }

    /// Unit-norm amplitudes on `support`.
    fn unit_state(&self, p0: f64) -> Vec<C64> {
        let (_, mut a) = self.state(p0);
        linalg::normalize(&mut a);
        a
    }
}

/// `⟨c|ψ⟩` with `c` given on a support.
fn sparse_overlap(support: &[usize], c: &[C64], psi: &[C64]) -> C64 {
    support.iter().zip(c).map(|(&j, a)| a.conj() * psi[j]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub nq: usize,
    pub np: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nq: DEFAULT_GRID,
            np: DEFAULT_GRID,
        }
    }
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        Self { nq: n, np: n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nq == 0 || self.np == 0 {
            return Err(Error::Config(format!("grid {}x{} is empty", self.nq, self.np)));
        }
        Ok(())
    }

    pub fn q(&self, a: usize) -> f64 {
        (a as f64 + 0.5) / self.nq as f64
    }

    pub fn p(&self, b: usize) -> f64 {
        (b as f64 + 0.5) / self.np as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Husimi,
    HusimiR,
    HusimiL,
    HDistribution,
    Autocorrelation,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Husimi => "husimi",
            GridKind::HusimiR => "husimiR",
            GridKind::HusimiL => "husimiL",
            GridKind::HDistribution => "hDistribution",
            GridKind::Autocorrelation => "autocorrelation",
        }
    }
}

/// Which state of a resonance a Husimi grid is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HusimiSide {
    Plain,
    Right,
    Left,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridMeta {
    pub dim: usize,
    pub resonance_index: Option<usize>,
    pub iteration: Option<u32>,
    pub lambda: Option<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub spec: GridSpec,
    pub values: Vec<C64>,
    pub kind: GridKind,
    pub meta: GridMeta,
}

impl PhaseGrid {
    pub fn nq(&self) -> usize {
        self.spec.nq
    }

    pub fn np(&self) -> usize {
        self.spec.np
    }

    pub fn at(&self, a: usize, b: usize) -> C64 {
        self.values[a * self.spec.np + b]
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg()).collect()
    }

    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() / self.values.len() as f64
    }

    /// Cell `(a, b)` of the largest modulus; first one wins on ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, v) in self.values.iter().enumerate() {
            let m = v.norm();
            if m > best.1 {
                best = (i, m);
            }
        }
        (best.0 / self.spec.np, best.0 % self.spec.np)
    }

    /// Cell containing the point `(q, p)` after reduction mod 1.
    pub fn cell_of(&self, q: f64, p: f64) -> (usize, usize) {
        let a = ((q.rem_euclid(1.0) * self.spec.nq as f64).floor() as usize).min(self.spec.nq - 1);
        let b = ((p.rem_euclid(1.0) * self.spec.np as f64).floor() as usize).min(self.spec.np - 1);
        (a, b)
    }
}

/// Evaluates `f(support, coherent amplitudes)` at every grid cell, in parallel
/// over rows. Each cell is computed independently with a fixed summation
/// order.
fn map_grid<F>(h: TorusHilbert, grid: GridSpec, f: F) -> Vec<C64>
where
    F: Fn(&[usize], &[C64]) -> C64 + Sync,
{
    let rows: Vec<Vec<C64>> = (0..grid.nq)
        .into_par_iter()
        .map(|a| {
            let basis = ImageBasis::new(h, grid.q(a), Some(GAUSSIAN_CUTOFF));
            (0..grid.np)
                .map(|b| f(&basis.support, &basis.unit_state(grid.p(b))))
                .collect()
        })
        .collect();
    rows.concat()
}

fn check_vector(h: TorusHilbert, psi: &[C64]) -> Result<()> {
    if psi.len() != h.dim() {
        return Err(Error::Config(format!(
            "state of length {} on a dimension-{} space",
            psi.len(),
            h.dim()
        )));
    }
    Ok(())
}

/// Husimi function `|⟨q,p|ψ⟩|²` on a grid.
pub fn husimi(h: TorusHilbert, psi: &[C64], grid: GridSpec, side: HusimiSide) -> Result<PhaseGrid> {
    grid.validate()?;
    check_vector(h, psi)?;
    let values = map_grid(h, grid, |s, c| C64::new(sparse_overlap(s, c, psi).norm_sqr(), 0.0));
    let kind = match side {
        HusimiSide::Plain => GridKind::Husimi,
        HusimiSide::Right => GridKind::HusimiR,
        HusimiSide::Left => GridKind::HusimiL,
    };
    Ok(PhaseGrid {
        spec: grid,
        values,
        kind,
        meta: GridMeta {
            dim: h.dim(),
            ..Default::default()
        },
    })
}

fn check_overlap(r: &Resonance) -> Result<()> {
    if r.near_defective() {
        return Err(Error::NearDefective(format!(
            "|⟨ψL|ψR⟩| = {:.3e} ≤ {OVERLAP_FLOOR:e} for λ = {}",
            r.overlap.norm(),
            r.lambda
        )));
    }
    Ok(())
}

/// `h(q,p) = ⟨q,p|ψR⟩⟨ψL|q,p⟩ / ⟨ψL|ψR⟩` on a grid.
pub fn h_distribution(r: &Resonance, h: TorusHilbert, grid: GridSpec) -> Result<PhaseGrid> {
    grid.validate()?;
    check_vector(h, &r.right)?;
    check_overlap(r)?;
    let inv = 1.0 / r.overlap;
    let values = map_grid(h, grid, |s, c| {
        sparse_overlap(s, c, &r.right) * sparse_overlap(s, c, &r.left).conj() * inv
    });
    Ok(PhaseGrid {
        spec: grid,
        values,
        kind: GridKind::HDistribution,
        meta: GridMeta {
            dim: h.dim(),
            lambda: Some(r.lambda),
            ..Default::default()
        },
    })
}

/// Direct `⟨q,p|Ũⁿ|q,p⟩` on a grid, from the matrix power.
pub fn autocorrelation(map: &QuantumMap, n: u32, grid: GridSpec) -> Result<PhaseGrid> {
    grid.validate()?;
    let power = checked_power(map, n)?;
    let h = map.hilbert();
    let pf = power.as_faer();
    let rows: Vec<Vec<C64>> = (0..grid.nq)
        .into_par_iter()
        .map(|a| {
            let basis = ImageBasis::new(h, grid.q(a), Some(GAUSSIAN_CUTOFF));
            let s = &basis.support;
            let mut c = Mat::<C64>::zeros(s.len(), grid.np);
            for b in 0..grid.np {
                for (i, v) in basis.unit_state(grid.p(b)).into_iter().enumerate() {
                    c[(i, b)] = v;
                }
            }
            let w = Mat::<C64>::from_fn(s.len(), s.len(), |i, j| pf[(s[i], s[j])]);
            let mut y = Mat::<C64>::zeros(s.len(), grid.np);
            matmul(y.as_mut(), Accum::Replace, w.as_ref(), c.as_ref(), C64::new(1.0, 0.0), Par::Seq);
            (0..grid.np)
                .map(|b| (0..s.len()).map(|i| c[(i, b)].conj() * y[(i, b)]).sum())
                .collect()
        })
        .collect();
    Ok(PhaseGrid {
        spec: grid,
        values: rows.concat(),
        kind: GridKind::Autocorrelation,
        meta: GridMeta {
            dim: h.dim(),
            iteration: Some(n),
            ..Default::default()
        },
    })
}

fn checked_power(map: &QuantumMap, n: u32) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Domain("autocorrelation needs n ≥ 1".into()));
    }
    map.matrix().pow(n)
}

/// Direct `⟨q,p|Ũⁿ|q,p⟩` at arbitrary points.
pub fn autocorrelation_at(map: &QuantumMap, n: u32, points: &[(f64, f64)]) -> Result<Vec<C64>> {
    let power = checked_power(map, n)?;
    let h = map.hilbert();
    points
        .iter()
        .map(|&(q, p)| {
            let c = coherent_state(h, q, p)?.vector;
            Ok(linalg::inner(&c, &power.matvec(&c)?))
        })
        .collect()
}

/// `Σ_i λ_iⁿ h_i(q,p)` over the retained resonances at arbitrary points.
/// Null modes contribute exactly zero for `n ≥ 1`.
///
/// Near-defective resonances are included, since the identity needs every
/// term; only an exactly vanishing overlap is refused.
pub fn spectral_autocorrelation_at(set: &ResonanceSet, n: u32, points: &[(f64, f64)]) -> Result<Vec<C64>> {
    if n == 0 {
        return Err(Error::Domain("spectral sum needs n ≥ 1".into()));
    }
    if let Some(r) = set.resonances().iter().find(|r| r.overlap == C64::new(0.0, 0.0)) {
        return Err(Error::NearDefective(format!("⟨ψL|ψR⟩ = 0 for λ = {}", r.lambda)));
    }
    let h = set.hilbert();
    points
        .iter()
        .map(|&(q, p)| {
            let c = coherent_state(h, q, p)?.vector;
            Ok(set
                .resonances()
                .iter()
                .map(|r| {
                    let hv = linalg::inner(&c, &r.right) * linalg::inner(&r.left, &c) / r.overlap;
                    r.lambda.powu(n) * hv
                })
                .sum())
        })
        .collect()
}
