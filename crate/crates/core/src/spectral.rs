//! Resonance spectra of open maps.
//!
//! The open map `Ũ = U Π` has exact zero columns on the escape region. In the
//! (kept, escaped) position split it is block lower triangular,
//!
//! ```text
//! Ũ = [ A  0 ]    A = U[K,K],  B = U[Z,K]
//!     [ B  0 ]
//! ```
//!
//! so its nonzero spectrum is the spectrum of `A`. Right eigenvectors extend
//! as `(x, B x / λ)`, left eigenvectors as `(y, 0)`, and the escaped basis
//! vectors span the exact null space. Left and right vectors of `A` come from
//! one Schur decomposition, so they are paired by construction.

use std::f64::consts::TAU;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64 as C64;

use crate::fit::{least_squares, LineFit};
use crate::linalg::{self, eigen_left_right, inner, ComplexMatrix};
use crate::maps::{
    fourier_kernel, parity_apply, time_reversal_with_kernel, MapFamily, MapKind, Opening, QuantumMap,
    TorusHilbert,
};
use crate::{Error, Result};

/// Eigenvalues with modulus below this are counted as null modes.
pub const DEFAULT_NULL_THRESHOLD: f64 = 1e-8;
/// Resonances with `|⟨ψL|ψR⟩|` at or below this are near-defective.
pub const OVERLAP_FLOOR: f64 = 1e-10;
/// Eigenvalues closer than this to another one are flagged.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Tolerance on `‖Rψ ∓ ψ‖` for a definite parity label.
pub const PARITY_TOLERANCE: f64 = 1e-6;
/// Moduli may exceed 1 by this much before `decay_rate` rejects them.
pub const UNIT_CIRCLE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOptions {
    pub null_threshold: f64,
    /// Fail when the right-eigenvector condition number exceeds this.
    /// `None` only records the condition number.
    pub max_condition: Option<f64>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            null_threshold: DEFAULT_NULL_THRESHOLD,
            max_condition: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Mixed => "mixed",
        }
    }
}

/// One eigenvalue of the open map with its unit-norm right and left states.
#[derive(Debug, Clone)]
pub struct Resonance {
    pub lambda: C64,
    /// `ν = |λ|`
    pub modulus: f64,
    /// `Γ = −ln |λ|²`
    pub gamma: f64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    /// `s = ⟨ψL|ψR⟩`
    pub overlap: C64,
    pub tau: f64,
    pub parity: Parity,
    /// Another eigenvalue lies within [`DEGENERACY_GAP`].
    pub near_degenerate: bool,
}

impl Resonance {
    pub fn near_defective(&self) -> bool {
        self.overlap.norm() <= OVERLAP_FLOOR
    }

    /// Any quality warning attached to this resonance.
    pub fn flagged(&self) -> bool {
        self.near_degenerate || self.near_defective()
    }
}

/// Metadata of the map a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSummary {
    pub hilbert: TorusHilbert,
    pub family: MapFamily,
    pub kind: MapKind,
    pub opening: Option<Opening>,
    /// Number of exactly-zero columns, `tr(Π_o)` for a projector opening.
    pub escape_trace: usize,
}

#[derive(Debug, Clone)]
pub struct ResonanceSet {
    resonances: Vec<Resonance>,
    null_dim: usize,
    v_condition: f64,
    null_threshold: f64,
    source: MapSummary,
}

impl ResonanceSet {
    /// Retained resonances, by descending modulus then ascending `arg λ ∈ [0, 2π)`.
    pub fn resonances(&self) -> &[Resonance] {
        &self.resonances
    }

    pub fn len(&self) -> usize {
        self.resonances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resonances.is_empty()
    }

    pub fn null_dim(&self) -> usize {
        self.null_dim
    }

    /// 2-norm condition number of the unit-column right-eigenvector matrix.
    pub fn v_condition(&self) -> f64 {
        self.v_condition
    }

    pub fn null_threshold(&self) -> f64 {
        self.null_threshold
    }

    pub fn source(&self) -> &MapSummary {
        &self.source
    }

    pub fn hilbert(&self) -> TorusHilbert {
        self.source.hilbert
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.resonances.iter().map(|r| r.lambda).collect()
    }

    /// Number of resonances with `|λ| ≥ threshold`.
    pub fn weyl_count(&self, threshold: f64) -> usize {
        weyl_count(self, threshold)
    }

    /// `Σ_i λ_i |ψR_i⟩⟨ψL_i| / s_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.source.hilbert.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for r in &self.resonances {
            let w = r.lambda / r.overlap;
            for j in 0..n {
                let lj = r.left[j].conj() * w;
                if lj == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..n {
                    let v = out.get(i, j) + r.right[i] * lj;
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Largest `|⟨ψL_i|ψR_j⟩|` over `i ≠ j`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.resonances.iter().enumerate() {
            for (j, b) in self.resonances.iter().enumerate() {
                if i != j {
                    worst = worst.max(inner(&a.left, &b.right).norm());
                }
            }
        }
        worst
    }

    /// Least-squares slope of `ln τ` against `ln |λ|` over resonances with
    /// `|λ| > min_modulus`.
    pub fn tau_fit(&self, min_modulus: f64) -> Result<LineFit> {
        let pts: Vec<(f64, f64)> = self
            .resonances
            .iter()
            .filter(|r| r.modulus > min_modulus && r.tau > 0.0)
            .map(|r| (r.modulus.ln(), r.tau.ln()))
            .collect();
        least_squares(&pts)
    }
}

/// Full eigendecomposition of a (possibly open) quantum map.
pub fn resonances(map: &QuantumMap, options: &SpectralOptions) -> Result<ResonanceSet> {
    let eps = options.null_threshold;
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("null threshold must be positive, got {eps}")));
    }
    let m = map.matrix();
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::Config("map matrix is not square".into()));
    }
    let hilbert = map.hilbert();

    let (zero_cols, kept): (Vec<usize>, Vec<usize>) = (0..n).partition(|&j| m.column_is_zero(j));
    let nk = kept.len();
    let a = Mat::<C64>::from_fn(nk, nk, |i, j| m.get(kept[i], kept[j]));
    let eig = eigen_left_right(a.as_ref())?;

    let retained: Vec<usize> = (0..nk).filter(|&k| eig.values[k].norm() >= eps).collect();
    let null_dim = n - retained.len();

    // right vectors on the escaped rows: B x / λ
    let b = Mat::<C64>::from_fn(zero_cols.len(), nk, |i, j| m.get(zero_cols[i], kept[j]));
    let mut bx = Mat::<C64>::zeros(zero_cols.len(), nk);
    matmul(
        bx.as_mut(),
        Accum::Replace,
        b.as_ref(),
        eig.right.as_ref(),
        C64::new(1.0, 0.0),
        Par::Seq,
    );

    let mut rights = Vec::with_capacity(retained.len());
    let mut lefts = Vec::with_capacity(retained.len());
    for &k in &retained {
        let lam = eig.values[k];
        let mut r = vec![C64::new(0.0, 0.0); n];
        let mut l = vec![C64::new(0.0, 0.0); n];
        for (i, &row) in kept.iter().enumerate() {
            r[row] = eig.right[(i, k)];
            l[row] = eig.left[(i, k)];
        }
        for (i, &row) in zero_cols.iter().enumerate() {
            r[row] = bx[(i, k)] / lam;
        }
        if linalg::normalize(&mut r) == 0.0 || linalg::normalize(&mut l) == 0.0 {
            return Err(Error::Numerical(format!("zero eigenvector for eigenvalue {lam}")));
        }
        rights.push(r);
        lefts.push(l);
    }

    let v_condition = right_condition(n, &kept, &zero_cols, &eig.right, &retained, &rights)?;
    if let Some(limit) = options.max_condition {
        if v_condition > limit {
            return Err(Error::Numerical(format!(
                "right-eigenvector condition {v_condition:.3e} exceeds {limit:.3e}; spectrum is near-defective"
            )));
        }
    }

    let kernel = fourier_kernel(n);
    let values: Vec<C64> = retained.iter().map(|&k| eig.values[k]).collect();
    let mut out = Vec::with_capacity(retained.len());
    for (idx, (r, l)) in rights.into_iter().zip(lefts).enumerate() {
        let lambda = values[idx];
        let modulus = lambda.norm();
        let gamma = decay_rate(lambda)?;
        let overlap = inner(&l, &r);
        let tau = tau_with_kernel(&kernel, &r, &l)?;
        let parity = parity_of(&r);
        let near_degenerate = values
            .iter()
            .enumerate()
            .any(|(j, &mu)| j != idx && (mu - lambda).norm() < DEGENERACY_GAP);
        out.push(Resonance {
            lambda,
            modulus,
            gamma,
            right: r,
            left: l,
            overlap,
            tau,
            parity,
            near_degenerate,
        });
    }
    sort_resonances(&mut out);

    Ok(ResonanceSet {
        resonances: out,
        null_dim,
        v_condition,
        null_threshold: eps,
        source: MapSummary {
            hilbert,
            family: map.family(),
            kind: map.kind(),
            opening: map.opening(),
            escape_trace: zero_cols.len(),
        },
    })
}

fn right_condition(
    n: usize,
    kept: &[usize],
    zero_cols: &[usize],
    block_right: &Mat<C64>,
    retained: &[usize],
    rights: &[Vec<C64>],
) -> Result<f64> {
    let mut v = Mat::<C64>::zeros(n, n);
    let mut col = 0;
    for r in rights {
        for (i, &x) in r.iter().enumerate() {
            v[(i, col)] = x;
        }
        col += 1;
    }
    // numerically-null eigenvectors of the kept block, padded with zeros
    let mut is_retained = vec![false; kept.len()];
    for &k in retained {
        is_retained[k] = true;
    }
    for (k, &ret) in is_retained.iter().enumerate() {
        if ret {
            continue;
        }
        let norm: f64 = (0..kept.len()).map(|i| block_right[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for (i, &row) in kept.iter().enumerate() {
            v[(row, col)] = block_right[(i, k)] / norm;
        }
        col += 1;
    }
    for &z in zero_cols {
        v[(z, col)] = C64::new(1.0, 0.0);
        col += 1;
    }
    debug_assert_eq!(col, n);
    let s = linalg::singular_values(v.as_ref())?;
    let (max, min) = (s[0], s[s.len() - 1]);
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

fn parity_of(r: &[C64]) -> Parity {
    let mirrored = parity_apply(r);
    let dist = |sign: f64| -> f64 {
        mirrored
            .iter()
            .zip(r)
            .map(|(a, b)| (a - b * sign).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    if dist(1.0) < PARITY_TOLERANCE {
        Parity::Even
    } else if dist(-1.0) < PARITY_TOLERANCE {
        Parity::Odd
    } else {
        Parity::Mixed
    }
}

fn sort_resonances(list: &mut [Resonance]) {
    // moduli are bucketed so conjugate pairs tie and fall back to the angle
    let key = |r: &Resonance| -> (i64, f64) {
        let bucket = (r.modulus * 1e12).round() as i64;
        (bucket, r.lambda.arg().rem_euclid(TAU))
    };
    list.sort_by(|a, b| {
        let (ma, pa) = key(a);
        let (mb, pb) = key(b);
        mb.cmp(&ma).then(pa.total_cmp(&pb))
    });
}

/// `Γ = −ln |λ|²`.
///
/// Moduli up to `1 + UNIT_CIRCLE_SLACK` are accepted and give `Γ = 0`, so
/// that unitary spectra with rounding above the circle are usable.
pub fn decay_rate(lambda: C64) -> Result<f64> {
    let m = lambda.norm();
    if m == 0.0 || !m.is_finite() {
        return Err(Error::Domain("decay rate of a null mode is undefined".into()));
    }
    if m > 1.0 + UNIT_CIRCLE_SLACK {
        return Err(Error::Domain(format!("|λ| = {m} lies outside the unit circle")));
    }
    Ok((-2.0 * m.ln()).max(0.0))
}

/// Null-space dimension of a resonance set.
pub fn null_space_dim(set: &ResonanceSet) -> usize {
    set.null_dim()
}

/// Time-reversal measure `τ = |⟨ψR| K G |ψL⟩|`.
pub fn tau_measure(resonance: &Resonance, hilbert: TorusHilbert) -> Result<f64> {
    tau_with_kernel(&fourier_kernel(hilbert.dim()), &resonance.right, &resonance.left)
}

fn tau_with_kernel(kernel: &ComplexMatrix, right: &[C64], left: &[C64]) -> Result<f64> {
    let t_left = time_reversal_with_kernel(kernel, left)?;
    Ok(inner(right, &t_left).norm())
}

/// Number of resonances with `|λ| ≥ threshold`.
pub fn weyl_count(set: &ResonanceSet, threshold: f64) -> usize {
    set.resonances.iter().filter(|r| r.modulus >= threshold).count()
}

/// Scaling fit of long-lived resonance counts against `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylFit {
    pub points: Vec<(usize, usize)>,
    /// Slope of `ln N_γ` against `ln N`.
    pub exponent: f64,
    pub threshold: f64,
    /// `exponent + 1`
    pub dimension_estimate: f64,
}

/// Least-squares exponent of `N_γ ∝ N^exponent`.
pub fn weyl_fit(counts: &[(usize, usize)], threshold: f64) -> Result<WeylFit> {
    let mut distinct: Vec<usize> = counts.iter().map(|c| c.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Domain(format!(
            "Weyl fit needs at least 3 distinct N, got {}",
            distinct.len()
        )));
    }
    if let Some(&(n, _)) = counts.iter().find(|c| c.1 == 0) {
        return Err(Error::Domain(format!(
            "no resonances above {threshold} at N = {n}; lower the threshold"
        )));
    }
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .map(|&(n, c)| ((n as f64).ln(), (c as f64).ln()))
        .collect();
    let fit = least_squares(&pts)?;
    Ok(WeylFit {
        points: counts.to_vec(),
        exponent: fit.slope,
        threshold,
        dimension_estimate: fit.slope + 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{baker_closed, parity_operator};

    fn open_dyadic(n: usize, l: u32) -> QuantumMap {
        QuantumMap::open_baker(TorusHilbert::new(n).unwrap(), MapFamily::Dyadic, Opening::Dyadic { depth: l })
            .unwrap()
    }

    fn closed(n: usize) -> QuantumMap {
        baker_closed(TorusHilbert::new(n).unwrap(), MapFamily::Dyadic).unwrap()
    }

    #[test]
    fn decay_rate_values() {
        assert_eq!(decay_rate(C64::new(1.0, 0.0)).unwrap(), 0.0);
        let g = decay_rate(C64::from_polar(1.0 / 3f64.sqrt(), 0.7)).unwrap();
        assert!((g - 3f64.ln()).abs() < 1e-14);
        let g = decay_rate(C64::new(0.977, 0.0)).unwrap();
        assert!((g - 0.046_532).abs() < 1e-5);
        assert!(decay_rate(C64::new(0.0, 0.0)).is_err());
        assert!(decay_rate(C64::new(1.01, 0.0)).is_err());
    }

    #[test]
    fn closed_spectrum_is_unimodular() {
        let set = resonances(&closed(64), &SpectralOptions::default()).unwrap();
        assert_eq!(set.null_dim(), 0);
        assert_eq!(set.len(), 64);
        for r in set.resonances() {
            assert!((r.modulus - 1.0).abs() < 1e-10);
            assert!(!r.flagged());
        }
        assert!(set.v_condition() < 1e3);
        let rec = set.reconstruct().sub(closed(64).matrix()).unwrap().max_abs();
        assert!(rec < 1e-8);
    }

    #[test]
    fn closed_tau_is_one() {
        let set = resonances(&closed(64), &SpectralOptions::default()).unwrap();
        for r in set.resonances() {
            assert!((r.tau - 1.0).abs() < 1e-6, "tau = {}", r.tau);
            let t = tau_measure(r, set.hilbert()).unwrap();
            assert!((t - r.tau).abs() < 1e-12);
        }
    }

    #[test]
    fn resonance_invariants_small_open_map() {
        let map = open_dyadic(64, 3);
        let set = resonances(&map, &SpectralOptions::default()).unwrap();
        assert!(set.null_dim() >= 16);
        assert_eq!(set.source().escape_trace, 16);
        assert_eq!(set.len() + set.null_dim(), 64);
        for r in set.resonances() {
            assert!(r.modulus < 1.0);
            assert!(r.gamma >= 0.0);
            assert!((r.modulus.powi(2) - (-r.gamma).exp()).abs() < 1e-12);
            assert!((linalg::norm(&r.right) - 1.0).abs() < 1e-12);
            assert!((linalg::norm(&r.left) - 1.0).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&r.tau));
        }
        assert!(set.biorthogonality_defect() < 1e-8);
    }

    #[test]
    fn eigen_equations_hold_for_leading_resonances() {
        let map = open_dyadic(128, 3);
        let set = resonances(&map, &SpectralOptions::default()).unwrap();
        let m = map.matrix();
        let madj = m.adjoint();
        for r in &set.resonances()[..10] {
            let ar = m.matvec(&r.right).unwrap();
            let res_r = ar.iter().zip(&r.right).map(|(x, y)| (x - r.lambda * y).norm()).fold(0.0, f64::max);
            let al = madj.matvec(&r.left).unwrap();
            let res_l = al
                .iter()
                .zip(&r.left)
                .map(|(x, y)| (x - r.lambda.conj() * y).norm())
                .fold(0.0, f64::max);
            assert!(res_r < 1e-12 && res_l < 1e-12, "{res_r} {res_l}");
        }
    }

    #[test]
    fn parity_labels_are_definite_for_symmetric_openings() {
        let map = open_dyadic(64, 3);
        let set = resonances(&map, &SpectralOptions::default()).unwrap();
        let r_op = parity_operator(set.hilbert());
        for r in set.resonances().iter().filter(|r| r.modulus > 1e-3) {
            assert_ne!(r.parity, Parity::Mixed, "|λ| = {}", r.modulus);
            let sign = if r.parity == Parity::Even { 1.0 } else { -1.0 };
            let rr = r_op.matvec(&r.right).unwrap();
            assert!(rr.iter().zip(&r.right).all(|(a, b)| (a - b * sign).norm() < 1e-6));
        }
    }

    #[test]
    fn sorted_by_modulus_then_angle() {
        let set = resonances(&open_dyadic(128, 2), &SpectralOptions::default()).unwrap();
        for w in set.resonances().windows(2) {
            assert!(w[0].modulus >= w[1].modulus - 1e-12);
        }
    }

    #[test]
    fn condition_limit_is_enforced() {
        let opts = SpectralOptions {
            max_condition: Some(1.0),
            ..Default::default()
        };
        assert!(matches!(resonances(&open_dyadic(64, 3), &opts), Err(Error::Numerical(_))));
        assert!(resonances(&open_dyadic(64, 3), &SpectralOptions { null_threshold: 0.0, max_condition: None }).is_err());
    }

    #[test]
    fn weyl_counting() {
        let set = resonances(&open_dyadic(128, 3), &SpectralOptions::default()).unwrap();
        assert_eq!(set.weyl_count(1.0 - 1e-12), 0);
        assert_eq!(set.weyl_count(set.null_threshold()), 128 - set.null_dim());
        let mut prev = usize::MAX;
        for k in 0..50 {
            let c = set.weyl_count(k as f64 / 50.0);
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn weyl_fit_exact_laws() {
        let lin: Vec<_> = [64, 128, 256, 512].iter().map(|&n| (n, n / 2)).collect();
        let f = weyl_fit(&lin, 0.5).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-12);
        assert!((f.dimension_estimate - 2.0).abs() < 1e-12);
        let flat: Vec<_> = [64, 128, 256].iter().map(|&n| (n, 7)).collect();
        assert!(weyl_fit(&flat, 0.5).unwrap().exponent.abs() < 1e-12);
        assert!(weyl_fit(&[(64, 1), (128, 2)], 0.5).is_err());
        assert!(weyl_fit(&[(64, 1), (128, 0), (256, 3)], 0.5).is_err());
        assert!(weyl_fit(&[(64, 1), (64, 2), (128, 3)], 0.5).is_err());
    }
}
