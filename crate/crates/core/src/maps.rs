//! Quantized baker maps on the torus with antiperiodic boundary conditions.
//!
//! Positions sit at `q_j = (j + 1/2)/N`. The closed dyadic map is
//! `U = G_N† · diag(G_{N/2}, G_{N/2})` and the triadic map uses three
//! `G_{N/3}` blocks. Opening a map multiplies on the right by a diagonal 0/1
//! projector that removes the escape strips in `q`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// Hilbert space of dimension `N` on the torus, `ħ = 1/(2πN)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusHilbert {
    dim: usize,
    hbar: f64,
}

impl TorusHilbert {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("Hilbert dimension must be >= 2, got {dim}")));
        }
        let hbar = 1.0 / (2.0 * PI * dim as f64);
        // 1/(2πN)·2πN is 1 up to a couple of roundings
        if (hbar * 2.0 * PI * dim as f64 - 1.0).abs() > 4.0 * f64::EPSILON {
            return Err(Error::Numerical(format!("inconsistent hbar for N = {dim}")));
        }
        Ok(Self { dim, hbar })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Position eigenvalue `q_j = (j + 1/2)/N`.
    pub fn position(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.dim as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapFamily {
    Dyadic,
    Triadic,
}

impl MapFamily {
    /// Number of Markov strips in `q` (2 or 3).
    pub fn branches(self) -> usize {
        match self {
            MapFamily::Dyadic => 2,
            MapFamily::Triadic => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MapFamily::Dyadic => "dyadic",
            MapFamily::Triadic => "triadic",
        }
    }
}

impl std::str::FromStr for MapFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dyadic" => Ok(MapFamily::Dyadic),
            "triadic" => Ok(MapFamily::Triadic),
            other => Err(Error::Config(format!("unknown map family `{other}`"))),
        }
    }
}

/// Escape region of an open map.
///
/// `Dyadic { depth: l }` removes `q ∈ [0, 2^-l) ∪ (1 − 2^-l, 1]`, which prunes
/// the symbol strings `0^l` and `1^l`. `Triadic` removes the outer thirds
/// `[0, 1/3) ∪ (2/3, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opening {
    Dyadic { depth: u32 },
    Triadic,
}

impl Opening {
    pub const MAX_DYADIC_DEPTH: u32 = 30;

    pub fn family(&self) -> MapFamily {
        match self {
            Opening::Dyadic { .. } => MapFamily::Dyadic,
            Opening::Triadic => MapFamily::Triadic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Opening::Dyadic { depth } if !(2..=Self::MAX_DYADIC_DEPTH).contains(&depth) => {
                Err(Error::Config(format!(
                    "dyadic opening depth must be in 2..={}, got {depth}",
                    Self::MAX_DYADIC_DEPTH
                )))
            }
            _ => Ok(()),
        }
    }

    /// Width of each of the two escape strips.
    pub fn strip_width(&self) -> f64 {
        match *self {
            Opening::Dyadic { depth } => (-(depth as f64)).exp2(),
            Opening::Triadic => 1.0 / 3.0,
        }
    }

    /// Escape intervals in `q` as `(lo, hi)` pairs: the left one is
    /// `[lo, hi)`, the right one `(lo, hi]`.
    pub fn escape_intervals(&self) -> [(f64, f64); 2] {
        let w = self.strip_width();
        [(0.0, w), (1.0 - w, 1.0)]
    }

    pub fn escapes(&self, q: f64) -> bool {
        let w = self.strip_width();
        q < w || q > 1.0 - w
    }

    /// Hilbert dimensions must be multiples of this for the opening to fall
    /// between position grid points.
    pub fn required_divisor(&self) -> usize {
        match *self {
            Opening::Dyadic { depth } => 1usize << depth,
            Opening::Triadic => 3,
        }
    }

    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        self.validate()?;
        let d = self.required_divisor();
        if !dim.is_multiple_of(d) {
            return Err(Error::Config(format!(
                "N = {dim} is not divisible by {d} as required by the {self} opening"
            )));
        }
        Ok(())
    }

    /// Exact trace of the escape projector `Π_o` for admissible `N`.
    pub fn escape_trace(&self, dim: usize) -> usize {
        match *self {
            Opening::Dyadic { depth } => 2 * dim / (1usize << depth),
            Opening::Triadic => 2 * dim / 3,
        }
    }
}

impl std::fmt::Display for Opening {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Opening::Dyadic { depth } => write!(f, "dyadic(l={depth})"),
            Opening::Triadic => write!(f, "triadic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Closed,
    Open,
}

/// A quantized baker map together with how it was built.
#[derive(Debug, Clone)]
pub struct QuantumMap {
    hilbert: TorusHilbert,
    matrix: ComplexMatrix,
    kind: MapKind,
    opening: Option<Opening>,
    family: MapFamily,
}

impl QuantumMap {
    pub fn hilbert(&self) -> TorusHilbert {
        self.hilbert
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// The opening, when the map was built from a known escape region.
    pub fn opening(&self) -> Option<Opening> {
        self.opening
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    /// Closed baker map, or the open one when `opening` is given.
    pub fn baker(hilbert: TorusHilbert, family: MapFamily, opening: Option<Opening>) -> Result<Self> {
        match opening {
            None => baker_closed(hilbert, family),
            Some(o) => Self::open_baker(hilbert, family, o),
        }
    }

    /// Builds `Ũ = U Π` for the given family and opening.
    pub fn open_baker(hilbert: TorusHilbert, family: MapFamily, opening: Opening) -> Result<Self> {
        if opening.family() != family {
            return Err(Error::Config(format!(
                "{opening} opening does not apply to the {} map",
                family.name()
            )));
        }
        let closed = baker_closed(hilbert, family)?;
        let projector = opening_projector(hilbert, opening)?;
        let mut open = open_map(&closed, &projector)?;
        open.opening = Some(opening);
        Ok(open)
    }
}

/// Antiperiodic DFT kernel `(G_N)_{jk} = exp(−2πi (j+½)(k+½)/N)/√N`.
pub fn fourier_kernel(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    let four_n = 4 * n as u64;
    ComplexMatrix::from_fn(n, n, |j, k| {
        // 2π(j+½)(k+½)/N = π(2j+1)(2k+1)/(2N), reduced exactly mod 2π
        let r = ((2 * j as u64 + 1) * (2 * k as u64 + 1)) % four_n;
        let angle = -PI * r as f64 / (2.0 * n as f64);
        C64::from_polar(scale, angle)
    })
}

/// Closed (unitary) baker quantization.
pub fn baker_closed(hilbert: TorusHilbert, family: MapFamily) -> Result<QuantumMap> {
    let n = hilbert.dim();
    let b = family.branches();
    if !n.is_multiple_of(b) {
        return Err(Error::Config(format!(
            "{} baker needs N divisible by {b}, got N = {n}",
            family.name()
        )));
    }
    let m = n / b;
    let small = fourier_kernel(m);
    let mut blocks = ComplexMatrix::zeros(n, n);
    for blk in 0..b {
        let off = blk * m;
        for j in 0..m {
            for k in 0..m {
                blocks.set(off + j, off + k, small.get(j, k));
            }
        }
    }
    let matrix = fourier_kernel(n).adjoint().matmul(&blocks)?;
    Ok(QuantumMap {
        hilbert,
        matrix,
        kind: MapKind::Closed,
        opening: None,
        family,
    })
}

/// Diagonal 0/1 projector `Π = 1 − Π_o` keeping positions outside the
/// escape region.
pub fn opening_projector(hilbert: TorusHilbert, opening: Opening) -> Result<ComplexMatrix> {
    let n = hilbert.dim();
    opening.check_dimension(n)?;
    let diag: Vec<C64> = (0..n)
        .map(|j| {
            if opening.escapes(hilbert.position(j)) {
                C64::new(0.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    Ok(ComplexMatrix::from_diagonal(&diag))
}

/// Composes a closed map with a diagonal 0/1 projector, `Ũ = U Π`.
///
/// The masked columns are set to exact zeros. The returned map records no
/// opening; use [`QuantumMap::open_baker`] to keep that information.
pub fn open_map(closed: &QuantumMap, projector: &ComplexMatrix) -> Result<QuantumMap> {
    let n = closed.hilbert.dim();
    if projector.rows() != n || projector.cols() != n {
        return Err(Error::Config(format!(
            "projector is {}x{}, map is {n}x{n}",
            projector.rows(),
            projector.cols()
        )));
    }
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut keep = vec![false; n];
    for j in 0..n {
        for i in 0..n {
            let v = projector.get(i, j);
            if i == j {
                if v == one {
                    keep[j] = true;
                } else if v != zero {
                    return Err(Error::Config(format!("projector diagonal entry {j} is not 0 or 1")));
                }
            } else if v != zero {
                return Err(Error::Config("projector is not diagonal".into()));
            }
        }
    }
    let src = closed.matrix();
    let matrix = ComplexMatrix::from_fn(n, n, |i, j| if keep[j] { src.get(i, j) } else { zero });
    Ok(QuantumMap {
        hilbert: closed.hilbert,
        matrix,
        kind: MapKind::Open,
        opening: None,
        family: closed.family,
    })
}

/// Parity `R|j⟩ = |N−1−j⟩`, i.e. `q → 1 − q` on the position grid.
pub fn parity_operator(hilbert: TorusHilbert) -> ComplexMatrix {
    let n = hilbert.dim();
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i + j == n - 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Applies parity to a position-basis vector.
pub fn parity_apply(psi: &[C64]) -> Vec<C64> {
    psi.iter().rev().copied().collect()
}

/// Antiunitary time reversal `T = K G`: returns `conj(G_N ψ)`.
pub fn time_reversal_apply(hilbert: TorusHilbert, psi: &[C64]) -> Result<Vec<C64>> {
    time_reversal_with_kernel(&fourier_kernel(hilbert.dim()), psi)
}

pub(crate) fn time_reversal_with_kernel(kernel: &ComplexMatrix, psi: &[C64]) -> Result<Vec<C64>> {
    if psi.len() != kernel.cols() {
        return Err(Error::Config(format!(
            "state has length {}, expected {}",
            psi.len(),
            kernel.cols()
        )));
    }
    Ok(kernel.matvec(psi)?.into_iter().map(|x| x.conj()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn h(n: usize) -> TorusHilbert {
        TorusHilbert::new(n).unwrap()
    }

    fn random_state(n: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    #[test]
    fn kernel_small_cases() {
        let g1 = fourier_kernel(1);
        assert!((g1.get(0, 0) - c(0.0, -1.0)).norm() < 1e-15);
        let g2 = fourier_kernel(2);
        assert!((g2.get(0, 0) - c(0.5, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn kernel_is_unitary() {
        for n in [1, 2, 3, 16, 81, 160] {
            assert!(fourier_kernel(n).unitarity_defect() < 1e-13, "N = {n}");
        }
    }

    #[test]
    fn hilbert_rejects_tiny_dimension() {
        assert!(TorusHilbert::new(1).is_err());
        let hs = h(320);
        assert!((hs.hbar() * 2.0 * PI * 320.0 - 1.0).abs() < 1e-15);
        assert_eq!(hs.position(0), 0.5 / 320.0);
    }

    #[test]
    fn triadic_n3_is_minus_i_times_kernel_adjoint() {
        let u = baker_closed(h(3), MapFamily::Triadic).unwrap();
        let expect = fourier_kernel(3).adjoint();
        for i in 0..3 {
            for j in 0..3 {
                assert!((u.matrix().get(i, j) - c(0.0, -1.0) * expect.get(i, j)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dyadic_n2_matches_hand_multiplication() {
        // G_2† · (−i I) worked out by hand
        let expect = [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]];
        let u = baker_closed(h(2), MapFamily::Dyadic).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((u.matrix().get(i, j) - expect[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_maps_are_unitary() {
        assert!(baker_closed(h(8), MapFamily::Dyadic).unwrap().matrix().unitarity_defect() < 1e-13);
        assert!(baker_closed(h(81), MapFamily::Triadic).unwrap().matrix().unitarity_defect() < 1e-13);
    }

    #[test]
    fn divisibility_is_enforced() {
        assert!(baker_closed(h(9), MapFamily::Dyadic).is_err());
        assert!(baker_closed(h(8), MapFamily::Triadic).is_err());
        assert!(opening_projector(h(321), Opening::Dyadic { depth: 3 }).is_err());
        assert!(opening_projector(h(12), Opening::Dyadic { depth: 3 }).is_err());
        assert!(opening_projector(h(16), Opening::Dyadic { depth: 1 }).is_err());
        assert!(QuantumMap::open_baker(h(24), MapFamily::Dyadic, Opening::Triadic).is_err());
    }

    #[test]
    fn projector_traces() {
        let p = opening_projector(h(320), Opening::Dyadic { depth: 3 }).unwrap();
        assert_eq!(320 - p.trace().re.round() as usize, 80);
        let p = opening_projector(h(243), Opening::Triadic).unwrap();
        assert_eq!(p.trace().re.round() as usize, 81);
        assert_eq!(Opening::Triadic.escape_trace(243), 162);
    }

    #[test]
    fn projector_n8_zeroes_outer_points() {
        let p = opening_projector(h(8), Opening::Dyadic { depth: 3 }).unwrap();
        let zeroed: Vec<usize> = (0..8).filter(|&j| p.get(j, j).re == 0.0).collect();
        assert_eq!(zeroed, vec![0, 7]);
    }

    #[test]
    fn identity_opening_leaves_map_unchanged() {
        let u = baker_closed(h(16), MapFamily::Dyadic).unwrap();
        let open = open_map(&u, &ComplexMatrix::identity(16)).unwrap();
        assert_eq!(open.matrix(), u.matrix());
        assert_eq!(open.kind(), MapKind::Open);
    }

    #[test]
    fn open_map_rejects_bad_projectors() {
        let u = baker_closed(h(8), MapFamily::Dyadic).unwrap();
        assert!(open_map(&u, &ComplexMatrix::identity(4)).is_err());
        let mut p = ComplexMatrix::identity(8);
        p.set(0, 0, c(0.5, 0.0));
        assert!(open_map(&u, &p).is_err());
        let mut p = ComplexMatrix::identity(8);
        p.set(0, 1, c(1.0, 0.0));
        assert!(open_map(&u, &p).is_err());
    }

    #[test]
    fn open_map_zero_columns_and_contraction() {
        let m = QuantumMap::open_baker(h(320), MapFamily::Dyadic, Opening::Dyadic { depth: 3 }).unwrap();
        let zero_cols = (0..320).filter(|&j| m.matrix().column_is_zero(j)).count();
        assert_eq!(zero_cols, 80);
        let s = m.matrix().singular_values().unwrap();
        assert!(s[0] <= 1.0 + 1e-12);
    }

    #[test]
    fn open_map_gram_is_projector() {
        let n = 64;
        let closed = baker_closed(h(n), MapFamily::Dyadic).unwrap();
        let p = opening_projector(h(n), Opening::Dyadic { depth: 3 }).unwrap();
        let open = open_map(&closed, &p).unwrap();
        let gram = open.matrix().adjoint().matmul(open.matrix()).unwrap();
        assert!(gram.sub(&p).unwrap().max_abs() < 1e-12);
        let tr_o = n - p.trace().re.round() as usize;
        assert_eq!(tr_o + p.trace().re.round() as usize, n);
    }

    #[test]
    fn parity_swap_and_involution() {
        let r = parity_operator(h(2));
        assert_eq!(r.get(0, 1), c(1.0, 0.0));
        assert_eq!(r.get(1, 0), c(1.0, 0.0));
        assert_eq!(r.get(0, 0), c(0.0, 0.0));
        let r = parity_operator(h(10));
        assert_eq!(r.matmul(&r).unwrap(), ComplexMatrix::identity(10));
    }

    fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.matmul(b).unwrap().sub(&b.matmul(a).unwrap()).unwrap().max_abs()
    }

    #[test]
    fn parity_commutes_with_closed_and_open_maps() {
        let hs = h(64);
        let r = parity_operator(hs);
        let u = baker_closed(hs, MapFamily::Dyadic).unwrap();
        assert!(commutator_norm(&r, u.matrix()) < 1e-12);
        let o = QuantumMap::open_baker(hs, MapFamily::Dyadic, Opening::Dyadic { depth: 3 }).unwrap();
        assert!(commutator_norm(&r, o.matrix()) < 1e-12);
        let ht = h(243);
        let rt = parity_operator(ht);
        let t = QuantumMap::open_baker(ht, MapFamily::Triadic, Opening::Triadic).unwrap();
        assert!(commutator_norm(&rt, t.matrix()) < 1e-10);
    }

    #[test]
    fn time_reversal_basics() {
        let hs = TorusHilbert { dim: 1, hbar: 1.0 / (2.0 * PI) };
        let t = time_reversal_apply(hs, &[c(1.0, 0.0)]).unwrap();
        assert!((t[0] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(time_reversal_apply(h(4), &[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn time_reversal_is_antiunitary() {
        let hs = h(32);
        let a = random_state(32, 1);
        let b = random_state(32, 2);
        let ta = time_reversal_apply(hs, &a).unwrap();
        let tb = time_reversal_apply(hs, &b).unwrap();
        assert!((norm(&ta) - norm(&a)).abs() < 1e-14);
        assert!((inner(&ta, &tb) - inner(&a, &b).conj()).norm() < 1e-13);
    }

    #[test]
    fn time_reversal_squares_to_identity() {
        // conj(G)·G by explicit summation
        let n = 32;
        let g = fourier_kernel(n);
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: C64 = (0..n).map(|k| g.get(i, k).conj() * g.get(k, j)).sum();
                let target = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                defect = defect.max((s - target).norm());
            }
        }
        assert!(defect < 1e-13);
        let hs = h(n);
        for seed in 0..4 {
            let psi = random_state(n, 10 + seed);
            let tt = time_reversal_apply(hs, &time_reversal_apply(hs, &psi).unwrap()).unwrap();
            let err = tt.iter().zip(&psi).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-13);
        }
    }
}
