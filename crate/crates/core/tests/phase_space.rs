//! Phase-space properties of resonance distributions on moderately sized maps.

use num_complex::Complex64 as C64;
use openbaker::maps::{baker_closed, MapFamily, Opening, QuantumMap, TorusHilbert};
use openbaker::phasespace::{
    autocorrelation, autocorrelation_at, h_distribution, spectral_autocorrelation_at, GridSpec,
};
use openbaker::spectral::{resonances, ResonanceSet, SpectralOptions};

fn hs(n: usize) -> TorusHilbert {
    TorusHilbert::new(n).unwrap()
}

fn open_dyadic(n: usize, l: u32) -> QuantumMap {
    QuantumMap::open_baker(hs(n), MapFamily::Dyadic, Opening::Dyadic { depth: l }).unwrap()
}

fn spectrum(map: &QuantumMap) -> ResonanceSet {
    resonances(map, &SpectralOptions::default()).unwrap()
}

#[test]
fn h_distributions_are_normalized() {
    let set = spectrum(&open_dyadic(64, 3));
    let grid = GridSpec::square(128);
    for r in set.resonances().iter().filter(|r| !r.flagged()).take(12) {
        let g = h_distribution(r, set.hilbert(), grid).unwrap();
        let m = g.mean() * 64.0;
        assert!((m - C64::new(1.0, 0.0)).norm() < 0.02, "λ = {}: N·mean = {m}", r.lambda);
    }
}

#[test]
fn h_modulus_is_geometric_mean_of_husimis() {
    use openbaker::phasespace::{husimi, HusimiSide};
    let set = spectrum(&open_dyadic(64, 3));
    let grid = GridSpec::square(32);
    let r = &set.resonances()[2];
    let h = h_distribution(r, set.hilbert(), grid).unwrap();
    let hr = husimi(set.hilbert(), &r.right, grid, HusimiSide::Right).unwrap();
    let hl = husimi(set.hilbert(), &r.left, grid, HusimiSide::Left).unwrap();
    let s = r.overlap.norm();
    for i in 0..h.values.len() {
        let expect = (hr.values[i].re * hl.values[i].re).sqrt() / s;
        assert!((h.values[i].norm() - expect).abs() < 1e-12 * (1.0 + expect));
    }
}

#[test]
fn parity_covariance_on_mirrored_cells() {
    let set = spectrum(&open_dyadic(64, 3));
    let grid = GridSpec::square(64);
    for r in set.resonances().iter().take(6) {
        let g = h_distribution(r, set.hilbert(), grid).unwrap();
        for a in 0..64 {
            for b in 0..64 {
                let d = (g.at(a, b).norm() - g.at(63 - a, 63 - b).norm()).abs();
                assert!(d < 1e-6, "cell ({a},{b}) differs by {d}");
            }
        }
    }
}

#[test]
fn completeness_for_several_iterations() {
    // small and well conditioned enough for the identity to hold tightly
    let map = open_dyadic(32, 2);
    let set = spectrum(&map);
    let grid = GridSpec::square(64);
    let points: Vec<(f64, f64)> = (0..25).map(|k| (grid.q((k * 37) % 64), grid.p((k * 11 + 5) % 64))).collect();
    let kappa = (set.v_condition() / 1e8).max(1.0);
    for n in 1..=6 {
        let direct = autocorrelation_at(&map, n, &points).unwrap();
        let spec = spectral_autocorrelation_at(&set, n, &points).unwrap();
        for (a, b) in direct.iter().zip(&spec) {
            assert!((a - b).norm() < 1e-8 * kappa, "n={n}: {a} vs {b}, vCondition {}", set.v_condition());
        }
    }
}

#[test]
fn closed_autocorrelation_equals_spectral_sum() {
    let map = baker_closed(hs(64), MapFamily::Dyadic).unwrap();
    let set = spectrum(&map);
    let grid = GridSpec::square(16);
    let g = autocorrelation(&map, 1, grid).unwrap();
    let pts: Vec<(f64, f64)> = (0..16).flat_map(|a| (0..16).map(move |b| (grid.q(a), grid.p(b)))).collect();
    let s = spectral_autocorrelation_at(&set, 1, &pts).unwrap();
    for (x, y) in g.values.iter().zip(&s) {
        assert!((x - y).norm() < 1e-8);
    }
}

#[test]
fn leading_dyadic_resonance_is_almost_real() {
    let set = spectrum(&open_dyadic(320, 3));
    let g = h_distribution(&set.resonances()[0], set.hilbert(), GridSpec::default()).unwrap();
    let max = g.moduli().into_iter().fold(0.0, f64::max);
    let strong: Vec<&C64> = g.values.iter().filter(|v| v.norm() > 0.1 * max).collect();
    let complex = strong.iter().filter(|v| v.arg().sin().abs() > 0.5).count();
    // fraction of all grid cells that are both strong and far from real
    let frac = complex as f64 / g.values.len() as f64;
    let among_strong = complex as f64 / strong.len() as f64;
    assert!(frac < 0.1, "non-real fraction {frac} ({among_strong} of strong cells)");
}

#[test]
fn triadic_leading_resonance_sits_on_the_fixed_point() {
    let map = QuantumMap::open_baker(hs(243), MapFamily::Triadic, Opening::Triadic).unwrap();
    let set = spectrum(&map);
    let g = h_distribution(&set.resonances()[0], set.hilbert(), GridSpec::default()).unwrap();
    let (a, b) = g.argmax();
    let (ca, cb) = g.cell_of(0.5, 0.5);
    // 0.5 sits on a cell edge at even grid sizes, so either neighbour is central
    assert!(a.abs_diff(ca) <= 2 && b.abs_diff(cb) <= 2, "max at ({a},{b})");
}
