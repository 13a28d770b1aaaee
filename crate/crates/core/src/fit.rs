//! Small least-squares helpers shared by the spectral and classical modules.

use crate::{Error, Result};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Unweighted least-squares line through `(x, y)` pairs.
pub fn least_squares(points: &[(f64, f64)]) -> Result<LineFit> {
    let weighted: Vec<_> = points.iter().map(|&(x, y)| (x, y, 1.0)).collect();
    weighted_least_squares(&weighted)
}

/// Weighted least-squares line through `(x, y, w)` triples.
pub fn weighted_least_squares(points: &[(f64, f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "line fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(x, y, w)| !x.is_finite() || !y.is_finite() || !(w > 0.0))
    {
        return Err(Error::Domain("line fit input is not finite".into()));
    }
    let sw: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Domain("line fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        let fit = least_squares(&pts).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-14);
        assert!((fit.intercept + 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(least_squares(&[(1.0, 2.0)]).is_err());
        assert!(least_squares(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(least_squares(&[(1.0, f64::NAN), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn weights_pull_toward_heavy_points() {
        // two exact lines; the heavy one wins
        let pts = [(0.0, 0.0, 1e6), (1.0, 1.0, 1e6), (2.0, 10.0, 1e-6)];
        let fit = weighted_least_squares(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-6);
    }
}
