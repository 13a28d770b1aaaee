use crate::maps::{MapFamily, Opening};
use crate::{Error, Result};

/// Point of the unit torus, coordinates reduced to `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPoint {
    q: f64,
    p: f64,
}

impl ClassicalPoint {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !q.is_finite() || !p.is_finite() {
            return Err(Error::Domain(format!("point ({q}, {p}) is not finite")));
        }
        Ok(Self {
            q: reduce(q),
            p: reduce(p),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

fn reduce(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// One step of the closed baker map of the given family.
pub fn closed_step(x: ClassicalPoint, family: MapFamily) -> ClassicalPoint {
    let b = family.branches() as f64;
    let digit = (b * x.q).floor().min(b - 1.0);
    ClassicalPoint {
        q: reduce(b * x.q - digit),
        p: reduce((x.p + digit) / b),
    }
}

/// One step of the open map `Ũ = U Π`.
///
/// The opening acts first: a point inside the escape region is reported as
/// escaped and returned unchanged.
pub fn classical_step(x: ClassicalPoint, opening: Opening) -> (ClassicalPoint, bool) {
    if opening.escapes(x.q) {
        (x, true)
    } else {
        (closed_step(x, opening.family()), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(q: f64, p: f64) -> ClassicalPoint {
        ClassicalPoint::new(q, p).unwrap()
    }

    #[test]
    fn dyadic_step() {
        let (y, esc) = classical_step(pt(0.3, 0.4), Opening::Dyadic { depth: 3 });
        assert!(!esc);
        assert!((y.q() - 0.6).abs() < 1e-15 && (y.p() - 0.2).abs() < 1e-15);
        let (y, _) = classical_step(pt(0.75, 0.5), Opening::Dyadic { depth: 3 });
        assert_eq!((y.q(), y.p()), (0.5, 0.75));
    }

    #[test]
    fn triadic_fixed_point_and_escape() {
        let (y, esc) = classical_step(pt(0.5, 0.5), Opening::Triadic);
        assert!(!esc);
        assert!((y.q() - 0.5).abs() < 1e-15 && (y.p() - 0.5).abs() < 1e-15);
        assert!(classical_step(pt(0.2, 0.5), Opening::Triadic).1);
        assert!(classical_step(pt(0.9, 0.5), Opening::Triadic).1);
        let y = closed_step(pt(0.1, 0.3), MapFamily::Triadic);
        assert!((y.q() - 0.3).abs() < 1e-15 && (y.p() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn opening_acts_first() {
        for p in [0.0, 0.3, 0.99] {
            let (y, esc) = classical_step(pt(0.05, p), Opening::Dyadic { depth: 3 });
            assert!(esc);
            assert_eq!(y, pt(0.05, p));
        }
        assert!(classical_step(pt(0.95, 0.1), Opening::Dyadic { depth: 3 }).1);
        assert!(!classical_step(pt(0.2, 0.1), Opening::Dyadic { depth: 3 }).1);
    }

    #[test]
    fn coordinates_are_reduced() {
        let x = pt(1.25, -0.25);
        assert_eq!((x.q(), x.p()), (0.25, 0.75));
        assert_eq!(pt(-1e-300, 0.0).q(), 0.0);
        assert!(ClassicalPoint::new(f64::NAN, 0.0).is_err());
    }
}
