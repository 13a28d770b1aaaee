use std::collections::HashSet;

use crate::fit::least_squares;
use crate::maps::Opening;
use crate::{Error, Result};

/// Largest `t_back + t_fwd` accepted by [`finite_time_repeller`].
pub const MAX_REPELLER_DEPTH: u32 = 28;

/// Closed axis-aligned rectangle `[q_lo, q_hi] × [p_lo, p_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub q_lo: f64,
    pub q_hi: f64,
    pub p_lo: f64,
    pub p_hi: f64,
}

impl Rectangle {
    pub fn area(&self) -> f64 {
        (self.q_hi - self.q_lo) * (self.p_hi - self.p_lo)
    }

    pub fn contains(&self, q: f64, p: f64) -> bool {
        (self.q_lo..=self.q_hi).contains(&q) && (self.p_lo..=self.p_hi).contains(&p)
    }
}

/// Finite-time approximation of the repeller: points that survive `t_back`
/// steps into the past and `t_fwd` steps into the future.
#[derive(Debug, Clone, PartialEq)]
pub struct RepellerApprox {
    /// Symbol alphabet size; rectangle sides are powers of `1/base`.
    pub base: u32,
    pub t_back: u32,
    pub t_fwd: u32,
    pub rectangles: Vec<Rectangle>,
    pub area_fraction: f64,
}

impl RepellerApprox {
    pub fn from_rectangles(base: u32, t_back: u32, t_fwd: u32, rectangles: Vec<Rectangle>) -> Self {
        let area_fraction = rectangles.iter().map(Rectangle::area).sum();
        Self {
            base,
            t_back,
            t_fwd,
            rectangles,
            area_fraction,
        }
    }

    /// The whole square as a `2^depth × 2^depth` cover, the repeller of the
    /// closed dyadic map.
    pub fn unit_square(depth: u32) -> Self {
        let k = 1u64 << depth;
        let w = 1.0 / k as f64;
        let rects = (0..k)
            .flat_map(|i| {
                (0..k).map(move |j| Rectangle {
                    q_lo: i as f64 * w,
                    q_hi: (i + 1) as f64 * w,
                    p_lo: j as f64 * w,
                    p_hi: (j + 1) as f64 * w,
                })
            })
            .collect();
        Self::from_rectangles(2, depth, depth, rects)
    }

    pub fn contains(&self, q: f64, p: f64) -> bool {
        self.rectangles.iter().any(|r| r.contains(q, p))
    }

    /// Side lengths `(q width, p width)` shared by every rectangle.
    pub fn cell_size(&self) -> (f64, f64) {
        let b = self.base as f64;
        (b.powi(-(self.t_fwd as i32)), b.powi(-(self.t_back as i32)))
    }
}

/// Rectangles whose symbol history from `t = −t_back` to `t = t_fwd − 1`
/// never enters the opening.
///
/// The `q` side is the future word of length `t_fwd`, the `p` side the past
/// word of length `t_back`. Runs are checked across the seam between them,
/// so the rectangles cover the trapped set without spurious pieces.
pub fn finite_time_repeller(t_back: u32, t_fwd: u32, opening: Opening) -> Result<RepellerApprox> {
    opening.validate()?;
    if t_back + t_fwd > MAX_REPELLER_DEPTH {
        return Err(Error::Config(format!(
            "t_back + t_fwd = {} exceeds {MAX_REPELLER_DEPTH}",
            t_back + t_fwd
        )));
    }
    match opening {
        Opening::Triadic => Ok(triadic_repeller(t_back, t_fwd)),
        Opening::Dyadic { depth } => Ok(dyadic_repeller(t_back, t_fwd, depth)),
    }
}

fn triadic_repeller(t_back: u32, t_fwd: u32) -> RepellerApprox {
    // only the middle digit survives; the words 11…1 sit around 1/2
    let strip = |t: u32| {
        let k = 3f64.powi(t as i32);
        let lo = (k - 1.0) / 2.0;
        (lo / k, (lo + 1.0) / k)
    };
    let (q_lo, q_hi) = strip(t_fwd);
    let (p_lo, p_hi) = strip(t_back);
    RepellerApprox::from_rectangles(3, t_back, t_fwd, vec![Rectangle { q_lo, q_hi, p_lo, p_hi }])
}

fn dyadic_repeller(t_back: u32, t_fwd: u32, l: u32) -> RepellerApprox {
    struct Walk {
        t_back: u32,
        total: u32,
        l: u32,
        qw: f64,
        pw: f64,
        out: Vec<Rectangle>,
    }
    impl Walk {
        // history position `pos`: 0..t_back are s_{-t_back}..s_{-1}, then s_0..
        fn step(&mut self, pos: u32, last: u8, run: u32, past: u64, future: u64) {
            if pos == self.total {
                self.out.push(Rectangle {
                    q_lo: future as f64 * self.qw,
                    q_hi: (future + 1) as f64 * self.qw,
                    p_lo: past as f64 * self.pw,
                    p_hi: (past + 1) as f64 * self.pw,
                });
                return;
            }
            for s in 0..2u8 {
                let r = if pos > 0 && s == last { run + 1 } else { 1 };
                if r >= self.l {
                    continue;
                }
                let (p2, f2) = if pos < self.t_back {
                    (past | (s as u64) << pos, future)
                } else {
                    (past, (future << 1) | s as u64)
                };
                self.step(pos + 1, s, r, p2, f2);
            }
        }
    }
    let mut walk = Walk {
        t_back,
        total: t_back + t_fwd,
        l,
        qw: (-(t_fwd as f64)).exp2(),
        pw: (-(t_back as f64)).exp2(),
        out: Vec::new(),
    };
    walk.step(0, 0, 0, 0, 0);
    RepellerApprox::from_rectangles(2, t_back, t_fwd, walk.out)
}

/// Box-counting dimension: least-squares slope of `ln count` against
/// `ln(1/ε)` over dyadic boxes of side `ε = 2^-k` for each `k` in `scales`.
pub fn box_dimension(rep: &RepellerApprox, scales: &[u32]) -> Result<f64> {
    let mut ks = scales.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::Domain(format!("box counting needs at least 3 scales, got {}", ks.len())));
    }
    if rep.rectangles.is_empty() {
        return Err(Error::Domain("repeller approximation is empty".into()));
    }
    let (wq, wp) = rep.cell_size();
    let finest = *ks.last().expect("non-empty");
    if finest > 52 || wq.max(wp) > (-(finest as f64)).exp2() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "scale 2^-{finest} is finer than the repeller resolution {wq:.3e} x {wp:.3e}"
        )));
    }
    let mut pts = Vec::with_capacity(ks.len());
    for k in ks {
        let m = (k as f64).exp2();
        let mut boxes = HashSet::new();
        for r in &rep.rectangles {
            let (i0, i1) = box_range(r.q_lo, r.q_hi, m);
            let (j0, j1) = box_range(r.p_lo, r.p_hi, m);
            for i in i0..i1 {
                for j in j0..j1 {
                    boxes.insert((i, j));
                }
            }
        }
        pts.push((k as f64 * 2f64.ln(), (boxes.len() as f64).ln()));
    }
    Ok(least_squares(&pts)?.slope)
}

/// Box indices whose interiors meet the open interval `(lo, hi)`.
fn box_range(lo: f64, hi: f64, m: f64) -> (u64, u64) {
    ((lo * m).floor() as u64, ((hi * m).ceil() as u64).max((lo * m).floor() as u64 + 1))
}
