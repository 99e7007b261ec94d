use std::fmt;

use super::{AucMode, Frontier, UtopiaPoint};
use crate::error::{Error, Result};

/// Quadrature panels per unit of performance for distance-constrained areas.
pub const DEFAULT_RESOLUTION: usize = 2000;

/// Upper edge of the attainment region over `[x0, x1]`, linear in between.
#[derive(Debug, Clone, Copy)]
struct Piece {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Piece {
    fn at(&self, x: f64) -> f64 {
        if self.x1 == self.x0 {
            return self.y0.max(self.y1);
        }
        self.y0 + (self.y1 - self.y0) * (x - self.x0) / (self.x1 - self.x0)
    }

    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y0 + self.y1) / 2.0
    }
}

/// The attainment region as `{(x, y) : 0 <= x <= max_perf, 0 <= y <= upper(x)}`
/// with `upper` non-increasing.
#[derive(Debug, Clone)]
pub(crate) struct Region {
    pieces: Vec<Piece>,
}

impl Region {
    pub(crate) fn new(frontier: &Frontier, mode: AucMode) -> Self {
        // ascending performance
        let pts: Vec<_> = frontier.points().iter().rev().collect();
        let mut pieces = Vec::with_capacity(pts.len());
        pieces.push(Piece {
            x0: 0.0,
            x1: pts[0].performance,
            y0: pts[0].fairness,
            y1: pts[0].fairness,
        });
        for w in pts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let y0 = match mode {
                AucMode::Step => hi.fairness,
                AucMode::Linear => lo.fairness,
            };
            pieces.push(Piece {
                x0: lo.performance,
                x1: hi.performance,
                y0,
                y1: hi.fairness,
            });
        }
        Region { pieces }
    }

    pub(crate) fn max_x(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.x1)
    }

    /// Height of the region at `x`; 0 outside `[0, max_x]`.
    pub(crate) fn upper(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.max_x() {
            return 0.0;
        }
        let i = self.pieces.partition_point(|p| p.x1 < x);
        self.pieces[i.min(self.pieces.len() - 1)].at(x)
    }

    pub(crate) fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x <= self.max_x() && y <= self.upper(x)
    }

    fn area(&self) -> f64 {
        self.pieces.iter().map(Piece::area).sum()
    }

    fn area_right_of(&self, a: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|p| p.x1 > a)
            .map(|p| {
                if p.x0 >= a {
                    p.area()
                } else {
                    Piece {
                        x0: a,
                        x1: p.x1,
                        y0: p.at(a),
                        y1: p.y1,
                    }
                    .area()
                }
            })
            .sum()
    }

    fn area_above(&self, f: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let (d0, d1) = (p.y0 - f, p.y1 - f);
                let w = p.x1 - p.x0;
                if d0 >= 0.0 && d1 >= 0.0 {
                    w * (d0 + d1) / 2.0
                } else if d0 <= 0.0 && d1 <= 0.0 {
                    0.0
                } else {
                    // one sign change on a linear piece: a triangle
                    let pos = d0.max(d1);
                    let frac = pos / (d0 - d1).abs();
                    w * frac * pos / 2.0
                }
            })
            .sum()
    }

    /// Performance values where the upper edge changes slope or jumps.
    fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().flat_map(|p| [p.x0, p.x1])
    }
}

/// Area of the attainment region of `frontier`.
pub fn auc_pfc(frontier: &Frontier, mode: AucMode) -> f64 {
    Region::new(frontier, mode).area()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AreaConstraint {
    /// Keep only `performance >= a`.
    MinPerformance(f64),
    /// Keep only `fairness >= f`.
    MinFairness(f64),
    /// Keep only points within distance `d` of `utopia`.
    MaxDto { max_dto: f64, utopia: UtopiaPoint },
}

impl fmt::Display for AreaConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AreaConstraint::MinPerformance(a) => write!(f, "performance >= {a}"),
            AreaConstraint::MinFairness(v) => write!(f, "fairness >= {v}"),
            AreaConstraint::MaxDto { max_dto, utopia } => {
                write!(f, "dto <= {max_dto} from {utopia}")
            }
        }
    }
}

/// Area of the attainment region restricted by `constraint`. Performance
/// and fairness bounds are integrated exactly; the distance bound uses
/// `resolution` Gauss–Legendre panels per unit of performance.
pub fn partial_auc_pfc(
    frontier: &Frontier,
    constraint: AreaConstraint,
    mode: AucMode,
    resolution: usize,
) -> Result<f64> {
    let region = Region::new(frontier, mode);
    match constraint {
        AreaConstraint::MinPerformance(a) => {
            check_unit("performance bound", a)?;
            Ok(region.area_right_of(a))
        }
        AreaConstraint::MinFairness(f) => {
            check_unit("fairness bound", f)?;
            Ok(region.area_above(f))
        }
        AreaConstraint::MaxDto { max_dto, utopia } => {
            if !(max_dto >= 0.0 && max_dto.is_finite()) {
                return Err(Error::invalid(format!("bad dto bound {max_dto}")));
            }
            if resolution == 0 {
                return Err(Error::invalid("resolution must be positive"));
            }
            Ok(dto_constrained_area(&region, max_dto, &utopia, resolution))
        }
    }
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} {v} outside [0, 1]")))
    }
}

// 5-point Gauss–Legendre on [-1, 1]
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn dto_constrained_area(region: &Region, d: f64, u: &UtopiaPoint, resolution: usize) -> f64 {
    let (wp, wf) = u.weights;
    let half_width = d / wp.sqrt();
    let lo = (u.performance - half_width).max(0.0);
    let hi = (u.performance + half_width).min(region.max_x());
    if hi <= lo {
        return 0.0;
    }
    // height of region ∩ ellipse at x
    let height = |x: f64| -> f64 {
        let dx = u.performance - x;
        let rem = d * d - wp * dx * dx;
        if rem <= 0.0 {
            return 0.0;
        }
        let s = (rem / wf).sqrt();
        let top = region.upper(x).min(u.fairness + s);
        let bottom = (u.fairness - s).max(0.0);
        (top - bottom).max(0.0)
    };

    let mut cuts: Vec<f64> = region
        .breakpoints()
        .chain([lo, hi])
        .filter(|x| *x >= lo && *x <= hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut parts = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let panels = ((b - a) * resolution as f64).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            let mut s = 0.0;
            for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS) {
                s += weight * height(mid + node * h / 2.0);
            }
            parts.push(s * h / 2.0);
        }
    }
    pairwise_sum(&parts)
}

/// Sum with a fixed binary reduction tree, independent of how the terms
/// were produced.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1..=8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
