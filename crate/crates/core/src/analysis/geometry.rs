//! Planar polyline geometry for input-output loops.
//!
//! Loops are treated as closed polygons: when the last sample does not
//! coincide with the first, the closing chord is part of the boundary for
//! area, perimeter and crossing purposes.

use alloc::vec::Vec;

use crate::math;

/// Crossing parameters closer than this to a segment end still count
/// (normalized units).
pub const ENDPOINT_TOLERANCE: f64 = 1e-9;

/// Crossings closer than this are merged into one node.
pub const CLUSTER_RADIUS: f64 = 1e-4;

pub(crate) type Point = [f64; 2];

/// Both discrete forms of Green's circulation around the closed polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circulation {
    /// `sum_i x_i (y_{i+1} - y_{i-1}) / 2`, i.e. `oint x dy`.
    pub x_dy: f64,
    /// `sum_i y_i (x_{i+1} - x_{i-1}) / 2`, i.e. `oint y dx`.
    pub y_dx: f64,
}

impl Circulation {
    /// Signed enclosed area (positive for counter-clockwise traversal).
    pub fn signed_area(&self) -> f64 {
        0.5 * (self.x_dy - self.y_dx)
    }
}

pub(crate) fn circulation(points: &[Point]) -> Circulation {
    let n = points.len();
    let mut x_dy = 0.0;
    let mut y_dx = 0.0;
    for i in 0..n {
        let prev = points[(i + n - 1) % n];
        let next = points[(i + 1) % n];
        x_dy += points[i][0] * (next[1] - prev[1]);
        y_dx += points[i][1] * (next[0] - prev[0]);
    }
    Circulation {
        x_dy: 0.5 * x_dy,
        y_dx: 0.5 * y_dx,
    }
}

/// Vertices with consecutive duplicates (and a duplicated closing vertex)
/// removed.
pub(crate) fn cleaned(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() != Some(p) {
            out.push(*p);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

pub(crate) fn closed_perimeter(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut p = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        p += math::hypot(b[0] - a[0], b[1] - a[1]);
    }
    p
}

pub(crate) fn open_length(points: &[Point]) -> f64 {
    points
        .windows(2)
        .map(|w| math::hypot(w[1][0] - w[0][0], w[1][1] - w[0][1]))
        .sum()
}

/// A transverse crossing between two non-adjacent polygon edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Location of the crossing.
    pub point: [f64; 2],
    /// Index of the first edge (edge `i` joins vertex `i` to `i + 1`).
    pub first: usize,
    /// Index of the second edge.
    pub second: usize,
}

#[inline]
fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn segment_crossing(p: Point, p2: Point, q: Point, q2: Point) -> Option<Point> {
    let r = [p2[0] - p[0], p2[1] - p[1]];
    let s = [q2[0] - q[0], q2[1] - q[1]];
    let den = cross(r, s);
    let rl = math::hypot(r[0], r[1]);
    let sl = math::hypot(s[0], s[1]);
    // parallel or collinear overlap is not a transverse crossing
    if den.abs() <= 1e-14 * rl * sl || rl == 0.0 || sl == 0.0 {
        return None;
    }
    let qp = [q[0] - p[0], q[1] - p[1]];
    let t = cross(qp, s) / den;
    let u = cross(qp, r) / den;
    let et = ENDPOINT_TOLERANCE / rl;
    let eu = ENDPOINT_TOLERANCE / sl;
    if t >= -et && t <= 1.0 + et && u >= -eu && u <= 1.0 + eu {
        Some([p[0] + t * r[0], p[1] + t * r[1]])
    } else {
        None
    }
}

/// All crossings between non-adjacent edges of the closed polygon through
/// `points` (already cleaned). Candidate pairs come from a uniform bucket
/// grid; every candidate pair is tested exactly once.
pub(crate) fn polygon_crossings(points: &[Point]) -> Vec<Crossing> {
    let n = points.len();
    let mut out = Vec::new();
    if n < 4 {
        return out;
    }
    let edge = |i: usize| (points[i], points[(i + 1) % n]);

    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let w = (xmax - xmin).max(1e-300);
    let h = (ymax - ymin).max(1e-300);
    let cells = (math::sqrt(n as f64) as usize).clamp(1, 512);
    let cell_of = |x: f64, y: f64| -> (usize, usize) {
        let cx = (((x - xmin) / w) * cells as f64) as isize;
        let cy = (((y - ymin) / h) * cells as f64) as isize;
        (
            cx.clamp(0, cells as isize - 1) as usize,
            cy.clamp(0, cells as isize - 1) as usize,
        )
    };
    let bbox = |i: usize| {
        let (a, b) = edge(i);
        (a[0].min(b[0]), a[1].min(b[1]), a[0].max(b[0]), a[1].max(b[1]))
    };

    let mut buckets: Vec<Vec<u32>> = alloc::vec![Vec::new(); cells * cells];
    for i in 0..n {
        let (x0, y0, x1, y1) = bbox(i);
        let (c0x, c0y) = cell_of(x0, y0);
        let (c1x, c1y) = cell_of(x1, y1);
        for cx in c0x..=c1x {
            for cy in c0y..=c1y {
                buckets[cy * cells + cx].push(i as u32);
            }
        }
    }

    for (cell, members) in buckets.iter().enumerate() {
        let (cx, cy) = (cell % cells, cell / cells);
        for (k, &ei) in members.iter().enumerate() {
            let i = ei as usize;
            let bi = bbox(i);
            for &ej in &members[k + 1..] {
                let j = ej as usize;
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                if hi == lo + 1 || (lo == 0 && hi == n - 1) {
                    continue;
                }
                let bj = bbox(j);
                let ox0 = bi.0.max(bj.0);
                let oy0 = bi.1.max(bj.1);
                if ox0 > bi.2.min(bj.2) || oy0 > bi.3.min(bj.3) {
                    continue;
                }
                // the pair is owned by the cell holding the overlap's lower corner
                if cell_of(ox0, oy0) != (cx, cy) {
                    continue;
                }
                let (a, b) = edge(lo);
                let (c, d) = edge(hi);
                if let Some(point) = segment_crossing(a, b, c, d) {
                    out.push(Crossing {
                        point,
                        first: lo,
                        second: hi,
                    });
                }
            }
        }
    }
    out.sort_by_key(|c| (c.first, c.second));
    out
}

/// Merges crossings that lie within [`CLUSTER_RADIUS`] of an earlier one.
pub(crate) fn cluster(crossings: &[Crossing]) -> Vec<Crossing> {
    let mut kept: Vec<Crossing> = Vec::new();
    for c in crossings {
        let near = kept.iter().any(|k| {
            math::hypot(k.point[0] - c.point[0], k.point[1] - c.point[1]) < CLUSTER_RADIUS
        });
        if !near {
            kept.push(*c);
        }
    }
    kept
}

/// Area weighted by the magnitude of the winding number,
/// `int |w(p)| dA`, for the closed polygon through `points` (cleaned).
///
/// The plane is cut into vertical slabs at every vertex and crossing
/// abscissa; inside a slab the active edges do not cross, so the region
/// between consecutive edges is a trapezoid of constant winding number.
/// Also returns `int w(p) dA`, the signed area, as a by-product.
pub(crate) fn winding_areas(points: &[Point], crossings: &[Crossing]) -> (f64, f64) {
    let n = points.len();
    if n < 3 {
        return (0.0, 0.0);
    }
    struct Edge {
        a: Point,
        b: Point,
        dir: f64,
    }
    let mut edges: Vec<Edge> = Vec::with_capacity(n);
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        if p[0] == q[0] {
            continue;
        }
        let (a, b, dir) = if p[0] < q[0] { (p, q, 1.0) } else { (q, p, -1.0) };
        edges.push(Edge { a, b, dir });
    }
    edges.sort_by(|e, f| e.a[0].total_cmp(&f.a[0]));

    let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    xs.extend(crossings.iter().map(|c| c.point[0]));
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();

    let y_at = |e: &Edge, x: f64| -> f64 {
        let t = ((x - e.a[0]) / (e.b[0] - e.a[0])).clamp(0.0, 1.0);
        e.a[1] + t * (e.b[1] - e.a[1])
    };

    let mut abs_area = 0.0;
    let mut signed = 0.0;
    let mut active: Vec<usize> = Vec::new();
    let mut next = 0usize;
    // (y at left, y at right, y at middle, direction)
    let mut cut: Vec<(f64, f64, f64, f64)> = Vec::new();
    for s in xs.windows(2) {
        let (xa, xb) = (s[0], s[1]);
        if xb <= xa {
            continue;
        }
        let xm = 0.5 * (xa + xb);
        while next < edges.len() && edges[next].a[0] <= xa {
            active.push(next);
            next += 1;
        }
        active.retain(|&k| edges[k].b[0] > xa);
        cut.clear();
        for &k in &active {
            let e = &edges[k];
            if e.a[0] <= xa && e.b[0] >= xb {
                cut.push((y_at(e, xa), y_at(e, xb), y_at(e, xm), e.dir));
            }
        }
        if cut.len() < 2 {
            continue;
        }
        cut.sort_by(|p, q| p.2.total_cmp(&q.2));
        let mut w = 0.0;
        let width = xb - xa;
        for pair in cut.windows(2) {
            w += pair[0].3;
            if w != 0.0 {
                let band = 0.5 * ((pair[1].0 - pair[0].0) + (pair[1].1 - pair[0].1)) * width;
                abs_area += w.abs() * band;
                signed += w * band;
            }
        }
    }
    (abs_area, signed)
}
