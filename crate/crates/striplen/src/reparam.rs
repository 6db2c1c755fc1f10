//! Parameterization by length and equicontinuity diagnostics.
//!
//! The standard representation of a path resamples it so that the length of
//! the initial piece grows linearly in the parameter. The disjoint-interval
//! statistic counts how many pairwise non-overlapping parameter intervals
//! have images of at least a given diameter; a family with a uniform bound N
//! on that count at scale `eps/16` admits the explicit equicontinuity
//! modulus `delta = eps^2 / 2^(N+8)` for its standard representations.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{diameter_of_points, Point, PolyPath, Tolerances};
use crate::integrate::{cumulative_profile, SampleBudget};

/// Certified equicontinuity modulus for a family of paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquicontinuityReport {
    pub epsilon: f64,
    /// Max over the family of the disjoint-interval count at `epsilon / 16`.
    pub n: usize,
    /// `epsilon^2 / 2^(n + 8)`.
    pub delta: f64,
    pub family_size: usize,
}

/// Output of [`standard_representation`]. `degenerate` marks a constant
/// input, whose parameterization by length has an empty domain; the path is
/// then returned unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct ReparamResult {
    pub path: PolyPath,
    pub degenerate: bool,
}

/// Resample a path so its cumulative length profile is linear.
///
/// The profile is estimated on a uniform grid of at least
/// `max(256, 4 * breakpoints)` cells, refined once by adding midpoints
/// wherever an increment falls below `1 / (4 * grid size)`, then inverted by
/// monotone interpolation. Plateaus collapse to their left edge (the image
/// point is the same anywhere on a plateau). The output has `n_out`
/// uniformly spaced breakpoints.
pub fn standard_representation(
    path: &PolyPath,
    n_out: usize,
    budget: &SampleBudget,
) -> Result<ReparamResult, Error> {
    standard_representation_tol(path, n_out, budget, &Tolerances::default())
}

pub fn standard_representation_tol(
    path: &PolyPath,
    n_out: usize,
    budget: &SampleBudget,
    tol: &Tolerances,
) -> Result<ReparamResult, Error> {
    if n_out < 2 {
        return Err(Error::InvalidParams("need at least two output breakpoints".into()));
    }
    if path.is_constant() {
        return Ok(ReparamResult {
            path: path.clone(),
            degenerate: true,
        });
    }

    let cells = 256.max(4 * path.breakpoints().len());
    let mut grid: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    let mut profile = cumulative_profile(path, &grid, budget, tol)?;

    // One refinement pass near flat spots.
    let threshold = 1.0 / (4.0 * cells as f64);
    let mut refined = Vec::with_capacity(grid.len() * 2);
    for i in 0..grid.len() - 1 {
        refined.push(grid[i]);
        if profile[i + 1] - profile[i] < threshold {
            refined.push(0.5 * (grid[i] + grid[i + 1]));
        }
    }
    refined.push(1.0);
    if refined.len() > grid.len() {
        grid = refined;
        profile = cumulative_profile(path, &grid, budget, tol)?;
    }

    let total = *profile.last().unwrap();
    if !(total > 0.0) {
        // Estimated length zero despite a non-constant path only happens
        // with degenerate budgets; treat like the constant case.
        return Ok(ReparamResult {
            path: path.clone(),
            degenerate: true,
        });
    }

    let mut bps = Vec::with_capacity(n_out);
    let mut cell = 0usize;
    for k in 0..n_out {
        let u = total * k as f64 / (n_out - 1) as f64;
        while cell + 1 < profile.len() - 1 && profile[cell + 1] < u {
            cell += 1;
        }
        let (p0, p1) = (profile[cell], profile[cell + 1]);
        let s = if p1 > p0 {
            let f = ((u - p0) / (p1 - p0)).clamp(0.0, 1.0);
            grid[cell] + f * (grid[cell + 1] - grid[cell])
        } else {
            grid[cell]
        };
        bps.push((k as f64 / (n_out - 1) as f64, path.eval(s)));
    }
    Ok(ReparamResult {
        path: PolyPath::new(bps)?,
        degenerate: false,
    })
}

/// Maximum number of parameter intervals with pairwise disjoint interiors
/// whose images have diameter at least `eps`.
///
/// Greedy earliest-endpoint scan, exact for PL paths: within each segment
/// the first parameter where the growing image reaches diameter `eps`
/// solves a quadratic against the vertices seen so far.
pub fn disjoint_interval_count(path: &PolyPath, eps: f64) -> Result<usize, Error> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    let mut count = 0usize;
    let mut t = 0.0;
    while let Some(e) = earliest_reach(path, t, eps) {
        count += 1;
        t = e;
    }
    Ok(count)
}

/// Smallest `e >= t` with `diam(gamma([t, e])) >= eps`, if any.
fn earliest_reach(path: &PolyPath, t: f64, eps: f64) -> Option<f64> {
    if t >= 1.0 {
        return None;
    }
    let bps = path.breakpoints();
    let mut seen = vec![path.eval(t)];

    // Pieces from t onward: (sa, A, sb, B).
    let start_idx = bps.partition_point(|&(s, _)| s <= t);
    let mut sa = t;
    let mut a = seen[0];
    let mut idx = start_idx;
    loop {
        let (sb, b) = if idx < bps.len() {
            bps[idx]
        } else if sa < 1.0 {
            (1.0, path.eval(1.0))
        } else {
            return None;
        };
        // Diameter already reached at the piece start?
        if seen.iter().any(|p| p.dist(&a) >= eps) {
            return Some(sa);
        }
        let d = b.sub(&a);
        let dd = d.dot(&d);
        if dd > 0.0 {
            let mut best: Option<f64> = None;
            for p in &seen {
                let w = a.sub(p);
                let c = w.dot(&w) - eps * eps;
                if c >= 0.0 {
                    return Some(sa);
                }
                let bq = w.dot(&d);
                let disc = bq * bq - dd * c;
                // c < 0 makes disc positive; the larger root is the first
                // parameter at distance eps.
                let tau = (-bq + disc.sqrt()) / dd;
                if tau <= 1.0 {
                    best = Some(best.map_or(tau, |t: f64| t.min(tau)));
                }
            }
            if let Some(tau) = best {
                return Some(sa + tau * (sb - sa));
            }
        }
        seen.push(b);
        sa = sb;
        a = b;
        if idx >= bps.len() {
            return None;
        }
        idx += 1;
        if sa >= 1.0 {
            // Final check at the very end of the path.
            if seen.iter().any(|p| p.dist(&a) >= eps) {
                return Some(sa);
            }
            return None;
        }
    }
}

/// The explicit modulus for a family: `n` is the worst disjoint-interval
/// count at `eps / 16` and `delta = eps^2 / 2^(n+8)`. Whenever two
/// parameters of any member's standard representation are closer than
/// `delta`, their image points are closer than `eps`.
pub fn equicontinuity_delta(family: &[PolyPath], eps: f64) -> Result<EquicontinuityReport, Error> {
    if family.is_empty() {
        return Err(Error::InvalidParams("empty family".into()));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParams("eps must be positive".into()));
    }
    let mut n = 0usize;
    for path in family {
        n = n.max(disjoint_interval_count(path, eps / 16.0)?);
    }
    let delta = eps * eps * (-(n as f64 + 8.0)).exp2();
    Ok(EquicontinuityReport {
        epsilon: eps,
        n,
        delta,
        family_size: family.len(),
    })
}

/// Largest image diameter over any parameter window of width `delta`,
/// computed exactly: the window diameter is piecewise convex in the window
/// position, so the maximum occurs where an endpoint hits a breakpoint.
pub fn modulus_of_continuity(path: &PolyPath, delta: f64) -> Result<f64, Error> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParams("delta must lie in (0, 1]".into()));
    }
    let bps = path.breakpoints();
    let mut candidates: Vec<f64> = Vec::with_capacity(2 * bps.len() + 2);
    candidates.push(0.0);
    candidates.push(1.0 - delta);
    for &(s, _) in bps {
        if (0.0..=1.0 - delta).contains(&s) {
            candidates.push(s);
        }
        let shifted = s - delta;
        if (0.0..=1.0 - delta).contains(&shifted) {
            candidates.push(shifted);
        }
    }
    let mut best: f64 = 0.0;
    let mut window: Vec<Point> = Vec::new();
    for &s in &candidates {
        window.clear();
        window.push(path.eval(s));
        for &(bs, v) in bps {
            if bs > s && bs < s + delta {
                window.push(v);
            }
        }
        window.push(path.eval(s + delta));
        best = best.max(diameter_of_points(&window));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn unit_seg() -> PolyPath {
        PolyPath::from_vertices(vec![pt(0.0, 0.0), pt(1.0, 0.0)]).unwrap()
    }

    /// Power path s^m along the x-axis as a PL path with `n` breakpoints.
    fn power_path(m: i32, n: usize) -> PolyPath {
        let vertices = (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                pt(s.powi(m), 0.0)
            })
            .collect();
        PolyPath::from_vertices(vertices).unwrap()
    }

    /// Circle loop e^{2 pi i m s} as a regular polygon with `n` segments.
    fn circle_path(m: u32, n: usize) -> PolyPath {
        let vertices = (0..=n)
            .map(|i| {
                let ang = 2.0 * std::f64::consts::PI * m as f64 * i as f64 / n as f64;
                pt(ang.cos(), ang.sin())
            })
            .collect();
        PolyPath::from_vertices(vertices).unwrap()
    }

    /// Grid-restricted greedy count; a lower bound on the exact count and
    /// equal to it once the grid resolves the optimal interval endpoints.
    fn grid_interval_count(path: &PolyPath, eps: f64, m: usize) -> usize {
        let pts: Vec<Point> = (0..=m).map(|i| path.eval(i as f64 / m as f64)).collect();
        let mut count = 0;
        let mut i = 0;
        'outer: while i < m {
            let mut diam: f64 = 0.0;
            for j in (i + 1)..=m {
                for k in i..j {
                    diam = diam.max(pts[k].dist(&pts[j]));
                }
                if diam >= eps {
                    count += 1;
                    i = j;
                    continue 'outer;
                }
            }
            break;
        }
        count
    }

    #[test]
    fn count_constant_is_zero() {
        let c = PolyPath::constant(pt(1.0, 1.0));
        assert_eq!(disjoint_interval_count(&c, 0.1).unwrap(), 0);
        assert!(disjoint_interval_count(&c, 0.0).is_err());
    }

    #[test]
    fn count_unit_segment() {
        let seg = unit_seg();
        assert_eq!(disjoint_interval_count(&seg, 0.3).unwrap(), 3);
        assert_eq!(grid_interval_count(&seg, 0.3, 1000), 3);
        assert_eq!(disjoint_interval_count(&seg, 0.5).unwrap(), 2);
        assert_eq!(disjoint_interval_count(&seg, 1.0).unwrap(), 1);
        assert_eq!(disjoint_interval_count(&seg, 1.01).unwrap(), 0);
    }

    #[test]
    fn count_two_turn_circle() {
        let path = circle_path(2, 256);
        assert_eq!(disjoint_interval_count(&path, 2.0).unwrap(), 4);
        assert_eq!(grid_interval_count(&path, 2.0, 1024), 4);
    }

    #[test]
    fn grid_count_never_exceeds_exact() {
        let path = PolyPath::from_vertices(vec![
            pt(0.0, 0.0),
            pt(0.9, 0.3),
            pt(0.2, 0.8),
            pt(1.1, 1.0),
            pt(0.4, 0.1),
        ])
        .unwrap();
        for &eps in &[0.2, 0.5, 0.8, 1.3] {
            let exact = disjoint_interval_count(&path, eps).unwrap();
            let grid = grid_interval_count(&path, eps, 2000);
            assert!(grid <= exact, "eps {eps}: grid {grid} > exact {exact}");
            assert!(exact <= grid + 1, "eps {eps}: exact {exact} far above grid {grid}");
        }
    }

    #[test]
    fn modulus_examples() {
        let c = PolyPath::constant(pt(2.0, -1.0));
        assert_eq!(modulus_of_continuity(&c, 0.1).unwrap(), 0.0);

        let seg = unit_seg();
        let m = modulus_of_continuity(&seg, 0.1).unwrap();
        assert!((m - 0.1).abs() < 1e-12);

        let p20 = power_path(20, 512);
        let m = modulus_of_continuity(&p20, 0.1).unwrap();
        let expected = 1.0 - 0.9f64.powi(20);
        assert!((m - expected).abs() < 2e-3, "modulus {m} vs {expected}");

        assert!(modulus_of_continuity(&seg, 0.0).is_err());
        assert!(modulus_of_continuity(&seg, 1.5).is_err());
    }

    #[test]
    fn equicontinuity_formula() {
        let fam = vec![PolyPath::constant(pt(0.0, 0.0))];
        let rep = equicontinuity_delta(&fam, 0.5).unwrap();
        assert_eq!(rep.n, 0);
        assert_eq!(rep.delta, 0.25 / 256.0);
        assert_eq!(rep.family_size, 1);
        assert!(equicontinuity_delta(&[], 0.5).is_err());
    }

    #[test]
    fn equicontinuity_delta_shrinks_with_circle_family() {
        let mut deltas = Vec::new();
        for size in [1u32, 2, 4] {
            let fam: Vec<PolyPath> = (1..=size).map(|m| circle_path(m, 128)).collect();
            deltas.push(equicontinuity_delta(&fam, 0.5).unwrap().delta);
        }
        assert!(deltas[0] >= deltas[1]);
        assert!(deltas[1] >= deltas[2]);
        assert!(deltas[2] < deltas[0]);
    }

    #[test]
    fn standard_representation_constant() {
        let c = PolyPath::constant(pt(0.2, 0.3));
        let r = standard_representation(&c, 8, &SampleBudget::new(50, 1)).unwrap();
        assert!(r.degenerate);
        assert!(r.path.is_constant());
    }

    #[test]
    fn standard_representation_rejects_small_n() {
        let seg = unit_seg();
        assert!(standard_representation(&seg, 1, &SampleBudget::new(50, 1)).is_err());
    }

    #[test]
    fn standard_representation_of_segment_is_nearly_uniform() {
        let seg = unit_seg();
        let budget = SampleBudget::new(4000, 42);
        let r = standard_representation(&seg, 33, &budget).unwrap();
        assert!(!r.degenerate);
        // A straight segment's profile is linear, so resampled vertices
        // should be nearly uniformly spaced along the segment.
        for (i, (s, v)) in r.path.breakpoints().iter().enumerate() {
            assert!((s - i as f64 / 32.0).abs() < 1e-12);
            assert!((v.x - s).abs() < 0.02, "vertex {i} at {} for s {}", v.x, s);
            assert_eq!(v.y, 0.0);
        }
    }

    #[test]
    fn standard_representation_straightens_power_path() {
        let p = power_path(20, 512);
        let budget = SampleBudget::new(1500, 7);
        let r = standard_representation(&p, 65, &budget).unwrap();
        // The output should be close to uniform speed: its vertices along x
        // should advance roughly linearly.
        let verts: Vec<f64> = r.path.vertices().map(|v| v.x).collect();
        let mut worst: f64 = 0.0;
        for (i, &x) in verts.iter().enumerate() {
            let ideal = i as f64 / 64.0;
            worst = worst.max((x - ideal).abs());
        }
        assert!(worst < 0.05, "max deviation {worst}");
    }
}
