//! Plane primitives, piecewise-linear paths and graph maps, and the strip
//! coordinate transform that everything else is built on.
//!
//! Angles are kept in half-turn units throughout: a direction parameter `t`
//! means the rotation `e^{t*pi*i}`, so the unit cube of strip parameters can
//! be sampled literally.

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A point in the plane, identified with a complex number x + iy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Linear interpolation from `self` to `other` at parameter `u` in [0, 1].
    pub fn lerp(&self, other: &Point, u: f64) -> Point {
        Point {
            x: self.x + u * (other.x - self.x),
            y: self.y + u * (other.y - self.y),
        }
    }

    pub fn add(&self, other: &Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(&self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product `self x other`.
    pub fn cross(&self, other: &Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Complex multiplication by `e^{t*pi*i}` (rotation by `t` half turns).
    pub fn rotate_half_turns(&self, t: f64) -> Point {
        let (s, c) = (t * std::f64::consts::PI).sin_cos();
        Point {
            x: self.x * c - self.y * s,
            y: self.x * s + self.y * c,
        }
    }
}

/// Strip family parameters: the family `S_j = mu * e^{t*pi*i} * (S_j + i*x)`
/// of closed parallel strips of width `mu`, rotated by `t` half turns and
/// offset by `x` strip widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripParams {
    pub x: f64,
    pub t: f64,
    pub mu: f64,
}

impl StripParams {
    /// `mu` must lie in (0, 1]; `x` and `t` may be any finite value (values
    /// outside [0, 1] are allowed for identity testing).
    pub fn new(x: f64, t: f64, mu: f64) -> Result<Self, Error> {
        if !x.is_finite() || !t.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParams("strip parameters must be finite".into()));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::InvalidParams(format!("mu must lie in (0, 1], got {mu}")));
        }
        Ok(StripParams { x, t, mu })
    }
}

/// Numeric tolerances shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Components whose perpendicular extent is `<=` this value are dropped
    /// from decompositions (0 keeps exactly the non-degenerate ones).
    pub degenerate_extent: f64,
    /// Slack for exact floating-point identities.
    pub float_eps: f64,
    /// Slack for geometric predicates in polygonal domains.
    pub geo_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            degenerate_extent: 0.0,
            float_eps: 1e-12,
            geo_eps: 1e-9,
        }
    }
}

/// Scalar strip coordinate of `z`: `h(z) = Im(e^{-t*pi*i} z) / mu - x`.
///
/// `z` lies in the j-th strip of the family exactly when `h(z)` is in
/// `[j, j+1]`. Affine in `z`, and stepping `z` by `mu * e^{(t+1/2)*pi*i}`
/// raises `h` by one.
pub fn strip_coordinate(z: &Point, p: &StripParams) -> f64 {
    let (s, c) = (p.t * std::f64::consts::PI).sin_cos();
    // Im(e^{-t*pi*i} * (zx + i*zy)) = zy*cos(t*pi) - zx*sin(t*pi)
    (z.y * c - z.x * s) / p.mu - p.x
}

/// Perpendicular extent of a point set: the diameter of its orthogonal
/// projection onto the line with direction `e^{(t+1/2)*pi*i}`, computed as
/// the oscillation of `Im(e^{-t*pi*i} z)`.
pub fn perp_extent(points: &[Point], t: f64) -> Result<f64, Error> {
    if points.is_empty() {
        return Err(Error::InvalidParams("perp_extent of an empty set".into()));
    }
    let (s, c) = (t * std::f64::consts::PI).sin_cos();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for z in points {
        let v = z.y * c - z.x * s;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(hi - lo)
}

/// A piecewise-linear path [0,1] -> plane with explicit parameter
/// breakpoints. A single breakpoint represents a constant path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPath {
    breakpoints: Vec<(f64, Point)>,
}

impl PolyPath {
    /// Breakpoint parameters must be strictly increasing from 0 to 1 (a
    /// single entry at 0 represents a constant path); all coordinates finite.
    pub fn new(breakpoints: Vec<(f64, Point)>) -> Result<Self, Error> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidPath("path needs at least one breakpoint".into()));
        }
        for (s, v) in &breakpoints {
            if !s.is_finite() || !v.is_finite() {
                return Err(Error::InvalidPath("non-finite breakpoint".into()));
            }
        }
        if breakpoints.len() == 1 {
            if breakpoints[0].0 != 0.0 {
                return Err(Error::InvalidPath("constant path must sit at parameter 0".into()));
            }
            return Ok(PolyPath { breakpoints });
        }
        if breakpoints[0].0 != 0.0 || breakpoints[breakpoints.len() - 1].0 != 1.0 {
            return Err(Error::InvalidPath("parameters must run from 0 to 1".into()));
        }
        for w in breakpoints.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidPath("parameters must be strictly increasing".into()));
            }
        }
        Ok(PolyPath { breakpoints })
    }

    /// Path through the given vertices with uniformly spaced parameters.
    pub fn from_vertices(vertices: Vec<Point>) -> Result<Self, Error> {
        if vertices.is_empty() {
            return Err(Error::InvalidPath("path needs at least one vertex".into()));
        }
        if vertices.len() == 1 {
            return PolyPath::new(vec![(0.0, vertices[0])]);
        }
        let n = vertices.len() - 1;
        let bps = vertices
            .into_iter()
            .enumerate()
            .map(|(i, v)| (i as f64 / n as f64, v))
            .collect();
        PolyPath::new(bps)
    }

    pub fn constant(v: Point) -> Self {
        PolyPath { breakpoints: vec![(0.0, v)] }
    }

    pub fn breakpoints(&self) -> &[(f64, Point)] {
        &self.breakpoints
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Point> {
        self.breakpoints.iter().map(|(_, v)| v)
    }

    pub fn is_constant(&self) -> bool {
        self.breakpoints.len() == 1
            || self.breakpoints.windows(2).all(|w| w[0].1 == w[1].1)
    }

    pub fn start(&self) -> Point {
        self.breakpoints[0].1
    }

    pub fn end(&self) -> Point {
        self.breakpoints[self.breakpoints.len() - 1].1
    }

    /// Evaluate by linear interpolation; `s` is clamped to [0, 1].
    pub fn eval(&self, s: f64) -> Point {
        let bps = &self.breakpoints;
        if bps.len() == 1 || s <= bps[0].0 {
            return bps[0].1;
        }
        if s >= bps[bps.len() - 1].0 {
            return bps[bps.len() - 1].1;
        }
        // Last index with parameter <= s.
        let i = match bps.binary_search_by(|(bs, _)| bs.partial_cmp(&s).unwrap()) {
            Ok(i) => return bps[i].1,
            Err(i) => i - 1,
        };
        let (s0, v0) = bps[i];
        let (s1, v1) = bps[i + 1];
        v0.lerp(&v1, (s - s0) / (s1 - s0))
    }

    /// Restriction to [s1, s2], rescaled back to domain [0, 1].
    ///
    /// Breakpoints strictly inside the window are kept verbatim so that the
    /// restriction agrees with the original pointwise; `s1 == s2` yields the
    /// constant path at `eval(s1)`.
    pub fn restrict(&self, s1: f64, s2: f64) -> Result<PolyPath, Error> {
        if !(0.0..=1.0).contains(&s1) || !(0.0..=1.0).contains(&s2) || s1 > s2 {
            return Err(Error::InvalidParams(format!(
                "restriction window [{s1}, {s2}] must satisfy 0 <= s1 <= s2 <= 1"
            )));
        }
        if s1 == s2 {
            return Ok(PolyPath::constant(self.eval(s1)));
        }
        let mut bps = Vec::new();
        bps.push((0.0, self.eval(s1)));
        let width = s2 - s1;
        for &(s, v) in &self.breakpoints {
            if s > s1 && s < s2 {
                bps.push(((s - s1) / width, v));
            }
        }
        bps.push((1.0, self.eval(s2)));
        PolyPath::new(bps)
    }

    /// Sum of segment lengths (the Euclidean path length of a PL path).
    pub fn euclidean_length(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .map(|w| w[0].1.dist(&w[1].1))
            .sum()
    }

    /// Euclidean diameter of the image; for a PL path the maximum is
    /// attained between vertices.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point> = self.vertices().copied().collect();
        diameter_of_points(&pts)
    }

    /// Vertex-wise image under the isometry: optional reflection across the
    /// x-axis, then rotation by `rot` half turns, then translation.
    pub fn apply_isometry(&self, rot: f64, translation: Point, reflect: bool) -> PolyPath {
        let bps = self
            .breakpoints
            .iter()
            .map(|&(s, v)| (s, apply_isometry_point(&v, rot, &translation, reflect)))
            .collect();
        PolyPath { breakpoints: bps }
    }
}

pub(crate) fn apply_isometry_point(v: &Point, rot: f64, translation: &Point, reflect: bool) -> Point {
    let p = if reflect { Point::new(v.x, -v.y) } else { *v };
    p.rotate_half_turns(rot).add(translation)
}

/// Euclidean diameter of a finite point set (max pairwise distance).
pub fn diameter_of_points(points: &[Point]) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.max(points[i].dist(&points[j]));
        }
    }
    best
}

/// A finite connected graph with plane coordinates at the nodes; the map to
/// the plane is linear on each edge. Multi-edges and cycles are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLGraphMap {
    nodes: Vec<(String, Point)>,
    edges: Vec<(usize, usize)>,
}

impl PLGraphMap {
    /// Node ids must be unique, every edge endpoint must exist, every
    /// coordinate must be finite, and the graph must be connected.
    pub fn new(nodes: Vec<(String, Point)>, edges: Vec<(String, String)>) -> Result<Self, Error> {
        if nodes.is_empty() {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        let mut index = std::collections::HashMap::new();
        for (i, (id, v)) in nodes.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidGraph(format!("non-finite coordinates at node {id}")));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id {id}")));
            }
        }
        let mut resolved = Vec::with_capacity(edges.len());
        for (a, b) in &edges {
            let ia = *index
                .get(a)
                .ok_or_else(|| Error::InvalidGraph(format!("edge endpoint {a} not a node")))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| Error::InvalidGraph(format!("edge endpoint {b} not a node")))?;
            resolved.push((ia, ib));
        }
        let g = PLGraphMap { nodes, edges: resolved };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph must be connected".into()));
        }
        Ok(g)
    }

    pub fn nodes(&self) -> &[(String, Point)] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_point(&self, i: usize) -> Point {
        self.nodes[i].1
    }

    fn is_connected(&self) -> bool {
        let n = self.nodes.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// True when the graph contains no cycle (a tree / dendrite model).
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.nodes.len() && self.is_connected()
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point> = self.nodes.iter().map(|(_, v)| *v).collect();
        diameter_of_points(&pts)
    }

    pub fn apply_isometry(&self, rot: f64, translation: Point, reflect: bool) -> PLGraphMap {
        PLGraphMap {
            nodes: self
                .nodes
                .iter()
                .map(|(id, v)| (id.clone(), apply_isometry_point(v, rot, &translation, reflect)))
                .collect(),
            edges: self.edges.clone(),
        }
    }

    /// Two-node chain graph covering the same segment as a one-segment path.
    pub fn chain(a: Point, b: Point) -> Result<Self, Error> {
        PLGraphMap::new(
            vec![("a".into(), a), ("b".into(), b)],
            vec![("a".into(), "b".into())],
        )
    }
}
