//! Fiber decompositions: for a fixed strip family, the connected components
//! of the strip preimages, their perpendicular extents, and the weighted sum
//!
//! ```text
//! L(gamma) = sum_n extent_n / 2^n        (extents sorted descending)
//! ```
//!
//! Each component sits inside one strip of width `mu`, so every extent is at
//! most `mu` and the sum is strictly below `2 * mu`.
//!
//! Strips are closed: a parameter where the strip coordinate is exactly an
//! integer belongs to both adjacent strips. Subdivision at integer crossings
//! is exact (crossing points get their integer coordinate assigned directly,
//! no epsilon snapping), and components with zero extent are excluded, which
//! is all the special-casing the closed-strip convention needs.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::geometry::{strip_coordinate, PLGraphMap, PolyPath, StripParams, Tolerances};

/// Parameter support of one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ComponentSupport {
    /// Maximal parameter interval of a path component.
    Path { s_lo: f64, s_hi: f64 },
    /// Subdivided edge pieces of a graph component; each entry is
    /// (edge index, fractional range along the edge).
    Graph { pieces: Vec<(usize, f64, f64)> },
}

/// One connected component of a strip preimage with positive extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberComponent {
    pub strip_index: i64,
    pub support: ComponentSupport,
    /// `mu` times the oscillation of the strip coordinate over the support.
    pub extent: f64,
}

/// All components for one parameter triple, sorted by extent descending
/// (ties by strip index, then by earliest support), plus the weighted sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberDecomposition {
    pub params: StripParams,
    pub components: Vec<FiberComponent>,
    pub value: f64,
}

/// Inputs that admit a strip fiber decomposition.
pub trait Decomposable {
    fn decompose(&self, p: &StripParams, tol: &Tolerances) -> FiberDecomposition;

    /// The weighted sum alone; same value as `decompose(..).value`.
    fn fiber_value(&self, p: &StripParams, tol: &Tolerances) -> f64 {
        self.decompose(p, tol).value
    }
}

/// `L(gamma)` for one parameter triple.
pub fn fiber_length<T: Decomposable + ?Sized>(input: &T, p: &StripParams, tol: &Tolerances) -> f64 {
    input.fiber_value(p, tol)
}

/// Convenience wrappers matching the two input kinds.
pub fn decompose_path(path: &PolyPath, p: &StripParams, tol: &Tolerances) -> FiberDecomposition {
    path.decompose(p, tol)
}

pub fn decompose_graph(g: &PLGraphMap, p: &StripParams, tol: &Tolerances) -> FiberDecomposition {
    g.decompose(p, tol)
}

/// Weighted sum of extents already sorted descending: `sum extents[n] / 2^n`.
///
/// Multiplying the running weight by 0.5 is exact, so the result is
/// reproducible bit for bit for a given ordering.
pub(crate) fn weighted_sorted_sum(extents: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    let mut w = 1.0;
    for e in extents {
        acc += e * w;
        w *= 0.5;
    }
    acc
}

/// Sort key shared by every consumer so decompositions, estimator sums and
/// profile sweeps agree bit for bit: extent descending, ties by strip index
/// then earliest support ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RankKey {
    pub extent: f64,
    pub strip_index: i64,
    /// (primary, secondary) position of the earliest support point:
    /// (s_lo, 0) for paths, (edge index, edge fraction) for graphs.
    pub pos: (f64, f64),
}

pub(crate) fn rank_order(a: &RankKey, b: &RankKey) -> std::cmp::Ordering {
    b.extent
        .total_cmp(&a.extent)
        .then(a.strip_index.cmp(&b.strip_index))
        .then(a.pos.0.total_cmp(&b.pos.0))
        .then(a.pos.1.total_cmp(&b.pos.1))
}

pub(crate) fn sort_ranked<T>(items: &mut [(RankKey, T)]) {
    items.sort_by(|a, b| rank_order(&a.0, &b.0));
    #[cfg(feature = "fault_inject_unsorted")]
    items.reverse();
}

// ---------------------------------------------------------------------------
// Path scan
// ---------------------------------------------------------------------------

/// Subdivided scalar profile of a path under one strip family: parameter and
/// strip-coordinate values at every breakpoint and every integer crossing,
/// plus the maximal runs of pieces forming each strip component.
#[derive(Debug, Clone)]
pub(crate) struct PathScan {
    /// Subdivision parameters, nondecreasing.
    pub s: Vec<f64>,
    /// Strip coordinate at each subdivision point; crossings carry their
    /// integer value exactly.
    pub h: Vec<f64>,
    pub comps: Vec<RawPathComponent>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RawPathComponent {
    pub strip_index: i64,
    /// Inclusive range of piece indices (piece k spans points k..k+1).
    pub piece_lo: usize,
    pub piece_hi: usize,
    pub h_min: f64,
    pub h_max: f64,
}

impl RawPathComponent {
    pub fn osc(&self) -> f64 {
        self.h_max - self.h_min
    }

    pub fn key(&self, scan: &PathScan, mu: f64) -> RankKey {
        RankKey {
            extent: mu * self.osc(),
            strip_index: self.strip_index,
            // piece_lo resolves exact parameter ties from zero-width pieces.
            pos: (scan.s[self.piece_lo], self.piece_lo as f64),
        }
    }
}

/// Strips a piece belongs to: a non-flat piece (or a flat one at a
/// non-integer level) lies in one strip; a flat piece exactly on a strip
/// boundary belongs to both adjacent strips.
fn piece_strips(h0: f64, h1: f64) -> (i64, Option<i64>) {
    let lo = h0.min(h1);
    let hi = h0.max(h1);
    if lo == hi && lo == lo.floor() {
        let j = lo as i64;
        (j - 1, Some(j))
    } else {
        (lo.floor() as i64, None)
    }
}

pub(crate) fn scan_path(path: &PolyPath, p: &StripParams) -> PathScan {
    let bps = path.breakpoints();
    let mut s = Vec::with_capacity(bps.len() + 8);
    let mut h = Vec::with_capacity(bps.len() + 8);

    if bps.len() == 1 {
        let hv = strip_coordinate(&bps[0].1, p);
        s.extend_from_slice(&[0.0, 1.0]);
        h.extend_from_slice(&[hv, hv]);
    } else {
        let hv: Vec<f64> = bps.iter().map(|(_, v)| strip_coordinate(v, p)).collect();
        s.push(bps[0].0);
        h.push(hv[0]);
        for i in 0..bps.len() - 1 {
            let (sa, _) = bps[i];
            let (sb, _) = bps[i + 1];
            let (ha, hb) = (hv[i], hv[i + 1]);
            if ha < hb {
                let mut k = ha.floor() + 1.0;
                while k < hb {
                    if k > ha {
                        s.push(sa + (sb - sa) * ((k - ha) / (hb - ha)));
                        h.push(k);
                    }
                    k += 1.0;
                }
            } else if hb < ha {
                let mut k = ha.ceil() - 1.0;
                while k > hb {
                    if k < ha {
                        s.push(sa + (sb - sa) * ((k - ha) / (hb - ha)));
                        h.push(k);
                    }
                    k -= 1.0;
                }
            }
            s.push(sb);
            h.push(hv[i + 1]);
        }
    }

    // Maximal runs of consecutive pieces per strip. At most two runs are
    // open at any one piece (a flat boundary piece feeds both neighbors);
    // a run closes as soon as a piece skips its strip.
    let mut comps: Vec<RawPathComponent> = Vec::new();
    let mut open: Vec<RawPathComponent> = Vec::new();
    let n_pieces = s.len() - 1;
    for k in 0..n_pieces {
        let (h0, h1) = (h[k], h[k + 1]);
        let (j0, j1) = piece_strips(h0, h1);
        let lo = h0.min(h1);
        let hi = h0.max(h1);
        for j in std::iter::once(j0).chain(j1) {
            if let Some(run) = open
                .iter_mut()
                .find(|r| r.strip_index == j && r.piece_hi + 1 == k)
            {
                run.piece_hi = k;
                run.h_min = run.h_min.min(lo);
                run.h_max = run.h_max.max(hi);
            } else {
                open.push(RawPathComponent {
                    strip_index: j,
                    piece_lo: k,
                    piece_hi: k,
                    h_min: lo,
                    h_max: hi,
                });
            }
        }
        // Runs the current piece did not touch are complete.
        let mut i = 0;
        while i < open.len() {
            if open[i].piece_hi < k {
                comps.push(open.swap_remove(i));
            } else {
                i += 1;
            }
        }
    }
    comps.append(&mut open);

    PathScan { s, h, comps }
}

impl Decomposable for PolyPath {
    fn decompose(&self, p: &StripParams, tol: &Tolerances) -> FiberDecomposition {
        let scan = scan_path(self, p);
        let mut keyed: Vec<(RankKey, &RawPathComponent)> = scan
            .comps
            .iter()
            .filter(|c| p.mu * c.osc() > tol.degenerate_extent)
            .map(|c| (c.key(&scan, p.mu), c))
            .collect();
        sort_ranked(&mut keyed);
        let value = weighted_sorted_sum(keyed.iter().map(|(k, _)| k.extent));
        let components = keyed
            .into_iter()
            .map(|(k, c)| FiberComponent {
                strip_index: c.strip_index,
                support: ComponentSupport::Path {
                    s_lo: scan.s[c.piece_lo],
                    s_hi: scan.s[c.piece_hi + 1],
                },
                extent: k.extent,
            })
            .collect();
        FiberDecomposition {
            params: *p,
            components,
            value,
        }
    }

    fn fiber_value(&self, p: &StripParams, tol: &Tolerances) -> f64 {
        let scan = scan_path(self, p);
        let mut keys: Vec<(RankKey, ())> = scan
            .comps
            .iter()
            .filter(|c| p.mu * c.osc() > tol.degenerate_extent)
            .map(|c| (c.key(&scan, p.mu), ()))
            .collect();
        sort_ranked(&mut keys);
        weighted_sorted_sum(keys.iter().map(|(k, _)| k.extent))
    }
}

// ---------------------------------------------------------------------------
// Graph scan
// ---------------------------------------------------------------------------

/// Subdivided edge piece: endpoints may be original nodes or fresh crossing
/// points; `h` values at the two endpoints bracket one strip cell.
#[derive(Debug, Clone, Copy)]
struct GraphPiece {
    edge: usize,
    t_lo: f64,
    t_hi: f64,
    pt_a: usize,
    pt_b: usize,
    h_a: f64,
    h_b: f64,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != c {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Deterministic: smaller root wins.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

impl Decomposable for PLGraphMap {
    fn decompose(&self, p: &StripParams, tol: &Tolerances) -> FiberDecomposition {
        let node_h: Vec<f64> = self
            .nodes()
            .iter()
            .map(|(_, v)| strip_coordinate(v, p))
            .collect();

        // Subdivide each edge at integer crossings. Point ids: nodes first,
        // then fresh ids for interior crossing points.
        let mut pieces: Vec<GraphPiece> = Vec::new();
        let mut next_pt = self.nodes().len();
        for (ei, &(na, nb)) in self.edges().iter().enumerate() {
            let (ha, hb) = (node_h[na], node_h[nb]);
            let mut last_pt = na;
            let mut last_t = 0.0;
            let mut last_h = ha;
            let mut push_to = |pieces: &mut Vec<GraphPiece>,
                               last_pt: &mut usize,
                               last_t: &mut f64,
                               last_h: &mut f64,
                               pt: usize,
                               t: f64,
                               hv: f64| {
                pieces.push(GraphPiece {
                    edge: ei,
                    t_lo: *last_t,
                    t_hi: t,
                    pt_a: *last_pt,
                    pt_b: pt,
                    h_a: *last_h,
                    h_b: hv,
                });
                *last_pt = pt;
                *last_t = t;
                *last_h = hv;
            };
            if ha < hb {
                let mut k = ha.floor() + 1.0;
                while k < hb {
                    if k > ha {
                        let t = (k - ha) / (hb - ha);
                        push_to(&mut pieces, &mut last_pt, &mut last_t, &mut last_h, next_pt, t, k);
                        next_pt += 1;
                    }
                    k += 1.0;
                }
            } else if hb < ha {
                let mut k = ha.ceil() - 1.0;
                while k > hb {
                    if k < ha {
                        let t = (k - ha) / (hb - ha);
                        push_to(&mut pieces, &mut last_pt, &mut last_t, &mut last_h, next_pt, t, k);
                        next_pt += 1;
                    }
                    k -= 1.0;
                }
            }
            push_to(&mut pieces, &mut last_pt, &mut last_t, &mut last_h, nb, 1.0, hb);
        }

        // Group pieces by strip, then union-find on shared endpoints.
        let mut by_strip: HashMap<i64, Vec<usize>> = HashMap::new();
        for (pi, piece) in pieces.iter().enumerate() {
            let (j0, j1) = piece_strips(piece.h_a, piece.h_b);
            by_strip.entry(j0).or_default().push(pi);
            if let Some(j) = j1 {
                by_strip.entry(j).or_default().push(pi);
            }
        }

        struct GroupAcc {
            strip_index: i64,
            h_min: f64,
            h_max: f64,
            pieces: Vec<(usize, f64, f64)>,
            pos: (f64, f64),
        }

        let mut groups: Vec<GroupAcc> = Vec::new();
        let mut strips: Vec<i64> = by_strip.keys().copied().collect();
        strips.sort_unstable();
        for j in strips {
            let members = &by_strip[&j];
            // Local union-find over the endpoint ids used in this strip.
            let mut local: HashMap<usize, usize> = HashMap::new();
            let mut order: Vec<usize> = Vec::new();
            for &pi in members {
                for pt in [pieces[pi].pt_a, pieces[pi].pt_b] {
                    local.entry(pt).or_insert_with(|| {
                        order.push(pt);
                        order.len() - 1
                    });
                }
            }
            let mut dsu = DisjointSet::new(order.len());
            for &pi in members {
                dsu.union(local[&pieces[pi].pt_a], local[&pieces[pi].pt_b]);
            }
            let mut roots: HashMap<usize, usize> = HashMap::new();
            for &pi in members {
                let piece = pieces[pi];
                let root = dsu.find(local[&piece.pt_a]);
                let gi = *roots.entry(root).or_insert_with(|| {
                    groups.push(GroupAcc {
                        strip_index: j,
                        h_min: f64::INFINITY,
                        h_max: f64::NEG_INFINITY,
                        pieces: Vec::new(),
                        pos: (f64::INFINITY, f64::INFINITY),
                    });
                    groups.len() - 1
                });
                let g = &mut groups[gi];
                g.h_min = g.h_min.min(piece.h_a.min(piece.h_b));
                g.h_max = g.h_max.max(piece.h_a.max(piece.h_b));
                g.pieces.push((piece.edge, piece.t_lo, piece.t_hi));
                let pos = (piece.edge as f64, piece.t_lo);
                if pos < g.pos {
                    g.pos = pos;
                }
            }
        }

        let mut keyed: Vec<(RankKey, GroupAcc)> = groups
            .into_iter()
            .filter(|g| p.mu * (g.h_max - g.h_min) > tol.degenerate_extent)
            .map(|g| {
                (
                    RankKey {
                        extent: p.mu * (g.h_max - g.h_min),
                        strip_index: g.strip_index,
                        pos: g.pos,
                    },
                    g,
                )
            })
            .collect();
        sort_ranked(&mut keyed);
        let value = weighted_sorted_sum(keyed.iter().map(|(k, _)| k.extent));
        let components = keyed
            .into_iter()
            .map(|(k, mut g)| {
                g.pieces.sort_by(|a, b| {
                    a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2))
                });
                FiberComponent {
                    strip_index: g.strip_index,
                    support: ComponentSupport::Graph { pieces: g.pieces },
                    extent: k.extent,
                }
            })
            .collect();
        FiberDecomposition {
            params: *p,
            components,
            value,
        }
    }
}
