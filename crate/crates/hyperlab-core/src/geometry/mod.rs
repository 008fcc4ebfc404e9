//! Metric-graph substrate: spaces, points, distances, dense nets and
//! connected-component extraction.
//!
//! A [`Space`] is a finite connected graph with positive edge lengths. Points
//! live on edges as arclength fractions. Two metric modes exist: `Geodesic`
//! (shortest paths through the graph) and `AmbientEuclidean` (straight-line
//! distance between planar embeddings, for spaces defined as plane subsets).

mod mask;

pub use mask::{Interval, SubsetMask};

use crate::error::CoreError;
use crate::real::Real;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    Geodesic,
    AmbientEuclidean,
}

/// Planar polyline with precomputed cumulative arclengths.
#[derive(Debug, Clone)]
pub struct Polyline<R> {
    pub points: Vec<[R; 2]>,
    cum: Vec<R>,
}

impl<R: Real> Polyline<R> {
    pub fn new(points: Vec<[R; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(CoreError::InvalidSpace(
                "embedding polyline needs at least two points".into(),
            ));
        }
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = R::zero();
        cum.push(acc);
        for w in points.windows(2) {
            acc = acc + planar_dist(w[0], w[1]);
            cum.push(acc);
        }
        Ok(Self { points, cum })
    }

    pub fn length(&self) -> R {
        *self.cum.last().unwrap()
    }

    /// Embedded position at arclength fraction `t` of the polyline.
    pub fn at(&self, t: R) -> [R; 2] {
        let target = self.length() * t.max(R::zero()).min(R::one());
        // locate the segment containing `target`
        let mut i = match self
            .cum
            .binary_search_by(|c| c.partial_cmp(&target).unwrap())
        {
            Ok(k) => k,
            Err(k) => k.saturating_sub(1),
        };
        if i + 1 >= self.points.len() {
            i = self.points.len() - 2;
        }
        let seg_len = self.cum[i + 1] - self.cum[i];
        let u = if seg_len > R::zero() {
            (target - self.cum[i]) / seg_len
        } else {
            R::zero()
        };
        let a = self.points[i];
        let b = self.points[i + 1];
        [a[0] + (b[0] - a[0]) * u, a[1] + (b[1] - a[1]) * u]
    }

    /// Piece boundaries as arclength fractions (first = 0, last = 1).
    pub fn piece_fractions(&self) -> Vec<R> {
        let len = self.length();
        self.cum.iter().map(|&c| c / len).collect()
    }
}

pub fn planar_dist<R: Real>(a: [R; 2], b: [R; 2]) -> R {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

#[derive(Debug, Clone)]
pub struct Edge<R> {
    pub u: VertexId,
    pub v: VertexId,
    pub length: R,
    pub embedding: Option<Polyline<R>>,
}

/// A point as (edge, arclength fraction from the edge's first endpoint).
/// Vertices canonicalize to `t ∈ {0,1}` on their lowest-indexed incident
/// edge, so point equality is decidable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint<R> {
    pub edge: EdgeId,
    pub t: R,
}

impl<R: Real> GraphPoint<R> {
    pub fn new(edge: usize, t: R) -> Self {
        Self {
            edge: EdgeId(edge),
            t,
        }
    }
}

/// Finite metric graph with a fixed metric mode and precomputed
/// vertex-to-vertex shortest paths.
#[derive(Debug, Clone)]
pub struct Space<R> {
    pub name: String,
    pub metric_mode: MetricMode,
    n_vertices: usize,
    edges: Vec<Edge<R>>,
    incident: Vec<Vec<EdgeId>>,
    vertex_rep: Vec<GraphPoint<R>>,
    apsp: Vec<R>,
    diameter: R,
    total_length: R,
}

impl<R: Real> Space<R> {
    pub fn new(
        name: impl Into<String>,
        n_vertices: usize,
        edges: Vec<Edge<R>>,
        metric_mode: MetricMode,
    ) -> Result<Self> {
        let name = name.into();
        if n_vertices == 0 || edges.is_empty() {
            return Err(CoreError::InvalidSpace(
                "space needs at least one vertex and one edge".into(),
            ));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.u.0 >= n_vertices || e.v.0 >= n_vertices {
                return Err(CoreError::InvalidSpace(format!(
                    "edge {i} references a vertex outside 0..{n_vertices}"
                )));
            }
            if !(e.length > R::zero()) || !e.length.is_finite() {
                return Err(CoreError::InvalidSpace(format!(
                    "edge {i} has non-positive or non-finite length"
                )));
            }
            if metric_mode == MetricMode::AmbientEuclidean {
                let emb = e.embedding.as_ref().ok_or_else(|| {
                    CoreError::InvalidSpace(format!(
                        "ambient metric requires an embedding on edge {i}"
                    ))
                })?;
                let rel = (emb.length() - e.length).abs() / e.length;
                if rel > R::of(1e-9) {
                    return Err(CoreError::InvalidSpace(format!(
                        "edge {i}: embedded length {} differs from declared {}",
                        emb.length(),
                        e.length
                    )));
                }
            }
        }

        let mut incident = vec![Vec::new(); n_vertices];
        for (i, e) in edges.iter().enumerate() {
            incident[e.u.0].push(EdgeId(i));
            if e.v != e.u {
                incident[e.v.0].push(EdgeId(i));
            }
        }
        for (v, inc) in incident.iter().enumerate() {
            if inc.is_empty() {
                return Err(CoreError::InvalidSpace(format!("vertex {v} is isolated")));
            }
        }

        // connectivity
        let mut seen = vec![false; n_vertices];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &EdgeId(ei) in &incident[v] {
                let e = &edges[ei];
                for w in [e.u.0, e.v.0] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(CoreError::InvalidSpace("graph is not connected".into()));
        }

        // canonical vertex representatives: lowest-indexed incident edge
        let vertex_rep = (0..n_vertices)
            .map(|v| {
                let EdgeId(ei) = incident[v][0];
                let t = if edges[ei].u.0 == v { R::zero() } else { R::one() };
                GraphPoint::new(ei, t)
            })
            .collect();

        // all-pairs shortest paths over vertices (Floyd-Warshall; graphs are small)
        let n = n_vertices;
        let inf = R::infinity();
        let mut apsp = vec![inf; n * n];
        for v in 0..n {
            apsp[v * n + v] = R::zero();
        }
        for e in &edges {
            let (a, b) = (e.u.0, e.v.0);
            if e.length < apsp[a * n + b] {
                apsp[a * n + b] = e.length;
                apsp[b * n + a] = e.length;
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = apsp[i * n + k];
                if dik == inf {
                    continue;
                }
                for j in 0..n {
                    let alt = dik + apsp[k * n + j];
                    if alt < apsp[i * n + j] {
                        apsp[i * n + j] = alt;
                    }
                }
            }
        }

        let total_length = edges.iter().map(|e| e.length).fold(R::zero(), |a, b| a + b);

        let mut space = Self {
            name,
            metric_mode,
            n_vertices,
            edges,
            incident,
            vertex_rep,
            apsp,
            diameter: R::zero(),
            total_length,
        };
        space.diameter = space.estimate_diameter();
        Ok(space)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge<R> {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge<R>] {
        &self.edges
    }

    pub fn incident_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v.0]
    }

    pub fn vertex_degree(&self, v: VertexId) -> usize {
        self.incident[v.0]
            .iter()
            .map(|&e| {
                let ed = &self.edges[e.0];
                if ed.u == ed.v {
                    2
                } else {
                    1
                }
            })
            .sum()
    }

    /// Shortest-path distance between two vertices.
    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> R {
        self.apsp[a.0 * self.n_vertices + b.0]
    }

    pub fn total_length(&self) -> R {
        self.total_length
    }

    /// Estimated diameter in the space's own metric (sampled lower bound plus
    /// one grid spacing). Used for default sampling spacings.
    pub fn diameter(&self) -> R {
        self.diameter
    }

    fn estimate_diameter(&self) -> R {
        let spacing = self.total_length / R::of(256.0);
        let max_edge = self
            .edges
            .iter()
            .map(|e| e.length)
            .fold(R::zero(), |a, b| a.max(b));
        let spacing = spacing.max(max_edge / R::of(64.0));
        let net = self.sample_net_unchecked(spacing);
        let mut best = R::zero();
        for i in 0..net.len() {
            for j in (i + 1)..net.len() {
                let d = self.point_distance_unchecked(&net[i], &net[j]);
                if d > best {
                    best = d;
                }
            }
        }
        best + spacing
    }

    pub fn validate_point(&self, p: &GraphPoint<R>) -> Result<()> {
        if p.edge.0 >= self.edges.len() {
            return Err(CoreError::InvalidPoint {
                edge: p.edge.0,
                reason: format!("does not exist (space has {} edges)", self.edges.len()),
            });
        }
        if !(p.t >= R::zero() && p.t <= R::one()) {
            return Err(CoreError::InvalidPoint {
                edge: p.edge.0,
                reason: format!("parameter {} outside [0,1]", p.t),
            });
        }
        Ok(())
    }

    /// Canonical form: vertex endpoints are rewritten to the vertex's owner
    /// edge so that equal points compare equal.
    pub fn canonicalize(&self, p: GraphPoint<R>) -> GraphPoint<R> {
        let e = &self.edges[p.edge.0];
        if p.t == R::zero() {
            self.vertex_rep[e.u.0]
        } else if p.t == R::one() {
            self.vertex_rep[e.v.0]
        } else {
            p
        }
    }

    pub fn vertex_point(&self, v: VertexId) -> GraphPoint<R> {
        self.vertex_rep[v.0]
    }

    /// Planar position of a point (requires an embedded edge).
    pub fn embed_point(&self, p: &GraphPoint<R>) -> Result<[R; 2]> {
        let e = &self.edges[p.edge.0];
        let emb = e.embedding.as_ref().ok_or_else(|| CoreError::InvalidPoint {
            edge: p.edge.0,
            reason: "edge has no planar embedding".into(),
        })?;
        Ok(emb.at(p.t))
    }

    fn point_distance_unchecked(&self, p: &GraphPoint<R>, q: &GraphPoint<R>) -> R {
        match self.metric_mode {
            MetricMode::AmbientEuclidean => {
                let a = self.embed_point(p).expect("embedded space");
                let b = self.embed_point(q).expect("embedded space");
                planar_dist(a, b)
            }
            MetricMode::Geodesic => {
                let ep = &self.edges[p.edge.0];
                let eq = &self.edges[q.edge.0];
                let off_p = [p.t * ep.length, (R::one() - p.t) * ep.length];
                let off_q = [q.t * eq.length, (R::one() - q.t) * eq.length];
                let vp = [ep.u, ep.v];
                let vq = [eq.u, eq.v];
                let mut best = R::infinity();
                for (i, &a) in vp.iter().enumerate() {
                    for (j, &b) in vq.iter().enumerate() {
                        let d = off_p[i] + self.vertex_distance(a, b) + off_q[j];
                        if d < best {
                            best = d;
                        }
                    }
                }
                if p.edge == q.edge {
                    best = best.min((p.t - q.t).abs() * ep.length);
                }
                best
            }
        }
    }

    fn sample_net_unchecked(&self, delta: R) -> Vec<GraphPoint<R>> {
        let mut out: Vec<GraphPoint<R>> = (0..self.n_vertices)
            .map(|v| self.vertex_rep[v])
            .collect();
        for (ei, e) in self.edges.iter().enumerate() {
            let n_sub = (e.length / delta).ceil().to_usize().unwrap_or(1).max(1);
            for k in 1..n_sub {
                let t = R::of_usize(k) / R::of_usize(n_sub);
                out.push(GraphPoint::new(ei, t));
            }
        }
        out
    }
}

/// Distance between two points of `space` in its metric mode. Symmetric,
/// nonnegative, zero iff the canonical points coincide (ambient mode is a
/// pseudometric when distinct edges share planar images).
pub fn point_distance<R: Real>(
    space: &Space<R>,
    p: &GraphPoint<R>,
    q: &GraphPoint<R>,
) -> Result<R> {
    space.validate_point(p)?;
    space.validate_point(q)?;
    Ok(space.point_distance_unchecked(p, q))
}

/// Deterministic δ-dense net: every vertex, plus uniform interior points per
/// edge at spacing ≤ δ.
pub fn sample_net<R: Real>(space: &Space<R>, delta: R) -> Result<Vec<GraphPoint<R>>> {
    if !(delta > R::zero()) {
        return Err(CoreError::Parameter("net spacing must be positive".into()));
    }
    Ok(space.sample_net_unchecked(delta))
}

/// Closures of the connected components of the complement of `removed`.
pub fn connected_components<R: Real>(
    space: &Space<R>,
    removed: &SubsetMask<R>,
) -> Result<Vec<SubsetMask<R>>> {
    let full = SubsetMask::full(space);
    components_within(space, &full, removed)
}

/// Closures of the connected components of `domain \ removed`, glued across
/// vertices that belong to the difference.
pub fn components_within<R: Real>(
    space: &Space<R>,
    domain: &SubsetMask<R>,
    removed: &SubsetMask<R>,
) -> Result<Vec<SubsetMask<R>>> {
    domain.check_shape(space)?;
    removed.check_shape(space)?;

    // per-edge pieces of domain minus removed (closures)
    let mut pieces: Vec<(EdgeId, Interval<R>)> = Vec::new();
    for ei in 0..space.n_edges() {
        let dom = domain.edge_intervals(EdgeId(ei));
        let rem = removed.edge_intervals(EdgeId(ei));
        for d in dom {
            subtract_into(*d, rem, |iv| pieces.push((EdgeId(ei), iv)));
        }
    }

    // union-find over pieces plus one virtual node per vertex
    let np = pieces.len();
    let nv = space.n_vertices();
    let mut dsu = Dsu::new(np + nv);
    for (idx, (eid, iv)) in pieces.iter().enumerate() {
        let e = space.edge(*eid);
        for (endpoint_t, vert) in [(R::zero(), e.u), (R::one(), e.v)] {
            let touches = if endpoint_t == R::zero() {
                iv.lo == R::zero()
            } else {
                iv.hi == R::one()
            };
            if touches && vertex_in_difference(space, domain, removed, vert) {
                dsu.union(idx, np + vert.0);
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for idx in 0..np {
        groups.entry(dsu.find(idx)).or_default().push(idx);
    }
    let resolution = domain.resolution().max(removed.resolution());
    let mut out = Vec::new();
    for (_, members) in groups {
        let mut mask = SubsetMask::empty(space.n_edges(), resolution);
        for idx in members {
            let (eid, iv) = pieces[idx];
            mask.add_interval(eid, iv.lo, iv.hi);
        }
        mask.normalize();
        out.push(mask);
    }
    Ok(out)
}

/// Whether the vertex lies in `domain` and outside `removed` (as a point).
fn vertex_in_difference<R: Real>(
    space: &Space<R>,
    domain: &SubsetMask<R>,
    removed: &SubsetMask<R>,
    v: VertexId,
) -> bool {
    vertex_in_mask(space, domain, v) && !vertex_in_mask(space, removed, v)
}

pub(crate) fn vertex_in_mask<R: Real>(space: &Space<R>, mask: &SubsetMask<R>, v: VertexId) -> bool {
    for &eid in space.incident_edges(v) {
        let e = space.edge(eid);
        for iv in mask.edge_intervals(eid) {
            if (e.u == v && iv.lo == R::zero()) || (e.v == v && iv.hi == R::one()) {
                return true;
            }
        }
    }
    false
}

/// Closed pieces covering the closures of the components of
/// `domain_iv \ removed` on one edge. `removed` must be sorted and disjoint.
fn subtract_into<R: Real>(
    domain_iv: Interval<R>,
    removed: &[Interval<R>],
    mut emit: impl FnMut(Interval<R>),
) {
    let mut cur = domain_iv.lo;
    let mut cur_removed = false; // whether `cur` itself lies in a removed block
    for r in removed {
        if r.hi < domain_iv.lo || r.lo > domain_iv.hi {
            continue;
        }
        let lo = r.lo.max(domain_iv.lo);
        let hi = r.hi.min(domain_iv.hi);
        if lo > cur {
            emit(Interval { lo: cur, hi: lo });
        }
        if hi >= cur {
            cur = hi;
            cur_removed = true;
        }
    }
    if cur < domain_iv.hi {
        emit(Interval {
            lo: cur,
            hi: domain_iv.hi,
        });
    } else if cur == domain_iv.hi && !cur_removed {
        // degenerate domain point untouched by any removed block
        emit(Interval { lo: cur, hi: cur });
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
