//! Concrete spaces and homeomorphisms.
//!
//! Maps are stored as edge correspondences: each source edge carries an
//! ordered list of pieces, each piece being a strictly monotone piecewise
//! linear parameter map into one target edge. The inverse is derived by
//! inverting every piece, so a `Homeo` is exactly invertible by construction;
//! `sup_error` records how far this PL representation sits from the ideal map
//! it stands for (zero when the ideal map is itself piecewise linear).

use crate::error::CoreError;
use crate::geometry::{Edge, EdgeId, GraphPoint, MetricMode, Polyline, Space, VertexId};
use crate::real::Real;
use crate::Result;

/// Strictly monotone piecewise-linear map on a parameter interval.
#[derive(Debug, Clone)]
pub struct PlMap<R> {
    xs: Vec<R>,
    ys: Vec<R>,
}

impl<R: Real> PlMap<R> {
    pub fn new(xs: Vec<R>, ys: Vec<R>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(CoreError::Parameter(
                "piecewise-linear map needs matching breakpoint lists of length >= 2".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(CoreError::Parameter(
                    "breakpoint abscissae must be strictly increasing".into(),
                ));
            }
        }
        let increasing = ys[1] > ys[0];
        for w in ys.windows(2) {
            let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
            if !ok {
                return Err(CoreError::Parameter(
                    "breakpoint ordinates must be strictly monotone".into(),
                ));
            }
        }
        Ok(Self { xs, ys })
    }

    pub fn line(x0: R, x1: R, y0: R, y1: R) -> Result<Self> {
        Self::new(vec![x0, x1], vec![y0, y1])
    }

    pub fn domain(&self) -> (R, R) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn range(&self) -> (R, R) {
        let (a, b) = (self.ys[0], *self.ys.last().unwrap());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn increasing(&self) -> bool {
        self.ys[1] > self.ys[0]
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (R, R)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn eval(&self, x: R) -> R {
        let (lo, hi) = self.domain();
        let x = x.max(lo).min(hi);
        let i = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(k) => return self.ys[k],
            Err(k) => k - 1, // x > xs[0] here because of the clamp
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        y0 + (x - x0) / (x1 - x0) * (y1 - y0)
    }

    /// Exact inverse as a PL map (breakpoints swapped).
    pub fn inverse(&self) -> Self {
        if self.increasing() {
            Self {
                xs: self.ys.clone(),
                ys: self.xs.clone(),
            }
        } else {
            Self {
                xs: self.ys.iter().rev().copied().collect(),
                ys: self.xs.iter().rev().copied().collect(),
            }
        }
    }
}

/// One piece of an edge correspondence: a source parameter subinterval mapped
/// monotonically into a single target edge.
#[derive(Debug, Clone)]
pub struct PathPiece<R> {
    pub target: EdgeId,
    pub map: PlMap<R>,
}

impl<R: Real> PathPiece<R> {
    pub fn src_lo(&self) -> R {
        self.map.domain().0
    }
    pub fn src_hi(&self) -> R {
        self.map.domain().1
    }
}

/// Piecewise-monotone edge-correspondence homeomorphism with a derived exact
/// inverse.
#[derive(Debug, Clone)]
pub struct Homeo<R> {
    pub name: String,
    forward: Vec<Vec<PathPiece<R>>>,
    inverse: Vec<Vec<PathPiece<R>>>,
    /// Sup-norm distance (in length units) from the ideal forward map.
    pub sup_error_forward: R,
    /// Same, for the derived inverse against the ideal inverse map.
    pub sup_error_backward: R,
}

impl<R: Real> Homeo<R> {
    /// Build from forward pieces. Pieces must tile each source edge's `[0,1]`
    /// exactly; target-side consistency is *not* enforced here so that
    /// deliberately broken maps can still be constructed and then audited via
    /// [`check_homeomorphism`].
    pub fn from_forward(
        space: &Space<R>,
        name: impl Into<String>,
        mut forward: Vec<Vec<PathPiece<R>>>,
        sup_error_forward: R,
        sup_error_backward: R,
    ) -> Result<Self> {
        if forward.len() != space.n_edges() {
            return Err(CoreError::Parameter(format!(
                "forward map covers {} edges, space has {}",
                forward.len(),
                space.n_edges()
            )));
        }
        for (e, pieces) in forward.iter_mut().enumerate() {
            pieces.sort_by(|a, b| a.src_lo().partial_cmp(&b.src_lo()).unwrap());
            if pieces.is_empty() {
                return Err(CoreError::Parameter(format!("edge {e} has no pieces")));
            }
            let mut cursor = R::zero();
            for p in pieces.iter() {
                if p.target.0 >= space.n_edges() {
                    return Err(CoreError::Parameter(format!(
                        "edge {e}: piece targets nonexistent edge {}",
                        p.target.0
                    )));
                }
                if (p.src_lo() - cursor).abs() > R::of(1e-12) {
                    return Err(CoreError::Parameter(format!(
                        "edge {e}: pieces leave a gap at parameter {}",
                        cursor
                    )));
                }
                cursor = p.src_hi();
            }
            if (cursor - R::one()).abs() > R::of(1e-12) {
                return Err(CoreError::Parameter(format!(
                    "edge {e}: pieces stop at parameter {cursor}"
                )));
            }
        }

        // Derive the inverse: invert each piece and regroup by target edge.
        let mut inverse: Vec<Vec<PathPiece<R>>> = vec![Vec::new(); space.n_edges()];
        for (e, pieces) in forward.iter().enumerate() {
            for p in pieces {
                inverse[p.target.0].push(PathPiece {
                    target: EdgeId(e),
                    map: p.map.inverse(),
                });
            }
        }
        for pieces in &mut inverse {
            pieces.sort_by(|a, b| a.src_lo().partial_cmp(&b.src_lo()).unwrap());
        }

        Ok(Self {
            name: name.into(),
            forward,
            inverse,
            sup_error_forward,
            sup_error_backward,
        })
    }

    pub fn pieces(&self, e: EdgeId) -> &[PathPiece<R>] {
        &self.forward[e.0]
    }

    pub fn inverse_pieces(&self, e: EdgeId) -> &[PathPiece<R>] {
        &self.inverse[e.0]
    }

    pub fn n_edges(&self) -> usize {
        self.forward.len()
    }
}

/// Image of a point under the homeomorphism (canonicalized).
pub fn apply_point<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    p: &GraphPoint<R>,
) -> Result<GraphPoint<R>> {
    space.validate_point(p)?;
    let q = apply_in_pieces(&h.forward, p);
    Ok(space.canonicalize(q))
}

/// Image under the inverse map.
pub fn apply_point_inverse<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    p: &GraphPoint<R>,
) -> Result<GraphPoint<R>> {
    space.validate_point(p)?;
    let q = apply_in_pieces(&h.inverse, p);
    Ok(space.canonicalize(q))
}

fn apply_in_pieces<R: Real>(pieces: &[Vec<PathPiece<R>>], p: &GraphPoint<R>) -> GraphPoint<R> {
    let list = &pieces[p.edge.0];
    if list.is_empty() {
        // only reachable on non-bijective maps under audit; leave the point be
        return *p;
    }
    let idx = list
        .partition_point(|piece| piece.src_hi() < p.t)
        .min(list.len() - 1);
    let piece = &list[idx];
    GraphPoint {
        edge: piece.target,
        t: piece.map.eval(p.t),
    }
}

/// The inverse homeomorphism (cheap: swaps the two directions).
pub fn invert<R: Real>(h: &Homeo<R>) -> Homeo<R> {
    Homeo {
        name: format!("{}^-1", h.name),
        forward: h.inverse.clone(),
        inverse: h.forward.clone(),
        sup_error_forward: h.sup_error_backward,
        sup_error_backward: h.sup_error_forward,
    }
}

/// Forward orbit `p, h(p), ..., h^n(p)`.
pub fn iterate_point<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    p: &GraphPoint<R>,
    n: usize,
) -> Result<Vec<GraphPoint<R>>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = space.canonicalize(*p);
    space.validate_point(&cur)?;
    out.push(cur);
    for _ in 0..n {
        cur = apply_point(space, h, &cur)?;
        out.push(cur);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum HomeoViolation {
    TargetGap { edge: usize, at: f64 },
    TargetOverlap { edge: usize, lo: f64, hi: f64 },
    VertexDiscontinuity { vertex: usize, spread: f64 },
    RoundTripError { edge: usize, t: f64, err: f64 },
}

impl std::fmt::Display for HomeoViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HomeoViolation::TargetGap { edge, at } => {
                write!(f, "image leaves edge {edge} uncovered near parameter {at}")
            }
            HomeoViolation::TargetOverlap { edge, lo, hi } => {
                write!(f, "two pieces overlap on edge {edge} over [{lo}, {hi}]")
            }
            HomeoViolation::VertexDiscontinuity { vertex, spread } => {
                write!(f, "images of vertex {vertex} disagree by {spread}")
            }
            HomeoViolation::RoundTripError { edge, t, err } => {
                write!(f, "inverse(forward) misses identity at ({edge}, {t}) by {err}")
            }
        }
    }
}

/// Audit bijectivity tiling, vertex continuity and inverse consistency.
/// Reports violations instead of failing, so broken maps can be inspected.
pub fn check_homeomorphism<R: Real>(space: &Space<R>, h: &Homeo<R>) -> Vec<HomeoViolation> {
    let tol = 1e-9;
    let mut violations = Vec::new();

    // target tiling: images of all pieces must cover each edge exactly
    let mut images: Vec<Vec<(R, R)>> = vec![Vec::new(); space.n_edges()];
    for pieces in &h.forward {
        for p in pieces {
            let (lo, hi) = p.map.range();
            images[p.target.0].push((lo, hi));
        }
    }
    for (e, ivs) in images.iter_mut().enumerate() {
        if ivs.is_empty() {
            violations.push(HomeoViolation::TargetGap { edge: e, at: 0.0 });
            continue;
        }
        ivs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut cursor = R::zero();
        for &(lo, hi) in ivs.iter() {
            if (lo - cursor).to_f64_lossy() > tol {
                violations.push(HomeoViolation::TargetGap {
                    edge: e,
                    at: cursor.to_f64_lossy(),
                });
            } else if (cursor - lo).to_f64_lossy() > tol {
                violations.push(HomeoViolation::TargetOverlap {
                    edge: e,
                    lo: lo.to_f64_lossy(),
                    hi: cursor.to_f64_lossy(),
                });
            }
            cursor = cursor.max(hi);
        }
        if (R::one() - cursor).to_f64_lossy() > tol {
            violations.push(HomeoViolation::TargetGap {
                edge: e,
                at: cursor.to_f64_lossy(),
            });
        }
    }

    // vertex continuity: all incident edge-ends must agree on the image
    for v in 0..space.n_vertices() {
        let mut imgs: Vec<GraphPoint<R>> = Vec::new();
        for &eid in space.incident_edges(VertexId(v)) {
            let e = space.edge(eid);
            if e.u.0 == v {
                imgs.push(apply_in_pieces(&h.forward, &GraphPoint::new(eid.0, R::zero())));
            }
            if e.v.0 == v {
                imgs.push(apply_in_pieces(&h.forward, &GraphPoint::new(eid.0, R::one())));
            }
        }
        let mut spread = 0.0f64;
        for i in 0..imgs.len() {
            for j in (i + 1)..imgs.len() {
                if let Ok(d) = crate::geometry::point_distance(space, &imgs[i], &imgs[j]) {
                    spread = spread.max(d.to_f64_lossy());
                }
            }
        }
        if spread > tol {
            violations.push(HomeoViolation::VertexDiscontinuity { vertex: v, spread });
        }
    }

    // round trip on the breakpoint grid plus cell midpoints
    for (e, pieces) in h.forward.iter().enumerate() {
        let mut probes: Vec<R> = Vec::new();
        for p in pieces {
            let mut prev: Option<R> = None;
            for (x, _) in p.map.breakpoints() {
                if let Some(px) = prev {
                    probes.push((px + x) / R::of(2.0));
                }
                probes.push(x);
                prev = Some(x);
            }
        }
        for &t in &probes {
            let p = GraphPoint::new(e, t);
            let fwd = apply_in_pieces(&h.forward, &p);
            let back = apply_in_pieces(&h.inverse, &fwd);
            let err = if back.edge == p.edge {
                (back.t - p.t).abs().to_f64_lossy()
            } else {
                crate::geometry::point_distance(space, &back, &p)
                    .map(|d| d.to_f64_lossy())
                    .unwrap_or(f64::INFINITY)
            };
            if err > tol {
                violations.push(HomeoViolation::RoundTripError {
                    edge: e,
                    t: t.to_f64_lossy(),
                    err,
                });
            }
        }
    }

    violations
}

// ---------------------------------------------------------------------------
// space builders

pub fn build_interval<R: Real>() -> Space<R> {
    Space::new(
        "interval",
        2,
        vec![Edge {
            u: VertexId(0),
            v: VertexId(1),
            length: R::one(),
            embedding: None,
        }],
        MetricMode::Geodesic,
    )
    .expect("interval space is valid")
}

/// Circle as two arcs (avoids a self-loop edge).
pub fn build_circle<R: Real>(circumference: R) -> Result<Space<R>> {
    if !(circumference > R::zero()) {
        return Err(CoreError::Parameter("circumference must be positive".into()));
    }
    let half = circumference / R::of(2.0);
    Space::new(
        "circle",
        2,
        vec![
            Edge {
                u: VertexId(0),
                v: VertexId(1),
                length: half,
                embedding: None,
            },
            Edge {
                u: VertexId(1),
                v: VertexId(0),
                length: half,
                embedding: None,
            },
        ],
        MetricMode::Geodesic,
    )
}

pub fn build_star<R: Real>(k: usize, branch_length: R) -> Result<Space<R>> {
    if k < 3 {
        return Err(CoreError::Parameter(
            "a star needs at least three branches".into(),
        ));
    }
    if !(branch_length > R::zero()) {
        return Err(CoreError::Parameter("branch length must be positive".into()));
    }
    let edges = (1..=k)
        .map(|v| Edge {
            u: VertexId(0),
            v: VertexId(v),
            length: branch_length,
            embedding: None,
        })
        .collect();
    Space::new(format!("star{k}"), k + 1, edges, MetricMode::Geodesic)
}

// ---------------------------------------------------------------------------
// truncated fan space

/// Truncation parameters for the planar fan space: fans `1..=n_max` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FanSpec {
    pub n_max: usize,
}

impl FanSpec {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(CoreError::Parameter("n_max must be at least 1".into()));
        }
        Ok(Self { n_max })
    }

    /// Planar tip of segment `i` of fan `n`, `1 <= i <= 2n`. Segments
    /// `n+1..=2n` mirror segments `n..=1` across the x-axis.
    pub fn segment_tip(n: usize, i: usize) -> [f64; 2] {
        assert!(n >= 1 && (1..=2 * n).contains(&i));
        if i <= n {
            if n == 1 {
                [1.0, 1.0]
            } else {
                let triangular = (n * (n - 1) / 2) as f64;
                let x = i as f64 / n as f64;
                let y = 1.0 / ((n - i + 1) as f64 + triangular);
                [x, y]
            }
        } else {
            let mirror = Self::segment_tip(n, n - (i - n) + 1);
            [mirror[0], -mirror[1]]
        }
    }
}

/// The fan space plus its edge layout, needed by the fan map and the witness
/// construction.
#[derive(Debug, Clone)]
pub struct FanSpace<R> {
    space: Space<R>,
    spec: FanSpec,
    spine: EdgeId,
    fan_edges: Vec<Vec<EdgeId>>, // fan_edges[n-1][i-1], i in 1..=2n
}

impl<R: Real> FanSpace<R> {
    pub fn space(&self) -> &Space<R> {
        &self.space
    }

    pub fn spec(&self) -> FanSpec {
        self.spec
    }

    pub fn spine(&self) -> EdgeId {
        self.spine
    }

    pub fn fan_edge(&self, n: usize, i: usize) -> EdgeId {
        self.fan_edges[n - 1][i - 1]
    }

    pub fn n_max(&self) -> usize {
        self.spec.n_max
    }

    /// Which fan an edge belongs to (`None` for the spine) and the 1-based
    /// segment index within the fan.
    pub fn locate_edge(&self, e: EdgeId) -> Option<(usize, usize)> {
        if e == self.spine {
            return None;
        }
        let k = e.0 - 1;
        // fan n starts at offset n(n-1)
        let mut n = 1;
        while n * (n + 1) <= k {
            n += 1;
        }
        Some((n, k - n * (n - 1) + 1))
    }

    /// Diameter of the first discarded fan (`n_max + 1`): the truncation's
    /// Hausdorff cost, reported so it is never silently absorbed.
    pub fn discarded_fan_diameter(&self) -> f64 {
        let n = self.spec.n_max + 1;
        let tips: Vec<[f64; 2]> = (1..=2 * n).map(|i| FanSpec::segment_tip(n, i)).collect();
        let mut best = 0.0f64;
        for (a, ta) in tips.iter().enumerate() {
            let la = (ta[0] * ta[0] + ta[1] * ta[1]).sqrt();
            best = best.max(la); // distance tip -> shared origin
            for tb in tips.iter().skip(a + 1) {
                let d = ((ta[0] - tb[0]).powi(2) + (ta[1] - tb[1]).powi(2)).sqrt();
                best = best.max(d);
            }
        }
        best
    }
}

/// Planar fan space: spine `(0,0)-(0,1)` plus fans `1..=n_max`, each fan `n`
/// contributing `2n` segments from the origin; ambient Euclidean metric.
pub fn build_fan_space<R: Real>(spec: FanSpec) -> Result<FanSpace<R>> {
    let origin = VertexId(0);
    let mut edges: Vec<Edge<R>> = Vec::new();
    let mut next_vertex = 2; // 0 = origin, 1 = spine top

    let spine_emb = Polyline::new(vec![[R::zero(), R::zero()], [R::zero(), R::one()]])?;
    edges.push(Edge {
        u: origin,
        v: VertexId(1),
        length: R::one(),
        embedding: Some(spine_emb),
    });

    let mut fan_edges = Vec::with_capacity(spec.n_max);
    for n in 1..=spec.n_max {
        let mut ids = Vec::with_capacity(2 * n);
        for i in 1..=2 * n {
            let tip = FanSpec::segment_tip(n, i);
            let tip_r = [R::of(tip[0]), R::of(tip[1])];
            let emb = Polyline::new(vec![[R::zero(), R::zero()], tip_r])?;
            let length = emb.length();
            ids.push(EdgeId(edges.len()));
            edges.push(Edge {
                u: origin,
                v: VertexId(next_vertex),
                length,
                embedding: Some(emb),
            });
            next_vertex += 1;
        }
        fan_edges.push(ids);
    }

    let space = Space::new(
        format!("fan{}", spec.n_max),
        next_vertex,
        edges,
        MetricMode::AmbientEuclidean,
    )?;
    Ok(FanSpace {
        space,
        spec,
        spine: EdgeId(0),
        fan_edges,
    })
}

// ---------------------------------------------------------------------------
// map builders

pub fn build_identity<R: Real>(space: &Space<R>) -> Homeo<R> {
    let forward = (0..space.n_edges())
        .map(|e| {
            vec![PathPiece {
                target: EdgeId(e),
                map: PlMap::line(R::zero(), R::one(), R::zero(), R::one()).unwrap(),
            }]
        })
        .collect();
    Homeo::from_forward(space, "identity", forward, R::zero(), R::zero())
        .expect("identity is valid")
}

/// Number of PL cells used for the square map.
pub const SQUARE_MAP_CELLS: usize = 1 << 12;

/// The interval homeomorphism `t -> t^2`, as a strictly monotone PL map on a
/// uniform breakpoint grid with exact fixed points 0 and 1. The PL map itself
/// is the object under study; `sup_error_forward` bounds its distance to the
/// ideal square map, `sup_error_backward` the derived inverse's distance to
/// the square root.
pub fn build_square_map<R: Real>(space: &Space<R>) -> Result<Homeo<R>> {
    if space.n_edges() != 1 || space.name != "interval" {
        return Err(CoreError::TypeError(
            "the square map lives on the interval space".into(),
        ));
    }
    let cells = SQUARE_MAP_CELLS;
    let mut xs = Vec::with_capacity(cells + 1);
    let mut ys = Vec::with_capacity(cells + 1);
    for j in 0..=cells {
        let x = R::of_usize(j) / R::of_usize(cells);
        xs.push(x);
        ys.push(x * x);
    }
    // PL interpolation error of t^2 on a uniform grid: h^2 * max|f''| / 8
    let h = 1.0 / cells as f64;
    let sup_fwd = R::of(h * h * 2.0 / 8.0);
    // inverse error vs sqrt peaks in the first cell (infinite slope at 0)
    let sup_bwd = R::of(h / 4.0 * 1.01);
    let piece = PathPiece {
        target: EdgeId(0),
        map: PlMap::new(xs, ys)?,
    };
    Homeo::from_forward(space, "square", vec![vec![piece]], sup_fwd, sup_bwd)
}

/// Cyclic layout of a space in which every vertex has degree 2.
struct CycleLayout<R> {
    /// (edge, runs forward along the cycle, global start arclength)
    order: Vec<(EdgeId, bool, R)>,
    total: R,
}

impl<R: Real> CycleLayout<R> {
    fn build(space: &Space<R>) -> Result<Self> {
        for v in 0..space.n_vertices() {
            if space.vertex_degree(VertexId(v)) != 2 {
                return Err(CoreError::TypeError(
                    "rotations require a circle (every vertex of degree 2)".into(),
                ));
            }
        }
        for e in space.edges() {
            if e.u == e.v {
                return Err(CoreError::TypeError(
                    "rotations do not support self-loop circles".into(),
                ));
            }
        }
        let mut order = Vec::with_capacity(space.n_edges());
        let mut s = R::zero();
        let mut cur = EdgeId(0);
        let mut from = space.edge(cur).u;
        loop {
            let e = space.edge(cur);
            let forward = e.u == from;
            order.push((cur, forward, s));
            s = s + e.length;
            let to = if forward { e.v } else { e.u };
            if order.len() == space.n_edges() {
                if to != space.edge(EdgeId(0)).u {
                    return Err(CoreError::TypeError("edges do not close a cycle".into()));
                }
                break;
            }
            let next = space
                .incident_edges(to)
                .iter()
                .copied()
                .find(|&n| n != cur)
                .ok_or_else(|| CoreError::TypeError("cycle walk got stuck".into()))?;
            cur = next;
            from = to;
        }
        Ok(Self { order, total: s })
    }

    /// Edge containing global coordinate `s` (which must be in `[0,total)`),
    /// with the local parameter.
    fn point_at(&self, space: &Space<R>, s: R) -> (EdgeId, R) {
        let idx = self
            .order
            .partition_point(|&(_, _, start)| start <= s)
            .saturating_sub(1);
        let (e, forward, start) = self.order[idx];
        let len = space.edge(e).length;
        let off = ((s - start) / len).max(R::zero()).min(R::one());
        let t = if forward { off } else { R::one() - off };
        (e, t)
    }

    fn wrap(&self, s: R) -> R {
        let mut s = s % self.total;
        if s < R::zero() {
            s = s + self.total;
        }
        if s >= self.total {
            s = s - self.total;
        }
        s
    }
}

/// Rigid rotation of a circle by `alpha` full turns (an exact isometry).
pub fn build_rotation<R: Real>(space: &Space<R>, alpha: R) -> Result<Homeo<R>> {
    let layout = CycleLayout::build(space)?;
    let total = layout.total;
    let offset = layout.wrap(alpha * total);

    let boundaries: Vec<R> = layout.order.iter().map(|&(_, _, s)| s).collect();
    let mut forward: Vec<Vec<PathPiece<R>>> = vec![Vec::new(); space.n_edges()];

    for &(eid, edge_forward, start) in &layout.order {
        let len = space.edge(eid).length;
        // cut the source span wherever the image crosses a target edge start
        let mut cuts: Vec<R> = vec![R::zero(), len];
        for &b in &boundaries {
            let mut s_cut = layout.wrap(b - offset) - start;
            if s_cut < R::zero() {
                s_cut = s_cut + total;
            }
            if s_cut > R::zero() && s_cut < len {
                cuts.push(s_cut);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| *a == *b);

        for w in cuts.windows(2) {
            let (sa, sb) = (w[0], w[1]);
            let mid = layout.wrap(start + (sa + sb) / R::of(2.0) + offset);
            let (target, _) = layout.point_at(space, mid);
            let tgt_len = space.edge(target).length;
            let (_, tgt_forward, tgt_start) = *layout
                .order
                .iter()
                .find(|(id, _, _)| *id == target)
                .unwrap();
            let param_at = |s_local: R| -> R {
                let g = layout.wrap(start + s_local + offset);
                // measure within the target edge, tolerating the wrap at its end
                let mut off = g - tgt_start;
                if off < R::zero() {
                    off = off + total;
                }
                let off = off.min(tgt_len).max(R::zero());
                if tgt_forward {
                    off / tgt_len
                } else {
                    R::one() - off / tgt_len
                }
            };
            // source params for local arclengths sa, sb
            let src_at = |s_local: R| -> R {
                if edge_forward {
                    s_local / len
                } else {
                    R::one() - s_local / len
                }
            };
            let (mut x0, mut x1) = (src_at(sa), src_at(sb));
            let (mut y0, mut y1) = (param_at(sa), param_at(sb));
            if x0 > x1 {
                std::mem::swap(&mut x0, &mut x1);
                std::mem::swap(&mut y0, &mut y1);
            }
            forward[eid.0].push(PathPiece {
                target,
                map: PlMap::line(x0, x1, y0, y1)?,
            });
        }
    }

    Homeo::from_forward(
        space,
        format!("rotation({})", alpha.to_f64_lossy()),
        forward,
        R::zero(),
        R::zero(),
    )
}

/// The fan homeomorphism: the spine is fixed pointwise; segment `i` of fan
/// `n` maps onto segment `i+1 (mod 2n)` preserving the arclength fraction
/// from the origin.
pub fn build_fan_map<R: Real>(fan: &FanSpace<R>) -> Homeo<R> {
    let space = fan.space();
    let mut forward: Vec<Vec<PathPiece<R>>> = vec![Vec::new(); space.n_edges()];
    forward[fan.spine().0].push(PathPiece {
        target: fan.spine(),
        map: PlMap::line(R::zero(), R::one(), R::zero(), R::one()).unwrap(),
    });
    for n in 1..=fan.n_max() {
        for i in 1..=2 * n {
            let src = fan.fan_edge(n, i);
            let dst = fan.fan_edge(n, i % (2 * n) + 1);
            forward[src.0].push(PathPiece {
                target: dst,
                map: PlMap::line(R::zero(), R::one(), R::zero(), R::one()).unwrap(),
            });
        }
    }
    Homeo::from_forward(space, "fan-rotation", forward, R::zero(), R::zero())
        .expect("fan map is valid")
}
