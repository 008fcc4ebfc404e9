//! Compact-set calculus: Hausdorff distance on sampled representatives,
//! induced set-image maps, unions, connectivity, and random hyperspace nets.
//!
//! Hausdorff distances are computed exactly on finite sample sets drawn from
//! the masks (every interval discretized at a configurable spacing, endpoints
//! always included), and every distance carries an error bound
//! `res(A) + res(B) + spacing` against the true sets.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::geometry::{self, EdgeId, GraphPoint, MetricMode, Space, SubsetMask};
use crate::real::Real;
use crate::spaces::Homeo;
use crate::Result;

/// Non-empty compact subset: a mask plus a maintained connectivity flag.
/// The mask's resolution states how far the represented true set may sit
/// from this finite description.
#[derive(Debug, Clone)]
pub struct CompactSet<R> {
    pub mask: SubsetMask<R>,
    pub connected: bool,
}

impl<R: Real> CompactSet<R> {
    pub fn new(space: &Space<R>, mut mask: SubsetMask<R>) -> Result<Self> {
        mask.normalize();
        mask.check_shape(space)?;
        if mask.is_empty() {
            return Err(CoreError::EmptySet);
        }
        let connected = is_connected_mask(space, &mask);
        Ok(Self { mask, connected })
    }

    pub fn from_points(
        space: &Space<R>,
        points: &[GraphPoint<R>],
        resolution: R,
    ) -> Result<Self> {
        Self::new(space, SubsetMask::from_points(space, points, resolution))
    }

    pub fn from_arc(space: &Space<R>, edge: EdgeId, lo: R, hi: R) -> Result<Self> {
        let mut mask = SubsetMask::empty(space.n_edges(), R::zero());
        mask.add_interval(edge, lo, hi);
        Self::new(space, mask)
    }

    pub fn resolution(&self) -> R {
        self.mask.resolution()
    }
}

/// Finite surrogate of the hyperspace: a family of compact sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetMode {
    /// arbitrary compact sets (a `2^X` surrogate)
    Full,
    /// connected sets only (a `C(X)` surrogate)
    Connected,
}

#[derive(Debug, Clone)]
pub struct HyperNet<R> {
    pub elements: Vec<CompactSet<R>>,
    pub mode: NetMode,
    pub delta: R,
}

/// Sampling configuration for Hausdorff evaluations.
#[derive(Debug, Clone, Copy)]
pub struct HausdorffConfig<R> {
    /// Arclength spacing between samples within a mask interval.
    pub spacing: R,
}

impl<R: Real> HausdorffConfig<R> {
    /// Default: one thousandth of the space diameter.
    pub fn default_for(space: &Space<R>) -> Self {
        Self {
            spacing: space.diameter() * R::of(1e-3),
        }
    }

    pub fn with_spacing(spacing: R) -> Self {
        Self { spacing }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HausdorffDistance<R> {
    pub value: R,
    /// `res(A) + res(B) + spacing`: how far the reported value may sit from
    /// the Hausdorff distance of the true sets.
    pub error_bound: R,
}

// ---------------------------------------------------------------------------
// sampled representatives

/// Finite sample of a mask: per edge, sorted arclength positions with
/// interval endpoints always included. Distances between sampled sets are
/// computed exactly.
#[derive(Debug, Clone)]
pub struct SampledSet<R> {
    positions: Vec<Vec<R>>,
    emb: Option<Vec<Vec<[R; 2]>>>,
    piece_ranges: Option<Vec<Vec<(usize, usize)>>>,
    count: usize,
}

impl<R: Real> SampledSet<R> {
    pub fn build(space: &Space<R>, mask: &SubsetMask<R>, spacing: R) -> Self {
        let euclidean = space.metric_mode == MetricMode::AmbientEuclidean;
        let mut positions: Vec<Vec<R>> = vec![Vec::new(); space.n_edges()];
        let mut count = 0usize;
        for e in 0..space.n_edges() {
            let len = space.edge(EdgeId(e)).length;
            for iv in mask.edge_intervals(EdgeId(e)) {
                if iv.is_degenerate() {
                    positions[e].push(iv.lo * len);
                    count += 1;
                    continue;
                }
                let arc = (iv.hi - iv.lo) * len;
                let n_sub = (arc / spacing).ceil().to_usize().unwrap_or(1).max(1);
                for k in 0..=n_sub {
                    let t = iv.lo + (iv.hi - iv.lo) * R::of_usize(k) / R::of_usize(n_sub);
                    positions[e].push(t * len);
                    count += 1;
                }
            }
        }
        let (emb, piece_ranges) = if euclidean {
            let mut emb = Vec::with_capacity(space.n_edges());
            let mut ranges = Vec::with_capacity(space.n_edges());
            for e in 0..space.n_edges() {
                let edge = space.edge(EdgeId(e));
                let len = edge.length;
                let poly = edge.embedding.as_ref().expect("ambient space is embedded");
                let coords: Vec<[R; 2]> = positions[e].iter().map(|&x| poly.at(x / len)).collect();
                let fracs = poly.piece_fractions();
                let mut er = Vec::with_capacity(fracs.len().saturating_sub(1));
                for w in fracs.windows(2) {
                    let lo_x = w[0] * len;
                    let hi_x = w[1] * len;
                    let start = positions[e].partition_point(|&x| x < lo_x);
                    let end = positions[e].partition_point(|&x| x <= hi_x);
                    if start < end {
                        er.push((start, end));
                    }
                }
                emb.push(coords);
                ranges.push(er);
            }
            (Some(emb), Some(ranges))
        } else {
            (None, None)
        };
        Self {
            positions,
            emb,
            piece_ranges,
            count,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Iterate samples as graph points.
    pub fn points<'a>(&'a self, space: &'a Space<R>) -> impl Iterator<Item = GraphPoint<R>> + 'a {
        self.positions.iter().enumerate().flat_map(move |(e, xs)| {
            let len = space.edge(EdgeId(e)).length;
            xs.iter().map(move |&x| GraphPoint::new(e, x / len))
        })
    }

    fn dist_from_sample(&self, space: &Space<R>, edge: usize, idx: usize, other: &Self) -> R {
        match (&self.emb, &other.emb) {
            (Some(se), Some(_)) => other.dist_to_point_euclidean(se[edge][idx]),
            _ => other.dist_to_point_geodesic(space, edge, self.positions[edge][idx]),
        }
    }

    fn dist_to_point_geodesic(&self, space: &Space<R>, q_edge: usize, q_pos: R) -> R {
        let eq = space.edge(EdgeId(q_edge));
        let offs = [q_pos, eq.length - q_pos];
        let verts = [eq.u, eq.v];
        let mut best = R::infinity();
        for (e, xs) in self.positions.iter().enumerate() {
            if xs.is_empty() {
                continue;
            }
            let edge = space.edge(EdgeId(e));
            let first = xs[0];
            let last_gap = edge.length - *xs.last().unwrap();
            for (i, &a) in verts.iter().enumerate() {
                let du = offs[i] + space.vertex_distance(a, edge.u) + first;
                let dv = offs[i] + space.vertex_distance(a, edge.v) + last_gap;
                best = best.min(du).min(dv);
            }
            if e == q_edge {
                let k = xs.partition_point(|&x| x < q_pos);
                if k < xs.len() {
                    best = best.min(xs[k] - q_pos);
                }
                if k > 0 {
                    best = best.min(q_pos - xs[k - 1]);
                }
            }
        }
        best
    }

    fn dist_to_point_euclidean(&self, q: [R; 2]) -> R {
        let emb = self.emb.as_ref().expect("euclidean sample set");
        let ranges = self.piece_ranges.as_ref().unwrap();
        let mut best_sq = R::infinity();
        for (e, er) in ranges.iter().enumerate() {
            let coords = &emb[e];
            for &(start, end) in er {
                best_sq = best_sq.min(min_sq_dist_convex(coords, start, end, q));
            }
        }
        best_sq.sqrt()
    }
}

/// Minimum squared distance from `q` to `coords[start..end]`, which lie on a
/// straight segment in order (distance is convex along the range).
fn min_sq_dist_convex<R: Real>(coords: &[[R; 2]], start: usize, end: usize, q: [R; 2]) -> R {
    let sq = |i: usize| -> R {
        let dx = coords[i][0] - q[0];
        let dy = coords[i][1] - q[1];
        dx * dx + dy * dy
    };
    let (mut lo, mut hi) = (start, end - 1);
    while hi - lo > 8 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        if sq(m1) < sq(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let mut best = R::infinity();
    for i in lo..=hi {
        best = best.min(sq(i));
    }
    best
}

/// `sup_{a in A} d(a, B)` over the samples.
pub fn directed_sup<R: Real>(space: &Space<R>, a: &SampledSet<R>, b: &SampledSet<R>) -> R {
    let mut worst = R::zero();
    for (e, xs) in a.positions.iter().enumerate() {
        for idx in 0..xs.len() {
            let d = a.dist_from_sample(space, e, idx, b);
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// `inf_{a in A} d(a, B)` over the samples (symmetric in its arguments).
pub fn min_distance_sampled<R: Real>(space: &Space<R>, a: &SampledSet<R>, b: &SampledSet<R>) -> R {
    let mut best = R::infinity();
    for (e, xs) in a.positions.iter().enumerate() {
        for idx in 0..xs.len() {
            let d = a.dist_from_sample(space, e, idx, b);
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Hausdorff distance of two sampled representatives (exact on the samples).
pub fn hausdorff_sampled<R: Real>(space: &Space<R>, a: &SampledSet<R>, b: &SampledSet<R>) -> R {
    directed_sup(space, a, b).max(directed_sup(space, b, a))
}

/// Largest pairwise distance among the samples.
pub fn diameter_sampled<R: Real>(space: &Space<R>, a: &SampledSet<R>) -> R {
    let pts: Vec<GraphPoint<R>> = a.points(space).collect();
    let mut best = R::zero();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = geometry::point_distance(space, &pts[i], &pts[j]).unwrap();
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Hausdorff distance between two compact sets, with its error bound.
pub fn hausdorff<R: Real>(
    space: &Space<R>,
    a: &CompactSet<R>,
    b: &CompactSet<R>,
    cfg: &HausdorffConfig<R>,
) -> Result<HausdorffDistance<R>> {
    if a.mask.is_empty() || b.mask.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let sa = SampledSet::build(space, &a.mask, cfg.spacing);
    let sb = SampledSet::build(space, &b.mask, cfg.spacing);
    Ok(HausdorffDistance {
        value: hausdorff_sampled(space, &sa, &sb),
        error_bound: a.resolution() + b.resolution() + cfg.spacing,
    })
}

// ---------------------------------------------------------------------------
// induced map

/// Image of a compact set under the homeomorphism: exact interval arithmetic
/// through the monotone PL edge correspondences. Connectivity is preserved;
/// the map's declared sup error is added to the resolution.
pub fn induced_apply<R: Real>(space: &Space<R>, h: &Homeo<R>, a: &CompactSet<R>) -> CompactSet<R> {
    let mask = apply_mask(space, h, &a.mask, false);
    CompactSet {
        mask,
        connected: a.connected,
    }
}

/// Image under the inverse map.
pub fn induced_apply_inverse<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    a: &CompactSet<R>,
) -> CompactSet<R> {
    let mask = apply_mask(space, h, &a.mask, true);
    CompactSet {
        mask,
        connected: a.connected,
    }
}

pub(crate) fn apply_mask<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    mask: &SubsetMask<R>,
    inverse: bool,
) -> SubsetMask<R> {
    let sup = if inverse {
        h.sup_error_backward
    } else {
        h.sup_error_forward
    };
    let mut out = SubsetMask::empty(space.n_edges(), mask.resolution() + sup);
    for (eid, iv) in mask.iter() {
        let pieces = if inverse {
            h.inverse_pieces(eid)
        } else {
            h.pieces(eid)
        };
        for piece in pieces {
            let lo = iv.lo.max(piece.src_lo());
            let hi = iv.hi.min(piece.src_hi());
            if lo > hi {
                continue;
            }
            let y0 = piece.map.eval(lo);
            let y1 = piece.map.eval(hi);
            out.add_interval(piece.target, y0.min(y1), y0.max(y1));
        }
    }
    out.normalize();
    out
}

// ---------------------------------------------------------------------------
// unions and connectivity

/// Union of a non-empty list of compact sets (resolution: the max).
pub fn union_sets<R: Real>(space: &Space<R>, sets: &[CompactSet<R>]) -> Result<CompactSet<R>> {
    if sets.is_empty() {
        return Err(CoreError::EmptySet);
    }
    let mut mask = sets[0].mask.clone();
    for s in &sets[1..] {
        mask.union_with(&s.mask);
    }
    CompactSet::new(space, mask)
}

pub fn is_connected<R: Real>(space: &Space<R>, a: &CompactSet<R>) -> bool {
    is_connected_mask(space, &a.mask)
}

/// Connectivity of a mask via interval adjacency: intervals glue whenever
/// they share a vertex of the graph.
pub fn is_connected_mask<R: Real>(space: &Space<R>, mask: &SubsetMask<R>) -> bool {
    let items: Vec<(EdgeId, crate::geometry::Interval<R>)> = mask.iter().collect();
    if items.is_empty() {
        return false;
    }
    let mut parent: Vec<usize> = (0..items.len() + space.n_vertices()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    let nv_base = items.len();
    for (idx, (eid, iv)) in items.iter().enumerate() {
        let e = space.edge(*eid);
        if iv.lo == R::zero() {
            union(&mut parent, idx, nv_base + e.u.0);
        }
        if iv.hi == R::one() {
            union(&mut parent, idx, nv_base + e.v.0);
        }
    }
    let root = find(&mut parent, 0);
    (1..items.len()).all(|i| find(&mut parent, i) == root)
}

// ---------------------------------------------------------------------------
// union stability

#[derive(Debug, Clone)]
pub struct UnionStabilityReport<R> {
    pub precondition_ok: bool,
    pub pair_distances: Vec<HausdorffDistance<R>>,
    /// `d_H` of the two unions; `None` when the precondition failed and the
    /// check was skipped.
    pub union_distance: Option<HausdorffDistance<R>>,
    pub holds: Option<bool>,
}

/// Checks the union stability of the Hausdorff metric: if every pair is
/// within `eps`, the unions are within `eps` (up to sampling error).
pub fn union_stability_check<R: Real>(
    space: &Space<R>,
    pairs: &[(CompactSet<R>, CompactSet<R>)],
    eps: R,
    cfg: &HausdorffConfig<R>,
) -> Result<UnionStabilityReport<R>> {
    if pairs.is_empty() {
        return Err(CoreError::Parameter("no pairs to check".into()));
    }
    let mut pair_distances = Vec::with_capacity(pairs.len());
    let mut precondition_ok = true;
    for (a, b) in pairs {
        let d = hausdorff(space, a, b, cfg)?;
        if d.value > eps + d.error_bound {
            precondition_ok = false;
        }
        pair_distances.push(d);
    }
    if !precondition_ok {
        return Ok(UnionStabilityReport {
            precondition_ok,
            pair_distances,
            union_distance: None,
            holds: None,
        });
    }
    let lefts: Vec<CompactSet<R>> = pairs.iter().map(|(a, _)| a.clone()).collect();
    let rights: Vec<CompactSet<R>> = pairs.iter().map(|(_, b)| b.clone()).collect();
    let ua = union_sets(space, &lefts)?;
    let ub = union_sets(space, &rights)?;
    let d = hausdorff(space, &ua, &ub, cfg)?;
    let holds = d.value <= eps + d.error_bound;
    Ok(UnionStabilityReport {
        precondition_ok,
        pair_distances,
        union_distance: Some(d),
        holds: Some(holds),
    })
}

// ---------------------------------------------------------------------------
// hyperspace nets

#[derive(Debug, Clone, Copy)]
pub struct NetConfig {
    /// Largest point-set cardinality in full mode.
    pub max_cardinality: usize,
    /// Largest number of growth steps in connected mode.
    pub max_growth_steps: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            max_cardinality: 8,
            max_growth_steps: 32,
        }
    }
}

/// Deterministic random net of the hyperspace surrogate.
///
/// Full mode draws finite point sets from the δ-net of the space; connected
/// mode grows connected masks from random seed points by interval expansion
/// with increments quantized to δ/4.
pub fn hyper_net<R: Real>(
    space: &Space<R>,
    delta: R,
    mode: NetMode,
    budget: usize,
    seed: u64,
    cfg: NetConfig,
) -> Result<HyperNet<R>> {
    if !(delta > R::zero()) {
        return Err(CoreError::Parameter("net density must be positive".into()));
    }
    if budget == 0 {
        return Err(CoreError::Parameter("budget must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elements = Vec::with_capacity(budget);
    match mode {
        NetMode::Full => {
            let net = geometry::sample_net(space, delta)?;
            let mut indices: Vec<usize> = (0..net.len()).collect();
            for _ in 0..budget {
                let card = rng.gen_range(1..=cfg.max_cardinality.min(net.len()));
                // partial Fisher-Yates draw without replacement
                for k in 0..card {
                    let j = rng.gen_range(k..indices.len());
                    indices.swap(k, j);
                }
                let pts: Vec<GraphPoint<R>> = indices[..card].iter().map(|&i| net[i]).collect();
                elements.push(CompactSet::from_points(space, &pts, R::zero())?);
            }
        }
        NetMode::Connected => {
            // cumulative edge lengths for length-weighted seeding
            let mut cum = Vec::with_capacity(space.n_edges());
            let mut acc = 0.0f64;
            for e in 0..space.n_edges() {
                acc += space.edge(EdgeId(e)).length.to_f64_lossy();
                cum.push(acc);
            }
            let total = acc;
            for _ in 0..budget {
                elements.push(grow_connected(space, delta, &mut rng, &cum, total, &cfg)?);
            }
        }
    }
    Ok(HyperNet {
        elements,
        mode,
        delta,
    })
}

fn grow_connected<R: Real>(
    space: &Space<R>,
    delta: R,
    rng: &mut ChaCha8Rng,
    cum: &[f64],
    total: f64,
    cfg: &NetConfig,
) -> Result<CompactSet<R>> {
    let pick = rng.gen_range(0.0..total);
    let seed_edge = cum.partition_point(|&c| c <= pick).min(cum.len() - 1);
    let seed_t = R::of(rng.gen_range(0.0..=1.0));

    // frontiers: (edge, parameter, growing upward?)
    let mut mask = SubsetMask::empty(space.n_edges(), R::zero());
    mask.add_point(EdgeId(seed_edge), seed_t);
    let mut frontiers: Vec<(usize, R, bool)> =
        vec![(seed_edge, seed_t, false), (seed_edge, seed_t, true)];

    let steps = rng.gen_range(0..=cfg.max_growth_steps);
    let quantum = delta / R::of(4.0);
    for _ in 0..steps {
        if frontiers.is_empty() {
            break;
        }
        let fi = rng.gen_range(0..frontiers.len());
        let (edge, t, up) = frontiers[fi];
        let len = space.edge(EdgeId(edge)).length;
        let amount = R::of_usize(rng.gen_range(1..=4)) * quantum / len;
        let t_new = if up { t + amount } else { t - amount };
        let t_clamped = t_new.max(R::zero()).min(R::one());
        mask.add_interval(EdgeId(edge), t.min(t_clamped), t.max(t_clamped));
        if t_new > R::one() || t_new < R::zero() {
            // ran into a vertex: jump onto a random other incident edge
            let e = space.edge(EdgeId(edge));
            let v = if up { e.v } else { e.u };
            let choices: Vec<EdgeId> = space
                .incident_edges(v)
                .iter()
                .copied()
                .filter(|&n| n.0 != edge)
                .collect();
            if choices.is_empty() {
                frontiers.swap_remove(fi);
            } else {
                let next = choices[rng.gen_range(0..choices.len())];
                let ne = space.edge(next);
                let (nt, nup) = if ne.u == v {
                    (R::zero(), true)
                } else {
                    (R::one(), false)
                };
                mask.add_point(next, nt);
                frontiers[fi] = (next.0, nt, nup);
            }
        } else {
            frontiers[fi] = (edge, t_clamped, up);
        }
    }
    mask.normalize();
    CompactSet::new(space, mask)
}

#[cfg(test)]
mod tests;
