//! Point and pair dynamics: limit-set estimates, non-wandering candidates,
//! wandering components, pair classification, null families, and the
//! periodic-subcontinuum structure checks.
//!
//! Everything here is a finite-horizon estimator. Parameters travel with the
//! outputs, and set-valued results carry resolutions, so no claim of
//! exactness is ever implied.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::geometry::{
    self, components_within, connected_components, GraphPoint, Space, SubsetMask,
};
use crate::hyperspace::{
    diameter_sampled, directed_sup, hausdorff_sampled, induced_apply, min_distance_sampled,
    CompactSet, HausdorffConfig, SampledSet,
};
use crate::real::Real;
use crate::spaces::{apply_point, apply_point_inverse, Homeo};
use crate::Result;

// ---------------------------------------------------------------------------
// pair classification

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    Distal,
    ProximalOnly,
    Asymptotic,
    LiYorke,
}

impl PairLabel {
    pub fn tag(&self) -> &'static str {
        match self {
            PairLabel::Distal => "DISTAL",
            PairLabel::ProximalOnly => "PROXIMAL_ONLY",
            PairLabel::Asymptotic => "ASYMPTOTIC",
            PairLabel::LiYorke => "LI_YORKE",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyParams<R> {
    pub horizon: usize,
    pub tail_window: usize,
    pub delta_prox: R,
    pub delta_asym: R,
}

#[derive(Debug, Clone, Copy)]
pub struct PairVerdict<R> {
    pub label: PairLabel,
    /// Smallest `d_H` over the whole horizon.
    pub min_over_horizon: R,
    /// Largest `d_H` over the tail window.
    pub tail_max: R,
    pub params: ClassifyParams<R>,
}

/// Classify an orbit pair from finite-horizon evidence. Proximal evidence:
/// the minimum dips below `delta_prox`; asymptotic evidence: the tail stays
/// below `delta_asym`. A Li-Yorke verdict additionally requires the tail to
/// exceed `3 * delta_asym`, a hysteresis gap that keeps borderline pairs from
/// flipping between runs.
pub fn classify_pair<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    a: &CompactSet<R>,
    b: &CompactSet<R>,
    params: ClassifyParams<R>,
    cfg: &HausdorffConfig<R>,
) -> Result<PairVerdict<R>> {
    if params.tail_window == 0 || params.horizon <= params.tail_window {
        return Err(CoreError::Parameter(
            "need horizon > tail_window >= 1".into(),
        ));
    }
    let mut cur_a = a.clone();
    let mut cur_b = b.clone();
    let mut min_all = R::infinity();
    let mut tail_max = R::zero();
    let tail_from = params.horizon - params.tail_window;
    for j in 0..=params.horizon {
        let sa = SampledSet::build(space, &cur_a.mask, cfg.spacing);
        let sb = SampledSet::build(space, &cur_b.mask, cfg.spacing);
        let d = hausdorff_sampled(space, &sa, &sb);
        min_all = min_all.min(d);
        if j >= tail_from {
            tail_max = tail_max.max(d);
        }
        if j < params.horizon {
            cur_a = induced_apply(space, h, &cur_a);
            cur_b = induced_apply(space, h, &cur_b);
        }
    }
    let proximal_evidence = min_all < params.delta_prox;
    let asymptotic_evidence = tail_max < params.delta_asym;
    let label = if asymptotic_evidence {
        PairLabel::Asymptotic
    } else if proximal_evidence && tail_max > R::of(3.0) * params.delta_asym {
        PairLabel::LiYorke
    } else if proximal_evidence {
        PairLabel::ProximalOnly
    } else {
        PairLabel::Distal
    };
    Ok(PairVerdict {
        label,
        min_over_horizon: min_all,
        tail_max,
        params,
    })
}

// ---------------------------------------------------------------------------
// limit sets

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone)]
pub struct OmegaEstimate<R> {
    pub seed: GraphPoint<R>,
    pub direction: OrbitDirection,
    pub set: CompactSet<R>,
    pub burn_in: usize,
    pub window: usize,
    pub thinning: R,
}

/// δ-thinned orbit segment `{f^j(x) : burn_in <= j <= burn_in + window}` as
/// a limit-set estimate. The backward direction estimates the α-limit set.
/// Resolution: δ plus the accumulated map approximation error.
pub fn omega_limit_estimate<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    x: &GraphPoint<R>,
    burn_in: usize,
    window: usize,
    delta: R,
    direction: OrbitDirection,
) -> Result<OmegaEstimate<R>> {
    if burn_in == 0 || window == 0 {
        return Err(CoreError::Parameter(
            "burn-in and window must be at least 1".into(),
        ));
    }
    if !(delta > R::zero()) {
        return Err(CoreError::Parameter("thinning must be positive".into()));
    }
    let mut cur = space.canonicalize(*x);
    space.validate_point(&cur)?;
    let mut kept: Vec<GraphPoint<R>> = Vec::new();
    for j in 0..=(burn_in + window) {
        if j >= burn_in {
            let fresh = kept
                .iter()
                .all(|p| geometry::point_distance(space, p, &cur).unwrap() >= delta);
            if fresh {
                kept.push(cur);
            }
        }
        cur = match direction {
            OrbitDirection::Forward => apply_point(space, h, &cur)?,
            OrbitDirection::Backward => apply_point_inverse(space, h, &cur)?,
        };
    }
    let step_error = match direction {
        OrbitDirection::Forward => h.sup_error_forward,
        OrbitDirection::Backward => h.sup_error_backward,
    };
    let resolution = delta + step_error * R::of_usize(burn_in + window);
    let set = CompactSet::from_points(space, &kept, resolution)?;
    Ok(OmegaEstimate {
        seed: space.canonicalize(*x),
        direction,
        set,
        burn_in,
        window,
        thinning: delta,
    })
}

// ---------------------------------------------------------------------------
// non-wandering estimation

/// Candidate non-wandering set: grid points (spacing δ/2) that return within
/// δ of themselves in some `1..=n_steps` iterations, thickened by δ/2 so the
/// candidate is a genuine neighborhood mask with resolution δ.
///
/// This over-approximates the non-wandering set on recurrence visible within
/// `n_steps`; outputs are labeled candidates, never the true set.
pub fn nonwandering_estimate<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    delta: R,
    n_steps: usize,
) -> Result<SubsetMask<R>> {
    if !(delta > R::zero()) || n_steps == 0 {
        return Err(CoreError::Parameter(
            "need positive delta and at least one step".into(),
        ));
    }
    let grid = geometry::sample_net(space, delta / R::of(2.0))?;
    let returning: Vec<GraphPoint<R>> = grid
        .par_iter()
        .filter_map(|&p| {
            let mut cur = p;
            for _ in 0..n_steps {
                cur = apply_point(space, h, &cur).ok()?;
                if geometry::point_distance(space, &cur, &p).ok()? < delta {
                    return Some(p);
                }
            }
            None
        })
        .collect();
    let mut mask = SubsetMask::empty(space.n_edges(), delta);
    for p in returning {
        let len = space.edge(p.edge).length;
        let half = delta / R::of(2.0) / len;
        mask.add_interval(p.edge, p.t - half, p.t + half);
    }
    mask.normalize();
    Ok(mask)
}

#[derive(Debug, Clone)]
pub struct ComponentReport<R> {
    pub mask: SubsetMask<R>,
    pub diameter: R,
    /// Closest return of the component to itself under iteration:
    /// `(q, d_H(f^q(C), C))` minimizing the distance over `1..=n_steps`.
    pub best_return: Option<(usize, R)>,
}

/// Connected components of the complement of the non-wandering candidate,
/// tagged with diameters and orbit-return data.
pub fn wandering_components<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    delta: R,
    n_steps: usize,
    cfg: &HausdorffConfig<R>,
) -> Result<Vec<ComponentReport<R>>> {
    let omega = nonwandering_estimate(space, h, delta, n_steps)?;
    let comps = connected_components(space, &omega)?;
    Ok(comps
        .into_iter()
        .map(|mask| {
            let sampled = SampledSet::build(space, &mask, delta);
            let diameter = diameter_sampled(space, &sampled);
            let mut best: Option<(usize, R)> = None;
            let mut img = mask.clone();
            for q in 1..=n_steps {
                img = crate::hyperspace::apply_mask(space, h, &img, false);
                let simg = SampledSet::build(space, &img, cfg.spacing);
                let d = hausdorff_sampled(space, &sampled, &simg);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((q, d));
                }
            }
            ComponentReport {
                mask,
                diameter,
                best_return: best,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// null families

#[derive(Debug, Clone)]
pub struct NullFamilyReport<R> {
    pub eps_grid: Vec<R>,
    /// How many members have diameter >= ε, per grid value.
    pub counts: Vec<usize>,
    pub diameters: Vec<R>,
}

/// Diameter profile of a family: for each ε of the grid, the number of
/// members at least that large. Finite families are always null; the report
/// shows how the diameters distribute.
pub fn null_family_check<R: Real>(
    space: &Space<R>,
    family: &[CompactSet<R>],
    eps_grid: &[R],
    cfg: &HausdorffConfig<R>,
) -> Result<NullFamilyReport<R>> {
    if family.is_empty() || eps_grid.is_empty() {
        return Err(CoreError::Parameter(
            "need a non-empty family and grid".into(),
        ));
    }
    let diameters: Vec<R> = family
        .par_iter()
        .map(|a| {
            let s = SampledSet::build(space, &a.mask, cfg.spacing);
            diameter_sampled(space, &s)
        })
        .collect();
    let counts = eps_grid
        .iter()
        .map(|&eps| diameters.iter().filter(|&&d| d >= eps).count())
        .collect();
    Ok(NullFamilyReport {
        eps_grid: eps_grid.to_vec(),
        counts,
        diameters,
    })
}

// ---------------------------------------------------------------------------
// periodicity and the structure checks

/// Smallest period `1 <= p <= p_max` with `d_H(f^p(A), A) <= tol`, if any.
pub fn detect_period<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    a: &CompactSet<R>,
    p_max: usize,
    tol: R,
    cfg: &HausdorffConfig<R>,
) -> Option<usize> {
    let base = SampledSet::build(space, &a.mask, cfg.spacing);
    let mut cur = a.clone();
    for p in 1..=p_max {
        cur = induced_apply(space, h, &cur);
        let s = SampledSet::build(space, &cur.mask, cfg.spacing);
        if hausdorff_sampled(space, &base, &s) <= tol {
            return Some(p);
        }
    }
    None
}

#[derive(Debug, Clone, Copy)]
pub struct ContainmentViolation<R> {
    pub component: usize,
    /// Distance between the periodic set and the component (intersection
    /// evidence: at most the combined resolution).
    pub contact: R,
    /// How far the component escapes the periodic set.
    pub escape: R,
}

/// For a periodic set `A` and the wandering components: flag every component
/// that touches `A` (within the combined resolution) without being contained
/// in it. An empty list means the containment condition holds at this
/// resolution.
pub fn check_component_containment<R: Real>(
    space: &Space<R>,
    a: &CompactSet<R>,
    components: &[SubsetMask<R>],
    cfg: &HausdorffConfig<R>,
) -> Vec<ContainmentViolation<R>> {
    let sa = SampledSet::build(space, &a.mask, cfg.spacing);
    let mut out = Vec::new();
    for (idx, comp) in components.iter().enumerate() {
        let slack = a.resolution() + comp.resolution() + cfg.spacing;
        let sc = SampledSet::build(space, comp, cfg.spacing);
        let contact = min_distance_sampled(space, &sc, &sa);
        if contact <= slack {
            let escape = directed_sup(space, &sc, &sa);
            if escape > slack {
                out.push(ContainmentViolation {
                    component: idx,
                    contact,
                    escape,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ReturnReport<R> {
    pub component: usize,
    pub returns: bool,
    pub best_q: usize,
    pub best_distance: R,
}

#[derive(Debug, Clone)]
pub struct DifferenceReturnsReport<R> {
    pub components: Vec<ReturnReport<R>>,
    /// True when every component of `B \ A` came back within tolerance.
    pub all_return: bool,
}

/// For nested periodic sets `A ⊆ B`: search each component of `B \ A` for a
/// return `d_H(f^q(C), C) <= tol` with `q <= q_max`. Components that never
/// return are candidates for an infinite orbit.
pub fn check_difference_returns<R: Real>(
    space: &Space<R>,
    h: &Homeo<R>,
    a: &CompactSet<R>,
    b: &CompactSet<R>,
    q_max: usize,
    tol: R,
    cfg: &HausdorffConfig<R>,
) -> Result<DifferenceReturnsReport<R>> {
    let sa = SampledSet::build(space, &a.mask, cfg.spacing);
    let sb = SampledSet::build(space, &b.mask, cfg.spacing);
    let slack = a.resolution() + b.resolution() + cfg.spacing;
    if directed_sup(space, &sa, &sb) > slack {
        return Err(CoreError::Parameter(
            "the smaller set must be contained in the larger one".into(),
        ));
    }
    let comps = components_within(space, &b.mask, &a.mask)?;
    let mut reports = Vec::with_capacity(comps.len());
    for (idx, comp) in comps.iter().enumerate() {
        let base = SampledSet::build(space, comp, cfg.spacing);
        let mut img = comp.clone();
        let mut best_q = 0usize;
        let mut best_d = R::infinity();
        let mut returns = false;
        for q in 1..=q_max {
            img = crate::hyperspace::apply_mask(space, h, &img, false);
            let s = SampledSet::build(space, &img, cfg.spacing);
            let d = hausdorff_sampled(space, &base, &s);
            if d < best_d {
                best_d = d;
                best_q = q;
            }
            if d <= tol {
                returns = true;
                break;
            }
        }
        reports.push(ReturnReport {
            component: idx,
            returns,
            best_q,
            best_distance: best_d,
        });
    }
    let all_return = reports.iter().all(|r| r.returns);
    Ok(DifferenceReturnsReport {
        components: reports,
        all_return,
    })
}
