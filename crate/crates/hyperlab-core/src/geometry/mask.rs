//! Per-edge interval masks: the computational stand-in for compact subsets.

use crate::error::CoreError;
use crate::real::Real;
use crate::Result;

use super::{EdgeId, GraphPoint, Space};

/// Closed parameter interval on one edge; `lo == hi` is a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<R> {
    pub lo: R,
    pub hi: R,
}

impl<R: Real> Interval<R> {
    pub fn new(lo: R, hi: R) -> Self {
        Self { lo, hi }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

/// A compact subset of a space as sorted disjoint closed intervals per edge,
/// plus a resolution: the represented set is within Hausdorff distance
/// `resolution` of the true set it stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMask<R> {
    intervals: Vec<Vec<Interval<R>>>,
    resolution: R,
}

impl<R: Real> SubsetMask<R> {
    pub fn empty(n_edges: usize, resolution: R) -> Self {
        Self {
            intervals: vec![Vec::new(); n_edges],
            resolution,
        }
    }

    /// Mask covering the entire space.
    pub fn full(space: &Space<R>) -> Self {
        let mut m = Self::empty(space.n_edges(), R::zero());
        for e in 0..space.n_edges() {
            m.intervals[e].push(Interval::new(R::zero(), R::one()));
        }
        m
    }

    pub fn from_points(space: &Space<R>, points: &[GraphPoint<R>], resolution: R) -> Self {
        let mut m = Self::empty(space.n_edges(), resolution);
        for p in points {
            m.add_point(p.edge, p.t);
        }
        m.normalize();
        m
    }

    pub fn n_edges(&self) -> usize {
        self.intervals.len()
    }

    pub fn resolution(&self) -> R {
        self.resolution
    }

    pub fn set_resolution(&mut self, r: R) {
        self.resolution = r;
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().all(|v| v.is_empty())
    }

    pub fn edge_intervals(&self, e: EdgeId) -> &[Interval<R>] {
        &self.intervals[e.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, Interval<R>)> + '_ {
        self.intervals
            .iter()
            .enumerate()
            .flat_map(|(e, ivs)| ivs.iter().map(move |iv| (EdgeId(e), *iv)))
    }

    pub fn add_interval(&mut self, e: EdgeId, lo: R, hi: R) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let lo = lo.max(R::zero());
        let hi = hi.min(R::one());
        if lo > hi {
            return;
        }
        self.intervals[e.0].push(Interval::new(lo, hi));
    }

    pub fn add_point(&mut self, e: EdgeId, t: R) {
        self.add_interval(e, t, t);
    }

    /// Sort intervals and merge overlapping or touching ones.
    pub fn normalize(&mut self) {
        for ivs in &mut self.intervals {
            if ivs.len() < 2 {
                continue;
            }
            ivs.sort_by(|a, b| {
                a.lo.partial_cmp(&b.lo)
                    .unwrap()
                    .then(a.hi.partial_cmp(&b.hi).unwrap())
            });
            let mut merged: Vec<Interval<R>> = Vec::with_capacity(ivs.len());
            for iv in ivs.drain(..) {
                match merged.last_mut() {
                    Some(last) if iv.lo <= last.hi => {
                        if iv.hi > last.hi {
                            last.hi = iv.hi;
                        }
                    }
                    _ => merged.push(iv),
                }
            }
            *ivs = merged;
        }
    }

    pub fn check_shape(&self, space: &Space<R>) -> Result<()> {
        if self.intervals.len() != space.n_edges() {
            return Err(CoreError::InvalidMask(format!(
                "mask spans {} edges, space has {}",
                self.intervals.len(),
                space.n_edges()
            )));
        }
        for (e, ivs) in self.intervals.iter().enumerate() {
            let mut prev_hi: Option<R> = None;
            for iv in ivs {
                if !(iv.lo >= R::zero() && iv.hi <= R::one() && iv.lo <= iv.hi) {
                    return Err(CoreError::InvalidMask(format!(
                        "edge {e}: interval [{}, {}] outside [0,1] or inverted",
                        iv.lo, iv.hi
                    )));
                }
                if let Some(ph) = prev_hi {
                    if iv.lo <= ph {
                        return Err(CoreError::InvalidMask(format!(
                            "edge {e}: intervals overlap or are unsorted"
                        )));
                    }
                }
                prev_hi = Some(iv.hi);
            }
        }
        Ok(())
    }

    /// Union in place; resolution becomes the max of the two.
    pub fn union_with(&mut self, other: &SubsetMask<R>) {
        for (e, ivs) in other.intervals.iter().enumerate() {
            self.intervals[e].extend_from_slice(ivs);
        }
        self.resolution = self.resolution.max(other.resolution);
        self.normalize();
    }

    /// Total arclength of the mask (degenerate intervals contribute zero).
    pub fn total_length(&self, space: &Space<R>) -> R {
        let mut acc = R::zero();
        for (e, ivs) in self.intervals.iter().enumerate() {
            let len = space.edge(EdgeId(e)).length;
            for iv in ivs {
                acc = acc + (iv.hi - iv.lo) * len;
            }
        }
        acc
    }

    /// Exact interval-level intersection test (no resolution slack).
    pub fn intersects(&self, other: &SubsetMask<R>) -> bool {
        for (e, ivs) in self.intervals.iter().enumerate() {
            let os = &other.intervals[e];
            if ivs.is_empty() || os.is_empty() {
                continue;
            }
            let (mut i, mut j) = (0, 0);
            while i < ivs.len() && j < os.len() {
                let a = ivs[i];
                let b = os[j];
                if a.hi < b.lo {
                    i += 1;
                } else if b.hi < a.lo {
                    j += 1;
                } else {
                    return true;
                }
            }
        }
        false
    }

    /// Whether every interval of `self` lies inside an interval of `other`.
    pub fn subset_of(&self, other: &SubsetMask<R>) -> bool {
        for (e, ivs) in self.intervals.iter().enumerate() {
            let os = &other.intervals[e];
            'outer: for a in ivs {
                for b in os {
                    if b.lo <= a.lo && a.hi <= b.hi {
                        continue 'outer;
                    }
                }
                return false;
            }
        }
        true
    }
}
