//! Closed intervals on the real line, and hulls of sampled branch values.
//!
//! Branch values are sampled on a uniform grid. Each sample covers the
//! interval reaching to its nearest values at the neighbouring grid points,
//! so a continuous branch is covered between samples; the union of these
//! covers is the conservative exclusion set. The reported hull keeps the
//! grouping but shrinks each group to its extreme sampled values.

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Interval { lo, hi }
    }

    pub fn point(x: T) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn len(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn distance(&self, x: T) -> T {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            T::zero()
        }
    }
}

/// Sorted union of possibly overlapping intervals.
pub fn merge<T: Real>(mut v: Vec<Interval<T>>) -> Vec<Interval<T>> {
    v.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite interval ends"));
    let mut out: Vec<Interval<T>> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// `window` minus the union of `excluded` (open removal, so the result's
/// ends are on the excluded intervals' ends).
pub fn subtract<T: Real>(window: Interval<T>, excluded: &[Interval<T>]) -> Vec<Interval<T>> {
    let mut out = Vec::new();
    let mut lo = window.lo;
    for iv in merge(excluded.to_vec()) {
        if iv.hi < lo {
            continue;
        }
        if iv.lo > window.hi {
            break;
        }
        if iv.lo > lo {
            out.push(Interval::new(lo, iv.lo));
        }
        lo = lo.max(iv.hi);
    }
    if lo < window.hi {
        out.push(Interval::new(lo, window.hi));
    }
    out
}

/// Distance from `x` to a set of intervals (infinite for the empty set).
pub fn distance<T: Real>(x: T, set: &[Interval<T>]) -> T {
    set.iter().map(|iv| iv.distance(x)).fold(T::infinity(), T::min)
}

/// Uniform grid with `points` per axis over `[0,1]^dims`, endpoints
/// included, axis 1 fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct UniformGrid {
    pub dims: usize,
    pub points: usize,
}

impl UniformGrid {
    pub fn new(dims: usize, points: usize) -> Self {
        assert!(points >= 2 || dims == 0, "uniform grid needs two points per axis");
        UniformGrid { dims, points }
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, idx: usize) -> Vec<usize> {
        let mut rest = idx;
        (0..self.dims)
            .map(|_| {
                let i = rest % self.points;
                rest /= self.points;
                i
            })
            .collect()
    }

    pub fn coord<T: Real>(&self, i: usize) -> T {
        lit::<T>(i as f64) / lit::<T>((self.points - 1) as f64)
    }

    pub fn point<T: Real>(&self, idx: usize) -> Vec<T> {
        self.index(idx).into_iter().map(|i| self.coord(i)).collect()
    }

    /// Flat indices of the grid neighbours of `idx` along each axis.
    pub fn neighbours(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.dims);
        let mut stride = 1;
        let multi = self.index(idx);
        for &i in &multi {
            if i > 0 {
                out.push(idx - stride);
            }
            if i + 1 < self.points {
                out.push(idx + stride);
            }
            stride *= self.points;
        }
        out
    }
}

/// Per-sample reach towards the neighbouring samples' nearest values,
/// capped at ten times the median reach.
fn reaches<T: Real>(grid: UniformGrid, values: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut raw: Vec<Vec<Option<T>>> = Vec::with_capacity(values.len());
    let mut all = Vec::new();
    for (idx, vs) in values.iter().enumerate() {
        let nbrs = grid.neighbours(idx);
        let row: Vec<Option<T>> = vs
            .iter()
            .map(|&v| {
                let mut best: Option<T> = None;
                for &n in &nbrs {
                    let near = values[n].iter().map(|&w| (w - v).abs()).fold(T::infinity(), T::min);
                    if near.is_finite() {
                        best = Some(best.map_or(near, |b| b.max(near)));
                    }
                }
                if let Some(b) = best {
                    all.push(b);
                }
                best
            })
            .collect();
        raw.push(row);
    }
    let cap = if all.is_empty() {
        T::zero()
    } else {
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite reach"));
        all[all.len() / 2] * lit(10.0)
    };
    raw.into_iter()
        .map(|row| row.into_iter().map(|r| r.map_or(cap, |r| r.min(cap))).collect())
        .collect()
}

/// Covering intervals of sampled branch values, each widened by `pad`.
pub fn cover<T: Real>(grid: UniformGrid, values: &[Vec<T>], pad: T) -> Vec<Interval<T>> {
    let reach = reaches(grid, values);
    let mut ivs = Vec::new();
    for (vs, rs) in values.iter().zip(&reach) {
        for (&v, &r) in vs.iter().zip(rs) {
            ivs.push(Interval::new(v - r - pad, v + r + pad));
        }
    }
    merge(ivs)
}

/// Groups of overlapping covers, each reported as `[min, max]` of its
/// samples.
pub fn hull<T: Real>(grid: UniformGrid, values: &[Vec<T>]) -> Vec<Interval<T>> {
    let reach = reaches(grid, values);
    let mut items: Vec<(Interval<T>, T)> = Vec::new();
    for (vs, rs) in values.iter().zip(&reach) {
        for (&v, &r) in vs.iter().zip(rs) {
            items.push((Interval::new(v - r, v + r), v));
        }
    }
    items.sort_by(|a, b| a.0.lo.partial_cmp(&b.0.lo).expect("finite interval ends"));
    let mut out: Vec<Interval<T>> = Vec::new();
    let mut reach_hi = T::neg_infinity();
    for (iv, v) in items {
        match out.last_mut() {
            Some(last) if iv.lo <= reach_hi => {
                last.lo = last.lo.min(v);
                last.hi = last.hi.max(v);
                reach_hi = reach_hi.max(iv.hi);
            }
            _ => {
                out.push(Interval::point(v));
                reach_hi = iv.hi;
            }
        }
    }
    out
}
