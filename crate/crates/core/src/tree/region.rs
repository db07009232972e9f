//! Per-feature intervals with open/closed ends and their products (boxes).
//!
//! Path premises and knowledge premises are both conjunctions of single
//! feature bounds, so satisfiability reduces to interval intersection.

use std::collections::BTreeMap;
use std::fmt;

/// An interval of the real line. Infinite ends are always open.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Interval {
    pub const UNIVERSE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        lo_closed: false,
        hi: f64::INFINITY,
        hi_closed: false,
    };

    /// `[lo, hi]`; returns `None` when `lo > hi`.
    pub fn closed(lo: f64, hi: f64) -> Option<Interval> {
        Interval {
            lo,
            lo_closed: true,
            hi,
            hi_closed: true,
        }
        .normalized()
    }

    /// `(-inf, b]`
    pub fn at_most(b: f64) -> Interval {
        Interval {
            hi: b,
            hi_closed: true,
            ..Interval::UNIVERSE
        }
    }

    /// `(b, +inf)`
    pub fn above(b: f64) -> Interval {
        Interval {
            lo: b,
            lo_closed: false,
            ..Interval::UNIVERSE
        }
    }

    /// `(lo, hi]`, the shape produced by a pair of `<=` splits.
    pub fn half_open(lo: f64, hi: f64) -> Option<Interval> {
        Interval {
            lo,
            lo_closed: false,
            hi,
            hi_closed: true,
        }
        .normalized()
    }

    /// Forces infinite ends open and rejects empty results.
    fn normalized(mut self) -> Option<Interval> {
        if self.lo.is_infinite() {
            self.lo_closed = false;
        }
        if self.hi.is_infinite() {
            self.hi_closed = false;
        }
        if self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed) {
            Some(self)
        } else {
            None
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.partial_cmp(&other.lo) {
            Some(std::cmp::Ordering::Greater) => (self.lo, self.lo_closed),
            Some(std::cmp::Ordering::Less) => (other.lo, other.lo_closed),
            _ => (self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&other.hi) {
            Some(std::cmp::Ordering::Less) => (self.hi, self.hi_closed),
            Some(std::cmp::Ordering::Greater) => (other.hi, other.hi_closed),
            _ => (self.hi, self.hi_closed && other.hi_closed),
        };
        Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
        .normalized()
    }

    pub fn contains(&self, v: f64) -> bool {
        let above_lo = if self.lo_closed {
            v >= self.lo
        } else {
            v > self.lo
        };
        let below_hi = if self.hi_closed {
            v <= self.hi
        } else {
            v < self.hi
        };
        above_lo && below_hi
    }

    pub fn is_universe(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    /// `true` when every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.intersect(other).as_ref() == Some(self)
    }

    /// Distance from `v` to the interval (0 inside, or on an open end).
    pub fn distance(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }

    /// A point of the interval close to `v`: `v` itself when inside,
    /// otherwise the nearest finite end, pulled inside an open end by
    /// `eps / 2`. Intervals narrower than `eps` with two finite ends give
    /// their midpoint.
    pub fn nearest_point(&self, v: f64, eps: f64) -> f64 {
        if self.contains(v) {
            return v;
        }
        let finite = self.lo.is_finite() && self.hi.is_finite();
        if finite && self.hi - self.lo < eps {
            let mid = self.lo + (self.hi - self.lo) / 2.0;
            if self.contains(mid) {
                return mid;
            }
        }
        let candidate = if v < self.lo {
            if self.lo_closed {
                self.lo
            } else {
                self.lo + eps / 2.0
            }
        } else if self.hi_closed {
            self.hi
        } else {
            self.hi - eps / 2.0
        };
        if self.contains(candidate) {
            return candidate;
        }
        // eps too small for the magnitude, or the interval is tiny
        if finite {
            let mid = self.lo + (self.hi - self.lo) / 2.0;
            if self.contains(mid) {
                return mid;
            }
        }
        let mut c = if v < self.lo { self.lo } else { self.hi };
        for _ in 0..64 {
            c = if v < self.lo {
                next_up(c)
            } else {
                next_down(c)
            };
            if self.contains(c) {
                return c;
            }
        }
        c
    }
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits + 1 } else { bits - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// A product of per-feature intervals; features without an entry are
/// unconstrained. `FeatureBox::Empty` is the unsatisfiable box.
#[derive(Clone, Debug, PartialEq)]
pub enum FeatureBox {
    Empty,
    Bounded(BTreeMap<usize, Interval>),
}

impl Default for FeatureBox {
    fn default() -> Self {
        FeatureBox::universe()
    }
}

impl FeatureBox {
    pub fn universe() -> Self {
        FeatureBox::Bounded(BTreeMap::new())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, FeatureBox::Empty)
    }

    /// Intersects feature `f` with `iv` in place.
    pub fn constrain(&mut self, f: usize, iv: Interval) {
        if let FeatureBox::Bounded(map) = self {
            let cur = map.get(&f).copied().unwrap_or(Interval::UNIVERSE);
            match cur.intersect(&iv) {
                Some(next) if next.is_universe() => {
                    map.remove(&f);
                }
                Some(next) => {
                    map.insert(f, next);
                }
                None => *self = FeatureBox::Empty,
            }
        }
    }

    pub fn intersect(&self, other: &FeatureBox) -> FeatureBox {
        match (self, other) {
            (FeatureBox::Bounded(_), FeatureBox::Bounded(b)) => {
                let mut out = self.clone();
                for (&f, &iv) in b {
                    out.constrain(f, iv);
                    if out.is_empty() {
                        break;
                    }
                }
                out
            }
            _ => FeatureBox::Empty,
        }
    }

    /// Interval on feature `f`; `None` for the empty box.
    pub fn interval(&self, f: usize) -> Option<Interval> {
        match self {
            FeatureBox::Empty => None,
            FeatureBox::Bounded(map) => Some(map.get(&f).copied().unwrap_or(Interval::UNIVERSE)),
        }
    }

    /// Constrained features with their intervals.
    pub fn bounds(&self) -> impl Iterator<Item = (usize, Interval)> + '_ {
        let map = match self {
            FeatureBox::Empty => None,
            FeatureBox::Bounded(map) => Some(map),
        };
        map.into_iter()
            .flat_map(|m| m.iter().map(|(&f, &iv)| (f, iv)))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            FeatureBox::Empty => false,
            FeatureBox::Bounded(map) => map.iter().all(|(&f, iv)| iv.contains(x[f])),
        }
    }

    /// Features on which `x` falls outside the box, ascending.
    pub fn violated_features(&self, x: &[f64]) -> Vec<usize> {
        self.bounds()
            .filter(|&(f, iv)| !iv.contains(x[f]))
            .map(|(f, _)| f)
            .collect()
    }
}
