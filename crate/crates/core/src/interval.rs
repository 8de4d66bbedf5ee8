//! Closed intervals over `f64` with outward-rounded arithmetic.
//!
//! Each operation computes the round-to-nearest result and uses an
//! error-free transformation (TwoSum, FMA residual) to find the side of the
//! exact value it fell on, stepping one ulp outward only when the result is
//! inexact. Exact point computations therefore stay exact points, which the
//! solvency comparisons in pattern enumeration rely on.

use std::fmt;

/// Magnitudes below this may lose the FMA residual to underflow.
const UNDERFLOW_GUARD: f64 = 1e-290;

fn add_err(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = add_err(a, b);
    if !s.is_finite() {
        return s;
    }
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = add_err(a, b);
    if !s.is_finite() {
        return s;
    }
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

fn mul_dir(a: f64, b: f64, up: bool) -> f64 {
    let p = a * b;
    if !p.is_finite() || a == 0.0 || b == 0.0 {
        return p;
    }
    if p.abs() < UNDERFLOW_GUARD {
        return if up { p.next_up() } else { p.next_down() };
    }
    let e = a.mul_add(b, -p);
    match (up, e) {
        (true, e) if e > 0.0 => p.next_up(),
        (false, e) if e < 0.0 => p.next_down(),
        _ => p,
    }
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    mul_dir(a, b, false)
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    mul_dir(a, b, true)
}

fn div_dir(a: f64, b: f64, up: bool) -> f64 {
    let q = a / b;
    if !q.is_finite() || a == 0.0 {
        return q;
    }
    if q.abs() < UNDERFLOW_GUARD || b.abs() < UNDERFLOW_GUARD {
        return if up { q.next_up() } else { q.next_down() };
    }
    // a - q*b is exact; the true quotient is q + rem / b.
    let rem = (-q).mul_add(b, a);
    let above = (rem > 0.0) == (b > 0.0) && rem != 0.0;
    let below = rem != 0.0 && !above;
    if up && above {
        q.next_up()
    } else if !up && below {
        q.next_down()
    } else {
        q
    }
}

pub fn div_down(a: f64, b: f64) -> f64 {
    div_dir(a, b, false)
}

pub fn div_up(a: f64, b: f64) -> f64 {
    div_dir(a, b, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, o.lo),
            hi: add_up(self.hi, o.hi),
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, -o.hi),
            hi: add_up(self.hi, -o.lo),
        }
    }

    /// `1 - self`.
    pub fn complement(&self) -> Interval {
        Interval::point(1.0).sub(self)
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval {
                lo: mul_down(self.lo, c),
                hi: mul_up(self.hi, c),
            }
        } else {
            Interval {
                lo: mul_down(self.hi, c),
                hi: mul_up(self.lo, c),
            }
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let cands = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let lo = cands
            .iter()
            .map(|&(a, b)| mul_down(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = cands
            .iter()
            .map(|&(a, b)| mul_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Interval { lo, hi }
    }

    /// `self / o`, or `None` when `o` contains zero.
    pub fn div(&self, o: &Interval) -> Option<Interval> {
        if o.contains_zero() {
            return None;
        }
        let cands = [
            (self.lo, o.lo),
            (self.lo, o.hi),
            (self.hi, o.lo),
            (self.hi, o.hi),
        ];
        let lo = cands
            .iter()
            .map(|&(a, b)| div_down(a, b))
            .fold(f64::INFINITY, f64::min);
        let hi = cands
            .iter()
            .map(|&(a, b)| div_up(a, b))
            .fold(f64::NEG_INFINITY, f64::max);
        Some(Interval { lo, hi })
    }
}
