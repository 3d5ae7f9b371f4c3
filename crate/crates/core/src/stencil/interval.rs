//! Closed real intervals with outward-rounded endpoints.
//!
//! Just enough arithmetic to enclose a residual's partial derivatives over a
//! subcube. Every operation widens its result by one ulp on each side, so the
//! enclosure survives the rounding of the underlying `f64` ops.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan());
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn widened(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            return Self::ENTIRE;
        }
        Self {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `max |x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::point(1.0);
        }
        if n < 0 {
            return Self::point(1.0) / self.powi(-n);
        }
        let (a, b) = (self.lo.powi(n), self.hi.powi(n));
        if n % 2 == 1 {
            Self::widened(a, b)
        } else if self.contains_zero() {
            Self::widened(0.0, a.max(b)).clamp_low(0.0)
        } else {
            Self::widened(a.min(b), a.max(b))
        }
    }

    fn clamp_low(self, floor: f64) -> Self {
        Self {
            lo: self.lo.max(floor),
            hi: self.hi,
        }
    }

    fn clamp_unit(self) -> Self {
        Self {
            lo: self.lo.max(-1.0),
            hi: self.hi.min(1.0),
        }
    }

    /// Whether `anchor + 2k*pi` lies in the interval for some integer `k`.
    fn hits_periodic(&self, anchor: f64) -> bool {
        let k = ((self.lo - anchor) / TAU).ceil();
        anchor + k * TAU <= self.hi
    }

    pub fn sin(self) -> Self {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.hi - self.lo >= TAU {
            return Self::new(-1.0, 1.0);
        }
        let (a, b) = (self.lo.sin(), self.hi.sin());
        let hi = if self.hits_periodic(FRAC_PI_2) {
            1.0
        } else {
            a.max(b)
        };
        let lo = if self.hits_periodic(-FRAC_PI_2) {
            -1.0
        } else {
            a.min(b)
        };
        Self::widened(lo, hi).clamp_unit()
    }

    pub fn cos(self) -> Self {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.hi - self.lo >= TAU {
            return Self::new(-1.0, 1.0);
        }
        let (a, b) = (self.lo.cos(), self.hi.cos());
        let hi = if self.hits_periodic(0.0) {
            1.0
        } else {
            a.max(b)
        };
        let lo = if self.hits_periodic(PI) {
            -1.0
        } else {
            a.min(b)
        };
        Self::widened(lo, hi).clamp_unit()
    }

    pub fn exp(self) -> Self {
        Self::widened(self.lo.exp(), self.hi.exp()).clamp_low(0.0)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::widened(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::widened(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        // Exact zeros stay exact; avoids 0 * inf = NaN on unbounded operands.
        if (self.lo == 0.0 && self.hi == 0.0) || (o.lo == 0.0 && o.hi == 0.0) {
            return Interval::point(0.0);
        }
        let p = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        if p.iter().any(|v| v.is_nan()) {
            return Interval::ENTIRE;
        }
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::widened(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        if o.contains_zero() {
            return Interval::ENTIRE;
        }
        let recip = Interval::widened(1.0 / o.hi, 1.0 / o.lo);
        self * recip
    }
}
