//! Frequencies carried to roughly twice double precision so that phases
//! ωx of order 10⁶ rad can be formed to ~1e-16 rad.

use std::f64::consts::PI;

// 2π split into three parts; the first two have 27 significant bits so that
// k·C1 and k·C2 are exact for |k| < 2^26.
const TWO_PI_1: f64 = 6.283185303211212;
const TWO_PI_2: f64 = 3.968374295837407e-09;
const TWO_PI_3: f64 = 2.2884754904439327e-17;
const TWO_PI: f64 = 2.0 * PI;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Reduce `x` modulo 2π into roughly [−π, π].
#[inline]
pub fn reduce(x: f64) -> f64 {
    if x.abs() <= PI {
        return x;
    }
    let k = (x / TWO_PI).round();
    if k.abs() < 67_108_864.0 {
        ((x - k * TWO_PI_1) - k * TWO_PI_2) - k * TWO_PI_3
    } else {
        x.rem_euclid(TWO_PI)
    }
}

/// An unevaluated sum `hi + lo` with `|lo| <= ulp(hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Split {
    pub hi: f64,
    pub lo: f64,
}

impl Split {
    pub const ZERO: Split = Split { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Split { hi: x, lo: 0.0 }
    }

    pub fn from_parts(hi: f64, lo: f64) -> Self {
        let (s, e) = two_sum(hi, lo);
        Split { hi: s, lo: e }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, x: f64) -> Self {
        let (s, e) = two_sum(self.hi, x);
        Split::from_parts(s, e + self.lo)
    }

    pub fn add_split(self, o: Split) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        Split::from_parts(s, e + self.lo + o.lo)
    }

    pub fn neg(self) -> Self {
        Split {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    /// `self − o` evaluated without cancellation.
    pub fn diff(self, o: Split) -> f64 {
        (self.hi - o.hi) + (self.lo - o.lo)
    }

    pub fn scale(self, s: f64) -> Self {
        let (p, e) = two_prod(self.hi, s);
        Split::from_parts(p, e + self.lo * s)
    }

    /// The phase `self · x`, reduced modulo 2π.
    #[inline]
    pub fn phase(self, x: f64) -> f64 {
        let (p, e) = two_prod(self.hi, x);
        reduce(p) + (e + self.lo * x)
    }
}
