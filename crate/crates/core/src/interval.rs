//! Certified interval arithmetic over arbitrary-precision binary floats.
//!
//! Every irrational quantity in this crate (norms, logarithms, exponentials,
//! unit-vector entries) is represented as an enclosing interval whose
//! endpoints round outward: lower bounds round down, upper bounds round up.
//! Predicates decided on intervals are three-valued; callers escalate the
//! working precision when a comparison is indeterminate.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Rounding direction for endpoint arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Down,
    Up,
}

/// Three-valued outcome of an interval-decided predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cert {
    True,
    False,
    /// The intervals overlap the decision boundary at the current precision.
    Unknown,
}

impl Cert {
    pub fn is_true(self) -> bool {
        self == Cert::True
    }
    pub fn from_bool(b: bool) -> Cert {
        if b {
            Cert::True
        } else {
            Cert::False
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    #[error("comparison indeterminate at {bits} bits of precision")]
    Indeterminate { bits: u32 },
    #[error("precision cap of {max_bits} bits exhausted")]
    PrecisionExhausted { max_bits: u32 },
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("logarithm of an interval not strictly positive")]
    LogNonPositive,
    #[error("empty or inverted interval")]
    Inverted,
}

/// Working-precision policy: start at `start_bits`, double on indeterminacy,
/// give up at `max_bits`.
#[derive(Clone, Copy, Debug)]
pub struct PrecisionPolicy {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            start_bits: 128,
            max_bits: 4096,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(start_bits: u32, max_bits: u32) -> Self {
        PrecisionPolicy {
            start_bits: start_bits.max(8),
            max_bits: max_bits.max(start_bits),
        }
    }

    /// Runs `f` at increasing precision until it returns a decided value.
    pub fn escalate<T>(
        &self,
        mut f: impl FnMut(u32) -> Result<T, IntervalError>,
    ) -> Result<T, IntervalError> {
        let mut bits = self.start_bits;
        loop {
            match f(bits) {
                Err(IntervalError::Indeterminate { .. }) if bits < self.max_bits => {
                    bits = (bits * 2).min(self.max_bits);
                }
                other => return other,
            }
        }
    }

    /// Policy shifted by a magnitude offset: absolute-resolution decisions
    /// on values with `extra` integer bits need that many bits on top of
    /// the requested relative precision. The cap shifts along.
    pub fn offset(&self, extra: u32) -> PrecisionPolicy {
        PrecisionPolicy {
            start_bits: self.start_bits.saturating_add(extra),
            max_bits: self.max_bits.saturating_add(extra),
        }
    }
}

/// Arbitrary-precision binary float `mantissa * 2^exp`.
///
/// The representation is exact; rounding happens only through the explicit
/// directed operations. Exponents are plain `i64`: the magnitudes reached in
/// this crate (heights of order `exp(X_i)` products) stay far below the
/// ±2^63 exponent range.
#[derive(Clone, Debug)]
pub struct BigFloat {
    m: BigInt,
    e: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat {
            m: BigInt::zero(),
            e: 0,
        }
    }

    pub fn one() -> Self {
        BigFloat {
            m: BigInt::one(),
            e: 0,
        }
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        BigFloat { m: n.clone(), e: 0 }.normalized()
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_bigint(&BigInt::from(n))
    }

    /// Exact value `2^k`.
    pub fn pow2(k: i64) -> Self {
        BigFloat {
            m: BigInt::one(),
            e: k,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.m.is_positive()
    }

    fn normalized(mut self) -> Self {
        if self.m.is_zero() {
            self.e = 0;
            return self;
        }
        let tz = self.m.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.m >>= tz;
            self.e += tz as i64;
        }
        self
    }

    /// Number of bits in the mantissa magnitude.
    fn mant_bits(&self) -> u64 {
        self.m.bits()
    }

    /// Exponent of the most significant bit: value lies in
    /// `[2^(msb_exp-1), 2^msb_exp)` in magnitude. Zero has no msb.
    fn msb_exp(&self) -> Option<i64> {
        if self.m.is_zero() {
            None
        } else {
            Some(self.e + self.m.bits() as i64)
        }
    }

    /// Public view of the msb exponent (magnitude order of the value).
    pub fn msb_exp_pub(&self) -> Option<i64> {
        self.msb_exp()
    }

    pub fn neg(&self) -> Self {
        BigFloat {
            m: -self.m.clone(),
            e: self.e,
        }
    }

    pub fn abs(&self) -> Self {
        BigFloat {
            m: self.m.abs(),
            e: self.e,
        }
    }

    /// Exact scaling by `2^k`.
    pub fn scale2(&self, k: i64) -> Self {
        if self.m.is_zero() {
            self.clone()
        } else {
            BigFloat {
                m: self.m.clone(),
                e: self.e + k,
            }
        }
    }

    /// Directed rounding to `prec` significant bits.
    pub fn round(&self, prec: u32, dir: Dir) -> Self {
        let bits = self.mant_bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = (bits - prec as u64) as i64;
        self.shift_right_directed(shift, dir)
    }

    /// Divides the value by `2^shift`, rounding the mantissa in `dir`.
    fn shift_right_directed(&self, shift: i64, dir: Dir) -> Self {
        assert!(shift >= 0);
        if shift == 0 || self.m.is_zero() {
            return self.clone();
        }
        let s = shift as u64;
        let (sign, mag) = (self.m.sign(), self.m.magnitude().clone());
        let floor_of_mag = &mag >> s;
        let exact = (&floor_of_mag << s) == mag;
        let rounded_mag = match (dir, sign) {
            // toward -inf: truncate positive magnitudes, bump negative ones
            (Dir::Down, Sign::Plus) | (Dir::Up, Sign::Minus) => floor_of_mag,
            _ => {
                if exact {
                    floor_of_mag
                } else {
                    floor_of_mag + 1u32
                }
            }
        };
        BigFloat {
            m: BigInt::from_biguint(sign, rounded_mag),
            e: self.e + shift,
        }
        .normalized()
    }

    /// Exact addition (no rounding). Cost is proportional to the exponent
    /// gap, so callers with wildly different magnitudes should prefer
    /// `add_round`.
    pub fn add_exact(&self, other: &BigFloat) -> Self {
        if self.m.is_zero() {
            return other.clone();
        }
        if other.m.is_zero() {
            return self.clone();
        }
        let e = self.e.min(other.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &other.m << (other.e - e) as u64;
        BigFloat { m: a + b, e }.normalized()
    }

    /// Directed addition at `prec` bits. When the exponent gap makes exact
    /// alignment pointless, the smaller term is absorbed into a one-ulp
    /// outward nudge.
    pub fn add_round(&self, other: &BigFloat, prec: u32, dir: Dir) -> Self {
        let (big, small) = match (self.msb_exp(), other.msb_exp()) {
            (None, _) => return other.round(prec, dir),
            (_, None) => return self.round(prec, dir),
            (Some(a), Some(b)) => {
                if a >= b {
                    (self, other)
                } else {
                    (other, self)
                }
            }
        };
        let gap = big.msb_exp().unwrap() - small.msb_exp().unwrap();
        if gap > prec as i64 + 8 {
            // |small| < ulp(big at prec)/4; round big and nudge outward if
            // small could push past the rounding.
            let r = big.round(prec, dir);
            let pushes = match dir {
                Dir::Down => small.is_negative(),
                Dir::Up => small.is_positive(),
            };
            if pushes {
                let ulp_exp = big.msb_exp().unwrap() - prec as i64 - 1;
                let ulp = BigFloat::pow2(ulp_exp);
                let nudge = match dir {
                    Dir::Down => ulp.neg(),
                    Dir::Up => ulp,
                };
                r.add_exact(&nudge).round(prec, dir)
            } else {
                r
            }
        } else {
            big.add_exact(small).round(prec, dir)
        }
    }

    pub fn sub_round(&self, other: &BigFloat, prec: u32, dir: Dir) -> Self {
        self.add_round(&other.neg(), prec, dir)
    }

    /// Exact multiplication.
    pub fn mul_exact(&self, other: &BigFloat) -> Self {
        BigFloat {
            m: &self.m * &other.m,
            e: self.e + other.e,
        }
        .normalized()
    }

    pub fn mul_round(&self, other: &BigFloat, prec: u32, dir: Dir) -> Self {
        self.mul_exact(other).round(prec, dir)
    }

    /// Directed division to `prec` significant bits.
    pub fn div_round(&self, other: &BigFloat, prec: u32, dir: Dir) -> Self {
        assert!(!other.m.is_zero(), "division by zero BigFloat");
        if self.m.is_zero() {
            return BigFloat::zero();
        }
        // Scale the numerator so the integer quotient carries prec+2 bits.
        let extra = prec as i64 + 2 + other.mant_bits() as i64 - self.mant_bits() as i64;
        let extra = extra.max(0) as u64;
        let num = &self.m << extra;
        let q = match dir {
            Dir::Down => num.div_floor(&other.m),
            Dir::Up => num.div_ceil(&other.m),
        };
        BigFloat {
            m: q,
            e: self.e - extra as i64 - other.e,
        }
        .normalized()
        .round(prec, dir)
    }

    /// Directed square root (value must be nonnegative).
    pub fn sqrt_round(&self, prec: u32, dir: Dir) -> Self {
        assert!(!self.m.is_negative(), "sqrt of negative BigFloat");
        if self.m.is_zero() {
            return BigFloat::zero();
        }
        // Scale so the integer sqrt carries at least prec+2 bits, with an
        // even exponent adjustment.
        let want = 2 * (prec as i64 + 2);
        let have = self.mant_bits() as i64;
        let mut shift = (want - have).max(0);
        if (self.e - shift) % 2 != 0 {
            shift += 1;
        }
        let mag = self.m.magnitude() << shift as u64;
        let root = mag.sqrt(); // floor
        let exact = &root * &root == mag;
        let m = match dir {
            Dir::Down => root,
            Dir::Up => {
                if exact {
                    root
                } else {
                    root + 1u32
                }
            }
        };
        BigFloat {
            m: BigInt::from_biguint(Sign::Plus, m),
            e: (self.e - shift) / 2,
        }
        .normalized()
        .round(prec, dir)
    }

    /// Directed conversion of an exact rational.
    pub fn from_ratio(r: &BigRational, prec: u32, dir: Dir) -> Self {
        let num = BigFloat::from_bigint(r.numer());
        let den = BigFloat::from_bigint(r.denom());
        num.div_round(&den, prec, dir)
    }

    pub fn cmp_val(&self, other: &BigFloat) -> Ordering {
        let sa = self.m.sign();
        let sb = other.m.sign();
        if sa != sb {
            return match (sa, sb) {
                (Sign::Minus, _) => Ordering::Less,
                (Sign::Plus, _) => Ordering::Greater,
                (Sign::NoSign, Sign::Plus) => Ordering::Less,
                (Sign::NoSign, Sign::Minus) => Ordering::Greater,
                _ => Ordering::Equal,
            };
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        // Same nonzero sign: compare msb exponents first.
        let (ea, eb) = (self.msb_exp().unwrap(), other.msb_exp().unwrap());
        if ea != eb {
            let mag_cmp = ea.cmp(&eb);
            return if sa == Sign::Plus {
                mag_cmp
            } else {
                mag_cmp.reverse()
            };
        }
        match self.add_exact(&other.neg()).m.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    /// Floor of the value as a BigInt.
    pub fn floor_int(&self) -> BigInt {
        if self.e >= 0 {
            &self.m << self.e as u64
        } else {
            let s = (-self.e) as u64;
            self.m.div_floor(&(BigInt::one() << s))
        }
    }

    /// Ceiling of the value as a BigInt.
    pub fn ceil_int(&self) -> BigInt {
        -self.neg().floor_int()
    }

    /// Exact conversion to a rational (dyadic) value.
    pub fn to_rational(&self) -> BigRational {
        if self.e >= 0 {
            BigRational::from_integer(&self.m << self.e as u64)
        } else {
            BigRational::new(self.m.clone(), BigInt::one() << (-self.e) as u64)
        }
    }

    /// Rough magnitude as f64 (for diagnostics only, may overflow to inf).
    pub fn to_f64_approx(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        let bits = self.mant_bits();
        let take = bits.min(64);
        let shifted = self.m.clone() >> (bits - take);
        let lead = shifted.to_f64().unwrap_or(0.0);
        let exp = self.e as f64 + (bits - take) as f64;
        lead * exp.exp2()
    }

    /// Decimal rendering with `digits` significant digits, rounded in `dir`.
    pub fn to_decimal(&self, digits: u32, dir: Dir) -> String {
        if self.m.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        // dec_exp ~ floor(log10 |x|); refine after scaling.
        let msb = self.msb_exp().unwrap();
        let mut dec_exp = ((msb as f64 - 0.5) * std::f64::consts::LOG10_2).floor() as i64;
        loop {
            // scaled = x * 10^(digits-1-dec_exp), rounded toward dir.
            let t = digits as i64 - 1 - dec_exp;
            let scaled = self.scale_pow10(t, dir);
            let mag = scaled.magnitude().clone();
            let ndig = mag.to_string().len() as i64;
            if ndig > digits as i64 && mag >= BigUint::from(10u32).pow(digits) {
                dec_exp += ndig - digits as i64;
                continue;
            }
            if mag < BigUint::from(10u32).pow(digits.saturating_sub(1)) && !mag.is_zero() {
                dec_exp -= 1;
                continue;
            }
            let neg = scaled.is_negative();
            let s = mag.to_string();
            let body = if s.len() == 1 {
                s
            } else {
                format!("{}.{}", &s[..1], &s[1..])
            };
            let sign = if neg { "-" } else { "" };
            return if dec_exp == 0 {
                format!("{sign}{body}")
            } else {
                format!("{sign}{body}e{dec_exp}")
            };
        }
    }

    /// Integer nearest to `x * 10^t` in direction `dir`.
    fn scale_pow10(&self, t: i64, dir: Dir) -> BigInt {
        let p10 = BigInt::from(10u32).pow(t.unsigned_abs() as u32);
        let v = if t >= 0 {
            BigFloat {
                m: &self.m * p10,
                e: self.e,
            }
        } else {
            return BigFloat {
                m: self.m.clone(),
                e: self.e,
            }
            .div_int_directed(&p10, dir);
        };
        v.round_to_int(dir)
    }

    fn div_int_directed(&self, d: &BigInt, dir: Dir) -> BigInt {
        // floor/ceil of m*2^e / d
        if self.e >= 0 {
            let num = &self.m << self.e as u64;
            match dir {
                Dir::Down => num.div_floor(d),
                Dir::Up => num.div_ceil(d),
            }
        } else {
            let den = d << (-self.e) as u64;
            match dir {
                Dir::Down => self.m.div_floor(&den),
                Dir::Up => self.m.div_ceil(&den),
            }
        }
    }

    fn round_to_int(&self, dir: Dir) -> BigInt {
        if self.e >= 0 {
            &self.m << self.e as u64
        } else {
            let den = BigInt::one() << (-self.e) as u64;
            match dir {
                Dir::Down => self.m.div_floor(&den),
                Dir::Up => self.m.div_ceil(&den),
            }
        }
    }
}

/// Closed interval `[lo, hi]` with outward-rounded endpoints.
#[derive(Clone, Debug)]
pub struct Interval {
    lo: BigFloat,
    hi: BigFloat,
}

impl Interval {
    pub fn new(lo: BigFloat, hi: BigFloat) -> Result<Self, IntervalError> {
        if lo.cmp_val(&hi) == Ordering::Greater {
            return Err(IntervalError::Inverted);
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(v: BigFloat) -> Self {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn zero() -> Self {
        Interval::point(BigFloat::zero())
    }

    pub fn one() -> Self {
        Interval::point(BigFloat::one())
    }

    pub fn from_int(n: &BigInt) -> Self {
        Interval::point(BigFloat::from_bigint(n))
    }

    pub fn from_i64(n: i64) -> Self {
        Interval::point(BigFloat::from_i64(n))
    }

    pub fn from_ratio(r: &BigRational, bits: u32) -> Self {
        Interval {
            lo: BigFloat::from_ratio(r, bits, Dir::Down),
            hi: BigFloat::from_ratio(r, bits, Dir::Up),
        }
    }

    pub fn lo(&self) -> &BigFloat {
        &self.lo
    }

    pub fn hi(&self) -> &BigFloat {
        &self.hi
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn add(&self, other: &Interval, bits: u32) -> Self {
        Interval {
            lo: self.lo.add_round(&other.lo, bits, Dir::Down),
            hi: self.hi.add_round(&other.hi, bits, Dir::Up),
        }
    }

    pub fn sub(&self, other: &Interval, bits: u32) -> Self {
        self.add(&other.neg(), bits)
    }

    pub fn mul(&self, other: &Interval, bits: u32) -> Self {
        let cands = [
            self.lo.mul_exact(&other.lo),
            self.lo.mul_exact(&other.hi),
            self.hi.mul_exact(&other.lo),
            self.hi.mul_exact(&other.hi),
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if c.cmp_val(&lo) == Ordering::Less {
                lo = c.clone();
            }
            if c.cmp_val(&hi) == Ordering::Greater {
                hi = c.clone();
            }
        }
        Interval {
            lo: lo.round(bits, Dir::Down),
            hi: hi.round(bits, Dir::Up),
        }
    }

    pub fn div(&self, other: &Interval, bits: u32) -> Result<Self, IntervalError> {
        if other.contains_zero() {
            return Err(IntervalError::DivisionByZero);
        }
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&other.lo, &other.hi] {
                let down = a.div_round(b, bits, Dir::Down);
                let up = a.div_round(b, bits, Dir::Up);
                lo = Some(match lo {
                    None => down.clone(),
                    Some(l) => {
                        if down.cmp_val(&l) == Ordering::Less {
                            down.clone()
                        } else {
                            l
                        }
                    }
                });
                hi = Some(match hi {
                    None => up.clone(),
                    Some(h) => {
                        if up.cmp_val(&h) == Ordering::Greater {
                            up.clone()
                        } else {
                            h
                        }
                    }
                });
            }
        }
        Ok(Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        })
    }

    /// Integer power by repeated interval multiplication.
    pub fn powi(&self, k: u32, bits: u32) -> Self {
        let mut acc = Interval::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base, bits);
            }
            base = base.mul(&base, bits);
            k >>= 1;
        }
        acc
    }

    /// Square root; a slightly negative lower endpoint (rounding debris on a
    /// nonnegative quantity) is clamped to zero.
    pub fn sqrt(&self, bits: u32) -> Self {
        let lo = if self.lo.is_negative() {
            BigFloat::zero()
        } else {
            self.lo.sqrt_round(bits, Dir::Down)
        };
        assert!(
            !self.hi.is_negative(),
            "sqrt of a certainly-negative interval"
        );
        Interval {
            lo,
            hi: self.hi.sqrt_round(bits, Dir::Up),
        }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let hi = if self.lo.neg().cmp_val(&self.hi) == Ordering::Greater {
                self.lo.neg()
            } else {
                self.hi.clone()
            };
            Interval {
                lo: BigFloat::zero(),
                hi,
            }
        }
    }

    pub fn scale2(&self, k: i64) -> Self {
        Interval {
            lo: self.lo.scale2(k),
            hi: self.hi.scale2(k),
        }
    }

    pub fn hull(&self, other: &Interval) -> Self {
        Interval {
            lo: if self.lo.cmp_val(&other.lo) == Ordering::Less {
                self.lo.clone()
            } else {
                other.lo.clone()
            },
            hi: if self.hi.cmp_val(&other.hi) == Ordering::Greater {
                self.hi.clone()
            } else {
                other.hi.clone()
            },
        }
    }

    pub fn max(&self, other: &Interval) -> Self {
        Interval {
            lo: if self.lo.cmp_val(&other.lo) == Ordering::Greater {
                self.lo.clone()
            } else {
                other.lo.clone()
            },
            hi: if self.hi.cmp_val(&other.hi) == Ordering::Greater {
                self.hi.clone()
            } else {
                other.hi.clone()
            },
        }
    }

    pub fn min(&self, other: &Interval) -> Self {
        Interval {
            lo: if self.lo.cmp_val(&other.lo) == Ordering::Less {
                self.lo.clone()
            } else {
                other.lo.clone()
            },
            hi: if self.hi.cmp_val(&other.hi) == Ordering::Less {
                self.hi.clone()
            } else {
                other.hi.clone()
            },
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn width(&self, bits: u32) -> BigFloat {
        self.hi.sub_round(&self.lo, bits, Dir::Up)
    }

    /// Upper bound on width / |midpoint|; returns None for intervals
    /// containing zero.
    pub fn rel_width_approx(&self) -> Option<f64> {
        if self.contains_zero() {
            return None;
        }
        let w = self.hi.add_exact(&self.lo.neg());
        let denom = self.lo.abs();
        let denom = if denom.is_zero() {
            self.hi.abs()
        } else {
            denom
        };
        let (we, de) = (w.msb_exp(), denom.msb_exp());
        match (we, de) {
            (None, _) => Some(0.0),
            (Some(we), Some(de)) => Some(((we - de) as f64).exp2()),
            _ => None,
        }
    }

    pub fn midpoint(&self, bits: u32) -> BigFloat {
        self.lo
            .add_exact(&self.hi)
            .scale2(-1)
            .round(bits, Dir::Down)
    }

    /// `self < other` on all pairs of points?
    pub fn certainly_lt(&self, other: &Interval) -> Cert {
        if self.hi.cmp_val(&other.lo) == Ordering::Less {
            Cert::True
        } else if self.lo.cmp_val(&other.hi) != Ordering::Less {
            Cert::False
        } else {
            Cert::Unknown
        }
    }

    pub fn certainly_le(&self, other: &Interval) -> Cert {
        if self.hi.cmp_val(&other.lo) != Ordering::Greater {
            Cert::True
        } else if self.lo.cmp_val(&other.hi) == Ordering::Greater {
            Cert::False
        } else {
            Cert::Unknown
        }
    }

    pub fn certainly_ge(&self, other: &Interval) -> Cert {
        other.certainly_le(self)
    }

    pub fn certainly_gt(&self, other: &Interval) -> Cert {
        other.certainly_lt(self)
    }

    /// Does `self` enclose `other` entirely?
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo.cmp_val(&other.lo) != Ordering::Greater
            && self.hi.cmp_val(&other.hi) != Ordering::Less
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo.cmp_val(&other.hi) != Ordering::Greater
            && other.lo.cmp_val(&self.hi) != Ordering::Greater
    }

    /// Decimal pair rendering, outward: `[lo down, hi up]`.
    pub fn to_decimal_pair(&self, digits: u32) -> (String, String) {
        (
            self.lo.to_decimal(digits, Dir::Down),
            self.hi.to_decimal(digits, Dir::Up),
        )
    }

    /// Natural exponential, monotone on endpoints.
    pub fn exp(&self, bits: u32) -> Self {
        let lo = exp_point(&self.lo, bits);
        let hi = exp_point(&self.hi, bits);
        Interval {
            lo: lo.lo,
            hi: hi.hi,
        }
    }

    /// Natural logarithm; requires a strictly positive interval.
    pub fn ln(&self, bits: u32) -> Result<Self, IntervalError> {
        if !self.lo.is_positive() {
            return Err(IntervalError::LogNonPositive);
        }
        let lo = ln_point(&self.lo, bits);
        let hi = ln_point(&self.hi, bits);
        Ok(Interval {
            lo: lo.lo,
            hi: hi.hi,
        })
    }

    /// Arcsine on [-1, 1]; endpoints outside the domain from rounding debris
    /// are clamped.
    pub fn asin(&self, bits: u32) -> Self {
        let one = BigFloat::one();
        let clamp = |v: &BigFloat| -> BigFloat {
            if v.cmp_val(&one) == Ordering::Greater {
                one.clone()
            } else if v.cmp_val(&one.neg()) == Ordering::Less {
                one.neg()
            } else {
                v.clone()
            }
        };
        let lo = asin_point(&clamp(&self.lo), bits);
        let hi = asin_point(&clamp(&self.hi), bits);
        Interval {
            lo: lo.lo,
            hi: hi.hi,
        }
    }
}

// ---------------------------------------------------------------------------
// elementary function enclosures
// ---------------------------------------------------------------------------

thread_local! {
    static CONST_CACHE: RefCell<HashMap<(u8, u32), Interval>> = RefCell::new(HashMap::new());
}

const LN2_KEY: u8 = 0;
const PI_KEY: u8 = 1;

fn cached(key: u8, bits: u32, compute: impl FnOnce() -> Interval) -> Interval {
    CONST_CACHE.with(|c| {
        if let Some(v) = c.borrow().get(&(key, bits)) {
            return v.clone();
        }
        let v = compute();
        c.borrow_mut().insert((key, bits), v.clone());
        v
    })
}

/// Enclosure of ln 2.
pub fn ln2(bits: u32) -> Interval {
    cached(LN2_KEY, bits, || {
        // ln 2 = 2 atanh(1/3)
        let wp = bits + 32;
        let third = Interval::from_ratio(&BigRational::new(BigInt::one(), BigInt::from(3)), wp);
        atanh_series(&third, wp).scale2(1).outward(bits)
    })
}

/// Enclosure of pi via Machin's formula.
pub fn pi(bits: u32) -> Interval {
    cached(PI_KEY, bits, || {
        let wp = bits + 32;
        let a = atan_recip(5, wp);
        let b = atan_recip(239, wp);
        a.scale2(4).sub(&b.scale2(2), wp).outward(bits)
    })
}

impl Interval {
    fn outward(&self, bits: u32) -> Interval {
        Interval {
            lo: self.lo.round(bits, Dir::Down),
            hi: self.hi.round(bits, Dir::Up),
        }
    }
}

/// atanh(z) for |z| <= 1/3, as a series with geometric tail bound.
fn atanh_series(z: &Interval, wp: u32) -> Interval {
    let zz = z.mul(z, wp);
    let mut sum = z.clone();
    let mut pow = z.clone();
    let mut k: u32 = 3;
    let thresh = BigFloat::pow2(-(wp as i64) - 8);
    loop {
        pow = pow.mul(&zz, wp);
        let term = pow
            .div(&Interval::from_i64(k as i64), wp)
            .expect("k nonzero");
        sum = sum.add(&term, wp);
        let t_mag = term.abs().hi;
        if t_mag.cmp_val(&thresh) == Ordering::Less {
            // tail <= |next term| * sum of (z^2)^j <= t_mag * zz_hi/(1-zz_hi),
            // and zz_hi <= 1/9 here, so tail <= t_mag / 8 < t_mag.
            let slack = Interval {
                lo: t_mag.neg(),
                hi: t_mag,
            };
            return sum.add(&slack, wp);
        }
        k += 2;
    }
}

/// atan(1/q) for integer q >= 2: alternating series with decreasing terms.
fn atan_recip(q: i64, wp: u32) -> Interval {
    let z = Interval::one().div(&Interval::from_i64(q), wp).unwrap();
    let zz = z.mul(&z, wp);
    let mut sum = z.clone();
    let mut pow = z.clone();
    let mut k: u32 = 3;
    let mut sign_neg = true;
    let thresh = BigFloat::pow2(-(wp as i64) - 8);
    loop {
        pow = pow.mul(&zz, wp);
        let term = pow
            .div(&Interval::from_i64(k as i64), wp)
            .expect("k nonzero");
        sum = if sign_neg {
            sum.sub(&term, wp)
        } else {
            sum.add(&term, wp)
        };
        let t_mag = term.abs().hi;
        if t_mag.cmp_val(&thresh) == Ordering::Less {
            // alternating with decreasing terms: error bounded by next term
            let slack = Interval {
                lo: t_mag.neg(),
                hi: t_mag,
            };
            return sum.add(&slack, wp);
        }
        sign_neg = !sign_neg;
        k += 2;
    }
}

/// Enclosure of exp(x) for an exact BigFloat x.
fn exp_point(x: &BigFloat, bits: u32) -> Interval {
    let wp = bits + 48;
    if x.is_zero() {
        return Interval::one();
    }
    // Halve until |r| <= 1/2, then square back.
    let msb = x.msb_exp().unwrap();
    let s = (msb + 1).max(0) as u32;
    let r = x.scale2(-(s as i64));
    let ri = Interval::point(r.clone());

    let mut sum = Interval::one();
    let mut term = Interval::one();
    let mut k: u32 = 1;
    let thresh = BigFloat::pow2(-(wp as i64) - 8);
    loop {
        term = term
            .mul(&ri, wp)
            .div(&Interval::from_i64(k as i64), wp)
            .expect("k nonzero");
        sum = sum.add(&term, wp);
        let t_mag = term.abs().hi;
        if t_mag.cmp_val(&thresh) == Ordering::Less {
            // |r| <= 1/2 so the tail is below twice the next term magnitude.
            let tail = t_mag.scale2(1);
            let slack = Interval {
                lo: tail.neg(),
                hi: tail,
            };
            sum = sum.add(&slack, wp);
            break;
        }
        k += 1;
    }
    for _ in 0..s {
        sum = sum.mul(&sum, wp);
    }
    sum.outward(bits)
}

/// Enclosure of ln(x) for an exact positive BigFloat x.
fn ln_point(x: &BigFloat, bits: u32) -> Interval {
    assert!(x.is_positive(), "ln of nonpositive value");
    let wp = bits + 48;
    // x = mhat * 2^e2 with mhat in [1/2, 1)
    let b = x.mant_bits() as i64;
    let e2 = x.e + b;
    let mhat = BigFloat {
        m: x.m.clone(),
        e: -b,
    };
    // z = (mhat-1)/(mhat+1) in (-1/3, 0]
    let one = Interval::one();
    let mh = Interval::point(mhat);
    let z = mh
        .sub(&one, wp)
        .div(&mh.add(&one, wp), wp)
        .expect("mhat+1 > 0");
    let l = atanh_series(&z, wp).scale2(1);
    let e2i = Interval::from_i64(e2);
    l.add(&e2i.mul(&ln2(wp), wp), wp).outward(bits)
}

/// Enclosure of asin(x) for an exact BigFloat x in [-1, 1].
fn asin_point(x: &BigFloat, bits: u32) -> Interval {
    if x.is_negative() {
        return asin_point(&x.neg(), bits).neg();
    }
    let wp = bits + 48;
    if x.is_zero() {
        return Interval::zero();
    }
    let xi = Interval::point(x.clone());
    let xx = xi.mul(&xi, wp);
    let half = Interval::point(BigFloat::pow2(-1));
    if xx.certainly_le(&half) == Cert::True {
        asin_series(&xi, wp).outward(bits)
    } else {
        // asin(x) = pi/2 - asin(sqrt(1-x^2)); the complement lands in the
        // fast-converging region.
        let one = Interval::one();
        let comp = one.sub(&xx, wp).sqrt(wp);
        let half_pi = pi(wp).scale2(-1);
        // comp^2 = 1-x^2 < 1/2 here
        let inner = asin_series(&comp, wp);
        half_pi.sub(&inner, wp).outward(bits)
    }
}

/// asin series valid for x^2 <= 1/2 (x >= 0).
fn asin_series(x: &Interval, wp: u32) -> Interval {
    let xx = x.mul(x, wp);
    let mut term = x.clone(); // a_k x^{2k+1}, starting k=0
    let mut sum = x.clone();
    let mut k: u64 = 0;
    let thresh = BigFloat::pow2(-(wp as i64) - 8);
    loop {
        // t_{k+1} = t_k * x^2 * (2k+1)^2 / (2(k+1)(2k+3))
        let num = Interval::from_i64(((2 * k + 1) * (2 * k + 1)) as i64);
        let den = Interval::from_i64((2 * (k + 1) * (2 * k + 3)) as i64);
        term = term
            .mul(&xx, wp)
            .mul(&num, wp)
            .div(&den, wp)
            .expect("den > 0");
        sum = sum.add(&term, wp);
        k += 1;
        let t_mag = term.abs().hi;
        if t_mag.cmp_val(&thresh) == Ordering::Less {
            // ratio of consecutive terms <= x^2 <= 1/2: tail <= t_mag.
            let tail = t_mag.scale2(1);
            let slack = Interval {
                lo: tail.neg(),
                hi: tail,
            };
            return sum.add(&slack, wp);
        }
    }
}

/// Enclosure of ln(4) = 2 ln 2.
pub fn ln4(bits: u32) -> Interval {
    ln2(bits).scale2(1)
}

/// Enclosure of `sqrt(num / den)` for exact nonnegative integers without
/// constructing a reduced rational (no gcd on large operands).
pub fn sqrt_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Interval {
    assert!(!num.is_negative() && den.is_positive(), "sqrt_ratio domain");
    if num.is_zero() {
        return Interval::zero();
    }
    let a = BigFloat::from_bigint(num);
    let b = BigFloat::from_bigint(den);
    let q_lo = a.div_round(&b, bits + 8, Dir::Down);
    let q_hi = a.div_round(&b, bits + 8, Dir::Up);
    Interval {
        lo: q_lo.sqrt_round(bits, Dir::Down),
        hi: q_hi.sqrt_round(bits, Dir::Up),
    }
}

thread_local! {
    static LN_FACT_CACHE: RefCell<HashMap<(u32, u32), Interval>> = RefCell::new(HashMap::new());
}

/// Enclosure of ln(n!) by summing ln k (cached per precision).
pub fn ln_factorial(n: u32, bits: u32) -> Interval {
    LN_FACT_CACHE.with(|c| {
        if let Some(v) = c.borrow().get(&(n, bits)) {
            return v.clone();
        }
        let wp = bits + 16;
        let mut acc = Interval::zero();
        for k in 2..=n {
            let lk = Interval::from_i64(k as i64).ln(wp).expect("k >= 2");
            acc = acc.add(&lk, wp);
        }
        let out = acc.outward(bits);
        c.borrow_mut().insert((n, bits), out.clone());
        out
    })
}
