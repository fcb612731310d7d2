//! Exact arithmetic for the handful of real constants the counterexamples
//! need.
//!
//! A [`SymReal`] is `q + r*c` with `q`, `r` rational and `c` one of the
//! tagged constants `sqrt2`, `pi`, `e` (or nothing, for plain rationals).
//! That affine form is closed under negation, rational shifts and rational
//! scaling, which is all the set algebra ever does to a number, and it keeps
//! comparisons decidable: the difference of two same-tag values is again
//! `dq + dr*c`, and since `c` is irrational that expression is zero exactly
//! when both coefficients are. A nonzero value is separated from zero by
//! refining a rational enclosure of `c` until the sign is forced.
//!
//! Enclosures are nested by construction (each level intersects the previous
//! one) and shrink to width `10^-k` at level `k`. They are memoized behind a
//! mutex so repeated comparisons do not redo the series sums.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use std::sync::OnceLock;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

/// Tagged irrational constants. `Unit` stands for the constant 1, so plain
/// rationals carry it with coefficient zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstTag {
    Unit,
    Sqrt2,
    Pi,
    E,
}

impl ConstTag {
    fn name(self) -> &'static str {
        match self {
            ConstTag::Unit => "1",
            ConstTag::Sqrt2 => "sqrt2",
            ConstTag::Pi => "pi",
            ConstTag::E => "e",
        }
    }

    fn approx(self) -> f64 {
        match self {
            ConstTag::Unit => 1.0,
            ConstTag::Sqrt2 => std::f64::consts::SQRT_2,
            ConstTag::Pi => std::f64::consts::PI,
            ConstTag::E => std::f64::consts::E,
        }
    }
}

/// Comparisons refine enclosures up to this level before giving up. Width
/// `10^-300` is far past anything the catalog can produce; hitting the cap
/// means someone compared expressions that agree to 300 digits, which for
/// this constant set means a relation we do not know how to decide.
const SEPARATION_CAP: u32 = 300;

fn pow10(k: u32) -> BigInt {
    BigInt::from(10u32).pow(k)
}

fn enclosure_cache() -> &'static Mutex<HashMap<(ConstTag, u32), (BigRational, BigRational)>> {
    static CACHE: OnceLock<Mutex<HashMap<(ConstTag, u32), (BigRational, BigRational)>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Raw bracket for the constant at level `k`, width at most `10^-k`. Not
/// guaranteed nested across levels on its own; `const_enclosure` intersects
/// successive levels to get that.
fn raw_enclosure(tag: ConstTag, k: u32) -> (BigRational, BigRational) {
    match tag {
        ConstTag::Unit => (BigRational::one(), BigRational::one()),
        ConstTag::Sqrt2 => {
            // floor(sqrt(2) * 10^k) via integer sqrt of 2 * 10^(2k).
            let scale = pow10(k);
            let lo_int = (BigInt::from(2) * &scale * &scale).sqrt();
            let lo = BigRational::new(lo_int.clone(), scale.clone());
            let hi = BigRational::new(lo_int + BigInt::one(), scale);
            (lo, hi)
        }
        ConstTag::E => {
            // Partial sums of 1/i!; the tail after N terms is below 1/(N!*N).
            let bound = BigRational::new(BigInt::one(), pow10(k));
            let mut sum = BigRational::one();
            let mut fact = BigInt::one();
            let mut i = BigInt::one();
            loop {
                fact *= &i;
                sum += BigRational::new(BigInt::one(), fact.clone());
                let tail = BigRational::new(BigInt::one(), &fact * &i);
                if tail <= bound {
                    return (sum.clone(), sum + tail);
                }
                i += BigInt::one();
            }
        }
        ConstTag::Pi => {
            // Machin: pi = 16*atan(1/5) - 4*atan(1/239). Alternating series
            // for atan bracket it between consecutive partial sums.
            let bound = BigRational::new(BigInt::one(), pow10(k));
            let mut m = 2usize;
            loop {
                let (lo5, hi5) = atan_inv_brackets(5, m);
                let (lo239, hi239) = atan_inv_brackets(239, m);
                let sixteen = BigRational::from(BigInt::from(16));
                let four = BigRational::from(BigInt::from(4));
                let lo = &sixteen * &lo5 - &four * &hi239;
                let hi = &sixteen * &hi5 - &four * &lo239;
                if &hi - &lo <= bound {
                    return (lo, hi);
                }
                m += 2;
            }
        }
    }
}

/// Lower and upper bounds for atan(1/x) from `m` terms of the alternating
/// series. Both partial sums with an odd and even number of terms are
/// computed; the smaller brackets from below.
fn atan_inv_brackets(x: u32, m: usize) -> (BigRational, BigRational) {
    let x = BigInt::from(x);
    let xx = &x * &x;
    let mut power = x.clone();
    let mut sum = BigRational::new(BigInt::one(), power.clone());
    let mut prev = sum.clone();
    for i in 1..=m {
        power *= &xx;
        let term = BigRational::new(BigInt::one(), BigInt::from(2 * i as u64 + 1) * &power);
        prev = sum.clone();
        if i % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    if sum <= prev {
        (sum, prev)
    } else {
        (prev, sum)
    }
}

/// Nested enclosure of the constant, width at most `10^-k`.
pub fn const_enclosure(tag: ConstTag, k: u32) -> (BigRational, BigRational) {
    if tag == ConstTag::Unit {
        return (BigRational::one(), BigRational::one());
    }
    if let Some(hit) = enclosure_cache().lock().unwrap().get(&(tag, k)) {
        return hit.clone();
    }
    // Intersect with the previous level so the family is nested even if the
    // raw brackets wobble.
    let (lo, hi) = raw_enclosure(tag, k);
    let (lo, hi) = if k == 0 {
        (lo, hi)
    } else {
        let (plo, phi) = const_enclosure(tag, k - 1);
        (lo.max(plo), hi.min(phi))
    };
    enclosure_cache()
        .lock()
        .unwrap()
        .insert((tag, k), (lo.clone(), hi.clone()));
    (lo, hi)
}

/// Error from the symbolic layer. Comparison failures surface here rather
/// than panicking so callers can report which inputs were indistinguishable.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SymError {
    #[error("cannot separate {left} from {right} within {digits} digits")]
    CannotSeparate {
        left: String,
        right: String,
        digits: u32,
    },
    #[error("{0} and {1} do not combine to an affine expression over one constant")]
    MixedTags(String, String),
    #[error("invalid number literal: {0}")]
    BadLiteral(String),
}

/// Exact real of the form `q + r*c`.
#[derive(Debug, Clone)]
pub struct SymReal {
    q: BigRational,
    r: BigRational,
    tag: ConstTag,
}

impl SymReal {
    fn normalize(mut self) -> Self {
        if self.tag == ConstTag::Unit {
            self.q += std::mem::replace(&mut self.r, BigRational::zero());
            self.tag = ConstTag::Unit;
        } else if self.r.is_zero() {
            self.tag = ConstTag::Unit;
        }
        self
    }

    pub fn from_big(q: BigRational) -> Self {
        SymReal {
            q,
            r: BigRational::zero(),
            tag: ConstTag::Unit,
        }
    }

    pub fn rational(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(n, 1)
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    /// `(q + r*c)` with explicit parts.
    pub fn affine(q: BigRational, r: BigRational, tag: ConstTag) -> Self {
        SymReal { q, r, tag }.normalize()
    }

    pub fn constant(tag: ConstTag) -> Self {
        Self::affine(BigRational::zero(), BigRational::one(), tag)
    }

    pub fn sqrt2() -> Self {
        Self::constant(ConstTag::Sqrt2)
    }

    pub fn pi() -> Self {
        Self::constant(ConstTag::Pi)
    }

    pub fn euler() -> Self {
        Self::constant(ConstTag::E)
    }

    pub fn is_rational(&self) -> bool {
        self.r.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.is_rational() {
            Some(&self.q)
        } else {
            None
        }
    }

    pub fn tag(&self) -> ConstTag {
        self.tag
    }

    pub fn neg(&self) -> Self {
        SymReal {
            q: -self.q.clone(),
            r: -self.r.clone(),
            tag: self.tag,
        }
        .normalize()
    }

    /// Sum, defined when the two values live over the same constant (or one
    /// of them is rational).
    pub fn add(&self, other: &Self) -> Result<Self, SymError> {
        let tag = match (self.tag, other.tag) {
            (a, b) if a == b => a,
            (ConstTag::Unit, b) => b,
            (a, ConstTag::Unit) => a,
            _ => return Err(SymError::MixedTags(self.to_string(), other.to_string())),
        };
        Ok(SymReal {
            q: &self.q + &other.q,
            r: &self.r + &other.r,
            tag,
        }
        .normalize())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SymError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, by: &BigRational) -> Self {
        SymReal {
            q: &self.q * by,
            r: &self.r * by,
            tag: self.tag,
        }
        .normalize()
    }

    pub fn scale_int(&self, num: i64, den: i64) -> Self {
        self.scale(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Rational bracket of width at most `|r| * 10^-k` around the value.
    pub fn enclosure(&self, k: u32) -> (BigRational, BigRational) {
        if self.is_rational() {
            return (self.q.clone(), self.q.clone());
        }
        let (clo, chi) = const_enclosure(self.tag, k);
        let a = &self.q + &self.r * &clo;
        let b = &self.q + &self.r * &chi;
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Exact three-way comparison. Same-tag differences are decided by sign
    /// analysis of `dq + dr*c`; cross-tag pairs by refining both enclosures
    /// until they separate. Equality across different tags is never reported;
    /// if the enclosures refuse to separate within the cap, the comparison
    /// fails loudly instead of guessing.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering, SymError> {
        if self.tag == other.tag || self.is_rational() || other.is_rational() {
            let d = self.sub(other).expect("compatible tags");
            if d.r.is_zero() {
                return Ok(d.q.cmp(&BigRational::zero()));
            }
            // d = dq + dr*c with dr nonzero and c irrational, so d is not
            // zero and refinement terminates.
            let mut k = 1;
            loop {
                let (lo, hi) = d.enclosure(k);
                if lo.is_positive() {
                    return Ok(Ordering::Greater);
                }
                if hi.is_negative() {
                    return Ok(Ordering::Less);
                }
                k += 4;
            }
        }
        // Different irrational tags: compare enclosures directly.
        let mut k = 1;
        while k <= SEPARATION_CAP {
            let (alo, ahi) = self.enclosure(k);
            let (blo, bhi) = other.enclosure(k);
            if ahi < blo {
                return Ok(Ordering::Less);
            }
            if bhi < alo {
                return Ok(Ordering::Greater);
            }
            k += 8;
        }
        Err(SymError::CannotSeparate {
            left: self.to_string(),
            right: other.to_string(),
            digits: SEPARATION_CAP,
        })
    }

    /// `f64` image for display and for seeding numeric probes. Comparisons
    /// never go through this.
    pub fn approx(&self) -> f64 {
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        let r = self.r.to_f64().unwrap_or(f64::NAN);
        q + r * self.tag.approx()
    }
}

impl PartialEq for SymReal {
    fn eq(&self, other: &Self) -> bool {
        matches!(self.try_cmp(other), Ok(Ordering::Equal))
    }
}

impl Eq for SymReal {}

impl PartialOrd for SymReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

/// Renders `r*c` in the same shapes `parse_sym` accepts: `sqrt2`, `-sqrt2`,
/// `sqrt2/2`, `3*sqrt2`, `3*sqrt2/4`.
fn scaled_const(r: &BigRational, tag: ConstTag) -> String {
    let c = tag.name();
    let (num, den) = (r.numer(), r.denom());
    let head = if num.is_one() {
        c.to_string()
    } else if (-num).is_one() {
        format!("-{c}")
    } else {
        format!("{num}*{c}")
    };
    if den.is_one() {
        head
    } else {
        format!("{head}/{den}")
    }
}

impl fmt::Display for SymReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.q);
        }
        if self.q.is_zero() {
            return write!(f, "{}", scaled_const(&self.r, self.tag));
        }
        if self.r.is_negative() {
            let flipped = -self.r.clone();
            return write!(f, "{} - {}", self.q, scaled_const(&flipped, self.tag));
        }
        write!(f, "{} + {}", self.q, scaled_const(&self.r, self.tag))
    }
}

/// Parses literals of the shapes `3`, `-3/4`, `sqrt2`, `pi`, `e`,
/// `sqrt2/2`, `-pi/4`, `2*pi`. This covers every number the catalog format
/// needs without growing into an expression language.
pub fn parse_sym(text: &str) -> Result<SymReal, SymError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(SymError::BadLiteral(text.to_string()));
    }
    let (neg, s) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    let tag_of = |name: &str| match name {
        "sqrt2" => Some(ConstTag::Sqrt2),
        "pi" => Some(ConstTag::Pi),
        "e" => Some(ConstTag::E),
        _ => None,
    };
    let parse_int = |digits: &str| -> Result<BigInt, SymError> {
        digits
            .parse::<BigInt>()
            .map_err(|_| SymError::BadLiteral(text.to_string()))
    };
    let value = if let Some((head, tail)) = s.split_once('/') {
        let den = parse_int(tail.trim())?;
        if den.is_zero() {
            return Err(SymError::BadLiteral(text.to_string()));
        }
        let head = head.trim();
        if let Some(tag) = tag_of(head) {
            SymReal::affine(BigRational::zero(), BigRational::new(BigInt::one(), den), tag)
        } else if let Some((num, name)) = head.split_once('*') {
            let tag = tag_of(name.trim()).ok_or_else(|| SymError::BadLiteral(text.to_string()))?;
            SymReal::affine(
                BigRational::zero(),
                BigRational::new(parse_int(num.trim())?, den),
                tag,
            )
        } else {
            SymReal::from_big(BigRational::new(parse_int(head)?, den))
        }
    } else if let Some(tag) = tag_of(s) {
        SymReal::constant(tag)
    } else if let Some((num, name)) = s.split_once('*') {
        let tag = tag_of(name.trim()).ok_or_else(|| SymError::BadLiteral(text.to_string()))?;
        SymReal::affine(
            BigRational::zero(),
            BigRational::from(parse_int(num.trim())?),
            tag,
        )
    } else {
        SymReal::from_big(BigRational::from(parse_int(s)?))
    };
    Ok(if neg { value.neg() } else { value })
}
