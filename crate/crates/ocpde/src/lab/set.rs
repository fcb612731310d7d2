//! Tagged sets: the exact set model the filter counterexamples live in.
//!
//! A set is a finite union of tagged intervals, isolated points and sequence
//! tails, in one variable or in the plane. The density tag on an interval
//! says whether it means the full real range or only the rationals inside
//! it; that is how the rational line and its completion coexist in one
//! model without ever representing an irrational "hole" approximately.
//!
//! Sequence tails are closed-form families (`1/n`, decimal approximants of
//! sqrt 2, `(-1)^n`, constants, and coordinate pairs of those sharing one
//! index). They are what makes sets like "the terms of a sequence from index
//! k on" representable exactly, which the convergence counterexamples need.
//!
//! Membership, closure membership and subset are all decided symbolically.
//! Subset is sound everywhere; it is complete on canonical forms where each
//! piece of the left side fits inside a single piece of the right side, plus
//! a bounded front-of-tail split (a tail may enter an interval late, with
//! its first few terms covered individually). Shapes the filter layer
//! produces always decompose that way.

use std::cmp::Ordering;

use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive};

use crate::lab::sym::{SymError, SymReal};

/// How many leading terms of a tail may be checked one by one when the rest
/// of the tail fits an interval. Generous for anything the filter layer
/// builds; a bound keeps adversarial inputs from looping forever.
const RESIDUAL_CAP: u64 = 4096;

/// Search bound for indices of the sqrt-2 approximant family. Terms agree
/// with sqrt 2 to `i` digits, so anything separable at all separates fast.
const APPROX_SEARCH_CAP: u64 = 400;

fn cmp(a: &SymReal, b: &SymReal) -> Ordering {
    a.try_cmp(b)
        .expect("set endpoints should be separable symbolic reals")
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SetError {
    #[error("unsupported set operation: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Density tag: the real points of a range, or only the rational ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    Full,
    RationalOnly,
}

impl Density {
    /// Whether a piece tagged `self` fits inside a piece tagged `outer`.
    /// Rationals fit in both; a full interval never fits in a rational one.
    pub fn fits_in(self, outer: Density) -> bool {
        !(self == Density::Full && outer == Density::RationalOnly)
    }
}

/// An endpoint pair with open/closed flags. No density; that lives on the
/// interval or rectangle using the range.
#[derive(Debug, Clone)]
pub struct Range {
    pub lo: SymReal,
    pub hi: SymReal,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Range {
    pub fn open(lo: SymReal, hi: SymReal) -> Self {
        Range {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed(lo: SymReal, hi: SymReal) -> Self {
        Range {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn is_empty_real(&self) -> bool {
        match cmp(&self.lo, &self.hi) {
            Ordering::Less => false,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => true,
        }
    }

    /// Degenerate `[a,a]`.
    pub fn single_point(&self) -> Option<&SymReal> {
        if self.lo_closed && self.hi_closed && cmp(&self.lo, &self.hi) == Ordering::Equal {
            Some(&self.lo)
        } else {
            None
        }
    }

    pub fn contains_real(&self, x: &SymReal) -> bool {
        let lo_ok = match cmp(x, &self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        if !lo_ok {
            return false;
        }
        match cmp(x, &self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        }
    }

    /// Closure membership: endpoints count regardless of flags.
    pub fn closure_contains(&self, x: &SymReal) -> bool {
        !self.is_empty_real()
            && cmp(x, &self.lo) != Ordering::Less
            && cmp(x, &self.hi) != Ordering::Greater
    }

    /// Real containment: every real point of `inner` lies in `self`.
    pub fn covers_real(&self, inner: &Range) -> bool {
        if inner.is_empty_real() {
            return true;
        }
        let lo_ok = match cmp(&self.lo, &inner.lo) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed || !inner.lo_closed,
            Ordering::Greater => false,
        };
        let hi_ok = match cmp(&self.hi, &inner.hi) {
            Ordering::Greater => true,
            Ordering::Equal => self.hi_closed || !inner.hi_closed,
            Ordering::Less => false,
        };
        lo_ok && hi_ok
    }

    /// Rational-trace containment: every rational in `inner` lies in `self`.
    /// The only difference from real containment is that a closed endpoint
    /// at an irrational value contributes nothing to the trace.
    pub fn covers_rational(&self, inner: &Range) -> bool {
        let mut inner = inner.clone();
        if inner.lo_closed && !inner.lo.is_rational() {
            inner.lo_closed = false;
        }
        if inner.hi_closed && !inner.hi.is_rational() {
            inner.hi_closed = false;
        }
        self.covers_real(&inner)
    }

    /// Intersection of the two ranges (possibly empty).
    pub fn intersect(&self, other: &Range) -> Range {
        let (lo, lo_closed) = match cmp(&self.lo, &other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match cmp(&self.hi, &other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Range {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }
}

/// A tagged interval in one variable.
#[derive(Debug, Clone)]
pub struct Interval {
    pub range: Range,
    pub density: Density,
}

impl Interval {
    pub fn full(range: Range) -> Self {
        Interval {
            range,
            density: Density::Full,
        }
    }

    pub fn rational(range: Range) -> Self {
        Interval {
            range,
            density: Density::RationalOnly,
        }
    }

    /// Whether the tagged point set is empty. A rational-only range needs a
    /// rational inside it; density gives one whenever the range has interior,
    /// so only degenerate ranges differ from the real case.
    pub fn is_empty(&self) -> bool {
        if self.range.is_empty_real() {
            return true;
        }
        if self.density == Density::RationalOnly {
            if let Some(p) = self.range.single_point() {
                return !p.is_rational();
            }
        }
        false
    }

    pub fn contains(&self, x: &SymReal) -> bool {
        if self.density == Density::RationalOnly && !x.is_rational() {
            return false;
        }
        self.range.contains_real(x)
    }
}

/// Closed-form sequence families, indexed from 1.
#[derive(Debug, Clone)]
pub enum SeqFamily {
    /// `1/i`.
    Recip,
    /// `floor(sqrt2 * 10^i) / 10^i`: rational approximants increasing to
    /// sqrt 2.
    SqrtTwoApprox,
    /// `(-1)^i`.
    AlternatingSign,
    /// The constant `c`.
    Const(SymReal),
}

impl PartialEq for SeqFamily {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SeqFamily::Recip, SeqFamily::Recip) => true,
            (SeqFamily::SqrtTwoApprox, SeqFamily::SqrtTwoApprox) => true,
            (SeqFamily::AlternatingSign, SeqFamily::AlternatingSign) => true,
            (SeqFamily::Const(a), SeqFamily::Const(b)) => {
                matches!(a.try_cmp(b), Ok(Ordering::Equal))
            }
            _ => false,
        }
    }
}

/// Constraint on indices that can produce a given value.
enum IndexMatch {
    None,
    Exact(u64),
    AnyEven,
    AnyOdd,
    Any,
}

impl SeqFamily {
    pub fn term(&self, i: u64) -> SymReal {
        assert!(i >= 1, "sequence families are indexed from 1");
        match self {
            SeqFamily::Recip => SymReal::rational(1, i as i64),
            SeqFamily::SqrtTwoApprox => {
                let (lo, _) = crate::lab::sym::const_enclosure(crate::lab::sym::ConstTag::Sqrt2, i as u32);
                SymReal::from_big(lo)
            }
            SeqFamily::AlternatingSign => {
                if i % 2 == 0 {
                    SymReal::integer(1)
                } else {
                    SymReal::integer(-1)
                }
            }
            SeqFamily::Const(c) => c.clone(),
        }
    }

    /// True when every term is a rational number.
    pub fn all_rational(&self) -> bool {
        match self {
            SeqFamily::Const(c) => c.is_rational(),
            _ => true,
        }
    }

    /// Limit along the even and odd index subsequences. Both always exist
    /// for these families.
    pub fn parity_limits(&self) -> (SymReal, SymReal) {
        match self {
            SeqFamily::Recip => (SymReal::zero(), SymReal::zero()),
            SeqFamily::SqrtTwoApprox => (SymReal::sqrt2(), SymReal::sqrt2()),
            SeqFamily::AlternatingSign => (SymReal::integer(1), SymReal::integer(-1)),
            SeqFamily::Const(c) => (c.clone(), c.clone()),
        }
    }

    /// Single limit when the even and odd limits agree.
    pub fn limit(&self) -> Option<SymReal> {
        let (e, o) = self.parity_limits();
        if cmp(&e, &o) == Ordering::Equal {
            Some(e)
        } else {
            None
        }
    }

    /// Finite value set when there is one (constants and signs).
    pub fn finite_values(&self) -> Option<Vec<SymReal>> {
        match self {
            SeqFamily::Const(c) => Some(vec![c.clone()]),
            SeqFamily::AlternatingSign => {
                Some(vec![SymReal::integer(-1), SymReal::integer(1)])
            }
            _ => None,
        }
    }

    /// Which indices map to `x`.
    fn index_for(&self, x: &SymReal) -> IndexMatch {
        match self {
            SeqFamily::Recip => {
                let Some(q) = x.as_rational() else {
                    return IndexMatch::None;
                };
                if !q.is_positive() || !q.numer().is_one() {
                    return IndexMatch::None;
                }
                match q.denom().to_u64() {
                    Some(i) if i >= 1 => IndexMatch::Exact(i),
                    _ => IndexMatch::None,
                }
            }
            SeqFamily::SqrtTwoApprox => {
                if !x.is_rational() {
                    return IndexMatch::None;
                }
                // All terms sit strictly below sqrt 2; without this guard
                // the search below would grind through every precision
                // level for values at or above the limit.
                if cmp(x, &SymReal::sqrt2()) != Ordering::Less {
                    return IndexMatch::None;
                }
                for i in 1..=APPROX_SEARCH_CAP {
                    let t = self.term(i);
                    match cmp(&t, x) {
                        Ordering::Equal => return IndexMatch::Exact(i),
                        Ordering::Greater => return IndexMatch::None,
                        Ordering::Less => {}
                    }
                }
                IndexMatch::None
            }
            SeqFamily::AlternatingSign => {
                if cmp(x, &SymReal::integer(1)) == Ordering::Equal {
                    IndexMatch::AnyEven
                } else if cmp(x, &SymReal::integer(-1)) == Ordering::Equal {
                    IndexMatch::AnyOdd
                } else {
                    IndexMatch::None
                }
            }
            SeqFamily::Const(c) => {
                if cmp(x, c) == Ordering::Equal {
                    IndexMatch::Any
                } else {
                    IndexMatch::None
                }
            }
        }
    }

    pub fn contains_from(&self, x: &SymReal, from: u64) -> bool {
        match self.index_for(x) {
            IndexMatch::None => false,
            IndexMatch::Exact(i) => i >= from,
            // Both parities occur beyond any index.
            IndexMatch::AnyEven | IndexMatch::AnyOdd | IndexMatch::Any => true,
        }
    }

    /// All terms with index at least `from` lie in the interval, density
    /// included.
    pub fn all_terms_in(&self, from: u64, iv: &Interval) -> bool {
        if iv.density == Density::RationalOnly && !self.all_rational() {
            return false;
        }
        let r = &iv.range;
        match self {
            SeqFamily::Recip => {
                // Terms fill (0, 1/from]; they approach 0 without reaching
                // it, so a lower endpoint at 0 is fine open or closed.
                let lo_ok = cmp(&r.lo, &SymReal::zero()) != Ordering::Greater;
                let first = SymReal::rational(1, from as i64);
                let hi_ok = match cmp(&r.hi, &first) {
                    Ordering::Greater => true,
                    Ordering::Equal => r.hi_closed,
                    Ordering::Less => false,
                };
                lo_ok && hi_ok
            }
            SeqFamily::SqrtTwoApprox => {
                // Terms climb from term(from) toward sqrt 2, strictly below
                // it, so an upper endpoint at sqrt 2 is fine open or closed.
                let first = self.term(from);
                let lo_ok = match cmp(&r.lo, &first) {
                    Ordering::Less => true,
                    Ordering::Equal => r.lo_closed,
                    Ordering::Greater => false,
                };
                let hi_ok = cmp(&r.hi, &SymReal::sqrt2()) != Ordering::Less;
                lo_ok && hi_ok
            }
            SeqFamily::AlternatingSign => {
                r.contains_real(&SymReal::integer(-1)) && r.contains_real(&SymReal::integer(1))
            }
            SeqFamily::Const(c) => r.contains_real(c),
        }
    }

    /// Least `f >= from` such that all terms from `f` on lie in the
    /// interval, if any such `f` exists.
    pub fn tail_start_in(&self, from: u64, iv: &Interval) -> Option<u64> {
        if iv.density == Density::RationalOnly && !self.all_rational() {
            return None;
        }
        match self {
            SeqFamily::Recip => {
                if cmp(&iv.range.lo, &SymReal::zero()) == Ordering::Greater {
                    return None;
                }
                if cmp(&iv.range.hi, &SymReal::zero()) != Ordering::Greater {
                    return None;
                }
                // Smallest f with 1/f inside the upper end. Guess from the
                // float image, then settle exactly; the guess is off by at
                // most a couple of ulps.
                let approx = 1.0 / iv.range.hi.approx();
                let mut f = if approx.is_finite() && approx > 0.0 {
                    (approx.floor() as u64).saturating_sub(2).max(1)
                } else {
                    1
                };
                f = f.max(from);
                loop {
                    if self.all_terms_in(f, iv) {
                        return Some(f);
                    }
                    f += 1;
                    if f > from + RESIDUAL_CAP {
                        return None;
                    }
                }
            }
            SeqFamily::SqrtTwoApprox => {
                let hi_ok = cmp(&iv.range.hi, &SymReal::sqrt2()) != Ordering::Less;
                if !hi_ok || cmp(&iv.range.lo, &SymReal::sqrt2()) != Ordering::Less {
                    return None;
                }
                let mut f = from;
                while f <= APPROX_SEARCH_CAP {
                    if self.all_terms_in(f, iv) {
                        return Some(f);
                    }
                    f += 1;
                }
                None
            }
            SeqFamily::AlternatingSign | SeqFamily::Const(_) => {
                if self.all_terms_in(from, iv) {
                    Some(from)
                } else {
                    None
                }
            }
        }
    }
}

/// A sequence tail in one variable: the set of terms with index `>= from`.
#[derive(Debug, Clone)]
pub struct SeqTail {
    pub family: SeqFamily,
    pub from: u64,
}

impl SeqTail {
    pub fn new(family: SeqFamily, from: u64) -> Self {
        SeqTail {
            family,
            from: from.max(1),
        }
    }
}

/// A sequence tail in the plane. Both coordinate families share the index,
/// so this is the term set of one vector sequence, not a product.
#[derive(Debug, Clone)]
pub struct SeqTail2 {
    pub fx: SeqFamily,
    pub fy: SeqFamily,
    pub from: u64,
}

impl SeqTail2 {
    pub fn new(fx: SeqFamily, fy: SeqFamily, from: u64) -> Self {
        SeqTail2 {
            fx,
            fy,
            from: from.max(1),
        }
    }

    fn contains(&self, x: &SymReal, y: &SymReal) -> bool {
        let mx = self.fx.index_for(x);
        let my = self.fy.index_for(y);
        let from = self.from;
        match (mx, my) {
            (IndexMatch::None, _) | (_, IndexMatch::None) => false,
            (IndexMatch::Exact(i), IndexMatch::Exact(j)) => i == j && i >= from,
            (IndexMatch::Exact(i), IndexMatch::Any) | (IndexMatch::Any, IndexMatch::Exact(i)) => {
                i >= from
            }
            (IndexMatch::Exact(i), IndexMatch::AnyEven)
            | (IndexMatch::AnyEven, IndexMatch::Exact(i)) => i >= from && i % 2 == 0,
            (IndexMatch::Exact(i), IndexMatch::AnyOdd)
            | (IndexMatch::AnyOdd, IndexMatch::Exact(i)) => i >= from && i % 2 == 1,
            (IndexMatch::AnyEven, IndexMatch::AnyOdd) | (IndexMatch::AnyOdd, IndexMatch::AnyEven) => {
                false
            }
            // Matching parities or at least one unconstrained side: some
            // index beyond any `from` works.
            _ => true,
        }
    }

    /// Limit points of the pair sequence: even and odd subsequence limits.
    fn limit_points(&self) -> Vec<(SymReal, SymReal)> {
        let (xe, xo) = self.fx.parity_limits();
        let (ye, yo) = self.fy.parity_limits();
        let mut out = vec![(xe, ye)];
        let odd = (xo, yo);
        if !(cmp(&out[0].0, &odd.0) == Ordering::Equal && cmp(&out[0].1, &odd.1) == Ordering::Equal)
        {
            out.push(odd);
        }
        out
    }
}

/// A tagged rectangle in the plane. `RationalOnly` means the rational pairs
/// inside the box.
#[derive(Debug, Clone)]
pub struct Rect {
    pub x: Range,
    pub y: Range,
    pub density: Density,
}

impl Rect {
    pub fn is_empty(&self) -> bool {
        if self.x.is_empty_real() || self.y.is_empty_real() {
            return true;
        }
        if self.density == Density::RationalOnly {
            // A degenerate axis at an irrational value kills every rational
            // pair in the box.
            if let Some(p) = self.x.single_point() {
                if !p.is_rational() {
                    return true;
                }
            }
            if let Some(p) = self.y.single_point() {
                if !p.is_rational() {
                    return true;
                }
            }
        }
        false
    }

    pub fn contains(&self, x: &SymReal, y: &SymReal) -> bool {
        if self.density == Density::RationalOnly && !(x.is_rational() && y.is_rational()) {
            return false;
        }
        self.x.contains_real(x) && self.y.contains_real(y)
    }

    fn axis_interval(&self, which: usize) -> Interval {
        Interval {
            range: if which == 0 { self.x.clone() } else { self.y.clone() },
            density: self.density,
        }
    }
}

/// A finite union of tagged pieces on the line.
#[derive(Debug, Clone, Default)]
pub struct TaggedSet1 {
    pub intervals: Vec<Interval>,
    pub points: Vec<SymReal>,
    pub tails: Vec<SeqTail>,
}

/// A finite union of tagged pieces in the plane.
#[derive(Debug, Clone, Default)]
pub struct TaggedSet2 {
    pub rects: Vec<Rect>,
    pub points: Vec<(SymReal, SymReal)>,
    pub tails: Vec<SeqTail2>,
}

impl TaggedSet1 {
    pub fn empty() -> Self {
        TaggedSet1::default()
    }

    pub fn point(x: SymReal) -> Self {
        TaggedSet1 {
            points: vec![x],
            ..Default::default()
        }
    }

    pub fn interval(iv: Interval) -> Self {
        TaggedSet1 {
            intervals: vec![iv],
            ..Default::default()
        }
        .canonical()
    }

    pub fn tail(t: SeqTail) -> Self {
        TaggedSet1 {
            tails: vec![t],
            ..Default::default()
        }
        .canonical()
    }

    /// Open ball of rational radius around a point, with a density tag.
    pub fn ball(center: &SymReal, radius: &BigRational, density: Density) -> Self {
        let r = SymReal::from_big(radius.clone());
        let range = Range::open(
            center.sub(&r).expect("radius is rational"),
            center.add(&r).expect("radius is rational"),
        );
        TaggedSet1::interval(Interval { range, density })
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().all(|iv| iv.is_empty())
            && self.points.is_empty()
            && self.tails.is_empty()
    }

    pub fn contains(&self, x: &SymReal) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
            || self.points.iter().any(|p| cmp(p, x) == Ordering::Equal)
            || self.tails.iter().any(|t| t.family.contains_from(x, t.from))
    }

    /// Membership in the topological closure. Interval density does not
    /// matter here: the rationals of an interval are dense in it.
    pub fn closure_contains(&self, x: &SymReal) -> bool {
        if self
            .intervals
            .iter()
            .any(|iv| !iv.is_empty() && iv.range.closure_contains(x))
        {
            return true;
        }
        if self.contains(x) {
            return true;
        }
        self.tails.iter().any(|t| {
            let (e, o) = t.family.parity_limits();
            cmp(&e, x) == Ordering::Equal || cmp(&o, x) == Ordering::Equal
        })
    }

    pub fn union(mut self, other: TaggedSet1) -> TaggedSet1 {
        self.intervals.extend(other.intervals);
        self.points.extend(other.points);
        self.tails.extend(other.tails);
        self.canonical()
    }

    /// Canonical form: empties dropped, finite-valued tails folded into
    /// points, intervals sorted and merged per density class, rational
    /// intervals absorbed into full ones, points deduplicated and absorbed,
    /// same-family tails collapsed to the smallest start.
    pub fn canonical(mut self) -> TaggedSet1 {
        // Degenerate intervals become points.
        let mut intervals: Vec<Interval> = Vec::new();
        for iv in self.intervals.drain(..) {
            if iv.is_empty() {
                continue;
            }
            if let Some(p) = iv.range.single_point() {
                self.points.push(p.clone());
            } else {
                intervals.push(iv);
            }
        }
        // Tails with finite value sets become points.
        let mut tails: Vec<SeqTail> = Vec::new();
        for t in self.tails.drain(..) {
            match t.family.finite_values() {
                Some(vals) => self.points.extend(vals),
                None => tails.push(t),
            }
        }
        // Sort and merge intervals within each density class; a rational
        // interval between two full ones must not block their merge.
        let merge_class = |mut class: Vec<Interval>| -> Vec<Interval> {
            class.sort_by(|a, b| {
                cmp(&a.range.lo, &b.range.lo).then_with(|| cmp(&a.range.hi, &b.range.hi))
            });
            let mut out: Vec<Interval> = Vec::new();
            for iv in class {
                if let Some(last) = out.last_mut() {
                    let touches = match cmp(&iv.range.lo, &last.range.hi) {
                        Ordering::Less => true,
                        Ordering::Equal => iv.range.lo_closed || last.range.hi_closed,
                        Ordering::Greater => false,
                    };
                    if touches {
                        match cmp(&iv.range.hi, &last.range.hi) {
                            Ordering::Greater => {
                                last.range.hi = iv.range.hi;
                                last.range.hi_closed = iv.range.hi_closed;
                            }
                            Ordering::Equal => {
                                last.range.hi_closed |= iv.range.hi_closed;
                            }
                            Ordering::Less => {}
                        }
                        continue;
                    }
                }
                out.push(iv);
            }
            out
        };
        let (full_class, rat_class): (Vec<_>, Vec<_>) = intervals
            .into_iter()
            .partition(|iv| iv.density == Density::Full);
        let fulls = merge_class(full_class);
        let mut rats = merge_class(rat_class);
        // Drop rational intervals whose trace sits inside a full interval.
        rats.retain(|iv| !fulls.iter().any(|f| f.range.covers_rational(&iv.range)));
        let mut merged = fulls;
        merged.extend(rats);
        // Deduplicate points and drop the ones an interval or tail covers.
        let mut points: Vec<SymReal> = Vec::new();
        for p in self.points.drain(..) {
            if merged.iter().any(|iv| iv.contains(&p)) {
                continue;
            }
            if tails.iter().any(|t| t.family.contains_from(&p, t.from)) {
                continue;
            }
            if points.iter().any(|q| cmp(q, &p) == Ordering::Equal) {
                continue;
            }
            points.push(p);
        }
        // Same family twice: the earlier start wins (it is the superset).
        let mut kept: Vec<SeqTail> = Vec::new();
        for t in tails {
            if let Some(existing) = kept.iter_mut().find(|k| k.family == t.family) {
                existing.from = existing.from.min(t.from);
            } else {
                kept.push(t);
            }
        }
        TaggedSet1 {
            intervals: merged,
            points,
            tails: kept,
        }
    }

    /// Exact subset test on canonical forms.
    pub fn subset_of(&self, other: &TaggedSet1) -> bool {
        for iv in &self.intervals {
            if iv.is_empty() {
                continue;
            }
            let covered = other.intervals.iter().any(|o| match iv.density {
                Density::Full => {
                    o.density == Density::Full && o.range.covers_real(&iv.range)
                }
                Density::RationalOnly => o.range.covers_rational(&iv.range),
            });
            if !covered {
                return false;
            }
        }
        for p in &self.points {
            if !other.contains(p) {
                return false;
            }
        }
        for t in &self.tails {
            if !tail_subset1(t, other) {
                return false;
            }
        }
        true
    }

    /// The single member, when the set is one point.
    pub fn single_point(&self) -> Option<&SymReal> {
        let c = self.clone().canonical();
        if c.intervals.is_empty() && c.tails.is_empty() && c.points.len() == 1 {
            // Canonical form already deduplicated, so this borrow must come
            // from self; find the equal point.
            let target = &c.points[0];
            return self
                .points
                .iter()
                .find(|p| cmp(p, target) == Ordering::Equal);
        }
        None
    }

    /// Keeps only the rational members. This is the trace on the rational
    /// line; pieces with no rational members disappear.
    pub fn rational_trace(&self) -> TaggedSet1 {
        let intervals = self
            .intervals
            .iter()
            .map(|iv| Interval {
                range: iv.range.clone(),
                density: Density::RationalOnly,
            })
            .collect();
        let points = self
            .points
            .iter()
            .filter(|p| p.is_rational())
            .cloned()
            .collect();
        let tails = self
            .tails
            .iter()
            .filter(|t| t.family.all_rational())
            .cloned()
            .collect();
        TaggedSet1 {
            intervals,
            points,
            tails,
        }
        .canonical()
    }

    /// Pairwise intersection.
    pub fn intersect(&self, other: &TaggedSet1) -> Result<TaggedSet1, SetError> {
        let mut out = TaggedSet1::empty();
        for a in &self.intervals {
            for b in &other.intervals {
                let range = a.range.intersect(&b.range);
                let density = if a.density == Density::Full && b.density == Density::Full {
                    Density::Full
                } else {
                    Density::RationalOnly
                };
                out.intervals.push(Interval { range, density });
            }
        }
        for p in &self.points {
            if other.contains(p) {
                out.points.push(p.clone());
            }
        }
        for p in &other.points {
            if self.contains(p) {
                out.points.push(p.clone());
            }
        }
        for t in &self.tails {
            intersect_tail_into(t, other, &mut out)?;
        }
        for t in &other.tails {
            // Tail-tail pairs were already handled from the left side; only
            // intersect with the non-tail part here to avoid duplicates.
            let slim = TaggedSet1 {
                intervals: self.intervals.clone(),
                points: self.points.clone(),
                tails: Vec::new(),
            };
            intersect_tail_into(t, &slim, &mut out)?;
        }
        Ok(out.canonical())
    }
}

/// Tail subset: same family with an earlier start, a tail that fits one
/// interval from some index on with the leading terms checked one by one,
/// or a finite value set checked pointwise.
fn tail_subset1(t: &SeqTail, other: &TaggedSet1) -> bool {
    if other
        .tails
        .iter()
        .any(|o| o.family == t.family && o.from <= t.from)
    {
        return true;
    }
    if let Some(vals) = t.family.finite_values() {
        return vals.iter().all(|v| other.contains(v));
    }
    for iv in &other.intervals {
        if let Some(f) = t.family.tail_start_in(t.from, iv) {
            if f - t.from <= RESIDUAL_CAP
                && (t.from..f).all(|i| other.contains(&t.family.term(i)))
            {
                return true;
            }
        }
    }
    false
}

/// Intersects one tail with the interval/point part of a set, pushing the
/// surviving pieces into `out`.
fn intersect_tail_into(
    t: &SeqTail,
    other: &TaggedSet1,
    out: &mut TaggedSet1,
) -> Result<(), SetError> {
    for o in &other.tails {
        if o.family == t.family {
            out.tails.push(SeqTail::new(t.family.clone(), t.from.max(o.from)));
        } else {
            // The two infinite families here have disjoint value ranges:
            // 1/i stays in (0,1] while the sqrt-2 approximants stay in
            // [1.4, sqrt2). Finite families were folded into points.
            match (&t.family, &o.family) {
                (SeqFamily::Recip, SeqFamily::SqrtTwoApprox)
                | (SeqFamily::SqrtTwoApprox, SeqFamily::Recip) => {}
                _ => {
                    return Err(SetError::Unsupported(format!(
                        "intersection of {:?} and {:?} tails",
                        t.family, o.family
                    )))
                }
            }
        }
    }
    for p in &other.points {
        if t.family.contains_from(p, t.from) {
            out.points.push(p.clone());
        }
    }
    for iv in &other.intervals {
        match t.family.tail_start_in(t.from, iv) {
            Some(f) => {
                out.tails.push(SeqTail::new(t.family.clone(), f));
                for i in t.from..f.min(t.from + RESIDUAL_CAP) {
                    let v = t.family.term(i);
                    if iv.contains(&v) {
                        out.points.push(v);
                    }
                }
            }
            None => {
                // Finite overlap at most: enumerate the window where terms
                // can sit inside the interval.
                let window = finite_overlap_window(&t.family, t.from, iv)?;
                for i in window {
                    let v = t.family.term(i);
                    if iv.contains(&v) {
                        out.points.push(v);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Index window that can possibly land in the interval when the whole tail
/// does not. Everything outside the window is provably outside the range.
fn finite_overlap_window(
    family: &SeqFamily,
    from: u64,
    iv: &Interval,
) -> Result<std::ops::Range<u64>, SetError> {
    match family {
        SeqFamily::Recip => {
            // 1/i in (lo, hi) forces i > 1/hi and, when lo > 0, i < 1/lo.
            if cmp(&iv.range.lo, &SymReal::zero()) != Ordering::Greater {
                // lo <= 0 with no tail start means hi <= 0: nothing fits.
                return Ok(from..from);
            }
            let bound = 1.0 / iv.range.lo.approx();
            if !bound.is_finite() || bound > (RESIDUAL_CAP * 16) as f64 {
                return Err(SetError::Unsupported(
                    "tail window too wide to enumerate".into(),
                ));
            }
            Ok(from..(bound.ceil() as u64 + 2).max(from))
        }
        SeqFamily::SqrtTwoApprox => Ok(from..(from + APPROX_SEARCH_CAP)),
        SeqFamily::AlternatingSign | SeqFamily::Const(_) => Ok(from..from + 2),
    }
}

impl TaggedSet2 {
    pub fn empty() -> Self {
        TaggedSet2::default()
    }

    pub fn point(x: SymReal, y: SymReal) -> Self {
        TaggedSet2 {
            points: vec![(x, y)],
            ..Default::default()
        }
    }

    pub fn rect(r: Rect) -> Self {
        TaggedSet2 {
            rects: vec![r],
            ..Default::default()
        }
        .canonical()
    }

    pub fn tail(t: SeqTail2) -> Self {
        TaggedSet2 {
            tails: vec![t],
            ..Default::default()
        }
        .canonical()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.iter().all(|r| r.is_empty()) && self.points.is_empty() && self.tails.is_empty()
    }

    pub fn contains(&self, x: &SymReal, y: &SymReal) -> bool {
        self.rects.iter().any(|r| r.contains(x, y))
            || self
                .points
                .iter()
                .any(|(px, py)| cmp(px, x) == Ordering::Equal && cmp(py, y) == Ordering::Equal)
            || self.tails.iter().any(|t| t.contains(x, y))
    }

    pub fn closure_contains(&self, x: &SymReal, y: &SymReal) -> bool {
        if self.rects.iter().any(|r| {
            !r.is_empty() && r.x.closure_contains(x) && r.y.closure_contains(y)
        }) {
            return true;
        }
        if self.contains(x, y) {
            return true;
        }
        self.tails.iter().any(|t| {
            t.limit_points().iter().any(|(lx, ly)| {
                cmp(lx, x) == Ordering::Equal && cmp(ly, y) == Ordering::Equal
            })
        })
    }

    pub fn union(mut self, other: TaggedSet2) -> TaggedSet2 {
        self.rects.extend(other.rects);
        self.points.extend(other.points);
        self.tails.extend(other.tails);
        self.canonical()
    }

    pub fn canonical(mut self) -> TaggedSet2 {
        let mut rects: Vec<Rect> = Vec::new();
        for r in self.rects.drain(..) {
            if r.is_empty() {
                continue;
            }
            if let (Some(px), Some(py)) = (r.x.single_point(), r.y.single_point()) {
                self.points.push((px.clone(), py.clone()));
            } else {
                rects.push(r);
            }
        }
        // Pair tails whose coordinate families are both finite-valued fold
        // into at most two points (one per index parity).
        let mut tails: Vec<SeqTail2> = Vec::new();
        for t in self.tails.drain(..) {
            let finite =
                t.fx.finite_values().is_some() && t.fy.finite_values().is_some();
            if finite {
                let even = (t.fx.term(t.from + t.from % 2), t.fy.term(t.from + t.from % 2));
                let odd_i = t.from + (t.from + 1) % 2;
                let odd = (t.fx.term(odd_i), t.fy.term(odd_i));
                self.points.push(even);
                self.points.push(odd);
            } else {
                tails.push(t);
            }
        }
        let mut points: Vec<(SymReal, SymReal)> = Vec::new();
        for (x, y) in self.points.drain(..) {
            if rects.iter().any(|r| r.contains(&x, &y)) {
                continue;
            }
            if tails.iter().any(|t| t.contains(&x, &y)) {
                continue;
            }
            if points
                .iter()
                .any(|(px, py)| cmp(px, &x) == Ordering::Equal && cmp(py, &y) == Ordering::Equal)
            {
                continue;
            }
            points.push((x, y));
        }
        let mut kept: Vec<SeqTail2> = Vec::new();
        for t in tails {
            if let Some(existing) = kept
                .iter_mut()
                .find(|k| k.fx == t.fx && k.fy == t.fy)
            {
                existing.from = existing.from.min(t.from);
            } else {
                kept.push(t);
            }
        }
        TaggedSet2 {
            rects,
            points,
            tails: kept,
        }
    }

    pub fn subset_of(&self, other: &TaggedSet2) -> bool {
        for r in &self.rects {
            if r.is_empty() {
                continue;
            }
            let covered = other.rects.iter().any(|o| {
                if !r.density.fits_in(o.density) {
                    return false;
                }
                match r.density {
                    Density::Full => o.x.covers_real(&r.x) && o.y.covers_real(&r.y),
                    Density::RationalOnly => {
                        o.x.covers_rational(&r.x) && o.y.covers_rational(&r.y)
                    }
                }
            });
            if !covered {
                return false;
            }
        }
        for (x, y) in &self.points {
            if !other.contains(x, y) {
                return false;
            }
        }
        for t in &self.tails {
            if !tail_subset2(t, other) {
                return false;
            }
        }
        true
    }

    pub fn single_point(&self) -> Option<(SymReal, SymReal)> {
        let c = self.clone().canonical();
        if c.rects.is_empty() && c.tails.is_empty() && c.points.len() == 1 {
            return Some(c.points[0].clone());
        }
        None
    }

    /// Trace on the rational plane.
    pub fn rational_trace(&self) -> TaggedSet2 {
        let rects = self
            .rects
            .iter()
            .map(|r| Rect {
                x: r.x.clone(),
                y: r.y.clone(),
                density: Density::RationalOnly,
            })
            .collect();
        let points = self
            .points
            .iter()
            .filter(|(x, y)| x.is_rational() && y.is_rational())
            .cloned()
            .collect();
        let tails = self
            .tails
            .iter()
            .filter(|t| t.fx.all_rational() && t.fy.all_rational())
            .cloned()
            .collect();
        TaggedSet2 {
            rects,
            points,
            tails,
        }
        .canonical()
    }

    /// Coordinate projection, `axis` 0 or 1.
    pub fn project(&self, axis: usize) -> TaggedSet1 {
        let intervals = self
            .rects
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| r.axis_interval(axis))
            .collect();
        let points = self
            .points
            .iter()
            .map(|(x, y)| if axis == 0 { x.clone() } else { y.clone() })
            .collect();
        let tails = self
            .tails
            .iter()
            .map(|t| SeqTail::new(if axis == 0 { t.fx.clone() } else { t.fy.clone() }, t.from))
            .collect();
        TaggedSet1 {
            intervals,
            points,
            tails,
        }
        .canonical()
    }
}

/// Pair-tail subset: same families with an earlier start, or the whole tail
/// inside one rectangle (checked per axis on the shared index), with a
/// bounded number of leading terms checked individually.
fn tail_subset2(t: &SeqTail2, other: &TaggedSet2) -> bool {
    if other
        .tails
        .iter()
        .any(|o| o.fx == t.fx && o.fy == t.fy && o.from <= t.from)
    {
        return true;
    }
    for r in &other.rects {
        let ix = r.axis_interval(0);
        let iy = r.axis_interval(1);
        let fx = t.fx.tail_start_in(t.from, &ix);
        let fy = t.fy.tail_start_in(t.from, &iy);
        if let (Some(fx), Some(fy)) = (fx, fy) {
            let f = fx.max(fy);
            if f - t.from <= RESIDUAL_CAP {
                let lead_ok = (t.from..f).all(|i| {
                    other.contains(&t.fx.term(i), &t.fy.term(i))
                });
                if lead_ok {
                    return true;
                }
            }
        }
    }
    // A tail with finitely many values can be checked pointwise.
    if let (Some(vx), Some(vy)) = (t.fx.finite_values(), t.fy.finite_values()) {
        let _ = (&vx, &vy);
        let parities = [t.from + t.from % 2, t.from + (t.from + 1) % 2];
        return parities
            .iter()
            .all(|&i| other.contains(&t.fx.term(i), &t.fy.term(i)));
    }
    false
}

/// A set in either ambient dimension.
#[derive(Debug, Clone)]
pub enum TaggedSet {
    One(TaggedSet1),
    Two(TaggedSet2),
}

impl TaggedSet {
    pub fn dim(&self) -> usize {
        match self {
            TaggedSet::One(_) => 1,
            TaggedSet::Two(_) => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            TaggedSet::One(s) => s.is_empty(),
            TaggedSet::Two(s) => s.is_empty(),
        }
    }

    pub fn union(self, other: TaggedSet) -> Result<TaggedSet, SetError> {
        match (self, other) {
            (TaggedSet::One(a), TaggedSet::One(b)) => Ok(TaggedSet::One(a.union(b))),
            (TaggedSet::Two(a), TaggedSet::Two(b)) => Ok(TaggedSet::Two(a.union(b))),
            _ => Err(SetError::Unsupported(
                "union of sets in different dimensions".into(),
            )),
        }
    }

    pub fn subset_of(&self, other: &TaggedSet) -> Result<bool, SetError> {
        match (self, other) {
            (TaggedSet::One(a), TaggedSet::One(b)) => Ok(a.subset_of(b)),
            (TaggedSet::Two(a), TaggedSet::Two(b)) => Ok(a.subset_of(b)),
            _ => Err(SetError::Unsupported(
                "subset between sets in different dimensions".into(),
            )),
        }
    }

    pub fn rational_trace(&self) -> TaggedSet {
        match self {
            TaggedSet::One(s) => TaggedSet::One(s.rational_trace()),
            TaggedSet::Two(s) => TaggedSet::Two(s.rational_trace()),
        }
    }

    pub fn contains_point(&self, coords: &[SymReal]) -> Result<bool, SetError> {
        match (self, coords) {
            (TaggedSet::One(s), [x]) => Ok(s.contains(x)),
            (TaggedSet::Two(s), [x, y]) => Ok(s.contains(x, y)),
            _ => Err(SetError::Unsupported(format!(
                "membership of a {}-coordinate point in a {}-dimensional set",
                coords.len(),
                self.dim()
            ))),
        }
    }

    pub fn closure_contains_point(&self, coords: &[SymReal]) -> Result<bool, SetError> {
        match (self, coords) {
            (TaggedSet::One(s), [x]) => Ok(s.closure_contains(x)),
            (TaggedSet::Two(s), [x, y]) => Ok(s.closure_contains(x, y)),
            _ => Err(SetError::Unsupported(format!(
                "closure membership of a {}-coordinate point in a {}-dimensional set",
                coords.len(),
                self.dim()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::sym::parse_sym;

    fn sym(s: &str) -> SymReal {
        parse_sym(s).unwrap()
    }

    fn open_full(lo: &str, hi: &str) -> Interval {
        Interval::full(Range::open(sym(lo), sym(hi)))
    }

    fn open_rat(lo: &str, hi: &str) -> Interval {
        Interval::rational(Range::open(sym(lo), sym(hi)))
    }

    #[test]
    fn interval_membership_respects_density() {
        let full = TaggedSet1::interval(open_full("0", "1"));
        let rat = TaggedSet1::interval(open_rat("0", "1"));
        let half = sym("1/2");
        let irr = sym("sqrt2/2");
        assert!(full.contains(&half) && full.contains(&irr));
        assert!(rat.contains(&half));
        assert!(!rat.contains(&irr));
        assert!(!full.contains(&sym("0")));
        assert!(!full.contains(&sym("2")));
    }

    #[test]
    fn closure_ignores_density_and_openness() {
        let rat = TaggedSet1::interval(open_rat("0", "1"));
        assert!(rat.closure_contains(&sym("sqrt2/2")));
        assert!(rat.closure_contains(&sym("0")));
        assert!(rat.closure_contains(&sym("1")));
        assert!(!rat.closure_contains(&sym("2")));
    }

    #[test]
    fn recip_tail_membership_and_closure() {
        let t = TaggedSet1::tail(SeqTail::new(SeqFamily::Recip, 3));
        assert!(t.contains(&sym("1/3")));
        assert!(t.contains(&sym("1/100")));
        assert!(!t.contains(&sym("1/2")));
        assert!(!t.contains(&sym("2/3")));
        assert!(!t.contains(&sym("0")));
        assert!(t.closure_contains(&sym("0")));
        assert!(!t.closure_contains(&sym("1/2")));
    }

    #[test]
    fn sqrt2_approximants_behave() {
        let fam = SeqFamily::SqrtTwoApprox;
        assert_eq!(fam.term(1).to_string(), "7/5");
        assert_eq!(fam.term(2).to_string(), "141/100");
        let t = TaggedSet1::tail(SeqTail::new(fam.clone(), 1));
        assert!(t.contains(&sym("141/100")));
        assert!(!t.contains(&sym("142/100")));
        assert!(t.closure_contains(&sym("sqrt2")));
        // The whole tail sits inside (1, sqrt2), never reaching the limit.
        let iv = Interval::full(Range::open(sym("1"), sym("sqrt2")));
        assert!(fam.all_terms_in(1, &iv));
    }

    #[test]
    fn canonical_folds_and_merges() {
        // Alternating tail folds to two points; degenerate interval to one.
        let s = TaggedSet1 {
            intervals: vec![Interval::full(Range::closed(sym("5"), sym("5")))],
            points: vec![sym("1")],
            tails: vec![SeqTail::new(SeqFamily::AlternatingSign, 1)],
        }
        .canonical();
        assert!(s.intervals.is_empty());
        assert!(s.tails.is_empty());
        assert_eq!(s.points.len(), 3); // 5, 1, -1 (1 deduped against the tail fold)

        // Overlapping same-density intervals merge; the rational interval
        // inside a full one is absorbed.
        let m = TaggedSet1 {
            intervals: vec![open_full("0", "1"), open_full("1/2", "2"), open_rat("0", "1")],
            points: vec![],
            tails: vec![],
        }
        .canonical();
        assert_eq!(m.intervals.len(), 1);
        assert!(m.intervals[0].range.contains_real(&sym("3/2")));
    }

    #[test]
    fn rational_only_intervals_do_not_merge_across_gaps() {
        let s = TaggedSet1 {
            intervals: vec![open_rat("0", "1"), open_rat("1", "2")],
            points: vec![],
            tails: vec![],
        }
        .canonical();
        // 1 is in neither piece, so they must stay separate.
        assert_eq!(s.intervals.len(), 2);
        assert!(!s.contains(&sym("1")));
    }

    #[test]
    fn subset_basic_shapes() {
        let small = TaggedSet1::interval(open_full("0", "1"));
        let big = TaggedSet1::interval(open_full("-1", "2"));
        assert!(small.subset_of(&big));
        assert!(!big.subset_of(&small));

        // Rational trace fits in both rational and full covers.
        let rat = TaggedSet1::interval(open_rat("0", "1"));
        assert!(rat.subset_of(&big));
        assert!(rat.subset_of(&TaggedSet1::interval(open_rat("0", "1"))));
        // Full never fits in rational-only.
        assert!(!small.subset_of(&TaggedSet1::interval(open_rat("-1", "2"))));

        // Endpoint subtleties: [0,1) inside (0,1) fails at 0.
        let half_closed = TaggedSet1::interval(Interval::full(Range {
            lo: sym("0"),
            hi: sym("1"),
            lo_closed: true,
            hi_closed: false,
        }));
        assert!(!half_closed.subset_of(&small));
        assert!(half_closed.subset_of(&TaggedSet1::interval(Interval::full(Range {
            lo: sym("0"),
            hi: sym("1"),
            lo_closed: true,
            hi_closed: true,
        }))));
    }

    #[test]
    fn rational_interval_with_irrational_closed_end_is_open_in_trace() {
        // The rationals of [sqrt2/2, 1) are the same as of (sqrt2/2, 1).
        let inner = TaggedSet1::interval(Interval::rational(Range {
            lo: sym("sqrt2/2"),
            hi: sym("1"),
            lo_closed: true,
            hi_closed: false,
        }));
        let outer = TaggedSet1::interval(open_rat("sqrt2/2", "1"));
        assert!(inner.subset_of(&outer));
    }

    #[test]
    fn tail_subset_with_leading_term_split() {
        // Tail from 1 fits (0, 1/4) from index 5 on; 1..4 covered by points
        // and a second interval.
        let t = TaggedSet1::tail(SeqTail::new(SeqFamily::Recip, 1));
        let cover = TaggedSet1 {
            intervals: vec![open_full("0", "1/4"), open_full("1/5", "1/2")],
            points: vec![sym("1"), sym("1/2")],
            tails: vec![],
        }
        .canonical();
        assert!(t.subset_of(&cover));
        // Remove the point 1 and the cover breaks.
        let broken = TaggedSet1 {
            intervals: vec![open_full("0", "1/4"), open_full("1/5", "1/2")],
            points: vec![sym("1/2")],
            tails: vec![],
        }
        .canonical();
        assert!(!t.subset_of(&broken));
    }

    #[test]
    fn tail_subset_same_family_start_dominance() {
        let late = TaggedSet1::tail(SeqTail::new(SeqFamily::Recip, 10));
        let early = TaggedSet1::tail(SeqTail::new(SeqFamily::Recip, 2));
        assert!(late.subset_of(&early));
        assert!(!early.subset_of(&late));
    }

    #[test]
    fn intersection_downgrades_density() {
        let full = TaggedSet1::interval(open_full("0", "2"));
        let rat = TaggedSet1::interval(open_rat("1", "3"));
        let meet = full.intersect(&rat).unwrap();
        assert_eq!(meet.intervals.len(), 1);
        assert_eq!(meet.intervals[0].density, Density::RationalOnly);
        assert!(meet.contains(&sym("3/2")));
        assert!(!meet.contains(&sym("1/2")));
        assert!(!meet.contains(&sym("5/2")));
    }

    #[test]
    fn tail_intersect_interval_splits_head() {
        let t = TaggedSet1::tail(SeqTail::new(SeqFamily::Recip, 1));
        let iv = TaggedSet1::interval(open_full("1/10", "1/2"));
        // Terms 1/3 .. 1/9 are inside; 1, 1/2 and everything from 1/10 on
        // are not.
        let meet = t.intersect(&iv).unwrap();
        assert!(meet.tails.is_empty());
        assert!(meet.contains(&sym("1/3")));
        assert!(meet.contains(&sym("1/9")));
        assert!(!meet.contains(&sym("1/2")));
        assert!(!meet.contains(&sym("1/10")));
    }

    #[test]
    fn rational_trace_drops_irrational_pieces() {
        let s = TaggedSet1 {
            intervals: vec![open_full("0", "1")],
            points: vec![sym("pi"), sym("1/2")],
            tails: vec![SeqTail::new(SeqFamily::Const(sym("sqrt2")), 1)],
        };
        let tr = s.rational_trace();
        assert!(tr.contains(&sym("1/2")));
        assert!(!tr.contains(&sym("pi")));
        assert!(!tr.contains(&sym("sqrt2")));
        assert!(!tr.contains(&sym("sqrt2/2")));
        assert!(tr.contains(&sym("1/3")));
    }

    #[test]
    fn rect_membership_and_density() {
        let full = TaggedSet2::rect(Rect {
            x: Range::open(sym("0"), sym("1")),
            y: Range::open(sym("0"), sym("1")),
            density: Density::Full,
        });
        let rat = TaggedSet2::rect(Rect {
            x: Range::open(sym("0"), sym("1")),
            y: Range::open(sym("0"), sym("1")),
            density: Density::RationalOnly,
        });
        assert!(full.contains(&sym("1/2"), &sym("sqrt2/2")));
        assert!(!rat.contains(&sym("1/2"), &sym("sqrt2/2")));
        assert!(rat.contains(&sym("1/2"), &sym("1/3")));
    }

    #[test]
    fn pair_tail_shares_one_index() {
        // (1/i, (-1)^i): the sign is tied to the same i as the reciprocal.
        let t = TaggedSet2::tail(SeqTail2::new(SeqFamily::Recip, SeqFamily::AlternatingSign, 1));
        assert!(t.contains(&sym("1/2"), &sym("1")));
        assert!(!t.contains(&sym("1/2"), &sym("-1")));
        assert!(t.contains(&sym("1/3"), &sym("-1")));
        assert!(!t.contains(&sym("1/3"), &sym("1")));
    }

    #[test]
    fn pair_tail_limit_points() {
        let t = SeqTail2::new(SeqFamily::Recip, SeqFamily::AlternatingSign, 1);
        let lims = t.limit_points();
        assert_eq!(lims.len(), 2);
        let set = TaggedSet2::tail(t);
        assert!(set.closure_contains(&sym("0"), &sym("1")));
        assert!(set.closure_contains(&sym("0"), &sym("-1")));
        assert!(!set.closure_contains(&sym("0"), &sym("0")));
    }

    #[test]
    fn irrational_coordinate_tail_escapes_rational_squares() {
        // (1/i, pi) has an irrational second coordinate, so no rational-only
        // rectangle and no single point can absorb the tail.
        let t = TaggedSet2::tail(SeqTail2::new(
            SeqFamily::Recip,
            SeqFamily::Const(sym("pi")),
            1,
        ));
        let square_and_point = TaggedSet2 {
            rects: vec![Rect {
                x: Range::open(sym("-1"), sym("1")),
                y: Range::open(sym("pi").sub(&sym("1")).unwrap(), sym("pi").add(&sym("1")).unwrap()),
                density: Density::RationalOnly,
            }],
            points: vec![(sym("0"), sym("pi"))],
            tails: vec![],
        };
        assert!(!t.subset_of(&square_and_point));
        // From index 2 on the tail fits the full-density square (the first
        // term (1, pi) would poke out of the x range).
        let t2 = TaggedSet2::tail(SeqTail2::new(
            SeqFamily::Recip,
            SeqFamily::Const(sym("pi")),
            2,
        ));
        let full_square = TaggedSet2::rect(Rect {
            x: Range::open(sym("-1"), sym("1")),
            y: Range::open(sym("pi").sub(&sym("1")).unwrap(), sym("pi").add(&sym("1")).unwrap()),
            density: Density::Full,
        });
        assert!(t2.subset_of(&full_square));
        assert!(!t.subset_of(&full_square));
    }

    #[test]
    fn projections_split_pair_tails() {
        let t = TaggedSet2::tail(SeqTail2::new(
            SeqFamily::Recip,
            SeqFamily::Const(sym("pi")),
            3,
        ));
        let px = t.project(0);
        let py = t.project(1);
        assert!(px.contains(&sym("1/3")));
        assert!(!px.contains(&sym("1/2")));
        // The constant family folds to the single point pi.
        assert!(py.contains(&sym("pi")));
        assert!(!py.contains(&sym("0")));
    }

    #[test]
    fn single_point_detection() {
        let s = TaggedSet1 {
            intervals: vec![],
            points: vec![sym("sqrt2"), sym("sqrt2")],
            tails: vec![],
        };
        assert!(s.single_point().is_some());
        let two = TaggedSet1 {
            intervals: vec![],
            points: vec![sym("0"), sym("1")],
            tails: vec![],
        };
        assert!(two.single_point().is_none());
        let iv = TaggedSet1::interval(open_full("0", "1"));
        assert!(iv.single_point().is_none());
    }

    #[test]
    fn subset_verdicts_agree_with_membership_sampling() {
        // Soundness of the tag algebra: whenever subset_of says A is inside
        // B, every sampled member of A (rationals on a fine grid, tagged
        // constants, and sequence terms) must be a member of B.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240817);
        let endpoint_pool: Vec<SymReal> = [
            "-2", "-1", "-1/2", "0", "1/4", "1/2", "1", "3/2", "2", "sqrt2/2", "sqrt2",
            "pi/4", "e/2",
        ]
        .iter()
        .map(|s| sym(s))
        .collect();
        let mut candidates: Vec<SymReal> = (-48..=48)
            .map(|k| SymReal::rational(k, 16))
            .collect();
        candidates.extend(["sqrt2/2", "sqrt2", "pi/4", "e/2", "pi"].iter().map(|s| sym(s)));
        candidates.extend((1..=20).map(|i| SymReal::rational(1, i)));
        candidates.extend((1..=6).map(|i| SeqFamily::SqrtTwoApprox.term(i)));

        let random_set = |rng: &mut rand_chacha::ChaCha8Rng| -> TaggedSet1 {
            let mut s = TaggedSet1::empty();
            for _ in 0..rng.gen_range(0..3) {
                let a = endpoint_pool[rng.gen_range(0..endpoint_pool.len())].clone();
                let b = endpoint_pool[rng.gen_range(0..endpoint_pool.len())].clone();
                let (lo, hi) = if matches!(a.try_cmp(&b), Ok(Ordering::Greater)) {
                    (b, a)
                } else {
                    (a, b)
                };
                s.intervals.push(Interval {
                    range: Range {
                        lo,
                        hi,
                        lo_closed: rng.gen_bool(0.5),
                        hi_closed: rng.gen_bool(0.5),
                    },
                    density: if rng.gen_bool(0.5) {
                        Density::Full
                    } else {
                        Density::RationalOnly
                    },
                });
            }
            for _ in 0..rng.gen_range(0..3) {
                s.points
                    .push(endpoint_pool[rng.gen_range(0..endpoint_pool.len())].clone());
            }
            if rng.gen_bool(0.4) {
                let fam = match rng.gen_range(0..3) {
                    0 => SeqFamily::Recip,
                    1 => SeqFamily::SqrtTwoApprox,
                    _ => SeqFamily::AlternatingSign,
                };
                s.tails.push(SeqTail::new(fam, rng.gen_range(1..6)));
            }
            s.canonical()
        };

        let mut checked = 0usize;
        for _ in 0..220 {
            let a = random_set(&mut rng);
            let b = random_set(&mut rng);
            // Union guarantees plenty of true verdicts alongside the
            // independent pairs.
            let big = a.clone().union(b.clone());
            for (inner, outer) in [(&a, &b), (&a, &big), (&b, &big)] {
                if inner.subset_of(outer) {
                    for x in &candidates {
                        if inner.contains(x) {
                            checked += 1;
                            assert!(
                                outer.contains(x),
                                "subset said yes but {x} is in the inner set only"
                            );
                        }
                    }
                }
            }
        }
        assert!(checked > 10_000, "only {checked} membership samples");
    }

    #[test]
    fn empty_rational_pieces_vanish() {
        // [pi, pi] has no rational members.
        let s = TaggedSet1 {
            intervals: vec![Interval::rational(Range::closed(sym("pi"), sym("pi")))],
            points: vec![],
            tails: vec![],
        }
        .canonical();
        assert!(s.is_empty());
        let r = TaggedSet2 {
            rects: vec![Rect {
                x: Range::closed(sym("pi"), sym("pi")),
                y: Range::open(sym("0"), sym("1")),
                density: Density::RationalOnly,
            }],
            points: vec![],
            tails: vec![],
        }
        .canonical();
        assert!(r.is_empty());
    }
}
