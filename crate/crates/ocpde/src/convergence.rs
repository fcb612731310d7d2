//! Order convergence and order-Cauchy surrogates for function sequences.
//!
//! A sequence converges in order when nested monotone bounds squeeze it
//! onto the limit. On a finite prefix the infinite conditions reduce to
//! finitely many sample comparisons plus a gap measurement at the end of
//! the prefix: `order_converges` checks nestedness, containment and the
//! final bound gap against a tolerance, while `is_order_cauchy` builds
//! running tail envelopes from the sequence itself and measures their
//! spread across the last two anchors (the final anchor alone has a
//! one-element tail, whose spread says nothing).

use crate::extreal::ExtReal;
use crate::grid::SampleSet;
use crate::nlsc::{NlscError, NlscFunction};

/// Finite indexed list of K-component function tuples sharing one domain.
#[derive(Debug, Clone)]
pub struct FunctionSequence {
    comps: usize,
    items: Vec<Vec<NlscFunction>>,
}

impl FunctionSequence {
    pub fn new(items: Vec<Vec<NlscFunction>>) -> Result<FunctionSequence, NlscError> {
        if items.is_empty() || items[0].is_empty() {
            return Err(NlscError::PieceCount {
                expected: 1,
                got: 0,
            });
        }
        let comps = items[0].len();
        let domain = items[0][0].grid().clone();
        for tuple in &items {
            if tuple.len() != comps {
                return Err(NlscError::PieceCount {
                    expected: comps,
                    got: tuple.len(),
                });
            }
            for f in tuple {
                if !f.grid().same_domain(&domain) {
                    return Err(NlscError::DomainMismatch);
                }
            }
        }
        Ok(FunctionSequence { comps, items })
    }

    pub fn singletons(items: Vec<NlscFunction>) -> Result<FunctionSequence, NlscError> {
        FunctionSequence::new(items.into_iter().map(|f| vec![f]).collect())
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Vec<NlscFunction>] {
        &self.items
    }

    pub fn item(&self, n: usize) -> &[NlscFunction] {
        &self.items[n]
    }

    /// Alternate the items of two sequences: a_1, b_1, a_2, b_2, ...
    /// Used to compare runs that should share a limit.
    pub fn interleave(a: &FunctionSequence, b: &FunctionSequence) -> Result<FunctionSequence, NlscError> {
        if a.comps != b.comps {
            return Err(NlscError::PieceCount {
                expected: a.comps,
                got: b.comps,
            });
        }
        let mut items = Vec::with_capacity(a.len() + b.len());
        let mut ai = a.items.iter();
        let mut bi = b.items.iter();
        loop {
            match (ai.next(), bi.next()) {
                (None, None) => break,
                (x, y) => {
                    if let Some(x) = x {
                        items.push(x.clone());
                    }
                    if let Some(y) = y {
                        items.push(y.clone());
                    }
                }
            }
        }
        FunctionSequence::new(items)
    }
}

/// One pair of bounding tuples: `lo[j] <= . <= hi[j]` componentwise.
#[derive(Debug, Clone)]
pub struct OrderInterval {
    pub lo: Vec<NlscFunction>,
    pub hi: Vec<NlscFunction>,
}

/// Largest sampled value of `a - b`, with an exact fast path when the two
/// functions are the same closed form up to a constant shift.
pub fn sup_difference(
    a: &NlscFunction,
    b: &NlscFunction,
    samples: &SampleSet,
) -> Result<f64, NlscError> {
    if let Some(off) = a.uniform_offset_from(b) {
        return Ok(off);
    }
    let mut best = f64::NEG_INFINITY;
    for x in samples.points() {
        let d = a.eval(x)?.sub(b.eval(x)?)?;
        best = best.max(d.as_f64());
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub holds: bool,
    /// Bounds are monotone: lower nondecreasing, upper nonincreasing.
    pub nested: bool,
    /// Every item sits inside its bound pair.
    pub contained: bool,
    /// Worst distance from the limit to the bounds, per index.
    pub gaps: Vec<f64>,
    pub final_gap: f64,
    pub tol: f64,
}

/// Check the order-convergence conditions of `seq` toward `limit` under the
/// bound pairs, on a finite prefix: bounds nested, items contained, and the
/// final bound pair within `tol` of the limit on the sample cloud.
pub fn order_converges(
    seq: &FunctionSequence,
    bounds: &[OrderInterval],
    limit: &[NlscFunction],
    samples: &SampleSet,
    tol: f64,
) -> Result<ConvergenceReport, NlscError> {
    if bounds.len() != seq.len() || limit.len() != seq.comps() {
        return Err(NlscError::PieceCount {
            expected: seq.len(),
            got: bounds.len(),
        });
    }
    for b in bounds {
        if b.lo.len() != seq.comps() || b.hi.len() != seq.comps() {
            return Err(NlscError::PieceCount {
                expected: seq.comps(),
                got: b.lo.len(),
            });
        }
    }
    let mut nested = true;
    for n in 0..bounds.len().saturating_sub(1) {
        for j in 0..seq.comps() {
            if !bounds[n].lo[j].leq(&bounds[n + 1].lo[j], samples)?
                || !bounds[n + 1].hi[j].leq(&bounds[n].hi[j], samples)?
            {
                nested = false;
            }
        }
    }
    let mut contained = true;
    for (n, b) in bounds.iter().enumerate() {
        for j in 0..seq.comps() {
            if !b.lo[j].leq(&seq.item(n)[j], samples)?
                || !seq.item(n)[j].leq(&b.hi[j], samples)?
            {
                contained = false;
            }
        }
    }
    let mut gaps = Vec::with_capacity(bounds.len());
    for b in bounds {
        let mut gap = f64::NEG_INFINITY;
        for j in 0..seq.comps() {
            gap = gap.max(sup_difference(&limit[j], &b.lo[j], samples)?);
            gap = gap.max(sup_difference(&b.hi[j], &limit[j], samples)?);
        }
        gaps.push(gap);
    }
    let final_gap = *gaps.last().expect("bounds nonempty");
    let holds = nested && contained && final_gap <= tol;
    Ok(ConvergenceReport {
        holds,
        nested,
        contained,
        gaps,
        final_gap,
        tol,
    })
}

#[derive(Debug, Clone)]
pub struct CauchyReport {
    pub holds: bool,
    pub nested: bool,
    /// Envelope spread at the second-to-last tail anchor.
    pub final_gap: f64,
    pub tol: f64,
}

/// Order-Cauchy surrogate from the sequence alone: running tail envelopes
/// (sample-wise max and min over every tail) must be nested and their
/// spread at the last anchor with a two-or-more-element tail must be within
/// `tol`. A difference of equal infinities in the spread is a hard error.
pub fn is_order_cauchy(
    seq: &FunctionSequence,
    samples: &SampleSet,
    tol: f64,
) -> Result<CauchyReport, NlscError> {
    let n_items = seq.len();
    if n_items < 2 {
        return Err(NlscError::PieceCount {
            expected: 2,
            got: n_items,
        });
    }
    let anchor = n_items - 2;
    let mut nested = true;
    let mut final_gap: f64 = 0.0;
    for j in 0..seq.comps() {
        for x in samples.points() {
            let vals: Vec<ExtReal> = seq
                .items()
                .iter()
                .map(|tuple| tuple[j].eval(x))
                .collect::<Result<_, _>>()?;
            // Suffix envelopes: mu[n] and lam[n] cover the tail from n.
            let mut mu = vals.clone();
            let mut lam = vals.clone();
            for n in (0..n_items.saturating_sub(1)).rev() {
                mu[n] = mu[n].max(mu[n + 1]);
                lam[n] = lam[n].min(lam[n + 1]);
            }
            for n in 0..n_items.saturating_sub(1) {
                if !(mu[n + 1] <= mu[n] && lam[n] <= lam[n + 1]) {
                    nested = false;
                }
            }
            let gap = mu[anchor].sub(lam[anchor])?.as_f64();
            final_gap = final_gap.max(gap);
        }
    }
    let holds = nested && final_gap <= tol;
    Ok(CauchyReport {
        holds,
        nested,
        final_gap,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::grid::Grid;
    use crate::nlsc::{InfSign, Piece, SingularSet, Smoothness};
    use crate::poly::Poly;
    use std::sync::Arc;

    fn grid4() -> Grid {
        Grid::new(vec![0.0], vec![1.0], vec![4]).unwrap()
    }

    fn const_fn(grid: &Grid, v: f64) -> NlscFunction {
        let polys = (0..grid.cell_count())
            .map(|c| Poly::constant(grid.cell_center(c), v))
            .collect();
        NlscFunction::from_cell_polys(grid.clone(), polys).unwrap()
    }

    #[test]
    fn squeeze_of_constants_converges_with_exact_gap() {
        let grid = grid4();
        let samples = SampleSet::from_grid(&grid, 3);
        let zero = Arc::new(Expr::Num(0.0));
        let n_max = 10;
        let mut items = Vec::new();
        let mut bounds = Vec::new();
        for n in 1..=n_max {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            items.push(const_fn(&grid, sign / (2.0 * nf + 2.0)));
            bounds.push(OrderInterval {
                lo: vec![NlscFunction::from_expression(
                    grid.clone(),
                    Arc::clone(&zero),
                    -1.0 / nf,
                )],
                hi: vec![NlscFunction::from_expression(
                    grid.clone(),
                    Arc::clone(&zero),
                    1.0 / nf,
                )],
            });
        }
        let seq = FunctionSequence::singletons(items).unwrap();
        let limit = vec![NlscFunction::from_expression(grid.clone(), zero, 0.0)];
        let report = order_converges(&seq, &bounds, &limit, &samples, 0.2).unwrap();
        assert!(report.holds);
        assert!(report.nested);
        assert!(report.contained);
        // Shared closed form: the gap is the shift difference, exactly 1/10.
        assert_eq!(report.final_gap, 1.0 / 10.0);
        let tight = order_converges(&seq, &bounds, &limit, &samples, 0.01).unwrap();
        assert!(!tight.holds);
    }

    #[test]
    fn non_nested_bounds_are_rejected() {
        let grid = grid4();
        let samples = SampleSet::from_grid(&grid, 3);
        let zero = Arc::new(Expr::Num(0.0));
        let mk = |s: f64| NlscFunction::from_expression(grid.clone(), Arc::clone(&zero), s);
        let items = vec![const_fn(&grid, 0.0), const_fn(&grid, 0.0)];
        let seq = FunctionSequence::singletons(items).unwrap();
        let bounds = vec![
            OrderInterval {
                lo: vec![mk(-0.1)],
                hi: vec![mk(0.1)],
            },
            OrderInterval {
                lo: vec![mk(-0.5)],
                hi: vec![mk(0.5)],
            },
        ];
        let limit = vec![mk(0.0)];
        let report = order_converges(&seq, &bounds, &limit, &samples, 1.0).unwrap();
        assert!(!report.nested);
        assert!(!report.holds);
    }

    #[test]
    fn cauchy_gap_uses_last_two_items() {
        let grid = grid4();
        let samples = SampleSet::from_grid(&grid, 3);
        let items: Vec<NlscFunction> = (1..=10).map(|n| const_fn(&grid, 1.0 / n as f64)).collect();
        let seq = FunctionSequence::singletons(items).unwrap();
        let report = is_order_cauchy(&seq, &samples, 0.02).unwrap();
        assert!(report.holds);
        assert!(report.nested);
        assert_eq!(report.final_gap, 1.0 / 9.0 - 1.0 / 10.0);
        let tight = is_order_cauchy(&seq, &samples, 0.005).unwrap();
        assert!(!tight.holds);
    }

    #[test]
    fn scattered_sequence_is_not_cauchy() {
        let grid = grid4();
        let samples = SampleSet::from_grid(&grid, 3);
        let items: Vec<NlscFunction> = (0..8)
            .map(|n| const_fn(&grid, if n % 2 == 0 { 5.0 } else { -5.0 }))
            .collect();
        let seq = FunctionSequence::singletons(items).unwrap();
        let report = is_order_cauchy(&seq, &samples, 1.0).unwrap();
        assert!(!report.holds);
        assert_eq!(report.final_gap, 10.0);
    }

    #[test]
    fn infinite_tail_spread_is_indeterminate() {
        let grid = Grid::new(vec![0.0], vec![1.0], vec![1]).unwrap();
        let samples = SampleSet::from_grid(&grid, 3);
        let inf = NlscFunction::new(
            grid.clone(),
            vec![Piece::Inf(InfSign::Plus)],
            SingularSet::empty(),
            Smoothness::Infinite,
        )
        .unwrap();
        let seq = FunctionSequence::singletons(vec![inf.clone(), inf.clone(), inf]).unwrap();
        assert!(is_order_cauchy(&seq, &samples, 1.0).is_err());
    }

    #[test]
    fn interleave_alternates_runs() {
        let grid = grid4();
        let a = FunctionSequence::singletons(vec![const_fn(&grid, 1.0), const_fn(&grid, 2.0)])
            .unwrap();
        let b = FunctionSequence::singletons(vec![const_fn(&grid, -1.0), const_fn(&grid, -2.0)])
            .unwrap();
        let merged = FunctionSequence::interleave(&a, &b).unwrap();
        assert_eq!(merged.len(), 4);
        let vals: Vec<f64> = merged
            .items()
            .iter()
            .map(|t| t[0].eval(&[0.3]).unwrap().as_f64())
            .collect();
        assert_eq!(vals, vec![1.0, -1.0, 2.0, -2.0]);
    }

    #[test]
    fn tuple_sequences_check_each_component() {
        let grid = grid4();
        let samples = SampleSet::from_grid(&grid, 3);
        let items: Vec<Vec<NlscFunction>> = (1..=6)
            .map(|n| {
                vec![
                    const_fn(&grid, 1.0 / n as f64),
                    const_fn(&grid, if n % 2 == 0 { 3.0 } else { -3.0 }),
                ]
            })
            .collect();
        let seq = FunctionSequence::new(items).unwrap();
        let report = is_order_cauchy(&seq, &samples, 0.5).unwrap();
        // The second component scatters, so the tuple sequence fails.
        assert!(!report.holds);
    }
}
