//! Cellwise-defined functions with controlled singular sets.
//!
//! A function here is a polynomial (or other exactly evaluable) piece per
//! grid cell, together with a singular set: a finite union of grid faces,
//! in-cell polynomial zero sets and isolated points. Values on the singular
//! set are never stored. They are defined by a regularization rule: the
//! lower rule takes the infimum of the limits from incident cells, the
//! upper rule the supremum. With the lower rule active the function is
//! normal lower semi-continuous by construction, so the lower/upper Baire
//! operators and their composition reduce to switching the active rule.
//!
//! Order and lattice structure are decided on the canonical sample cloud of
//! the grid (interior Chebyshev points plus face midpoints): `leq` compares
//! values pointwise there, and `lattice_sup`/`lattice_inf` select dominating
//! pieces per cell, recording an exact polynomial variety whenever two
//! polynomial pieces genuinely cross inside a cell.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{EvalError, ExprRef, JetSpec};
use crate::extreal::{ExtReal, ExtRealError};
use crate::grid::{Grid, GridError, SampleSet, DEFAULT_DENSITY};
use crate::poly::{Poly, PolyError};

#[derive(Debug, Error)]
pub enum NlscError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    ExtReal(#[from] ExtRealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("functions cover different domains")]
    DomainMismatch,
    #[error("piece count {got} does not match cell count {expected}")]
    PieceCount { expected: usize, got: usize },
    #[error("cell {cell} holds a non-polynomial piece where a polynomial is required")]
    NonPolynomialPiece { cell: usize },
    #[error("cell {cell} is flagged infinite where a finite value is required")]
    InfinitePiece { cell: usize },
    #[error("variety polynomial is identically zero on cell {cell}")]
    ZeroVariety { cell: usize },
    #[error("sample set does not cover the functions' domain")]
    SampleMismatch,
}

/// How values on the singular set are regularized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularRule {
    /// Infimum of limits from incident cells (lower Baire operator).
    Lower,
    /// Supremum of limits from incident cells (upper Baire operator).
    Upper,
}

/// Smoothness class claimed off the singular set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Finite(u32),
    Infinite,
}

impl Smoothness {
    pub fn min(self, other: Smoothness) -> Smoothness {
        match (self, other) {
            (Smoothness::Infinite, s) | (s, Smoothness::Infinite) => s,
            (Smoothness::Finite(a), Smoothness::Finite(b)) => Smoothness::Finite(a.min(b)),
        }
    }
}

/// Exact evaluator for an operator composed with the jet of a cellwise
/// polynomial tuple: keeps the operator expression and the pre-differentiated
/// jet polynomials of the cell, so evaluation composes them exactly instead
/// of refitting a polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct JetCell {
    pub operator: ExprRef,
    pub spec: JetSpec,
    /// One polynomial per jet slot, laid out by `spec`.
    pub jets: Vec<Poly>,
}

impl JetCell {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let vals: Vec<f64> = self.jets.iter().map(|p| p.eval(x)).collect();
        self.operator.eval(x, Some((&self.spec, &vals)))
    }
}

/// Sign of an infinite cell flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfSign {
    Plus,
    Minus,
}

/// The datum attached to one cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece {
    Poly(Poly),
    Inf(InfSign),
    /// `expr(x) + shift`; used for right-hand-side style functions.
    Expr { expr: ExprRef, shift: f64 },
    /// Operator-composed-with-jet evaluator.
    Jet(Arc<JetCell>),
    /// Pointwise maximum of two finite pieces (from `lattice_sup`).
    Max(Box<Piece>, Box<Piece>),
    /// Pointwise minimum of two finite pieces (from `lattice_inf`).
    Min(Box<Piece>, Box<Piece>),
}

impl Piece {
    pub fn eval_at(&self, x: &[f64]) -> Result<ExtReal, NlscError> {
        match self {
            Piece::Poly(p) => Ok(ExtReal::finite(p.eval(x))?),
            Piece::Inf(InfSign::Plus) => Ok(ExtReal::PosInf),
            Piece::Inf(InfSign::Minus) => Ok(ExtReal::NegInf),
            Piece::Expr { expr, shift } => Ok(ExtReal::finite(expr.eval(x, None)? + shift)?),
            Piece::Jet(cell) => Ok(ExtReal::finite(cell.eval(x)?)?),
            Piece::Max(a, b) => Ok(a.eval_at(x)?.max(b.eval_at(x)?)),
            Piece::Min(a, b) => Ok(a.eval_at(x)?.min(b.eval_at(x)?)),
        }
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        match self {
            Piece::Poly(p) => Some(p),
            _ => None,
        }
    }

    fn is_inf(&self) -> Option<InfSign> {
        match self {
            Piece::Inf(s) => Some(*s),
            _ => None,
        }
    }
}

/// Closed nowhere dense exceptional set: grid faces, polynomial zero sets
/// within single cells, and isolated points. Operations only ever add
/// entries of these three kinds, so nowhere-density is preserved
/// structurally; the set is never widened to open neighbourhoods.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SingularSet {
    faces: BTreeSet<usize>,
    varieties: Vec<(usize, Poly)>,
    points: Vec<Vec<f64>>,
}

impl SingularSet {
    pub fn empty() -> SingularSet {
        SingularSet::default()
    }

    /// Every interior face of the grid.
    pub fn skeleton(grid: &Grid) -> SingularSet {
        SingularSet {
            faces: (0..grid.face_count()).collect(),
            varieties: Vec::new(),
            points: Vec::new(),
        }
    }

    pub fn faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.faces.iter().copied()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn varieties(&self) -> &[(usize, Poly)] {
        &self.varieties
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty() && self.varieties.is_empty() && self.points.is_empty()
    }

    pub fn add_face(&mut self, face: usize) {
        self.faces.insert(face);
    }

    pub fn add_variety(&mut self, cell: usize, poly: Poly) -> Result<(), NlscError> {
        if poly.is_zero() {
            return Err(NlscError::ZeroVariety { cell });
        }
        if !self.varieties.iter().any(|(c, p)| *c == cell && p == &poly) {
            self.varieties.push((cell, poly));
        }
        Ok(())
    }

    pub fn add_point(&mut self, point: Vec<f64>) {
        if !self.points.contains(&point) {
            self.points.push(point);
        }
    }

    pub fn union(&self, other: &SingularSet) -> SingularSet {
        let mut out = self.clone();
        out.faces.extend(other.faces.iter().copied());
        for (c, p) in &other.varieties {
            if !out.varieties.iter().any(|(c2, p2)| c2 == c && p2 == p) {
                out.varieties.push((*c, p.clone()));
            }
        }
        for pt in &other.points {
            out.add_point(pt.clone());
        }
        out
    }

    /// True when `self` contains every entry of `other`.
    pub fn contains(&self, other: &SingularSet) -> bool {
        other.faces.is_subset(&self.faces)
            && other
                .varieties
                .iter()
                .all(|(c, p)| self.varieties.iter().any(|(c2, p2)| c2 == c && p2 == p))
            && other.points.iter().all(|pt| self.points.contains(pt))
    }
}

/// A nearly finite, cellwise-represented function with an active
/// regularization rule for singular-set values.
#[derive(Debug, Clone)]
pub struct NlscFunction {
    grid: Grid,
    pieces: Vec<Piece>,
    singular: SingularSet,
    smooth: Smoothness,
    rule: SingularRule,
}

impl NlscFunction {
    pub fn new(
        grid: Grid,
        pieces: Vec<Piece>,
        singular: SingularSet,
        smooth: Smoothness,
    ) -> Result<NlscFunction, NlscError> {
        if pieces.len() != grid.cell_count() {
            return Err(NlscError::PieceCount {
                expected: grid.cell_count(),
                got: pieces.len(),
            });
        }
        Ok(NlscFunction {
            grid,
            pieces,
            singular,
            smooth,
            rule: SingularRule::Lower,
        })
    }

    /// Cellwise polynomial data; the singular set starts as the full grid
    /// skeleton since nothing constrains the pieces to match across faces.
    pub fn from_cell_polys(grid: Grid, polys: Vec<Poly>) -> Result<NlscFunction, NlscError> {
        let singular = SingularSet::skeleton(&grid);
        let pieces = polys.into_iter().map(Piece::Poly).collect();
        NlscFunction::new(grid, pieces, singular, Smoothness::Infinite)
    }

    /// A single closed-form expression across the whole domain, plus a
    /// constant shift; continuous, so the singular set is empty.
    pub fn from_expression(grid: Grid, expr: ExprRef, shift: f64) -> NlscFunction {
        let pieces = (0..grid.cell_count())
            .map(|_| Piece::Expr {
                expr: Arc::clone(&expr),
                shift,
            })
            .collect();
        NlscFunction::new(grid, pieces, SingularSet::empty(), Smoothness::Infinite)
            .expect("piece per cell by construction")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn singular(&self) -> &SingularSet {
        &self.singular
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smooth
    }

    pub fn rule(&self) -> SingularRule {
        self.rule
    }

    /// Evaluate at a point of the domain closure. Off the skeleton this is
    /// the cell piece; on faces, edges and corners the active rule combines
    /// the limits of all incident cell pieces.
    pub fn eval(&self, x: &[f64]) -> Result<ExtReal, NlscError> {
        let cells = self.grid.incident_cells(x)?;
        let mut acc: Option<ExtReal> = None;
        for cell in cells {
            let v = self.pieces[cell].eval_at(x)?;
            acc = Some(match (acc, self.rule) {
                (None, _) => v,
                (Some(a), SingularRule::Lower) => a.min(v),
                (Some(a), SingularRule::Upper) => a.max(v),
            });
        }
        Ok(acc.expect("incident cell list is never empty"))
    }

    /// Lower Baire operator: pieces unchanged, lower rule active.
    pub fn baire_lower(&self) -> NlscFunction {
        let mut out = self.clone();
        out.rule = SingularRule::Lower;
        out
    }

    /// Upper Baire operator: pieces unchanged, upper rule active.
    pub fn baire_upper(&self) -> NlscFunction {
        let mut out = self.clone();
        out.rule = SingularRule::Upper;
        out
    }

    /// Lower-then-upper composition: normalizes any function to its normal
    /// lower semi-continuous version. Idempotent.
    pub fn regularize(&self) -> NlscFunction {
        // sup-of-inf over shrinking neighbourhoods lands on the infimum of
        // the incident continuous limits, which is exactly the lower rule.
        self.baire_lower()
    }

    /// Pointwise order on a sample cloud covering the common domain.
    pub fn leq(&self, other: &NlscFunction, samples: &SampleSet) -> Result<bool, NlscError> {
        if !self.grid.same_domain(&other.grid) {
            return Err(NlscError::DomainMismatch);
        }
        if !samples.matches_domain(&self.grid) {
            return Err(NlscError::SampleMismatch);
        }
        for x in samples.points() {
            if self.eval(x)? > other.eval(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Pointwise equality on a sample cloud within a relative tolerance.
    pub fn eq_within(
        &self,
        other: &NlscFunction,
        samples: &SampleSet,
        rel_tol: f64,
    ) -> Result<bool, NlscError> {
        if !self.grid.same_domain(&other.grid) {
            return Err(NlscError::DomainMismatch);
        }
        for x in samples.points() {
            let a = self.eval(x)?;
            let b = other.eval(x)?;
            match (a, b) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                    let scale = 1.0_f64.max(a.abs()).max(b.abs());
                    if (a - b).abs() > rel_tol * scale {
                        return Ok(false);
                    }
                }
                (a, b) => {
                    if a != b {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// No infinite cell is surrounded (including itself) entirely by
    /// infinite cells, so the finite part stays dense.
    pub fn is_nearly_finite(&self) -> bool {
        let cells = self.grid.cells_per_axis().to_vec();
        for flat in 0..self.grid.cell_count() {
            if self.pieces[flat].is_inf().is_none() {
                continue;
            }
            let multi = self.grid.multi_index(flat);
            let mut has_finite_neighbor = false;
            for axis in 0..self.grid.dim() {
                for dir in [-1isize, 1] {
                    let j = multi[axis] as isize + dir;
                    if j < 0 || j as usize >= cells[axis] {
                        continue;
                    }
                    let mut m = multi.clone();
                    m[axis] = j as usize;
                    if self.pieces[self.grid.flat_index(&m)].is_inf().is_none() {
                        has_finite_neighbor = true;
                    }
                }
            }
            if !has_finite_neighbor {
                return false;
            }
        }
        true
    }

    /// Cellwise partial derivative `D^alpha`, defined for polynomial pieces.
    /// The singular set is carried over unchanged.
    pub fn partial(&self, alpha: &[u32]) -> Result<NlscFunction, NlscError> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (cell, piece) in self.pieces.iter().enumerate() {
            match piece {
                Piece::Poly(p) => pieces.push(Piece::Poly(p.partial(alpha))),
                Piece::Inf(_) => return Err(NlscError::InfinitePiece { cell }),
                _ => return Err(NlscError::NonPolynomialPiece { cell }),
            }
        }
        NlscFunction::new(
            self.grid.clone(),
            pieces,
            self.singular.clone(),
            self.smooth,
        )
    }

    /// When both functions are the same closed-form expression up to
    /// constant shifts, their pointwise difference is that shift difference
    /// exactly; used to report analytically exact gaps.
    pub fn uniform_offset_from(&self, other: &NlscFunction) -> Option<f64> {
        if !self.grid.same_domain(&other.grid) {
            return None;
        }
        let mut offset: Option<f64> = None;
        // Cell counts may differ after refinement; compare the distinct
        // (expr, shift) pairs on each side instead of cell by cell.
        for piece in self.pieces.iter() {
            let (e1, s1) = match piece {
                Piece::Expr { expr, shift } => (expr, *shift),
                _ => return None,
            };
            for other_piece in other.pieces.iter() {
                let (e2, s2) = match other_piece {
                    Piece::Expr { expr, shift } => (expr, *shift),
                    _ => return None,
                };
                if !Arc::ptr_eq(e1, e2) && **e1 != **e2 {
                    return None;
                }
                let d = s1 - s2;
                match offset {
                    None => offset = Some(d),
                    Some(prev) if prev == d => {}
                    Some(_) => return None,
                }
            }
        }
        offset
    }
}

/// Pointwise supremum. Per cell the dominating piece is selected when the
/// difference has constant sign on the cell's sample points; a genuine
/// crossing of two polynomial pieces stores both with a max selector and
/// records the difference polynomial as a variety.
pub fn lattice_sup(u: &NlscFunction, v: &NlscFunction) -> Result<NlscFunction, NlscError> {
    lattice_combine(u, v, true, DEFAULT_DENSITY)
}

/// Pointwise infimum; dual of `lattice_sup`.
pub fn lattice_inf(u: &NlscFunction, v: &NlscFunction) -> Result<NlscFunction, NlscError> {
    lattice_combine(u, v, false, DEFAULT_DENSITY)
}

pub fn lattice_sup_with_density(
    u: &NlscFunction,
    v: &NlscFunction,
    density: usize,
) -> Result<NlscFunction, NlscError> {
    lattice_combine(u, v, true, density)
}

pub fn lattice_inf_with_density(
    u: &NlscFunction,
    v: &NlscFunction,
    density: usize,
) -> Result<NlscFunction, NlscError> {
    lattice_combine(u, v, false, density)
}

fn lattice_combine(
    u: &NlscFunction,
    v: &NlscFunction,
    take_max: bool,
    density: usize,
) -> Result<NlscFunction, NlscError> {
    if u.grid != v.grid {
        return Err(NlscError::GridMismatch);
    }
    let mut singular = u.singular.union(&v.singular);
    let mut smooth = u.smooth.min(v.smooth);
    let mut pieces = Vec::with_capacity(u.pieces.len());
    for cell in 0..u.pieces.len() {
        let pu = &u.pieces[cell];
        let pv = &v.pieces[cell];
        // Infinite flags decide dominance outright.
        match (pu.is_inf(), pv.is_inf()) {
            (Some(InfSign::Plus), _) | (_, Some(InfSign::Minus)) => {
                pieces.push(if take_max { pu.clone() } else { pv.clone() });
                continue;
            }
            (Some(InfSign::Minus), _) | (_, Some(InfSign::Plus)) => {
                pieces.push(if take_max { pv.clone() } else { pu.clone() });
                continue;
            }
            (None, None) => {}
        }
        // Exact polynomial difference when available.
        if let (Some(a), Some(b)) = (pu.as_poly(), pv.as_poly()) {
            let diff = a.sub(b)?;
            if diff.is_zero() {
                pieces.push(pu.clone());
                continue;
            }
            // Sample with enough per-axis points to pin equality of the
            // difference polynomial exactly.
            let need = (diff.degree() as usize + 1).max(density);
            let sign = cell_sign(&u.grid, cell, need, density, |x| Ok(diff.eval(x)))?;
            match sign {
                CellSign::NonNegative => {
                    pieces.push(if take_max { pu.clone() } else { pv.clone() })
                }
                CellSign::NonPositive => {
                    pieces.push(if take_max { pv.clone() } else { pu.clone() })
                }
                CellSign::Mixed => {
                    singular.add_variety(cell, diff.clone())?;
                    pieces.push(if take_max {
                        Piece::Max(Box::new(pu.clone()), Box::new(pv.clone()))
                    } else {
                        Piece::Min(Box::new(pu.clone()), Box::new(pv.clone()))
                    });
                }
            }
            continue;
        }
        // General finite pieces: decide dominance on samples; a crossing
        // keeps both pieces under a selector. Both sides are continuous on
        // the cell interior, so the combination stays continuous there, but
        // the crossing set is not polynomial and smoothness drops to C^0.
        let sign = cell_sign(&u.grid, cell, density, density, |x| {
            let a = pu.eval_at(x)?;
            let b = pv.eval_at(x)?;
            Ok(a.sub(b)?.as_f64())
        })?;
        match sign {
            CellSign::NonNegative => pieces.push(if take_max { pu.clone() } else { pv.clone() }),
            CellSign::NonPositive => pieces.push(if take_max { pv.clone() } else { pu.clone() }),
            CellSign::Mixed => {
                smooth = smooth.min(Smoothness::Finite(0));
                pieces.push(if take_max {
                    Piece::Max(Box::new(pu.clone()), Box::new(pv.clone()))
                } else {
                    Piece::Min(Box::new(pu.clone()), Box::new(pv.clone()))
                });
            }
        }
    }
    let mut out = NlscFunction::new(u.grid.clone(), pieces, singular, smooth)?;
    out.rule = SingularRule::Lower;
    Ok(out)
}

enum CellSign {
    NonNegative,
    NonPositive,
    Mixed,
}

/// Decide the sign of a difference on one cell, sampling the interior
/// Chebyshev cloud at both requested densities together with the midpoints
/// of the cell's own interior faces. Keeping the face midpoints in the
/// dominance decision means a selected piece really does dominate at every
/// point where cellwise functions are later compared.
fn cell_sign(
    grid: &Grid,
    cell: usize,
    density: usize,
    canonical_density: usize,
    mut f: impl FnMut(&[f64]) -> Result<f64, NlscError>,
) -> Result<CellSign, NlscError> {
    let mut points = grid.cell_samples(cell, density);
    if canonical_density != density {
        points.extend(grid.cell_samples(cell, canonical_density));
    }
    let multi = grid.multi_index(cell);
    let center = grid.cell_center(cell);
    for axis in 0..grid.dim() {
        for (j, ok) in [
            (multi[axis], multi[axis] > 0),
            (multi[axis] + 1, multi[axis] + 1 < grid.cells_per_axis()[axis]),
        ] {
            if !ok {
                continue;
            }
            let mut x = center.clone();
            x[axis] = grid.line(axis, j);
            points.push(x);
        }
    }
    let mut any_pos = false;
    let mut any_neg = false;
    for x in &points {
        let v = f(x)?;
        if v > 0.0 {
            any_pos = true;
        } else if v < 0.0 {
            any_neg = true;
        }
        if any_pos && any_neg {
            return Ok(CellSign::Mixed);
        }
    }
    Ok(if any_neg {
        CellSign::NonPositive
    } else {
        CellSign::NonNegative
    })
}

/// Random cellwise polynomial function, occasionally with infinite cells.
/// Fuzz fodder for the envelope and lattice properties; also handy for
/// exercising the dump format.
pub fn random_cellwise(
    grid: &Grid,
    max_degree: u32,
    p_inf: f64,
    rng: &mut impl rand::Rng,
) -> NlscFunction {
    let mut pieces = Vec::with_capacity(grid.cell_count());
    for cell in 0..grid.cell_count() {
        if rng.gen::<f64>() < p_inf {
            pieces.push(Piece::Inf(if rng.gen::<bool>() {
                InfSign::Plus
            } else {
                InfSign::Minus
            }));
            continue;
        }
        let deg = rng.gen_range(0..=max_degree);
        let count = crate::poly::binomial(grid.dim() + deg as usize, grid.dim());
        let coeffs: Vec<f64> = (0..count).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p = Poly::new(grid.cell_center(cell), deg, coeffs).unwrap();
        pieces.push(Piece::Poly(p));
    }
    NlscFunction::new(
        grid.clone(),
        pieces,
        SingularSet::skeleton(grid),
        Smoothness::Infinite,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SampleSet;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn line(cells: usize) -> Grid {
        Grid::new(vec![-1.0], vec![1.0], vec![cells]).unwrap()
    }

    fn poly1(center: f64, coeffs: Vec<f64>) -> Poly {
        let deg = (coeffs.len() - 1) as u32;
        Poly::new(vec![center], deg, coeffs).unwrap()
    }

    /// 0 on (-1, 0), 1 on (0, 1).
    fn step() -> NlscFunction {
        let grid = line(2);
        NlscFunction::from_cell_polys(
            grid.clone(),
            vec![
                Poly::constant(grid.cell_center(0), 0.0),
                Poly::constant(grid.cell_center(1), 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn baire_values_at_a_jump() {
        let u = step();
        let at0 = |f: &NlscFunction| f.eval(&[0.0]).unwrap();
        assert_eq!(at0(&u.baire_lower()), ExtReal::Finite(0.0));
        assert_eq!(at0(&u.baire_upper()), ExtReal::Finite(1.0));
        assert_eq!(at0(&u.regularize()), ExtReal::Finite(0.0));
        // Off the jump both rules agree with the pieces.
        assert_eq!(u.baire_upper().eval(&[0.5]).unwrap(), ExtReal::Finite(1.0));
        assert_eq!(u.baire_lower().eval(&[-0.5]).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn envelope_order_on_random_functions() {
        let mut rng = StdRng::seed_from_u64(7);
        let grid = line(5);
        let samples = SampleSet::from_grid(&grid, 3);
        for _ in 0..100 {
            let u = random_cellwise(&grid, 2, 0.1, &mut rng);
            let lower = u.baire_lower();
            let upper = u.baire_upper();
            for x in samples.points() {
                let a = lower.eval(x).unwrap();
                let b = u.eval(x).unwrap();
                let c = upper.eval(x).unwrap();
                assert!(a <= b && b <= c, "envelope order violated at {x:?}");
            }
        }
    }

    #[test]
    fn regularize_is_idempotent_on_random_functions() {
        let mut rng = StdRng::seed_from_u64(11);
        let grid = line(6);
        let samples = SampleSet::from_grid(&grid, 3);
        for _ in 0..100 {
            let u = random_cellwise(&grid, 2, 0.15, &mut rng);
            let once = u.regularize();
            let twice = once.regularize();
            for x in samples.points() {
                assert_eq!(once.eval(x).unwrap(), twice.eval(x).unwrap());
            }
        }
    }

    #[test]
    fn leq_on_x_and_x_squared() {
        // On (0,1): x^2 <= x everywhere, and the reverse fails. A dense
        // direct comparison of the closed forms double-checks the verdicts.
        let grid = Grid::new(vec![0.0], vec![1.0], vec![8]).unwrap();
        let mut lin = Vec::new();
        let mut sq = Vec::new();
        for cell in 0..8 {
            let c = grid.cell_center(cell)[0];
            lin.push(poly1(c, vec![c, 1.0]));
            sq.push(poly1(c, vec![c * c, 2.0 * c, 1.0]));
        }
        let u = NlscFunction::from_cell_polys(grid.clone(), lin).unwrap();
        let v = NlscFunction::from_cell_polys(grid.clone(), sq).unwrap();
        for k in 0..=10_000 {
            let x = k as f64 / 10_000.0;
            assert!(x * x <= x, "oracle check");
        }
        let samples = SampleSet::from_grid(&grid, 4);
        assert!(v.leq(&u, &samples).unwrap());
        assert!(!u.leq(&v, &samples).unwrap());
    }

    #[test]
    fn sup_of_x_and_minus_x_two_cells() {
        let grid = line(2);
        let u = NlscFunction::from_cell_polys(
            grid.clone(),
            vec![poly1(-0.5, vec![-0.5, 1.0]), poly1(0.5, vec![0.5, 1.0])],
        )
        .unwrap();
        let v = NlscFunction::from_cell_polys(
            grid.clone(),
            vec![poly1(-0.5, vec![0.5, -1.0]), poly1(0.5, vec![-0.5, -1.0])],
        )
        .unwrap();
        let s = lattice_sup(&u, &v).unwrap();
        // Signs are constant per cell, so pieces are selected, no variety.
        assert!(s.singular().varieties().is_empty());
        assert_eq!(s.eval(&[0.0]).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(s.eval(&[0.5]).unwrap(), ExtReal::Finite(0.5));
        assert_eq!(s.eval(&[-0.5]).unwrap(), ExtReal::Finite(0.5));
    }

    #[test]
    fn sup_of_x_and_minus_x_one_cell_records_variety() {
        let grid = line(1);
        let u =
            NlscFunction::from_cell_polys(grid.clone(), vec![poly1(0.0, vec![0.0, 1.0])]).unwrap();
        let v =
            NlscFunction::from_cell_polys(grid.clone(), vec![poly1(0.0, vec![0.0, -1.0])]).unwrap();
        let s = lattice_sup(&u, &v).unwrap();
        assert_eq!(s.singular().varieties().len(), 1);
        let (cell, p) = &s.singular().varieties()[0];
        assert_eq!(*cell, 0);
        assert_eq!(p.coeffs(), &[0.0, 2.0]);
        assert_eq!(s.eval(&[0.0]).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(s.eval(&[0.5]).unwrap(), ExtReal::Finite(0.5));
        assert_eq!(s.eval(&[-0.5]).unwrap(), ExtReal::Finite(0.5));
    }

    #[test]
    fn sup_with_self_adds_nothing() {
        let grid = line(3);
        let u = NlscFunction::from_cell_polys(
            grid.clone(),
            (0..3)
                .map(|c| poly1(grid.cell_center(c)[0], vec![c as f64, 1.0]))
                .collect(),
        )
        .unwrap();
        let s = lattice_sup(&u, &u).unwrap();
        assert!(s.singular().varieties().is_empty());
        assert_eq!(s.singular().face_count(), u.singular().face_count());
    }

    #[test]
    fn infinite_cells_dominate() {
        let grid = line(2);
        let u = NlscFunction::new(
            grid.clone(),
            vec![Piece::Inf(InfSign::Plus), Piece::Poly(Poly::constant(grid.cell_center(1), 3.0))],
            SingularSet::skeleton(&grid),
            Smoothness::Infinite,
        )
        .unwrap();
        let v = NlscFunction::from_cell_polys(
            grid.clone(),
            vec![
                Poly::constant(grid.cell_center(0), 0.0),
                Poly::constant(grid.cell_center(1), 5.0),
            ],
        )
        .unwrap();
        let s = lattice_sup(&u, &v).unwrap();
        assert_eq!(s.eval(&[-0.5]).unwrap(), ExtReal::PosInf);
        assert_eq!(s.eval(&[0.5]).unwrap(), ExtReal::Finite(5.0));
        let i = lattice_inf(&u, &v).unwrap();
        assert_eq!(i.eval(&[-0.5]).unwrap(), ExtReal::Finite(0.0));
        assert_eq!(i.eval(&[0.5]).unwrap(), ExtReal::Finite(3.0));
    }

    #[test]
    fn nearly_finite_criterion() {
        let grid = line(2);
        let mixed = NlscFunction::new(
            grid.clone(),
            vec![Piece::Inf(InfSign::Plus), Piece::Poly(Poly::constant(grid.cell_center(1), 1.0))],
            SingularSet::skeleton(&grid),
            Smoothness::Infinite,
        )
        .unwrap();
        assert!(mixed.is_nearly_finite());
        let all_inf = NlscFunction::new(
            grid.clone(),
            vec![Piece::Inf(InfSign::Plus), Piece::Inf(InfSign::Plus)],
            SingularSet::skeleton(&grid),
            Smoothness::Infinite,
        )
        .unwrap();
        assert!(!all_inf.is_nearly_finite());
        let single = Grid::new(vec![0.0], vec![1.0], vec![1]).unwrap();
        let lone_inf = NlscFunction::new(
            single,
            vec![Piece::Inf(InfSign::Minus)],
            SingularSet::empty(),
            Smoothness::Infinite,
        )
        .unwrap();
        assert!(!lone_inf.is_nearly_finite());
    }

    #[test]
    fn eval_outside_domain_errors() {
        let u = step();
        assert!(u.eval(&[2.0]).is_err());
    }

    #[test]
    fn singular_union_and_containment() {
        let grid = line(4);
        let mut a = SingularSet::skeleton(&grid);
        let mut b = SingularSet::empty();
        b.add_point(vec![0.25]);
        a.add_variety(2, poly1(0.25, vec![0.0, 1.0])).unwrap();
        let u = a.union(&b);
        assert!(u.contains(&a));
        assert!(u.contains(&b));
        assert_eq!(u.face_count(), 3);
        assert_eq!(u.varieties().len(), 1);
        assert_eq!(u.points().len(), 1);
    }

    #[test]
    fn zero_variety_rejected() {
        let mut s = SingularSet::empty();
        let z = Poly::constant(vec![0.0], 0.0);
        assert!(matches!(
            s.add_variety(0, z),
            Err(NlscError::ZeroVariety { .. })
        ));
    }

    #[test]
    fn lattice_laws_on_random_functions() {
        let mut rng = StdRng::seed_from_u64(23);
        let grid = line(4);
        let samples = SampleSet::from_grid(&grid, 3);
        let interior = SampleSet::interior_only(&grid, 3);
        for _ in 0..50 {
            let u = random_cellwise(&grid, 2, 0.1, &mut rng);
            let v = random_cellwise(&grid, 2, 0.1, &mut rng);
            let w = random_cellwise(&grid, 2, 0.1, &mut rng);
            let sup_uv = lattice_sup(&u, &v).unwrap();
            let sup_vu = lattice_sup(&v, &u).unwrap();
            let inf_uv = lattice_inf(&u, &v).unwrap();
            let absorb = lattice_inf(&u, &sup_uv).unwrap();
            let assoc_l = lattice_sup(&lattice_sup(&u, &v).unwrap(), &w).unwrap();
            let assoc_r = lattice_sup(&u, &lattice_sup(&v, &w).unwrap()).unwrap();
            let distr_l = lattice_inf(&u, &lattice_sup(&v, &w).unwrap()).unwrap();
            let distr_r =
                lattice_sup(&lattice_inf(&u, &v).unwrap(), &lattice_inf(&u, &w).unwrap()).unwrap();
            // The lattice laws hold at every canonical point, including face
            // midpoints where values come from the incident-limit rule.
            for x in samples.points() {
                let eu = u.eval(x).unwrap();
                let ev = v.eval(x).unwrap();
                assert_eq!(sup_uv.eval(x).unwrap(), sup_vu.eval(x).unwrap());
                assert_eq!(absorb.eval(x).unwrap(), eu);
                assert_eq!(assoc_l.eval(x).unwrap(), assoc_r.eval(x).unwrap());
                assert_eq!(distr_l.eval(x).unwrap(), distr_r.eval(x).unwrap());
                // The infimum of lower regularizations commutes with the
                // incident-limit rule; the supremum dominates it.
                assert_eq!(inf_uv.eval(x).unwrap(), eu.min(ev));
                assert!(sup_uv.eval(x).unwrap() >= eu.max(ev));
            }
            // Off the skeleton the lattice result is the pointwise extreme.
            for x in interior.points() {
                let eu = u.eval(x).unwrap();
                let ev = v.eval(x).unwrap();
                assert_eq!(sup_uv.eval(x).unwrap(), eu.max(ev));
                assert_eq!(inf_uv.eval(x).unwrap(), eu.min(ev));
            }
        }
    }
}
