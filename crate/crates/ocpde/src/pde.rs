//! Systems of nonlinear PDEs acting on jets of cellwise functions.
//!
//! A system is K operator expressions over space and jet variables plus K
//! right-hand sides over space alone. The operator acts on a tuple of
//! cellwise functions by composing each expression with the exact jet of
//! the cell polynomials; the composite is stored per cell unevaluated, so
//! residual checks later see no fitting error, only the arithmetic of the
//! expressions themselves.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{parse, EvalError, ExprContext, ExprRef, JetSpec, ParseError};
use crate::grid::SampleSet;
use crate::newton::{solve_from_starts, NewtonOptions};
use crate::nlsc::{JetCell, NlscError, NlscFunction, Piece, SingularSet, Smoothness};

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("{which}: {source}")]
    Parse {
        which: String,
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Function(#[from] NlscError),
    #[error("expected {expected} expressions, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("jet requested on the singular set at {x:?}")]
    SingularPoint { x: Vec<f64> },
    #[error("component {comp} has a non-polynomial piece on cell {cell}")]
    NonPolynomialPiece { comp: usize, cell: usize },
    #[error("component {comp} is infinite on cell {cell}; the operator needs nearly finite input")]
    InfiniteCell { comp: usize, cell: usize },
    #[error("jet box must satisfy lo < hi in all {expected} slots")]
    BadBox { expected: usize },
}

/// K-component system: operator expressions F_j(x, jet), right-hand sides
/// f_j(x), and the jet layout they share.
#[derive(Debug, Clone)]
pub struct PdeSystem {
    spec: JetSpec,
    ops: Vec<ExprRef>,
    rhs: Vec<ExprRef>,
    /// Symbolic d F_j / d xi_i, K rows of M entries.
    grads: Vec<Vec<ExprRef>>,
    smooth_k: Smoothness,
}

impl PdeSystem {
    pub fn new(
        spec: JetSpec,
        operator_texts: &[&str],
        rhs_texts: &[&str],
        smooth_k: Smoothness,
    ) -> Result<PdeSystem, PdeError> {
        let k = spec.comps();
        if operator_texts.len() != k {
            return Err(PdeError::ComponentCount {
                expected: k,
                got: operator_texts.len(),
            });
        }
        if rhs_texts.len() != k {
            return Err(PdeError::ComponentCount {
                expected: k,
                got: rhs_texts.len(),
            });
        }
        let op_ctx = ExprContext::operator(&spec);
        let rhs_ctx = ExprContext::space_only(&spec);
        let mut ops = Vec::with_capacity(k);
        for (j, text) in operator_texts.iter().enumerate() {
            let e = parse(text, &op_ctx).map_err(|source| PdeError::Parse {
                which: format!("operator {}", j + 1),
                source,
            })?;
            ops.push(Arc::new(e));
        }
        let mut rhs = Vec::with_capacity(k);
        for (j, text) in rhs_texts.iter().enumerate() {
            let e = parse(text, &rhs_ctx).map_err(|source| PdeError::Parse {
                which: format!("rhs {}", j + 1),
                source,
            })?;
            rhs.push(Arc::new(e));
        }
        let grads = ops
            .iter()
            .map(|op| {
                (0..spec.total_len())
                    .map(|idx| Arc::new(op.diff_jet(&spec, idx)))
                    .collect()
            })
            .collect();
        Ok(PdeSystem {
            spec,
            ops,
            rhs,
            grads,
            smooth_k,
        })
    }

    pub fn spec(&self) -> &JetSpec {
        &self.spec
    }

    pub fn smooth_k(&self) -> Smoothness {
        self.smooth_k
    }

    pub fn operator(&self, j: usize) -> &ExprRef {
        &self.ops[j]
    }

    pub fn rhs_expr(&self, j: usize) -> &ExprRef {
        &self.rhs[j]
    }

    /// The right-hand side as a cellwise function sharing one closed form,
    /// optionally shifted; handy for certificate bounds.
    pub fn rhs_function(&self, grid: &crate::grid::Grid, j: usize, shift: f64) -> NlscFunction {
        NlscFunction::from_expression(grid.clone(), Arc::clone(&self.rhs[j]), shift)
    }

    pub fn eval_f(&self, x: &[f64], xi: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.ops
            .iter()
            .map(|op| op.eval(x, Some((&self.spec, xi))))
            .collect()
    }

    pub fn eval_rhs(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.rhs.iter().map(|e| e.eval(x, None)).collect()
    }

    /// K x M Jacobian of F in the jet variables, from the symbolic
    /// derivatives fixed at parse time.
    pub fn eval_grad(&self, x: &[f64], xi: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        self.grads
            .iter()
            .map(|row| {
                row.iter()
                    .map(|g| g.eval(x, Some((&self.spec, xi))))
                    .collect()
            })
            .collect()
    }

    /// Exact jet of the tuple at a point in a single cell's interior, off
    /// every variety and marked point.
    pub fn jet(&self, u: &[NlscFunction], x: &[f64]) -> Result<Vec<f64>, PdeError> {
        self.check_tuple(u)?;
        let grid = u[0].grid();
        let incident = grid.incident_cells(x).map_err(NlscError::from)?;
        if incident.len() != 1 {
            return Err(PdeError::SingularPoint { x: x.to_vec() });
        }
        let cell = incident[0];
        for comp in u {
            for (vcell, vpoly) in comp.singular().varieties() {
                if *vcell == cell && vpoly.eval(x) == 0.0 {
                    return Err(PdeError::SingularPoint { x: x.to_vec() });
                }
            }
            if comp.singular().points().iter().any(|p| p == x) {
                return Err(PdeError::SingularPoint { x: x.to_vec() });
            }
        }
        let mut xi = Vec::with_capacity(self.spec.total_len());
        for idx in 0..self.spec.total_len() {
            let (comp, alpha) = self.spec.entry(idx);
            let poly = u[comp].pieces()[cell]
                .as_poly()
                .ok_or(PdeError::NonPolynomialPiece { comp, cell })?;
            xi.push(poly.partial(alpha).eval(x));
        }
        Ok(xi)
    }

    /// Apply the operator to a tuple: each output cell carries the exact
    /// composite of F_j with the cell's jet polynomials; the singular set
    /// is the union of the inputs' sets and values at it follow the
    /// regularized (lower) rule.
    pub fn apply_t(&self, u: &[NlscFunction]) -> Result<Vec<NlscFunction>, PdeError> {
        self.check_tuple(u)?;
        let grid = u[0].grid().clone();
        let mut singular = SingularSet::empty();
        for comp in u {
            singular = singular.union(comp.singular());
        }
        let smooth = u
            .iter()
            .fold(self.smooth_k, |acc, f| acc.min(f.smoothness()));
        let mut out = Vec::with_capacity(self.spec.comps());
        for j in 0..self.spec.comps() {
            let mut pieces = Vec::with_capacity(grid.cell_count());
            for cell in 0..grid.cell_count() {
                let mut jets = Vec::with_capacity(self.spec.total_len());
                for idx in 0..self.spec.total_len() {
                    let (comp, alpha) = self.spec.entry(idx);
                    let piece = &u[comp].pieces()[cell];
                    if piece.as_poly().is_none() {
                        return Err(match piece {
                            Piece::Inf(_) => PdeError::InfiniteCell { comp, cell },
                            _ => PdeError::NonPolynomialPiece { comp, cell },
                        });
                    }
                    let poly = piece.as_poly().expect("checked above");
                    jets.push(poly.partial(alpha));
                }
                pieces.push(Piece::Jet(Arc::new(JetCell {
                    operator: Arc::clone(&self.ops[j]),
                    spec: self.spec.clone(),
                    jets,
                })));
            }
            out.push(NlscFunction::new(
                grid.clone(),
                pieces,
                singular.clone(),
                smooth,
            )?);
        }
        Ok(out)
    }

    /// Two tuples are operator-equivalent when their images agree on the
    /// sample set within the relative tolerance.
    pub fn equivalent_mod_t(
        &self,
        u: &[NlscFunction],
        v: &[NlscFunction],
        samples: &SampleSet,
        rel_tol: f64,
    ) -> Result<bool, PdeError> {
        let tu = self.apply_t(u)?;
        let tv = self.apply_t(v)?;
        for (a, b) in tu.iter().zip(&tv) {
            if !a.eq_within(b, samples, rel_tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Numerically witness that the right-hand side value sits in the
    /// interior of the reachable set {F(x, xi)}. For one component this is
    /// strict two-sided sampling; for systems it is a damped-Newton search
    /// for witnesses of the 2K axis perturbations of f(x). `false` means
    /// "no witness found", not a disproof.
    pub fn check_admissibility(
        &self,
        x: &[f64],
        box_lo: &[f64],
        box_hi: &[f64],
        samples: usize,
        seed: u64,
    ) -> Result<bool, PdeError> {
        let m = self.spec.total_len();
        if box_lo.len() != m
            || box_hi.len() != m
            || box_lo.iter().zip(box_hi).any(|(a, b)| !(a < b))
        {
            return Err(PdeError::BadBox { expected: m });
        }
        let f = self.eval_rhs(x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<Vec<f64>> = (0..samples.max(1))
            .map(|_| {
                (0..m)
                    .map(|i| rng.gen_range(box_lo[i]..box_hi[i]))
                    .collect()
            })
            .collect();

        if self.spec.comps() == 1 {
            let mut below = false;
            let mut above = false;
            for xi in &draws {
                if let Ok(v) = self.eval_f(x, xi) {
                    below |= v[0] < f[0];
                    above |= v[0] > f[0];
                    if below && above {
                        return Ok(true);
                    }
                }
            }
            // A side the raw draws missed can still have a witness; refine
            // toward it and evaluate the candidate strictly.
            let delta = 1e-3 * (1.0 + f[0].abs());
            for (found, sign) in [(below, -1.0), (above, 1.0)] {
                if found {
                    continue;
                }
                let target = f[0] + sign * delta;
                let residual = |xi: &[f64]| self.eval_f(x, xi).ok().map(|v| vec![v[0] - target]);
                let jacobian = |xi: &[f64]| self.eval_grad(x, xi).ok();
                let opts = NewtonOptions {
                    tol: 1e-9,
                    ..NewtonOptions::default()
                };
                match solve_from_starts(&residual, &jacobian, &draws, &opts) {
                    Ok(out) => {
                        let v = self.eval_f(x, &out.xi)?;
                        if (sign < 0.0 && !(v[0] < f[0])) || (sign > 0.0 && !(v[0] > f[0])) {
                            return Ok(false);
                        }
                    }
                    Err(_) => return Ok(false),
                }
            }
            return Ok(true);
        }

        let delta: Vec<f64> = f.iter().map(|fj| 1e-3 * (1.0 + fj.abs())).collect();
        for j in 0..self.spec.comps() {
            for sign in [1.0, -1.0] {
                let mut target = f.clone();
                target[j] += sign * delta[j];
                let residual = |xi: &[f64]| {
                    self.eval_f(x, xi)
                        .ok()
                        .map(|v| v.iter().zip(&target).map(|(a, b)| a - b).collect())
                };
                let jacobian = |xi: &[f64]| self.eval_grad(x, xi).ok();
                let opts = NewtonOptions {
                    tol: 1e-9,
                    ..NewtonOptions::default()
                };
                if solve_from_starts(&residual, &jacobian, &draws, &opts).is_err() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn check_tuple(&self, u: &[NlscFunction]) -> Result<(), PdeError> {
        if u.len() != self.spec.comps() {
            return Err(PdeError::ComponentCount {
                expected: self.spec.comps(),
                got: u.len(),
            });
        }
        if u.iter().any(|f| !f.grid().same_domain(u[0].grid())) {
            return Err(PdeError::GridMismatch);
        }
        Ok(())
    }
}
