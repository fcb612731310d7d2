//! Damped minimum-norm Gauss-Newton for small square or under-determined
//! systems.
//!
//! The cell solves drive K residual components over M >= K jet unknowns.
//! Steps are the minimum-norm solution of the linearized system, so
//! directions the residual does not constrain are left exactly where the
//! start put them; that freedom is deliberate and observable downstream
//! (it is what the equivalence quotient forgets). Domain errors from the
//! residual (log of a negative, say) reject the trial point rather than
//! aborting the solve.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NewtonError {
    #[error("no witness with residual <= {tol:e}; best found {best:e}")]
    NoWitness { tol: f64, best: f64 },
    #[error("jacobian shape does not match the residual")]
    Shape,
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// How many of the ranked starts to attempt before giving up.
    pub max_restarts: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iters: 80,
            tol: 1e-12,
            max_restarts: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub xi: Vec<f64>,
    /// Infinity norm of the final residual.
    pub residual: f64,
    pub iterations: usize,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Gaussian elimination with partial pivoting; `None` when the matrix is
/// numerically singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite pivots")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Minimum-norm solution s of J s = r, via the K x K normal system
/// J Jᵀ y = r, s = Jᵀ y. A singular normal matrix gets one damped retry.
fn min_norm_step(j: &[Vec<f64>], r: &[f64]) -> Option<Vec<f64>> {
    let k = j.len();
    let m = j.first()?.len();
    let mut a = vec![vec![0.0; k]; k];
    for p in 0..k {
        for q in 0..k {
            a[p][q] = (0..m).map(|i| j[p][i] * j[q][i]).sum();
        }
    }
    let y = solve_dense(a.clone(), r.to_vec()).or_else(|| {
        let trace: f64 = (0..k).map(|i| a[i][i]).sum();
        let lambda = 1e-12 * (1.0 + trace);
        let mut damped = a;
        for (i, row) in damped.iter_mut().enumerate() {
            row[i] += lambda;
        }
        solve_dense(damped, r.to_vec())
    })?;
    let mut s = vec![0.0; m];
    for (i, si) in s.iter_mut().enumerate() {
        *si = (0..k).map(|p| j[p][i] * y[p]).sum();
    }
    Some(s)
}

fn run_newton(
    residual: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    jacobian: &dyn Fn(&[f64]) -> Option<Vec<Vec<f64>>>,
    start: &[f64],
    opts: &NewtonOptions,
) -> Option<NewtonOutcome> {
    let mut xi = start.to_vec();
    let mut r = residual(&xi)?;
    let mut rn = inf_norm(&r);
    for it in 0..opts.max_iters {
        if rn <= opts.tol {
            return Some(NewtonOutcome {
                xi,
                residual: rn,
                iterations: it,
            });
        }
        let jac = jacobian(&xi)?;
        if jac.len() != r.len() || jac.iter().any(|row| row.len() != xi.len()) {
            return None;
        }
        let step = min_norm_step(&jac, &r)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = xi.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            if let Some(rc) = residual(&cand) {
                let rcn = inf_norm(&rc);
                if rcn < rn {
                    xi = cand;
                    r = rc;
                    rn = rcn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some(NewtonOutcome {
        xi,
        residual: rn,
        iterations: opts.max_iters,
    })
}

/// Rank the starts by initial residual and run damped Newton from each in
/// turn until one lands within tolerance.
pub fn solve_from_starts(
    residual: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    jacobian: &dyn Fn(&[f64]) -> Option<Vec<Vec<f64>>>,
    starts: &[Vec<f64>],
    opts: &NewtonOptions,
) -> Result<NewtonOutcome, NewtonError> {
    let mut ranked: Vec<(f64, &Vec<f64>)> = starts
        .iter()
        .filter_map(|s| residual(s).map(|r| (inf_norm(&r), s)))
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite residuals"));
    let mut best = f64::INFINITY;
    for (initial, start) in ranked.into_iter().take(opts.max_restarts) {
        best = best.min(initial);
        if let Some(out) = run_newton(residual, jacobian, start, opts) {
            best = best.min(out.residual);
            if out.residual <= opts.tol {
                return Ok(out);
            }
        }
    }
    Err(NewtonError::NoWitness {
        tol: opts.tol,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_two_by_two() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_dense(a, vec![5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_returns_none() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(a, vec![1.0, 2.0]).is_none());
    }

    #[test]
    fn affine_component_converges_in_one_step_exactly() {
        // Residual only sees slot 1; slot 0 must stay at its start.
        let residual = |xi: &[f64]| Some(vec![xi[1] - 2.5]);
        let jacobian = |_: &[f64]| Some(vec![vec![0.0, 1.0]]);
        let out = solve_from_starts(
            &residual,
            &jacobian,
            &[vec![5.0, 0.3]],
            &NewtonOptions::default(),
        )
        .unwrap();
        assert_eq!(out.xi[1], 2.5);
        assert_eq!(out.xi[0], 5.0);
        assert_eq!(out.residual, 0.0);
    }

    #[test]
    fn square_target_converges_and_keeps_start_sign() {
        let target = 0.95;
        let residual = move |xi: &[f64]| Some(vec![xi[0] * xi[0] - target]);
        let jacobian = |xi: &[f64]| Some(vec![vec![2.0 * xi[0]]]);
        for start in [1.7, -0.4] {
            let out = solve_from_starts(
                &residual,
                &jacobian,
                &[vec![start]],
                &NewtonOptions::default(),
            )
            .unwrap();
            assert!((out.xi[0].abs() - target.sqrt()).abs() < 1e-9);
            assert_eq!(out.xi[0].signum(), start.signum());
        }
    }

    #[test]
    fn two_by_two_system() {
        let residual = |xi: &[f64]| Some(vec![xi[0] + xi[1] - 3.0, xi[0] - xi[1] - 1.0]);
        let jacobian = |_: &[f64]| Some(vec![vec![1.0, 1.0], vec![1.0, -1.0]]);
        let out = solve_from_starts(
            &residual,
            &jacobian,
            &[vec![0.0, 0.0]],
            &NewtonOptions::default(),
        )
        .unwrap();
        assert!((out.xi[0] - 2.0).abs() < 1e-12);
        assert!((out.xi[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn domain_errors_reject_starts_not_the_solve() {
        // Residual defined only for positive xi0.
        let residual = |xi: &[f64]| {
            if xi[0] <= 0.0 {
                None
            } else {
                Some(vec![xi[0].sqrt() - 2.0])
            }
        };
        let jacobian = |xi: &[f64]| Some(vec![vec![0.5 / xi[0].sqrt()]]);
        let out = solve_from_starts(
            &residual,
            &jacobian,
            &[vec![-3.0], vec![9.0]],
            &NewtonOptions::default(),
        )
        .unwrap();
        assert!((out.xi[0] - 4.0).abs() < 1e-9);

        let all_bad = solve_from_starts(
            &residual,
            &jacobian,
            &[vec![-3.0], vec![-1.0]],
            &NewtonOptions::default(),
        );
        assert!(matches!(all_bad, Err(NewtonError::NoWitness { .. })));
    }

    #[test]
    fn unreachable_target_reports_best_residual() {
        let residual = |xi: &[f64]| Some(vec![xi[0] * xi[0] + 1.0]);
        let jacobian = |xi: &[f64]| Some(vec![vec![2.0 * xi[0]]]);
        let err = solve_from_starts(
            &residual,
            &jacobian,
            &[vec![0.5], vec![-2.0]],
            &NewtonOptions {
                tol: 1e-9,
                ..NewtonOptions::default()
            },
        )
        .unwrap_err();
        match err {
            NewtonError::NoWitness { best, .. } => assert!((best - 1.0).abs() < 1e-6),
            other => panic!("unexpected {:?}", other),
        }
    }
}
