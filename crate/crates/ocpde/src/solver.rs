//! Construction of epsilon-approximate solutions and their assembly into
//! an order-Cauchy sequence with a convergence certificate.
//!
//! Per cell the solver finds a jet whose operator value lands in the
//! middle half of the band [f - eps, f] at the cell center; the piece is
//! the polynomial with that jet. The safety margin of eps/4 on either
//! side is what continuity spends between the center and the rest of the
//! cell, and verification on a denser sample cloud checks that it was
//! enough. Cells where it was not trigger a global per-axis bisection and
//! a re-solve, keeping the grid a uniform tensor product (which is what
//! the dump format can represent).
//!
//! Everything is deterministic given the seed: cell starts come from a
//! counter-mixed stream cipher, work counters replace wall-clock time in
//! reports, and assembly iterates in schedule order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::convergence::{
    is_order_cauchy, order_converges, CauchyReport, ConvergenceReport, FunctionSequence,
    OrderInterval,
};
use crate::dump::fmt_real;
use crate::grid::{Grid, SampleSet};
use crate::newton::{solve_from_starts, NewtonError, NewtonOptions};
use crate::nlsc::{NlscError, NlscFunction, SingularSet};
use crate::pde::{PdeError, PdeSystem};
use crate::poly::Poly;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("schedule must be strictly decreasing and positive")]
    BadSchedule,
    #[error("{0}")]
    BadParams(String),
    #[error("admissibility not verified at {} cell center(s), first {:?}", points.len(), points.first())]
    Admissibility { points: Vec<Vec<f64>> },
    #[error("cell {cell}: no jet witness, best residual {best:e}")]
    NoWitness { cell: usize, best: f64 },
    #[error("cell {cell}: jet landed outside the acceptance band")]
    BandMiss { cell: usize },
    #[error("refinement budget exhausted after {rounds} rounds with {violations} violating cells")]
    RefinementExhausted { rounds: usize, violations: usize },
    #[error("regularity table needs at least 3 approximations, got {got}")]
    TooFewApproximations { got: usize },
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Function(#[from] NlscError),
}

/// Strictly decreasing positive tolerances.
#[derive(Debug, Clone)]
pub struct EpsSchedule {
    values: Vec<f64>,
}

impl EpsSchedule {
    pub fn new(values: Vec<f64>) -> Result<EpsSchedule, SolverError> {
        if values.is_empty()
            || values.iter().any(|&v| !(v > 0.0) || !v.is_finite())
            || values.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(SolverError::BadSchedule);
        }
        Ok(EpsSchedule { values })
    }

    /// 1, 1/2, ..., 1/n.
    pub fn harmonic(n: usize) -> EpsSchedule {
        EpsSchedule::new((1..=n).map(|k| 1.0 / k as f64).collect())
            .expect("harmonic values decrease")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("nonempty by construction")
    }
}

#[derive(Debug, Clone)]
pub struct SolverParams {
    /// Polynomial degree of the pieces; at least the operator order.
    pub degree: u32,
    /// Jet-space search box, one (lo, hi) pair per jet slot.
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    /// Random Newton starts per cell (also the admissibility sample count).
    pub samples: usize,
    pub seed: u64,
    /// Per-axis sample density for the canonical sample set.
    pub density: usize,
    /// Verification density multiplier over `density`.
    pub verify_factor: usize,
    /// Global bisection rounds allowed when verification fails.
    pub max_refine: usize,
}

impl SolverParams {
    /// Sensible defaults for a system with `m_total` jet slots.
    pub fn for_slots(m_total: usize) -> SolverParams {
        SolverParams {
            degree: 1,
            box_lo: vec![-10.0; m_total],
            box_hi: vec![10.0; m_total],
            samples: 16,
            seed: 0,
            density: 3,
            verify_factor: 10,
            max_refine: 12,
        }
    }
}

/// One verified approximation: the function tuple, its exceptional set,
/// the residual extremes seen during verification and the work done.
#[derive(Debug, Clone)]
pub struct ApproxSolution {
    pub u: Vec<NlscFunction>,
    pub gamma: SingularSet,
    pub eps: f64,
    pub grid: Grid,
    /// Smallest and largest residual (T u - f) per component over the
    /// verification cloud.
    pub residual_lo: Vec<f64>,
    pub residual_hi: Vec<f64>,
    /// Cells that failed verification and forced a bisection, summed over
    /// rounds.
    pub cells_refined: usize,
    /// Total damped-Newton iterations: the deterministic cost counter.
    pub newton_steps: usize,
}

fn cell_seed(seed: u64, round: usize, cell: usize) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15u64
        .wrapping_mul(cell as u64 + 1)
        .wrapping_add((round as u64) << 48)
}

fn draws_in_box(params: &SolverParams, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..params.samples.max(1))
        .map(|_| {
            (0..params.box_lo.len())
                .map(|i| rng.gen_range(params.box_lo[i]..params.box_hi[i]))
                .collect()
        })
        .collect()
}

/// Find a jet whose operator value sits in the middle half of the band
/// [f - eps, f] at the given point: target f - eps/2, accepted within
/// eps/4 on either side.
pub fn solve_cell(
    sys: &PdeSystem,
    center: &[f64],
    eps: f64,
    params: &SolverParams,
    seed: u64,
) -> Result<(Vec<f64>, usize), SolverError> {
    let f = sys.eval_rhs(center).map_err(PdeError::from)?;
    let target: Vec<f64> = f.iter().map(|fj| fj - eps / 2.0).collect();
    let residual = |xi: &[f64]| {
        sys.eval_f(center, xi)
            .ok()
            .map(|v| v.iter().zip(&target).map(|(a, b)| a - b).collect())
    };
    let jacobian = |xi: &[f64]| sys.eval_grad(center, xi).ok();
    let starts = draws_in_box(params, seed);
    let opts = NewtonOptions {
        tol: 1e-12,
        max_iters: 80,
        max_restarts: params.samples.max(1),
    };
    let out = solve_from_starts(&residual, &jacobian, &starts, &opts).map_err(|e| match e {
        NewtonError::NoWitness { best, .. } => SolverError::NoWitness { cell: 0, best },
        NewtonError::Shape => SolverError::BadParams("jacobian shape".into()),
    })?;
    let achieved = sys.eval_f(center, &out.xi).map_err(PdeError::from)?;
    for (a, t) in achieved.iter().zip(&target) {
        if (a - t).abs() > eps / 4.0 {
            return Err(SolverError::BandMiss { cell: 0 });
        }
    }
    Ok((out.xi, out.iterations + 1))
}

/// Sweep a sample cloud of the given per-axis density over every cell and
/// check the band f - eps <= T u <= f pointwise. Returns the residual
/// extremes per component and the cells holding at least one violation.
pub fn verify_residuals(
    sys: &PdeSystem,
    grid: &Grid,
    u: &[NlscFunction],
    eps: f64,
    verify_density: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>), SolverError> {
    let tu = sys.apply_t(u)?;
    let k = tu.len();
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    let mut violating = Vec::new();
    for cell in 0..grid.cell_count() {
        let mut bad = false;
        for x in grid.cell_samples(cell, verify_density) {
            let f = sys.eval_rhs(&x).map_err(PdeError::from)?;
            for j in 0..k {
                let r = tu[j].eval(&x)?.as_f64() - f[j];
                lo[j] = lo[j].min(r);
                hi[j] = hi[j].max(r);
                if r < -eps || r > 0.0 {
                    bad = true;
                }
            }
        }
        if bad {
            violating.push(cell);
        }
    }
    Ok((lo, hi, violating))
}

fn check_admissibility_everywhere(
    sys: &PdeSystem,
    grid: &Grid,
    params: &SolverParams,
) -> Result<(), SolverError> {
    let mut failures = Vec::new();
    for cell in 0..grid.cell_count() {
        let center = grid.cell_center(cell);
        let ok = sys.check_admissibility(
            &center,
            &params.box_lo,
            &params.box_hi,
            params.samples,
            cell_seed(params.seed, 0, cell),
        )?;
        if !ok {
            failures.push(center);
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(SolverError::Admissibility { points: failures })
    }
}

/// Build and verify one approximation at tolerance `eps`, bisecting the
/// grid when verification finds cells outside the band.
pub fn build_approximation(
    sys: &PdeSystem,
    base: &Grid,
    eps: f64,
    params: &SolverParams,
) -> Result<ApproxSolution, SolverError> {
    if !(eps > 0.0) {
        return Err(SolverError::BadSchedule);
    }
    let m = sys.spec().order();
    if params.degree < m {
        return Err(SolverError::BadParams(format!(
            "degree {} is below the operator order {}",
            params.degree, m
        )));
    }
    if params.box_lo.len() != sys.spec().total_len()
        || params.box_hi.len() != sys.spec().total_len()
    {
        return Err(SolverError::BadParams(
            "jet box length must match the jet layout".into(),
        ));
    }
    let block = sys.spec().block_len();
    let k = sys.spec().comps();
    let mut grid = base.clone();
    let mut cells_refined = 0usize;
    let mut newton_steps = 0usize;
    for round in 0..=params.max_refine {
        check_admissibility_everywhere(sys, &grid, params)?;
        let mut comp_polys: Vec<Vec<Poly>> = vec![Vec::with_capacity(grid.cell_count()); k];
        for cell in 0..grid.cell_count() {
            let center = grid.cell_center(cell);
            let (xi, steps) =
                solve_cell(sys, &center, eps, params, cell_seed(params.seed, round, cell))
                    .map_err(|e| match e {
                        SolverError::NoWitness { best, .. } => SolverError::NoWitness { cell, best },
                        SolverError::BandMiss { .. } => SolverError::BandMiss { cell },
                        other => other,
                    })?;
            newton_steps += steps;
            for j in 0..k {
                let jet = &xi[j * block..(j + 1) * block];
                let poly = Poly::from_jet(center.clone(), m, params.degree, jet)
                    .expect("jet layout matches the degree");
                comp_polys[j].push(poly);
            }
        }
        let u: Vec<NlscFunction> = comp_polys
            .into_iter()
            .map(|polys| NlscFunction::from_cell_polys(grid.clone(), polys))
            .collect::<Result<_, _>>()?;
        let verify_density = params.density * params.verify_factor;
        let (lo, hi, violating) = verify_residuals(sys, &grid, &u, eps, verify_density)?;
        if violating.is_empty() {
            let gamma = SingularSet::skeleton(&grid);
            return Ok(ApproxSolution {
                u,
                gamma,
                eps,
                grid,
                residual_lo: lo,
                residual_hi: hi,
                cells_refined,
                newton_steps,
            });
        }
        cells_refined += violating.len();
        if round == params.max_refine {
            return Err(SolverError::RefinementExhausted {
                rounds: round,
                violations: violating.len(),
            });
        }
        grid = grid.bisected();
    }
    unreachable!("loop returns or errors on the last round");
}

/// One row of the regularity table: did this derivative order stabilize?
#[derive(Debug, Clone)]
pub struct RegularityRow {
    pub alpha: Vec<u32>,
    pub cauchy: bool,
    pub gap: f64,
}

#[derive(Debug)]
pub struct GeneralizedSolution {
    pub grid: Grid,
    pub schedule: EpsSchedule,
    pub approximations: Vec<ApproxSolution>,
    /// Regularized tuples v_n, one per schedule entry.
    pub regularized: Vec<Vec<NlscFunction>>,
    pub certificate: ConvergenceReport,
    pub cauchy: CauchyReport,
    pub regularity: Vec<RegularityRow>,
    /// Tolerance the certificate verdicts were taken at (twice the final
    /// schedule entry).
    pub tol: f64,
}

impl GeneralizedSolution {
    pub fn succeeded(&self) -> bool {
        self.certificate.holds && self.cauchy.holds
    }
}

/// Run the schedule, regularize each approximation, and certify that the
/// operator images order-converge to the right-hand side squeezed between
/// f - eps_n and f.
pub fn assemble_generalized_solution(
    sys: &PdeSystem,
    base: &Grid,
    schedule: &EpsSchedule,
    params: &SolverParams,
) -> Result<GeneralizedSolution, SolverError> {
    let k = sys.spec().comps();
    let mut approximations = Vec::with_capacity(schedule.len());
    let mut regularized = Vec::with_capacity(schedule.len());
    let mut images = Vec::with_capacity(schedule.len());
    for (n, &eps) in schedule.values().iter().enumerate() {
        let run_params = SolverParams {
            seed: params.seed.wrapping_add((n as u64) << 20),
            ..params.clone()
        };
        let approx = build_approximation(sys, base, eps, &run_params)?;
        let v: Vec<NlscFunction> = approx.u.iter().map(|f| f.regularize()).collect();
        let tv = sys.apply_t(&v)?;
        approximations.push(approx);
        regularized.push(v);
        images.push(tv);
    }

    let samples = SampleSet::from_grid(base, params.density);
    let tol = 2.0 * schedule.last();
    let seq = FunctionSequence::new(images)?;
    let bounds: Vec<OrderInterval> = schedule
        .values()
        .iter()
        .map(|&eps| OrderInterval {
            lo: (0..k).map(|j| sys.rhs_function(base, j, -eps)).collect(),
            hi: (0..k).map(|j| sys.rhs_function(base, j, 0.0)).collect(),
        })
        .collect();
    let limit: Vec<NlscFunction> = (0..k).map(|j| sys.rhs_function(base, j, 0.0)).collect();
    let certificate = order_converges(&seq, &bounds, &limit, &samples, tol)?;
    // A single-run schedule has no pair of images to compare, so the
    // Cauchy surrogate is vacuous; its precondition needs two items.
    let cauchy = if schedule.len() >= 2 {
        is_order_cauchy(&seq, &samples, tol)?
    } else {
        CauchyReport {
            holds: true,
            nested: true,
            final_gap: 0.0,
            tol,
        }
    };

    let mut gsol = GeneralizedSolution {
        grid: base.clone(),
        schedule: schedule.clone(),
        approximations,
        regularized,
        certificate,
        cauchy,
        regularity: Vec::new(),
        tol,
    };
    if schedule.len() >= 3 {
        gsol.regularity = check_regularity_identification(sys, &gsol, params.density)?;
    }
    Ok(gsol)
}

/// Per derivative order, run the Cauchy surrogate on (D^alpha v_n) off the
/// exceptional set. Orders whose tail envelopes stabilize are the
/// coordinates in which the generalized solution is identifiable.
pub fn check_regularity_identification(
    sys: &PdeSystem,
    gsol: &GeneralizedSolution,
    density: usize,
) -> Result<Vec<RegularityRow>, SolverError> {
    if gsol.regularized.len() < 3 {
        return Err(SolverError::TooFewApproximations {
            got: gsol.regularized.len(),
        });
    }
    let interior = SampleSet::interior_only(&gsol.grid, density);
    let tol = gsol.tol;
    let mut rows = Vec::new();
    for alpha in sys.spec().multis() {
        let mut items = Vec::with_capacity(gsol.regularized.len());
        for tuple in &gsol.regularized {
            let derivs: Vec<NlscFunction> = tuple
                .iter()
                .map(|f| f.partial(alpha))
                .collect::<Result<_, _>>()?;
            items.push(derivs);
        }
        let seq = FunctionSequence::new(items)?;
        let report = is_order_cauchy(&seq, &interior, tol)?;
        rows.push(RegularityRow {
            alpha: alpha.clone(),
            cauchy: report.holds,
            gap: report.final_gap,
        });
    }
    Ok(rows)
}

fn fmt_alpha(alpha: &[u32]) -> String {
    alpha
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Render the run report. Deterministic by construction: cost counters
/// stand in for timing, reals are printed with 17 significant digits, and
/// iteration order is fixed, so identical runs produce identical bytes.
pub fn write_ocrun(gsol: &GeneralizedSolution, params: &SolverParams) -> String {
    let mut out = String::new();
    out.push_str("OCRUN 1\n");
    out.push_str("config {\n");
    out.push_str(&format!("  seed {}\n", params.seed));
    out.push_str(&format!("  degree {}\n", params.degree));
    out.push_str(&format!("  density {}\n", params.density));
    out.push_str(&format!("  verify_factor {}\n", params.verify_factor));
    out.push_str(&format!("  max_refine {}\n", params.max_refine));
    out.push_str(&format!("  samples {}\n", params.samples));
    out.push_str("  box_lo");
    for v in &params.box_lo {
        out.push(' ');
        out.push_str(&fmt_real(*v));
    }
    out.push('\n');
    out.push_str("  box_hi");
    for v in &params.box_hi {
        out.push(' ');
        out.push_str(&fmt_real(*v));
    }
    out.push('\n');
    out.push_str("  schedule");
    for v in gsol.schedule.values() {
        out.push(' ');
        out.push_str(&fmt_real(*v));
    }
    out.push('\n');
    out.push_str(&format!("  tol {}\n", fmt_real(gsol.tol)));
    out.push_str("}\n");

    for approx in &gsol.approximations {
        out.push_str(&format!("eps {} {{\n", fmt_real(approx.eps)));
        out.push_str("  cells");
        for c in approx.grid.cells_per_axis() {
            out.push_str(&format!(" {}", c));
        }
        out.push('\n');
        for j in 0..approx.residual_lo.len() {
            out.push_str(&format!(
                "  residual {} {} {}\n",
                j + 1,
                fmt_real(approx.residual_lo[j]),
                fmt_real(approx.residual_hi[j])
            ));
        }
        out.push_str(&format!("  cells_refined {}\n", approx.cells_refined));
        out.push_str(&format!("  newton_steps {}\n", approx.newton_steps));
        out.push_str("}\n");
    }

    out.push_str("certificate {\n");
    out.push_str(&format!("  converges {}\n", gsol.certificate.holds));
    out.push_str(&format!("  nested {}\n", gsol.certificate.nested));
    out.push_str(&format!("  contained {}\n", gsol.certificate.contained));
    for (n, gap) in gsol.certificate.gaps.iter().enumerate() {
        out.push_str(&format!("  gap {} {}\n", n + 1, fmt_real(*gap)));
    }
    out.push_str(&format!(
        "  final_gap {}\n",
        fmt_real(gsol.certificate.final_gap)
    ));
    out.push_str(&format!("  cauchy {}\n", gsol.cauchy.holds));
    out.push_str(&format!("  cauchy_gap {}\n", fmt_real(gsol.cauchy.final_gap)));
    out.push_str("}\n");

    out.push_str("regularity {\n");
    for row in &gsol.regularity {
        out.push_str(&format!(
            "  alpha {} {} gap {}\n",
            fmt_alpha(&row.alpha),
            row.cauchy,
            fmt_real(row.gap)
        ));
    }
    out.push_str("}\n");
    out
}
