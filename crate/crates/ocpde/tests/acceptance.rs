//! Acceptance gate: every headline capability checked at its stated
//! tolerance, one pass line per criterion. Run just this gate with
//! `cargo test --test acceptance -- --nocapture`.

use std::fmt::Write as _;
use std::time::Instant;

use ocpde::cli::{
    cmd_lab, cmd_solve, LabArgs, SolveArgs, EXIT_ADMISSIBILITY, EXIT_OK,
};
use ocpde::convergence::{is_order_cauchy, FunctionSequence};
use ocpde::expr::JetSpec;
use ocpde::grid::{Grid, SampleSet};
use ocpde::lab::filter::{
    converges_in_completed_line, converges_in_completed_plane,
    converges_in_product_of_completed_lines, FilterBase,
};
use ocpde::lab::set::{SeqFamily, TaggedSet, TaggedSet1};
use ocpde::lab::sym::SymReal;
use ocpde::nlsc::{
    lattice_inf, lattice_sup, random_cellwise, NlscFunction, Smoothness,
};
use ocpde::pde::PdeSystem;
use ocpde::poly::Poly;
use ocpde::solver::{
    assemble_generalized_solution, build_approximation, EpsSchedule, GeneralizedSolution,
    SolverParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar_system(op: &str, rhs: &str) -> PdeSystem {
    let spec = JetSpec::new(1, 1, 1);
    PdeSystem::new(spec, &[op], &[rhs], Smoothness::Infinite).unwrap()
}

fn unit_grid(cells: usize) -> Grid {
    Grid::new(vec![0.0], vec![1.0], vec![cells]).unwrap()
}

fn params(sys: &PdeSystem, seed: u64) -> SolverParams {
    SolverParams {
        seed,
        ..SolverParams::for_slots(sys.spec().total_len())
    }
}

fn write_config(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

const EIKONAL_CFG: &str = "\
[domain]
lower = 0
upper = 1
cells = 64

[pde]
m = 1
K = 1
F1 = (D[1]u1)^2
f1 = 1

[solver]
schedule = 0.1 0.01 0.001
degree = 1
seed = 1
";

fn solve_into(
    config: &std::path::Path,
    out_dir: &std::path::Path,
) -> (i32, String, String) {
    let args = SolveArgs {
        config: config.to_path_buf(),
        seed: None,
        verify_factor: None,
        density: None,
        out_dir: Some(out_dir.to_path_buf()),
    };
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cmd_solve(&args, &mut out, &mut err).unwrap();
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn criterion_1_eikonal_band_and_skeleton() {
    let sys = scalar_system("(D[1]u1)^2", "1");
    let grid = unit_grid(64);
    let p = params(&sys, 1);
    for eps in [0.1, 0.01, 0.001] {
        let t0 = Instant::now();
        let approx = build_approximation(&sys, &grid, eps, &p).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        // residual extremes inside [-eps, 0], no extra tolerance
        assert!(
            approx.residual_lo[0] >= -eps && approx.residual_hi[0] <= 0.0,
            "eps {eps}: residuals [{}, {}] leave the band",
            approx.residual_lo[0],
            approx.residual_hi[0]
        );
        // the exceptional set is exactly the 63-point cell skeleton
        assert_eq!(approx.gamma.face_count(), 63, "eps {eps}");
        assert!(approx.gamma.varieties().is_empty() && approx.gamma.points().is_empty());
        assert!(elapsed < 5.0, "eps {eps} took {elapsed:.2}s");
    }

    // each epsilon also passes as its own CLI run
    let dir = tempfile::tempdir().unwrap();
    for (i, eps) in ["0.1", "0.01", "0.001"].iter().enumerate() {
        let body = EIKONAL_CFG.replace("schedule = 0.1 0.01 0.001", &format!("schedule = {eps}"));
        let cfg = write_config(dir.path(), &body);
        let (code, out, err) = solve_into(&cfg, &dir.path().join(format!("out{i}")));
        assert_eq!(code, EXIT_OK, "eps {eps}: {err}");
        assert!(out.contains("converges true"), "eps {eps}: {out}");
    }
    println!("PASS criterion 1: eikonal residuals in [-eps, 0] at eps 0.1/0.01/0.001, 63-face skeleton, per-eps solve exits 0");
}

#[test]
fn criterion_2_transport_oracle_and_forced_refinement() {
    let sys = scalar_system("D[1]u1", "cos(x1)");
    let grid = unit_grid(64);
    let p = params(&sys, 1);
    let eps = 0.1;
    let approx = build_approximation(&sys, &grid, eps, &p).unwrap();

    // oracle: an affine cell solve pins the slope to cos(a) - eps/2 at the
    // cell center a, so the residual function is cos(a) - eps/2 - cos(x)
    let tu = sys.apply_t(&approx.u).unwrap();
    let radius = approx.grid.cell_radius();
    for cell in 0..approx.grid.cell_count() {
        let a = approx.grid.cell_center(cell);
        for x in approx.grid.cell_samples(cell, 7) {
            let r = tu[0].eval(&x).unwrap().as_f64() - x[0].cos();
            let oracle = a[0].cos() - eps / 2.0 - x[0].cos();
            assert!(
                (r - oracle).abs() <= 1e-9,
                "cell {cell}: residual {r} vs oracle {oracle}"
            );
            // Lipschitz bound: |r + eps/2| <= cell radius
            assert!(
                (r + eps / 2.0).abs() <= radius,
                "cell {cell}: residual {r} drifts past the cell radius"
            );
        }
    }
    assert_eq!(approx.cells_refined, 0);

    // two cells cannot hold eps = 0.001: refinement must trigger and the
    // count must be reported
    let coarse = unit_grid(2);
    let refined = build_approximation(&sys, &coarse, 0.001, &p).unwrap();
    assert!(refined.cells_refined > 0, "coarse transport must refine");
    assert!(refined.residual_lo[0] >= -0.001 && refined.residual_hi[0] <= 0.0);
    println!(
        "PASS criterion 2: transport residual matches cos(a)-eps/2-cos(x) within 1e-9, coarse run refined {} cells",
        refined.cells_refined
    );
}

fn assemble(sys: &PdeSystem, seed: u64, n: usize) -> GeneralizedSolution {
    let grid = unit_grid(64);
    let schedule = EpsSchedule::harmonic(n);
    assemble_generalized_solution(sys, &grid, &schedule, &params(sys, seed)).unwrap()
}

#[test]
fn criterion_3_order_convergence_certificate() {
    for (op, rhs) in [("(D[1]u1)^2", "1"), ("D[1]u1", "cos(x1)")] {
        let sys = scalar_system(op, rhs);
        let gsol = assemble(&sys, 1, 20);
        assert!(gsol.certificate.holds, "{op}: certificate failed");
        assert!(gsol.certificate.nested && gsol.certificate.contained);
        // the bounds are analytic shifts of one expression, so the final
        // gap is the last schedule entry exactly
        assert_eq!(gsol.certificate.final_gap, 0.05, "{op}");
        assert!(gsol.cauchy.holds, "{op}: cauchy surrogate failed");
        assert!(
            gsol.cauchy.final_gap <= 0.05,
            "{op}: envelope gap {} above 0.05",
            gsol.cauchy.final_gap
        );
    }
    println!("PASS criterion 3: order convergence certified on both systems, final gap exactly 0.05, cauchy gap <= 0.05");
}

#[test]
fn criterion_4_uniqueness_mod_operator() {
    let sys = scalar_system("(D[1]u1)^2", "1");
    let a = assemble(&sys, 1, 8);
    let b = assemble(&sys, 2, 8);

    // merged image sequences from independent seeds stay order-Cauchy at
    // twice the final tolerance: the images agree even though the
    // representatives differ
    let images = |g: &GeneralizedSolution| {
        FunctionSequence::new(
            g.regularized
                .iter()
                .map(|v| sys.apply_t(v).unwrap())
                .collect(),
        )
        .unwrap()
    };
    let merged = FunctionSequence::interleave(&images(&a), &images(&b)).unwrap();
    let samples = SampleSet::from_grid(&a.grid, 3);
    let tol = 2.0 * a.schedule.last();
    let report = is_order_cauchy(&merged, &samples, tol).unwrap();
    assert!(
        report.holds,
        "merged images not cauchy: gap {} tol {tol}",
        report.final_gap
    );

    // the representative itself is quotient freedom: its value coordinate
    // fails the Cauchy test in at least one of the seeds
    let alpha0 = |g: &GeneralizedSolution| {
        g.regularity
            .iter()
            .find(|r| r.alpha == vec![0])
            .expect("alpha 0 row present")
            .cauchy
    };
    assert!(
        !(alpha0(&a) && alpha0(&b)),
        "u itself stabilized in both seeds; quotient freedom not visible"
    );
    println!("PASS criterion 4: merged seed-1/seed-2 image sequences order-Cauchy at 2*eps_N, u itself not pinned");
}

#[test]
fn criterion_5_baire_and_lattice_suite() {
    let grid = Grid::new(vec![-1.0], vec![1.0], vec![4]).unwrap();
    let samples = SampleSet::from_grid(&grid, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut pool: Vec<NlscFunction> = Vec::new();
    let mut failures = 0usize;
    for _ in 0..200 {
        let u = random_cellwise(&grid, 2, 0.1, &mut rng);

        // envelope order and idempotence
        let lo = u.baire_lower();
        let hi = u.baire_upper();
        if !lo.leq(&u, &samples).unwrap() || !u.leq(&hi, &samples).unwrap() {
            failures += 1;
        }
        let once = u.regularize();
        if !once.eq_within(&once.regularize(), &samples, 0.0).unwrap() {
            failures += 1;
        }

        // lattice laws on a rolling triple
        pool.push(u);
        if pool.len() >= 3 {
            let [u, v, w] = &pool[pool.len() - 3..] else {
                unreachable!()
            };
            let sup_uv = lattice_sup(u, v).unwrap();
            let absorb = lattice_inf(u, &sup_uv).unwrap();
            let distr_l = lattice_inf(u, &lattice_sup(v, w).unwrap()).unwrap();
            let distr_r =
                lattice_sup(&lattice_inf(u, v).unwrap(), &lattice_inf(u, w).unwrap()).unwrap();
            for x in samples.points() {
                if sup_uv.eval(x).unwrap() != lattice_sup(v, u).unwrap().eval(x).unwrap() {
                    failures += 1;
                }
                if absorb.eval(x).unwrap() != u.eval(x).unwrap() {
                    failures += 1;
                }
                if distr_l.eval(x).unwrap() != distr_r.eval(x).unwrap() {
                    failures += 1;
                }
            }
        }
    }
    assert_eq!(failures, 0, "{failures} law violations on 200 random functions");

    // sup(x, -x) evaluates to |x| exactly
    let linear = |slope: f64| {
        let polys = (0..grid.cell_count())
            .map(|c| {
                let center = grid.cell_center(c);
                Poly::from_jet(center.clone(), 1, 1, &[slope * center[0], slope]).unwrap()
            })
            .collect();
        NlscFunction::from_cell_polys(grid.clone(), polys).unwrap()
    };
    let abs = lattice_sup(&linear(1.0), &linear(-1.0)).unwrap();
    assert_eq!(abs.eval(&[0.0]).unwrap().as_f64(), 0.0);
    assert_eq!(abs.eval(&[0.5]).unwrap().as_f64(), 0.5);
    assert_eq!(abs.eval(&[-0.5]).unwrap().as_f64(), 0.5);
    println!("PASS criterion 5: envelope and lattice laws hold on 200 random functions, sup(x,-x) = |x| exactly");
}

#[test]
fn criterion_6_admissibility_gate() {
    let grid = unit_grid(64);
    let good = scalar_system("(D[1]u1)^2", "1");
    let bad = scalar_system("(D[1]u1)^2", "0");
    let p = params(&good, 1);
    for cell in 0..grid.cell_count() {
        let center = grid.cell_center(cell);
        assert!(good
            .check_admissibility(&center, &p.box_lo, &p.box_hi, p.samples, cell as u64)
            .unwrap());
        assert!(!bad
            .check_admissibility(&center, &p.box_lo, &p.box_hi, p.samples, cell as u64)
            .unwrap());
    }

    // the CLI surfaces the failure as exit 3
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &EIKONAL_CFG.replace("f1 = 1", "f1 = 0"));
    let (code, _, err) = solve_into(&cfg, &dir.path().join("out"));
    assert_eq!(code, EXIT_ADMISSIBILITY, "{err}");
    assert!(err.contains("64 cell center(s)"), "{err}");
    println!("PASS criterion 6: f=1 admissible at all 64 centers, f=0 inadmissible everywhere with exit 3");
}

#[test]
fn criterion_7_completion_counterexamples() {
    let sqrt2 = SymReal::sqrt2();
    let pi = SymReal::pi();
    let zero = SymReal::zero();

    // full neighborhoods of sqrt2 do not converge to the adjoined point
    let full = FilterBase::neighborhood(sqrt2.clone(), false);
    assert!(!converges_in_completed_line(&full, &sqrt2).unwrap());

    // the characteristic base does: rational approximants with the point
    let characterization = FilterBase::meet(
        FilterBase::sequence_tail(SeqFamily::SqrtTwoApprox, 1),
        FilterBase::principal(TaggedSet::One(TaggedSet1::point(sqrt2.clone()))).unwrap(),
    )
    .unwrap();
    assert!(converges_in_completed_line(&characterization, &sqrt2).unwrap());

    // the pair (1/n, pi) splits the two completions of the plane
    let pair = FilterBase::sequence_tail2(SeqFamily::Recip, SeqFamily::Const(pi.clone()), 1);
    assert!(converges_in_product_of_completed_lines(&pair, &zero, &pi).unwrap());
    assert!(!converges_in_completed_plane(&pair, &zero, &pi).unwrap());

    // the shipped catalog agrees
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cmd_lab(&LabArgs { catalog: None }, &mut out, &mut err).unwrap();
    assert_eq!(code, EXIT_OK, "{}", String::from_utf8_lossy(&out));
    println!("PASS criterion 7: all four completion booleans exact, shipped catalog exits 0");
}

#[test]
fn criterion_8_regularity_identification() {
    // zeroth-order system pins the value itself
    let value_sys = scalar_system("u1", "sin(x1)");
    let gsol = assemble(&value_sys, 5, 8);
    let row0 = gsol
        .regularity
        .iter()
        .find(|r| r.alpha == vec![0])
        .unwrap();
    assert!(row0.cauchy, "zeroth-order system must pin alpha = (0)");

    // transport pins the slope, never the value, across seeds
    let transport = scalar_system("D[1]u1", "cos(x1)");
    for seed in [1, 2] {
        let gsol = assemble(&transport, seed, 8);
        let eps_n = gsol.schedule.last();
        let row = |alpha: &[u32]| {
            gsol.regularity
                .iter()
                .find(|r| r.alpha == alpha)
                .unwrap()
                .clone()
        };
        let slope = row(&[1]);
        assert!(slope.cauchy, "seed {seed}: slope must stabilize");
        assert!(
            slope.gap <= eps_n,
            "seed {seed}: slope gap {} above eps_N {eps_n}",
            slope.gap
        );
        assert!(!row(&[0]).cauchy, "seed {seed}: value must stay free");
    }
    println!("PASS criterion 8: alpha=(0) pinned by the zeroth-order system, transport pins alpha=(1) with gap <= eps_N and leaves alpha=(0) free");
}

#[test]
fn criterion_9_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let body = EIKONAL_CFG.replace("schedule = 0.1 0.01 0.001", "schedule = 0.1 0.05 0.025");
    let cfg = write_config(dir.path(), &body);
    let (code1, report1, _) = solve_into(&cfg, &dir.path().join("a"));
    let (code2, report2, _) = solve_into(&cfg, &dir.path().join("b"));
    assert_eq!(code1, EXIT_OK);
    assert_eq!(code2, EXIT_OK);
    assert_eq!(report1, report2, "reports differ across identical runs");

    let mut compared = String::new();
    for entry in std::fs::read_dir(dir.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs across identical runs");
        let _ = write!(compared, " {}", name.to_string_lossy());
    }
    assert!(compared.contains("report.ocrun"));
    assert!(compared.contains(".nlscf"));
    println!("PASS criterion 9: byte-identical artifacts across two runs:{compared}");
}
