//! Solve the eikonal equation (u')^2 = 1 on (0, 1) at three tolerances.
//!
//! For each epsilon the solver places one linear piece per cell whose slope
//! squares to a value inside [1 - eps, 1], so the piecewise function solves
//! the equation up to eps everywhere off the cell skeleton. Run with
//! `cargo run --example eikonal_solve`.

use ocpde::expr::JetSpec;
use ocpde::grid::Grid;
use ocpde::nlsc::Smoothness;
use ocpde::pde::PdeSystem;
use ocpde::solver::{build_approximation, SolverParams};

fn main() {
    let spec = JetSpec::new(1, 1, 1);
    let sys = PdeSystem::new(spec, &["(D[1]u1)^2"], &["1"], Smoothness::Infinite).unwrap();
    let grid = Grid::new(vec![0.0], vec![1.0], vec![64]).unwrap();
    let params = SolverParams {
        seed: 1,
        ..SolverParams::for_slots(sys.spec().total_len())
    };

    for eps in [0.1, 0.01, 0.001] {
        let approx = build_approximation(&sys, &grid, eps, &params).unwrap();
        println!(
            "eps = {eps:>6}: residual range [{:+.6e}, {:+.6e}], skeleton faces = {}, newton steps = {}",
            approx.residual_lo[0],
            approx.residual_hi[0],
            approx.gamma.face_count(),
            approx.newton_steps,
        );
        // the residual band [-eps, 0] is the defining property
        assert!(approx.residual_lo[0] >= -eps && approx.residual_hi[0] <= 0.0);
    }

    // sample the last approximation: slopes are near +-1, values continuous
    let approx = build_approximation(&sys, &grid, 0.001, &params).unwrap();
    let u = &approx.u[0];
    println!("\nu at a few points:");
    for x in [0.1, 0.25, 0.5, 0.75, 0.9] {
        println!("  u({x:.2}) = {:+.6}", u.eval(&[x]).unwrap().as_f64());
    }
}
