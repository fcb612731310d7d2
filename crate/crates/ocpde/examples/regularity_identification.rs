//! Which derivative orders of the approximating sequence stabilize?
//!
//! The generalized solution is an equivalence class modulo the operator:
//! any two tuples with the same image are identified. The regularity table
//! asks, per derivative order alpha, whether (D^alpha v_n) is order-Cauchy
//! off the skeleton. Orders that pass are genuinely pinned down by the
//! equation; orders that fail are quotient freedom, not solver error.
//!
//! Run with `cargo run --example regularity_identification`.

use ocpde::expr::JetSpec;
use ocpde::grid::Grid;
use ocpde::nlsc::Smoothness;
use ocpde::pde::PdeSystem;
use ocpde::solver::{assemble_generalized_solution, EpsSchedule, SolverParams};

fn run(name: &str, op: &str, rhs: &str, seed: u64) {
    let spec = JetSpec::new(1, 1, 1);
    let sys = PdeSystem::new(spec, &[op], &[rhs], Smoothness::Infinite).unwrap();
    let grid = Grid::new(vec![0.0], vec![1.0], vec![64]).unwrap();
    let schedule = EpsSchedule::harmonic(8);
    let params = SolverParams {
        seed,
        ..SolverParams::for_slots(sys.spec().total_len())
    };
    let gsol = assemble_generalized_solution(&sys, &grid, &schedule, &params).unwrap();
    println!("{name}: {op} = {rhs}");
    for row in &gsol.regularity {
        let alpha: Vec<String> = row.alpha.iter().map(u32::to_string).collect();
        println!(
            "  alpha = ({}) cauchy = {:5} gap = {:.4e}",
            alpha.join(","),
            row.cauchy,
            row.gap
        );
    }
}

fn main() {
    // zeroth-order system: the equation pins the value itself, so
    // alpha = (0) stabilizes
    run("zeroth-order", "u1", "sin(x1)", 5);
    println!();
    // transport pins the slope but the value only up to the local Newton
    // start, so alpha = (1) stabilizes and alpha = (0) shows the quotient
    run("transport", "D[1]u1", "cos(x1)", 5);
}
