//! Transport equation u' = cos(x) on a deliberately coarse grid.
//!
//! With two cells and a tight tolerance the per-cell linear pieces cannot
//! hold the residual inside [-eps, 0]; verification catches the violating
//! cells and the solver bisects the grid until the band holds. Run with
//! `cargo run --example transport_refinement`.

use ocpde::expr::JetSpec;
use ocpde::grid::Grid;
use ocpde::nlsc::Smoothness;
use ocpde::pde::PdeSystem;
use ocpde::solver::{build_approximation, SolverParams};

fn main() {
    let spec = JetSpec::new(1, 1, 1);
    let sys = PdeSystem::new(spec, &["D[1]u1"], &["cos(x1)"], Smoothness::Infinite).unwrap();
    let params = SolverParams {
        seed: 7,
        ..SolverParams::for_slots(sys.spec().total_len())
    };

    // comfortable case: 64 cells hold eps = 0.1 without refinement
    let fine = Grid::new(vec![0.0], vec![1.0], vec![64]).unwrap();
    let approx = build_approximation(&sys, &fine, 0.1, &params).unwrap();
    println!(
        "64 cells, eps 0.1:   residuals [{:+.4e}, {:+.4e}], cells refined {}",
        approx.residual_lo[0], approx.residual_hi[0], approx.cells_refined
    );

    // starved case: 2 cells cannot hold eps = 0.001, so rounds of bisection
    // kick in until every cell passes
    let coarse = Grid::new(vec![0.0], vec![1.0], vec![2]).unwrap();
    let approx = build_approximation(&sys, &coarse, 0.001, &params).unwrap();
    println!(
        "2 cells,  eps 0.001: residuals [{:+.4e}, {:+.4e}], cells refined {}, final grid {} cells",
        approx.residual_lo[0],
        approx.residual_hi[0],
        approx.cells_refined,
        approx.grid.cell_count()
    );
    assert!(approx.cells_refined > 0, "coarse grid must refine");

    // the residual of an affine piece against cos is cos(a) - eps/2 - cos(x)
    // near the cell center a, so its size is bounded by the cell radius
    let radius = approx.grid.cell_radius();
    println!("final cell radius {radius:.4e} bounds the residual spread around -eps/2");
}
