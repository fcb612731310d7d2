//! Baire envelopes on a step function: lower, upper, and the composition
//! that lands on the normal lower semicontinuous cut.
//!
//! A cellwise function is ambiguous on the grid skeleton where cells meet.
//! The lower envelope takes the infimum of the incident-cell limits there,
//! the upper envelope the supremum, and applying lower after upper fixes
//! the class the solver works in. Run with `cargo run --example
//! baire_envelopes`.

use ocpde::grid::{Grid, SampleSet};
use ocpde::nlsc::{random_cellwise, NlscFunction};
use ocpde::poly::Poly;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // a step: 0 on the left cell, 1 on the right cell, singular at x = 0
    let grid = Grid::new(vec![-1.0], vec![1.0], vec![2]).unwrap();
    let step = NlscFunction::from_cell_polys(
        grid.clone(),
        vec![
            Poly::constant(grid.cell_center(0), 0.0),
            Poly::constant(grid.cell_center(1), 1.0),
        ],
    )
    .unwrap();

    let lower = step.baire_lower();
    let upper = step.baire_upper();
    let normal = step.regularize();

    println!("value at the jump x = 0:");
    println!("  lower envelope  I(u)    = {}", lower.eval(&[0.0]).unwrap());
    println!("  upper envelope  S(u)    = {}", upper.eval(&[0.0]).unwrap());
    println!("  regularized     I(S(u)) = {}", normal.eval(&[0.0]).unwrap());

    // I <= id <= S pointwise, and I(S(.)) is idempotent; spot-check the
    // laws on a batch of random cellwise functions
    let samples = SampleSet::from_grid(&grid, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..50 {
        let u = random_cellwise(&grid, 2, 0.1, &mut rng);
        let lo = u.baire_lower();
        let hi = u.baire_upper();
        assert!(lo.leq(&u, &samples).unwrap());
        assert!(u.leq(&hi, &samples).unwrap());
        let once = u.regularize();
        let twice = once.regularize();
        assert!(once.eq_within(&twice, &samples, 0.0).unwrap());
        checked += 1;
    }
    println!("\nI <= id <= S and I(S) idempotent on {checked} random cellwise functions");
}
