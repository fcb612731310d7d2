//! Lattice operations on cellwise functions: sup(x, -x) = |x| with the
//! crossing recorded as a singular variety, plus the absorption and
//! distributivity laws on random inputs.
//!
//! Run with `cargo run --example lattice_calculus`.

use ocpde::grid::{Grid, SampleSet};
use ocpde::nlsc::{lattice_inf, lattice_sup, random_cellwise};
use ocpde::nlsc::NlscFunction;
use ocpde::poly::Poly;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn linear(grid: &Grid, slope: f64) -> NlscFunction {
    let polys = (0..grid.cell_count())
        .map(|c| {
            let center = grid.cell_center(c);
            Poly::from_jet(center.clone(), 1, 1, &[slope * center[0], slope]).unwrap()
        })
        .collect();
    NlscFunction::from_cell_polys(grid.clone(), polys).unwrap()
}

fn main() {
    let grid = Grid::new(vec![-1.0], vec![1.0], vec![4]).unwrap();
    let x = linear(&grid, 1.0);
    let neg_x = linear(&grid, -1.0);

    let abs = lattice_sup(&x, &neg_x).unwrap();
    println!("sup(x, -x):");
    for t in [-0.5, 0.0, 0.5] {
        println!("  at {t:+.1}: {}", abs.eval(&[t]).unwrap());
    }
    println!(
        "  crossing recorded as {} singular variet(ies)",
        abs.singular().varieties().len()
    );

    // lattice laws as evaluation equalities on random pairs
    let samples = SampleSet::from_grid(&grid, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let u = random_cellwise(&grid, 2, 0.0, &mut rng);
        let v = random_cellwise(&grid, 2, 0.0, &mut rng);
        let w = random_cellwise(&grid, 2, 0.0, &mut rng);

        // absorption: u ^ (u v v) = u
        let absorbed = lattice_inf(&u, &lattice_sup(&u, &v).unwrap()).unwrap();
        assert!(absorbed.eq_within(&u, &samples, 1e-9).unwrap());

        // distributivity: u ^ (v v w) = (u ^ v) v (u ^ w)
        let left = lattice_inf(&u, &lattice_sup(&v, &w).unwrap()).unwrap();
        let right = lattice_sup(
            &lattice_inf(&u, &v).unwrap(),
            &lattice_inf(&u, &w).unwrap(),
        )
        .unwrap();
        assert!(left.eq_within(&right, &samples, 1e-9).unwrap());
    }
    println!("\nabsorption and distributivity hold on 40 random triples");
}
