//! Parse operator expressions, evaluate them on jets, and differentiate
//! with respect to jet variables.
//!
//! An operator of order m over K components in n variables acts on the
//! flat jet vector holding all D^alpha u_j with |alpha| <= m, blocks by
//! component, graded-lexicographic within each block. Run with
//! `cargo run --example expression_jets`.

use ocpde::expr::{parse, ExprContext, JetSpec};

fn main() {
    // one component, one space variable, first order: jet = (u1, D[1]u1)
    let spec = JetSpec::new(1, 1, 1);
    let ctx = ExprContext::operator(&spec);
    let expr = parse("(D[1]u1)^2 - sin(x1) * u1", &ctx).unwrap();
    println!("parsed:    {expr}");

    // evaluate at x = pi/2 with jet (u1, u1') = (2, 3): 9 - 1*2 = 7
    let x = [std::f64::consts::FRAC_PI_2];
    let jet = [2.0, 3.0];
    println!(
        "value at x = pi/2, jet (2, 3): {}",
        expr.eval(&x, Some((&spec, &jet))).unwrap()
    );

    // derivative with respect to each jet slot, evaluated at the same point
    for slot in 0..spec.total_len() {
        let d = expr.diff_jet(&spec, slot);
        println!(
            "d/d(jet[{slot}]) = {d}   ->   {}",
            d.eval(&x, Some((&spec, &jet))).unwrap()
        );
    }

    // second order, two space variables: the bracket is the multi-index,
    // so the jet enumerates u1, D[1,0]u1, D[0,1]u1, D[2,0]u1, D[1,1]u1,
    // D[0,2]u1
    let spec = JetSpec::new(2, 1, 2);
    println!("\njet layout for n=2, K=1, m=2 ({} slots):", spec.total_len());
    let ctx = ExprContext::operator(&spec);
    let laplace = parse("D[2,0]u1 + D[0,2]u1", &ctx).unwrap();
    println!("laplacian: {laplace}");
    // harmonic polynomial x^2 - y^2 has jet (., ., ., 2, 0, -2) at any point
    let jet = [0.0, 0.0, 0.0, 2.0, 0.0, -2.0];
    println!(
        "on x^2 - y^2: {}",
        laplace.eval(&[0.3, 0.7], Some((&spec, &jet))).unwrap()
    );
}
