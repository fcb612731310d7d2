//! The exact number type underneath the completion lab.
//!
//! A symbolic real is q + r*c with q, r rational and c one of sqrt2, pi, e.
//! Comparisons are decided exactly: same-constant comparisons reduce to a
//! sign test, rational-versus-constant comparisons shrink a nested rational
//! enclosure of c until it separates the operands. Run with
//! `cargo run --example exact_reals`.

use std::cmp::Ordering;

use ocpde::lab::sym::{parse_sym, SymReal};

fn main() {
    let sqrt2 = SymReal::sqrt2();
    let half_sqrt2 = parse_sym("sqrt2/2").unwrap();

    // 1.41421356... vs 1.4142: decided by shrinking the enclosure
    let close = parse_sym("7071/5000").unwrap();
    println!("sqrt2 vs 7071/5000: {:?}", sqrt2.try_cmp(&close).unwrap());
    assert_eq!(sqrt2.try_cmp(&close).unwrap(), Ordering::Greater);

    // sqrt2/2 = 1/sqrt2 exactly: affine arithmetic keeps it symbolic
    let doubled = half_sqrt2.scale_int(2, 1);
    println!("2 * (sqrt2/2) == sqrt2: {}", doubled == sqrt2);

    // enclosures narrow on demand; ten digits of each constant
    for name in ["sqrt2", "pi", "e"] {
        let c = parse_sym(name).unwrap();
        let (lo, hi) = c.enclosure(10);
        println!("{name}: {} < {name} < {}", lo, hi);
    }

    // mixing two different constants in one affine form is rejected, so
    // every representable number stays exactly comparable
    let e = SymReal::euler();
    let pi = SymReal::pi();
    println!("pi + e: {:?}", pi.add(&e).unwrap_err());

    // cross-constant comparisons still work through enclosures
    println!("pi vs e: {:?}", pi.try_cmp(&e).unwrap());
}
