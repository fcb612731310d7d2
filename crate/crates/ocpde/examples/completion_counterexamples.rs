//! The two filter counterexamples the completion lab exists to check,
//! verified with exact arithmetic.
//!
//! First: on the rational line, the full neighborhood filter of sqrt(2)
//! does not converge to the point the completion adjoins at sqrt(2); the
//! characteristic base (rational trace plus the adjoined point) does. So
//! convergence in the completed line is strictly finer than having a
//! Cauchy trace.
//!
//! Second: the pair sequence (1/n, pi) converges in the product of two
//! completed lines but not in the completed plane, so completing
//! coordinatewise and completing the plane are different operations.
//!
//! Run with `cargo run --example completion_counterexamples`.

use ocpde::lab::filter::{
    converges_in_completed_line, converges_in_completed_plane,
    converges_in_product_of_completed_lines, is_cauchy_metric, FilterBase,
};
use ocpde::lab::set::{SeqFamily, TaggedSet, TaggedSet1};
use ocpde::lab::sym::SymReal;

fn main() {
    let sqrt2 = SymReal::sqrt2();
    let pi = SymReal::pi();
    let zero = SymReal::zero();

    // full neighborhoods of sqrt(2), restricted to the rational line
    let full = FilterBase::neighborhood(sqrt2.clone(), false);
    let traced = FilterBase::neighborhood(sqrt2.clone(), true);

    println!("line completion at sqrt2:");
    println!(
        "  full neighborhoods Cauchy on the trace: {}",
        is_cauchy_metric(&FilterBase::trace_rationals(full.clone()).unwrap()).unwrap()
    );
    println!(
        "  full neighborhoods converge:            {}",
        converges_in_completed_line(&full, &sqrt2).unwrap()
    );
    println!(
        "  traced neighborhoods converge:          {}",
        converges_in_completed_line(&traced, &sqrt2).unwrap()
    );
    assert!(!converges_in_completed_line(&full, &sqrt2).unwrap());
    assert!(converges_in_completed_line(&traced, &sqrt2).unwrap());

    // the rational approximants 1, 14/10, 141/100, ... with the point
    // adjoined: the base characterizing convergence at sqrt2
    let approximants = FilterBase::meet(
        FilterBase::sequence_tail(SeqFamily::SqrtTwoApprox, 1),
        FilterBase::principal(TaggedSet::One(TaggedSet1::point(sqrt2.clone()))).unwrap(),
    )
    .unwrap();
    println!(
        "  approximants + adjoined point converge: {}",
        converges_in_completed_line(&approximants, &sqrt2).unwrap()
    );

    // the pair sequence H = (1/n, pi)
    let pair = FilterBase::sequence_tail2(SeqFamily::Recip, SeqFamily::Const(pi.clone()), 1);
    println!("\npair sequence (1/n, pi):");
    println!(
        "  converges in product of completed lines: {}",
        converges_in_product_of_completed_lines(&pair, &zero, &pi).unwrap()
    );
    println!(
        "  converges in the completed plane:        {}",
        converges_in_completed_plane(&pair, &zero, &pi).unwrap()
    );
    assert!(converges_in_product_of_completed_lines(&pair, &zero, &pi).unwrap());
    assert!(!converges_in_completed_plane(&pair, &zero, &pi).unwrap());

    // a fully rational pair has no such obstruction
    let rational_pair = FilterBase::sequence_tail2(SeqFamily::Recip, SeqFamily::Recip, 1);
    println!(
        "  rational pair (1/n, 1/n) in the plane:   {}",
        converges_in_completed_plane(&rational_pair, &zero, &zero).unwrap()
    );
}
