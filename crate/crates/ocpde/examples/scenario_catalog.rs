//! Run the shipped scenario catalog and print the verdict table, then
//! parse and run a small custom catalog from text.
//!
//! Catalog rows are `name | base-expression | predicate | expected`; the
//! lab evaluates each base-predicate pair exactly and compares against the
//! expected column. Run with `cargo run --example scenario_catalog`.

use ocpde::lab::catalog::{parse_catalog, run_catalog, DEFAULT_CATALOG};

fn main() {
    let scenarios = parse_catalog(DEFAULT_CATALOG).unwrap();
    let report = run_catalog(&scenarios).unwrap();
    print!("{}", report.render());
    assert!(report.all_passed());

    // a custom catalog: same grammar, read from any string or file
    let custom = "\
halving_tail_reaches_zero | sequence_tail(1/n) | converges_completed_line(0) | true
constant_tail_is_cauchy | sequence_tail(const(3/2)) | cauchy_metric | true
plane_point_inside_its_own_base | plane_completion_point(0, pi) | converges_completed_plane(0, pi) | true
";
    let scenarios = parse_catalog(custom).unwrap();
    let report = run_catalog(&scenarios).unwrap();
    println!();
    print!("{}", report.render());
    assert!(report.all_passed());
}
