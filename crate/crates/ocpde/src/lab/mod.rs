//! The completion lab: exact verification of order and filter
//! counterexamples.
//!
//! Everything in here is symbolic. Numbers are affine expressions over one
//! tagged constant ([`sym::SymReal`]), sets are finite unions of tagged
//! intervals, points and sequence tails ([`set::TaggedSet`]), and filters are
//! monotone generator families with a closed normal form
//! ([`filter::FilterBase`]). The point is that verdicts like "this base does
//! not converge in the completion" are discharged by exact set inclusion, not
//! by floating-point sampling, so a counterexample verified here is verified,
//! full stop.

pub mod catalog;
pub mod filter;
pub mod set;
pub mod sym;
