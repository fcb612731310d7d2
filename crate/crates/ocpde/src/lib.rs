//! Computing generalized solutions of smooth nonlinear PDE systems by
//! order completion, together with a small exact-arithmetic lab for the
//! order and filter constructions underneath the method.
//!
//! The crate has three layers:
//!
//! * cellwise function machinery: grids, polynomial pieces, singular
//!   sets, Baire envelopes and the lattice calculus ([`nlsc`], [`poly`],
//!   [`grid`], [`extreal`], [`convergence`]),
//! * the solver: jet-space systems, local Newton solves, epsilon
//!   approximations and assembled generalized solutions ([`expr`],
//!   [`pde`], [`newton`], [`solver`], [`dump`]),
//! * the completion lab: exact symbolic reals, tagged sets and filter
//!   refinement checks ([`lab`]).
//!
//! See the `examples/` directory for one runnable walkthrough per
//! capability; the `ocpde` binary wraps the same entry points for use
//! from scripts.

pub mod cli;
pub mod config;
pub mod convergence;
pub mod dump;
pub mod expr;
pub mod extreal;
pub mod grid;
pub mod lab;
pub mod newton;
pub mod nlsc;
pub mod pde;
pub mod poly;
pub mod solver;
