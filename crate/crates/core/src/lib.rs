//! Participatory budgeting over approval ballots.
//!
//! The crate is split the same way an experiment is run:
//!
//! * [`model`] holds instances, budgets and the feasibility/satisfaction
//!   predicates everything else is written against.
//! * [`rules`] elects budgets: sequential Chamberlin-Courant, sequential
//!   Monroe and single transferable vote, plus brute-force optima used as
//!   test oracles.
//! * [`axioms`] checks elected budgets for U-justified representation and
//!   strong B-justified representation.
//! * [`culture`] draws seeded impartial-culture instances.
//! * [`harness`] runs the Monte Carlo study and writes CSV results.

pub mod axioms;
pub mod culture;
pub mod error;
pub mod harness;
pub mod model;
pub mod rules;

pub use error::{Error, Result};
pub use model::{Assignment, Budget, Instance, Money, ProjectId, Ranking, VoterId};
