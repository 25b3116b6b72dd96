//! Projection of multiparty session types onto local types, with an
//! availability-guarded merge for receptions from different senders, and a
//! bounded checker for the resulting communicating state machines.

pub mod analysis;
pub mod automata;
pub mod cli;
pub mod csm;
pub mod projection;
pub mod syntax;
