//! Finite relational structures, their stabilized lifts, and the
//! automorphism-group and interpretation machinery used to compare them.

pub mod corpus;
pub mod exec;
pub mod interp;
pub mod lift;
pub mod logic;
pub mod perm;
pub mod report;
pub mod stability;
pub mod structure;
