//! Exact computations with finitely presented groups and their rational
//! representations.

pub mod constructions;
pub mod fox;
pub mod fpgroup;
pub mod linalg;
pub mod parse;
pub mod rep;
pub mod report;
pub mod subgroup;
pub mod word;
