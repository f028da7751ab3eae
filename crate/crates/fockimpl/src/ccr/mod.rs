//! Bosonic (CCR) stack.

pub mod fock;
pub mod implementers;
pub mod structure;
