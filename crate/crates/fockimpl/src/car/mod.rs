//! Fermionic (CAR) stack.

pub mod fock;
pub mod implementers;
pub mod statistics;
pub mod structure;
pub mod wick;
