//! Implementers of quasi-free endomorphisms of CAR and CCR algebras on
//! truncated Fock spaces.
//!
//! One-particle spaces are `K(k) = C^k ⊕ C^k` in a paired-block basis; a
//! Bogoliubov map `V: K(n) -> K(m)` with `m >= n` models an endomorphism
//! of Fredholm index `2(n - m)`. The crate computes the canonical structure
//! of such maps and builds explicit families of Fock-space isometries
//! implementing them.

pub mod builders;
pub mod car;
pub mod cli;
pub mod ccr;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gauge;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod selfdual;

pub use error::{Error, Result};
pub use selfdual::{BogoliubovMap, Kind};
