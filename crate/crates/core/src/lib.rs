//! Finite-basis Hartree–Fock numerics: Gaussian integrals, the energy
//! functional and its Lagrangian, SCF, Hessian spectra, multi-start surveys
//! and an exact radial solver for closed-shell s-states.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod hfcore;
pub mod integrals;
pub mod linalg;
pub mod molbasis;
pub mod radial;
pub mod scf;
pub mod spectra;
pub mod survey;

pub use error::{Error, Result};
pub use integrals::IntegralTables;
pub use molbasis::{Atom, BasisName, BasisSet, Convention, Molecule};
