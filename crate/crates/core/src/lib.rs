//! Symbolic and numeric analysis of degenerate Lagrangian systems.
//!
//! The crate is `no_std` with `alloc`. Everything symbolic is exact; numeric
//! integration uses `f64` with `libm`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod symexpr;
pub mod linalg;
pub mod phase;
pub mod legendre;
pub mod sample;
pub mod dirac;
pub mod dynamics;
