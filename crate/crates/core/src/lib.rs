//! Pulse-level simulation and analysis of a hyperfine-coupled NV electron
//! spin and ¹³C nuclear spin quantum memory.
//!
//! * [`spin`]: Hamiltonian, eigenstates, dressed couplings, pulses.
//! * [`dissipation`]: optical pumping rate model, storage decay, electron
//!   spin flips.
//! * [`sequence`]: the pulse-sequence language and its timing checks.
//! * [`experiments`]: canned protocols (Rabi, FID, purification, transfer,
//!   CPMG, extended decoupling).
//! * [`fitkit`]: Levenberg-Marquardt fits for cosines, exponentials and the
//!   pumping rates.
//! * [`cli`]: the `nvmem` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod spin;
pub mod dissipation;
pub mod sequence;
pub mod fitkit;
pub mod experiments;
pub mod cli;
