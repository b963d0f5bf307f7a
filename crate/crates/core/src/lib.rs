//! Symbolic-numeric machinery for the approximate symmetry analysis of the
//! dissipative wave equation `u_tt = [f(u) u_x]_x + eps [lambda(u) u_t]_xx`.
//!
//! The crate is layered bottom-up: [`exprcore`] is a small computer algebra
//! kernel, [`numerics`] holds the quadrature/root/ODE routines, [`liealg`]
//! handles vector fields and subalgebra normal forms, [`models`] builds the
//! perturbation-split PDE pairs, [`reduction`] applies invariant ansatze and
//! [`solutions`] is the verified catalog.

pub mod exprcore;
pub mod liealg;
pub mod models;
pub mod numerics;
pub mod reduction;
pub mod solutions;

pub use exprcore::{parse, Expr};
