//! Landau-Ginzburg critical points, their monodromy, and exceptional collections on toric Fano manifolds.

pub mod alignment;
pub mod catalog;
pub mod continuation;
pub mod laurent;
pub mod quiver;
pub mod solver;
pub mod toric;

pub use laurent::C64;
