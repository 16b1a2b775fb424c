//! Elastic bending energies of narrow inextensible ribbons.
//!
//! A ribbon is reconstructed from its centerline as the rectifying
//! developable. Its width-integrated bending energy reduces to a one
//! dimensional functional of the centerline, the Wunderlich family
//! `F_ε = ∫ κ²(1+η²)² g(ε η') ds`, whose `ε → 0` limit is the Sadowsky
//! functional `F = ∫ κ²(1+η²)² ds`. This crate evaluates both, integrates
//! the full two dimensional energy for comparison, minimizes them over
//! centerlines, and runs the experiments in [`gamma_lab`].
//!
//! | module | contents |
//! |---|---|
//! | [`curve`] | spectral centerlines, Frenet quantities, constraint diagnostics |
//! | [`energy`] | kernel `g`, integrands, `F`, `F_ε`, regularized `F`, dimensional `E` |
//! | [`surface`] | rectifying developable, principal curvature, 2D energy, meshes |
//! | [`solver`] | penalized objective, finite-difference gradient, BFGS |
//! | [`gamma_lab`] | ε-sweeps, minimizer convergence, semicontinuity probes |
//! | [`cli`] | the `ribbonlim` command line and file formats |

pub mod cli;
pub mod curve;
pub mod energy;
pub mod error;
pub mod gamma_lab;
pub mod io;
pub mod quadrature;
pub mod shapes;
pub mod solver;
pub mod surface;

pub use curve::{BasisKind, BoundaryData, ConstraintSet, CurveSpec, EndCondition, FrenetSample};
pub use energy::{eval_g, EnergyValue};
pub use error::{Result, RibbonError};
pub use quadrature::QuadratureScheme;
