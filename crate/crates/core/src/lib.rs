//! Numerical laboratory for the Schwarzian derivative as a variational object.
//!
//! * [`symbolics`]: expressions over `(t,u,p,q,r)`, symbolic partials, Taylor arithmetic.
//! * [`schwarzian`]: pointwise Schwarzian-type quantities and boundary terms.
//! * [`closed_form`]: exact solution families of the fourth-order Euler–Lagrange equation.
//! * [`el_ode`]: adaptive integration of that equation with first-integral monitoring.
//! * [`ode_geometry`]: generalized Wünschmann invariants and linearizations of `u'''' = F`.
//! * [`variation`]: functionals, first variations and the extended-variation critical-point test.

pub mod closed_form;
pub mod curve;
pub mod el_ode;
pub mod error;
pub mod jet;
pub mod ode_geometry;
pub mod quadrature;
pub mod schwarzian;
pub mod symbolics;
pub mod variation;

pub use error::{Error, Result};
pub use jet::{Jet4, VarJet};
