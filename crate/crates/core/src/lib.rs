//! Faces, normal cones and fiber bodies of Gram spectrahedra of binary
//! sextics and ternary quartics.

pub mod error;
pub mod fiberbody;
pub mod gram;
pub mod linalg;
pub mod polyalg;
pub mod quartic;
pub mod scalar;
pub mod sdp;
pub mod sextic;

pub use error::{GramError, Result};
pub use linalg::{Matrix, RationalMat, SymMat};
pub use num_rational::BigRational;
pub use polyalg::{Form, MonomialOrder};
pub use scalar::{Real, Scalar};

pub type Form64 = Form<f64>;
pub type FormQ = Form<BigRational>;
pub type SymMat64 = SymMat<f64>;
pub type SymMatQ = SymMat<BigRational>;
