//! Numerical model of the hyperkähler metric on the complexified adjoint
//! orbit of a Grassmannian, and of its tangent-bundle description.

pub mod algebra;
pub mod error;
pub mod hyperkahler;
pub mod linalg;
pub mod mostow;
pub mod oracle;
pub mod orbit;
pub mod roots;
pub mod speccalc;
pub mod tangent;

pub use error::{Error, Result};
