//! Lagrange finite elements, quadrature and degree-of-freedom maps.

pub mod quadrature;
pub mod reference;
pub mod space;

pub use quadrature::{QuadratureDomain, QuadratureRule};
pub use reference::{ElementMap, Polynomial, ReferenceElement};
pub use space::{lagrange_interpolate, DiscreteSpace};
