//! Numerical building blocks: bracketed root finding, adaptive
//! Gauss–Kronrod quadrature and a Dormand–Prince integrator with dense
//! output.

pub mod ode;
pub mod quad;
pub mod roots;
