//! Critical sets of arrangement master functions.
//!
//! A library for weighted families of parallelly transported hyperplane
//! arrangements: matroid combinatorics, Orlik-Solomon / flag spaces, the
//! Gauss-Manin operators K_j(x), the critical set of the master function,
//! the associated Lagrangian variety, and the characteristic variety of
//! the Gauss-Manin differential equations. Exact rational arithmetic is
//! used wherever an identity is exact; the numerical layers carry
//! explicit residuals and tolerances.

pub mod arrangement;
pub mod critical;
pub mod fixtures;
pub mod lagrangian;
pub mod laurent;
pub mod linalg;
pub mod operators;
pub mod osflag;
pub mod rational;
pub mod report;
pub mod transport;
