//! Numerical toolkit for twisted (SL(N), q)-opers with regular singularities
//! and the XXZ Bethe ansatz equations they encode.
//!
//! The pipeline runs from Bethe roots through Baxter polynomials and the
//! QQ-system to the sections of a Miura q-oper, and certifies each step by an
//! explicit polynomial identity:
//!
//! ```
//! use qoper::{bethe::{BetheProblem, solve_newton}, reconstruct::correspondence_check};
//! use qoper::polycore::cr;
//!
//! let prob = BetheProblem::builder(2, cr(2.0))
//!     .kappa(vec![cr(1.0 / 3.0), cr(3.0)])
//!     .puncture(cr(1.0), vec![1])
//!     .roots(vec![1])
//!     .build()
//!     .unwrap();
//! let (roots, report) = solve_newton(&prob, None, 7, 4).unwrap();
//! assert!(report.converged);
//! assert!((roots.u[0][0] - cr(0.625)).norm() < 1e-10);
//! let cert = correspondence_check(&prob, &roots).unwrap();
//! assert!(cert.pass);
//! ```

pub mod bethe;
pub mod canonical;
mod error;
pub mod polycore;
pub mod qqsys;
pub mod reconstruct;
pub mod selftest;
pub mod special;
pub mod structpoly;
pub mod wronskian;

pub use error::{Error, Result};
pub use polycore::{Cx, Poly, QFrame, ToleranceConfig};
