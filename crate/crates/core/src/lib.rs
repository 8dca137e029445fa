//! Success probability of offline noisy multiple selection ("horse-race"
//! selection with goal softening) when observed and true candidate qualities
//! are coupled by a bivariate copula.
//!
//! The crate is split into layers that build on each other:
//!
//! * [`specfun`]: standard normal density, CDF, quantile and Q-function, plus
//!   the exponential Q-function sandwich used by the Gaussian bound.
//! * [`copula`]: the five supported copula families, their joint and
//!   conditional CDFs, and seeded pair sampling.
//! * [`selection`]: the success probability itself, by one-dimensional
//!   quadrature, brute-force simplex quadrature and Monte Carlo, together with
//!   the general bounds and the large-`n` limits.
//! * [`gbound`]: the analytic lower bound for the Gaussian copula, its
//!   numerical certificate and the inversion to a sufficient sample size.
//!
//! ```
//! use ordsel::copula::CopulaModel;
//! use ordsel::selection::{success_quadrature, SelectionProblem};
//!
//! let clayton = CopulaModel::clayton(1.0).unwrap();
//! let problem = SelectionProblem::new(3, 1, 0.5).unwrap();
//! let p = success_quadrature(&clayton, &problem, 1e-12).unwrap();
//! assert!((p.value - (9.0 - 12.0 * 2f64.ln())).abs() < 1e-10);
//! ```

pub mod copula;
mod error;
pub mod gbound;
pub mod quad;
pub mod rng;
pub mod selection;
pub mod specfun;

pub use error::{Error, Result};
