//! Degree-bounded variable elimination for systems of Boolean equations.
//!
//! The crate is organised bottom-up:
//!
//! - [`boolring`]: polynomials in the Boolean ring `F2[x]/(x^2 + x)`.
//! - [`gf2linalg`]: bit-packed GF(2) matrices over monomial columns,
//!   splitting by variable and by degree.
//! - [`elim`]: the elimination algorithms (linearized and resultant-based,
//!   each with and without the quadratic-harvesting loop).
//! - [`oracle`]: exhaustive, unbounded reference computations used to check
//!   everything above on small systems.
//! - [`ciphers`]: two reduced block ciphers and their attack equation systems.
//! - [`analysis`]: the key-fit procedure and the information measure.
//! - [`format`]: the text format for equation systems.
//! - [`suites`]: randomized checks of the algorithms against the oracles.
//!
//! ```
//! use boolelim::boolring::BoolPoly;
//! use boolelim::elim::{eliminate_a, PolySystem};
//!
//! // x0 = x1 and x0 = x2 imply x1 = x2 once x0 is gone.
//! let f2: Vec<BoolPoly> = ["x0 + x1", "x0 + x2"].iter().map(|s| s.parse().unwrap()).collect();
//! let sys = PolySystem::from_polys(f2, 3).unwrap();
//! let out = eliminate_a(&sys, 0).unwrap();
//! assert_eq!(out.f2(), &["x1 + x2".parse::<BoolPoly>().unwrap()]);
//! ```

pub mod analysis;
pub mod boolring;
pub mod ciphers;
pub mod elim;
pub mod error;
pub mod format;
pub mod gf2linalg;
pub mod oracle;
pub mod suites;

pub use boolring::{BoolPoly, Monomial, MonomialOrder, Var};
pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/boolean-ring.md")]
    mod boolean_ring {}
    #[doc = include_str!("../../../book/src/linear-algebra.md")]
    mod linear_algebra {}
    #[doc = include_str!("../../../book/src/elimination.md")]
    mod elimination {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/ciphers.md")]
    mod ciphers {}
    #[doc = include_str!("../../../book/src/information-loss.md")]
    mod information_loss {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
