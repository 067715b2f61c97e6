//! Generalized Wasserstein distance between finite discrete measures of
//! possibly different mass, and a sample-and-hold Lagrangian scheme for
//! transport equations whose velocity and source depend on the measure.
//!
//! * [`measures`]: weighted atom clouds and their elementary operations.
//! * [`transport`]: exact balanced `W_p` with dual certificates.
//! * [`gw`]: `W^{a,b}_p`, its brute-force oracle, and the Lévy–Prokhorov
//!   comparator.
//! * [`flows`]: measure-dependent vector fields and pushforward by their flows.
//! * [`dynamics`]: the scheme, its Cauchy diagnostics and the
//!   continuous-dependence experiment.
//! * [`lab`]: file formats, verification suites and the CLI plumbing.
//!
//! The narrative guide lives in `book/` at the repository root; its code
//! listings are compiled and run as doc-tests of this crate.
//!
//! ```
//! use gwass::gw::{gw_distance, GwParams};
//! use gwass::measures::DiscreteMeasure;
//!
//! let mu = DiscreteMeasure::dirac(vec![0.0], 1.0)?;
//! let nu = DiscreteMeasure::dirac(vec![3.0], 1.0)?;
//! let result = gw_distance(&mu, &nu, &GwParams::new(1.0, 1.0, 1.0)?)?;
//! assert_eq!(result.value, 2.0); // min{2a, bx}: removal wins
//! # Ok::<(), gwass::Error>(())
//! ```

// `!(x > 0.0)` style comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod flows;
pub mod gw;
pub mod lab;
pub mod mcf;
pub mod measures;
pub mod transport;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/distance.md")]
    mod distance {}
    #[doc = include_str!("../../../book/src/transport.md")]
    mod transport {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/scheme.md")]
    mod scheme {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
