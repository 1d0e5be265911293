//! Equivariant constant mean curvature tori in the 3-sphere.

// `!(x < y)` is used on purpose to reject NaN along with out of range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod flow;
pub mod genus0;
pub mod moduli;
pub mod ode;
pub mod spectral;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};

/// The user guide in `book/`, compiled here so its examples run as doc-tests.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/elliptic.md")]
    pub mod elliptic {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    pub mod spectral {}
    #[doc = include_str!("../../../book/src/genus0.md")]
    pub mod genus0 {}
    #[doc = include_str!("../../../book/src/flow.md")]
    pub mod flow {}
    #[doc = include_str!("../../../book/src/surface.md")]
    pub mod surface {}
    #[doc = include_str!("../../../book/src/moduli.md")]
    pub mod moduli {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
