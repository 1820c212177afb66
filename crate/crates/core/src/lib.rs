//! Socles and irreducibility of parabolic inductions `u_ρ(a,b)|·|^s ⋊ π`
//! for split odd special orthogonal and symplectic p-adic groups.

pub mod arthur;
pub mod base;
pub mod clrep;
pub mod derivatives;
pub mod engine;
pub mod error;
pub mod glrep;
mod text;

pub use base::{CuspidalLabel, GroupKind, GroupType, HalfInt, Segment};
pub use error::{Error, Result};

// The code samples in the book run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/notation.md")]
    mod notation {}
    #[doc = include_str!("../../../book/src/derivatives.md")]
    mod derivatives {}
    #[doc = include_str!("../../../book/src/engine.md")]
    mod engine {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
