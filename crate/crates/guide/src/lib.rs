//! The book chapters, compiled so that every snippet runs as a doctest.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}
#[doc = include_str!("../../../book/src/expressions.md")]
pub mod expressions {}
#[doc = include_str!("../../../book/src/algebras.md")]
pub mod algebras {}
#[doc = include_str!("../../../book/src/classification.md")]
pub mod classification {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/reduction.md")]
pub mod reduction {}
#[doc = include_str!("../../../book/src/solutions.md")]
pub mod solutions {}
#[doc = include_str!("../../../book/src/numerics.md")]
pub mod numerics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
