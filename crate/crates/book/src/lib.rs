//! Runs the code blocks of the mdbook guide as doc-tests, one module per
//! chapter so a failure points at its chapter.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/polynomials.md")]
pub mod polynomials {}
#[doc = include_str!("../../../book/src/bethe.md")]
pub mod bethe {}
#[doc = include_str!("../../../book/src/qq.md")]
pub mod qq {}
#[doc = include_str!("../../../book/src/reconstruct.md")]
pub mod reconstruct {}
#[doc = include_str!("../../../book/src/canonical.md")]
pub mod canonical {}
#[doc = include_str!("../../../book/src/limits.md")]
pub mod limits {}
#[doc = include_str!("../../../book/src/special.md")]
pub mod special {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
