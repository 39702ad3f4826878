//! Doc-test anchors for the guide in `book/` and the README: each file is
//! included as rustdoc so its code blocks compile and run with the crate's
//! test suite.

#[doc = include_str!("../../../README.md")]
pub mod readme {}

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/formulas.md")]
pub mod formulas {}

#[doc = include_str!("../../../book/src/encodings.md")]
pub mod encodings {}

#[doc = include_str!("../../../book/src/solving.md")]
pub mod solving {}

#[doc = include_str!("../../../book/src/shrinking.md")]
pub mod shrinking {}

#[doc = include_str!("../../../book/src/covers.md")]
pub mod covers {}

#[doc = include_str!("../../../book/src/primes.md")]
pub mod primes {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
