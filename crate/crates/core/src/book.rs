// The guide chapters under book/src are plain mdbook markdown whose code
// fences are ordinary rustdoc doctests. Including them here keeps every
// snippet in the book compiling and passing under `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/coefficients.md")]
mod coefficients {}

#[doc = include_str!("../../../book/src/kernels.md")]
mod kernels {}

#[doc = include_str!("../../../book/src/means.md")]
mod means {}

#[doc = include_str!("../../../book/src/identities.md")]
mod identities {}

#[doc = include_str!("../../../book/src/conditions.md")]
mod conditions {}

#[doc = include_str!("../../../book/src/experiments.md")]
mod experiments {}

#[doc = include_str!("../../../book/src/formats.md")]
mod formats {}
