//! Compiles every code listing of the guide as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/conventions.md")]
pub mod conventions {}
#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}
#[doc = include_str!("../../../book/src/nonlinear.md")]
pub mod nonlinear {}
#[doc = include_str!("../../../book/src/march.md")]
pub mod march {}
#[doc = include_str!("../../../book/src/q-ansatz.md")]
pub mod q_ansatz {}
#[doc = include_str!("../../../book/src/cli-io.md")]
pub mod cli_io {}
