//! Runs the code listings of the guide as doc-tests.

#[doc = include_str!("../../../book/src/index.md")]
pub mod index {}
#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}
#[doc = include_str!("../../../book/src/corpus.md")]
pub mod corpus {}
#[doc = include_str!("../../../book/src/manipulations.md")]
pub mod manipulations {}
#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}
#[doc = include_str!("../../../book/src/proxy.md")]
pub mod proxy {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
