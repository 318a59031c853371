//! Executable calculus for generalized smooth functions over asymptotic
//! gauge rings: eps-net arithmetic with three-valued decision procedures,
//! sharp/Fermat topologies, smooth eps-parametrized functions with exact
//! derivatives, distribution embeddings via mollifier nets, and certified
//! local/global inverse function theorems.

pub mod acceptance;
pub mod config;
pub mod embedding;
pub mod error;
pub mod examples;
pub mod expr;
pub mod gauge;
pub mod gen_num;
pub mod global_inverse;
pub mod gsf_fn;
pub mod local_inverse;
pub mod logval;
pub mod mollifier;
pub mod probes;
pub mod quad;
pub mod report;
pub mod sets;
pub mod verdict;

pub use config::Config;
pub use error::GsfError;
pub use gauge::{Context, Ctx, EpsGrid, Gauge};
pub use gen_num::{GenMatrix, GenNum, GenPoint};
pub use verdict::{Truth, Verdict, Witness};
