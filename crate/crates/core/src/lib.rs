//! One- and two-sided matching mechanisms built around a unified proposal
//! engine, with exact random-order lotteries, axiom checkers and Borda
//! welfare experiments.

pub mod axioms;
pub mod classic;
pub mod engine;
pub mod enumerate;
pub mod error;
pub mod experiment;
pub mod hungarian;
pub mod io;
pub mod lottery;
pub mod mechanism;
pub mod model;
pub mod rational;
pub mod trace;
pub mod two_sided;
pub mod welfare;

pub use engine::{
    run_engine, Acceptance, Discipline, EngineConfig, EngineResult, Memory, Outcome, TraceEvent,
};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, Metric, OrdersMode, ProfileSampler, WelfareStats};
pub use lottery::{exact_lottery, sampled_lottery, LotteryResult, SampleConfig};
pub use mechanism::{Base, Mechanism, Output};
pub use model::{
    AgentId, AgentOrder, Endowment, FractionalAssignment, ItemId, Matching, PreferenceOrder,
    Profile,
};
pub use rational::Rational;
pub use two_sided::{run_boston_two_sided, run_gale_shapley, BostonMode};
