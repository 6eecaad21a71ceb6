//! In-process toy engine: synthetic data, counted execution, a cost model
//! and a few optimizer strategies.

pub mod backend;
pub mod cost;
pub mod data;
pub mod exec;
pub mod optimizer;
pub mod space;
pub mod synth;
pub mod work;

pub use backend::{RuntimeMode, ToyBackend, ToyConfig};
pub use cost::{plan_cost, CostModel, CostModelConfig, Noisy, QueryStats, Truthful};
pub use data::{ColumnDistribution, Database, GeneratorConfig, Relation};
pub use exec::{execute_plan, execute_with_budget, Execution, Outcome, ResultDigest, Rows};
pub use optimizer::{optimize, Optimized, Strategy};
pub use space::{enumerate_plan_space, exact_performance_factor, space_summary, SpaceSummary, DEFAULT_ENUMERATION_BOUND};
pub use synth::{synthetic_query, QueryShape, SynthConfig, SyntheticQuery};
