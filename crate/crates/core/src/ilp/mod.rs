//! Rule learning from weighted examples: search-space generation, example
//! construction from episodes, coverage, and the optimal-hypothesis search.

mod bias;
mod coverage;
mod examples;
mod search;
mod task;

pub use bias::{generate_search_space, BiasConfig, BiasError, SearchSpace};
pub use coverage::CoverageMatrix;
pub use examples::{accepted, build_wcdpis, penalty_from_return, score, ExampleError, Wcdpi};
pub use search::{learn, merge_examples, LearnResult, Learner, LearnerConfig, LearnerError};
pub use task::{IlpTask, TaskError};
