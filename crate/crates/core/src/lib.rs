//! Online k-median with outliers under bounded recourse.
//!
//! The engine keeps `k` medians while points arrive one at a time. It runs
//! local search on the penalty-truncated metric `d_p = min(d, p)`, applies a
//! swap only when it lowers `cost_p` by a margin proportional to the current
//! cost, and doubles `p` whenever too many points sit at the cap. Besides
//! the online engine the crate ships the offline bicriteria solver and
//! brute-force oracles used to check both on small instances.
//!
//! ```
//! use kmedo_core::{MetricSpace, OnlineConfig, OnlineState, PointId, Setting};
//!
//! let pts: Vec<[f64; 2]> = vec![[0.0, 0.0], [0.2, 0.1], [9.0, 9.0], [9.1, 8.8], [50.0, -40.0]];
//! let space = MetricSpace::euclidean(&pts).unwrap();
//! let config = OnlineConfig { setting: Setting::FEqualsC, ..OnlineConfig::new(2, 1) };
//! let mut engine = OnlineState::new(config, &space, None).unwrap();
//! for j in 0..pts.len() {
//!     let report = engine.insert(PointId(j)).unwrap();
//!     assert!(report.outliers as f64 <= engine.outlier_threshold());
//! }
//! assert_eq!(engine.current_solution().medians.len(), 2);
//! ```

pub mod error;
pub mod instance;
pub mod ledger;
pub mod metric;
pub mod online;
pub mod oracle;
pub mod search;

pub use error::{Error, Result};
pub use instance::{Instance, RecourseLog, RecourseStep, Solution, COST_OFFSET};
pub use ledger::{Assignment, AssignmentLedger};
pub use metric::{DiameterBounds, DiameterCache, MetricSpace, PointId};
pub use online::{
    initial_penalty, outlier_threshold, widened_budget, EpochTransition, OnlineConfig, OnlineState, Setting,
    StepReport, ZMode,
};
pub use search::{
    find_efficient_swap, is_efficient, local_search_to_optimum, offline_bicriteria, offline_bicriteria_from,
    offline_penalty_local_search, offline_penalty_local_search_from, BicriteriaParams, BicriteriaResult,
    PenaltySearchResult, ScoredSwap, SearchOutcome, SearchParams, Strategy, SwapCandidate,
};
