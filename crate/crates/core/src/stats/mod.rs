//! Densities, embedding probabilities and the error function.
//!
//! * [`density`]: exact relative densities by full enumeration of edges.
//! * [`embed`]: probabilities that a random partitionwise map reproduces the
//!   visible part of a complex, exactly or by Monte Carlo.
//! * [`error_table`]: the mean-square deviation `eta`, the BAD colors and
//!   the error function `delta`.
//! * [`report`]: counting probes and the certified regularity score.

pub mod density;
pub mod embed;
pub mod error_table;
pub mod plan;
pub mod report;

pub use density::{density_table, DensityTable};
pub use embed::{conditional_embed_probability, embed_probability, Estimate};
pub use error_table::{bad_colors, delta_table, eta, ErrorEntry, ErrorTable, SampleBudget};
pub use plan::{SamplingMode, SamplingPlan};
pub use report::{
    counting_check, default_probes, regularity_report, report_from_table, ErrorBudget, ProbeRecord,
    RegularityReport,
};
