//! Project manifests, the iteration runner, report comparison and a
//! read-only SPARQL endpoint, built on `kgf-core`.

pub mod diff;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod serve;

pub use diff::{diff_iterations, read_summary, IterationDiff};
pub use manifest::{load_manifest, parse_manifest, ManifestError, Overrides, ProjectManifest, Serialization};
pub use pipeline::{run_iteration, run_stages, Stage};
pub use report::{IterationReport, ReportSummary, StageRecord, StageStatus};
