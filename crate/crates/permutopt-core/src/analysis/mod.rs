//! Empirical verification and statistics over completed runs: domain
//! coverage by iterate cubes, contraction/stall diagnostics, intra-class
//! correlation, and run-matrix summaries.

mod contraction;
mod coverage;
mod icc;
mod summary;
mod verify;

pub use contraction::{contraction_profile, ContractionProfile, RateBoundDiagnostic};
pub use coverage::{
    coverage_report, default_cube_radius, CoverageConfig, CoverageGrid, CoverageReport,
};
pub use icc::{icc, IccReport, IccVariant};
pub use summary::{summarize_runs, RunSummaryRow};
pub use verify::verify_event_isometry;
