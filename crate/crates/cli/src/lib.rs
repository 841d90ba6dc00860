//! Config-driven runner for the Cournot mean-field game solver: presets,
//! TOML run configurations, CSV/SVG export and run manifests.

pub mod config;
pub mod error;
pub mod export;
pub mod plots;
pub mod presets;
pub mod run;

pub use config::{Problem, RunConfig};
pub use error::RunError;
pub use export::{export_field, export_series, FieldWhich, SeriesKind};
pub use plots::emit_plots;
pub use presets::{preset, PRESETS};
pub use run::{run, run_with, solve, verify_manifest, RunManifest};
