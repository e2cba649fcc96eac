//! Command-line laboratory for split-and-average min-norm regression:
//! experiment configs and presets, Monte-Carlo sweeps over shard counts,
//! bound curves, real-dataset subsample runs, and deterministic CSV/SVG
//! emission.

pub mod config;
pub mod errors;
pub mod plot;
pub mod presets;
pub mod realdata;
pub mod sweep;
pub mod table;
