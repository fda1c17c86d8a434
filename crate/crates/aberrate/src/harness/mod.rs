//! Sweep orchestration: reproducible Monte-Carlo or grid sampling of
//! aberration spectra, batch image perturbation, metric collection,
//! envelope analysis, and plot emission.
//!
//! A run owns one output directory with a fixed layout:
//!
//! ```text
//! <output_dir>/
//!   config.json        canonical configuration (hash = sha256 prefix)
//!   run.json           non-deterministic metadata (timestamps, version)
//!   sweep.csv          one optical-metrics row per sample id
//!   eval.csv           one evaluation row per sample id with predictions
//!   spectra/<id>.json  the sampled coefficients, exact
//!   perturbed/<id>/<stem>.png    blurred dataset images, 16-bit
//!   predictions/<id>/<stem>.npy  externally produced probability maps
//!   plots/*.svg        analysis figures
//! ```
//!
//! The evaluation loop closes without any bundled ML runtime: a sweep
//! writes perturbed images, any external model writes probability maps
//! next to them, and resuming the same sweep picks those up and appends
//! the evaluation rows.

mod config;
mod envelope;
mod plots;
mod sweep;

pub use config::{CoefficientRange, SamplingMode, SweepConfig};
pub use envelope::{envelope, Envelope, EnvelopeBin};
pub use plots::{emit_plots, reliability_plot, scatter_envelope_plot, shapley_boxplot};
pub use sweep::{load_sweep, run_sweep, EvalSummary, SweepResult, SweepRow};
