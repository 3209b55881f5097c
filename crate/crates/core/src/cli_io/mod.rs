//! Command line, configuration, file formats, reports and figures.

pub mod cli;
pub mod config;
pub mod grid_file;
pub mod render;
pub mod report;

pub use cli::cli_main;
pub use config::{FieldConfig, RunConfig};
pub use grid_file::{read_grid, write_grid, BsgHeader};
pub use render::{render_disc, RenderInput};
pub use report::ReportDocument;
