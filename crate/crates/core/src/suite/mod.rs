//! Example catalog, configuration and reports.

pub mod catalog;
pub mod config;
pub mod report;

pub use catalog::{example_info, list_examples, sweep, verify, ExampleInfo};
pub use config::{OutputFormat, SuiteConfig, CONFIG_ENV};
pub use report::{Bound, CheckRecord, CheckReport, Expectation, SweepPoint, SweepReport, Witness};
