//! Runner, comparison and benchmark harness around the `wgqed` engines.

pub mod bench;
pub mod compare;
pub mod error;
pub mod manifest;
pub mod run;
pub mod sweep;
pub mod table;

pub use error::CliError;
