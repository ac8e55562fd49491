//! Library half of the `sweetq` command-line tool: config parsing,
//! the run report format, and the synthesis runner shared with tests.

pub mod config;
pub mod report;
pub mod run;
