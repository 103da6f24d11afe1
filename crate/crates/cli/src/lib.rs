//! Command-line surface over `ternary-au`: instance files, reports, and the
//! classify / enumerate / verify / generate commands.

pub mod commands;
pub mod instance_file;
pub mod report;

pub use commands::{cmd_classify, cmd_enumerate, cmd_generate, cmd_verify, cmd_verify_with, GenerateOptions, Options, Output};
pub use report::{Format, Report};
