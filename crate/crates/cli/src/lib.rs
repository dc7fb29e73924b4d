//! Front end for the term graph toolkit: text formats, let notation,
//! elaboration into cospans, built-in algebras, and the `tg` command
//! dispatcher.

pub mod algebras;
pub mod commands;
pub mod dot;
pub mod elaborate;
pub mod error;
pub mod format;
pub mod letprog;

pub use commands::run_command;
pub use elaborate::elaborate;
pub use error::CliError;
pub use letprog::{parse_let, Binding, LetProgram};
