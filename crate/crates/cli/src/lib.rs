//! The `matchstick` command-line tool and its HTTP API.
//!
//! [`run`] is the whole CLI (argument parsing included) so it can be driven
//! from tests; [`server::router`] is the API without a socket.

mod assemble;
mod cli;
mod input;
pub mod json;
pub mod server;

pub use assemble::AssemblyReport;
pub use cli::{
    run, AnglesOutput, Cli, FigureEntry, FlexOutput, IngestOutput, RefineOutput, RenderOutput, RigidityOutput,
    SymmetryOutput, VerifyOutput,
};
pub use input::CliError;
