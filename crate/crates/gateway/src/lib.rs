//! Outward interfaces of brics: the `brics` command line and the HTTP session service.

pub mod api;
pub mod cli;
pub mod server;

pub use api::ApiError;
pub use cli::{run_cli, EXIT_DIAGNOSTICS, EXIT_OK, EXIT_REFACTOR, EXIT_USAGE};
pub use server::{router, serve, AppState};
