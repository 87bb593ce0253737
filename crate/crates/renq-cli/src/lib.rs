//! Command-line front end for the `renq` library.
//!
//! The binary target (`renq`) is a thin wrapper over [`app::main_entry`];
//! the logic lives here so integration and acceptance tests can reach the
//! embedded reference tables and the row serializer directly.

pub mod app;
pub mod output;
pub mod tables;
