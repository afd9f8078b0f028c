//! Library surface of the CLI: file formats, command implementations and the
//! layered-instance generator. The binary in `main.rs` is a thin argument
//! parser over [`commands`].

pub mod commands;
pub mod formats;
pub mod gen;
