//! Library surface of the `kptau` command-line tool: the configuration
//! schema, shared by the binary and its integration tests.

pub mod config;
