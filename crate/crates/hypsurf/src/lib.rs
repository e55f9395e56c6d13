//! Configuration, mesh formats, diagnostics and the command-line pipeline
//! around [`hypsurf_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod error;
pub mod format;
pub mod obj;
pub mod report;
pub mod run;
pub mod table;

pub use error::{Error, Result};
