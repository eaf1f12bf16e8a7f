//! Configuration, CSV output, command drivers and the validation suite behind the
//! `gcselect` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod validation;
