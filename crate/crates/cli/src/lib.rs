//! Dataset IO, file formats, evaluation reports, and the command-line driver
//! for the IAML data-smoothing toolkit. All algorithmic work lives in
//! `iaml-core`; this crate owns everything that touches the filesystem.

pub mod commands;
pub mod dataset_io;
pub mod report;
