//! Core algorithms for IoU-augmented maximum likelihood (IAML) data smoothing.
//!
//! Everything in this crate is pure computation: bounding-box geometry, the
//! exponentiated payoff distribution over IoU reward indices, the Monte Carlo
//! coordinate sampler, IoU-threshold evaluation metrics, and a desk-scale
//! autoregressive coordinate-token model with analytic gradients. File
//! formats, dataset plumbing, and the command-line driver live in the
//! companion `iaml-cli` crate.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! only adds `std::error::Error` impls for the error types.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod element;
pub mod geometry;
mod math;
pub mod metrics;
pub mod payoff;
pub mod sampler;
pub mod toy;

pub use element::UIElement;
pub use geometry::{BBox, Point, RawBBox};
