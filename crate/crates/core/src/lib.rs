//! Short-time feature extraction and cohort statistics for wearable biosignals.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`] parses subject directories, cleans RR streams and cuts
//!   clock-aligned analysis windows tagged awake/asleep.
//! * [`features`] computes per-window measures: short-time energy of motion,
//!   Lomb-Scargle band powers, sample entropy, Higuchi and multiscale fractal
//!   dimension, and Poincaré SD1/SD2.
//! * [`aggregate`] reduces window records to per-subject summaries and daily
//!   sleep/wake and step statistics.
//! * [`stats`] runs Mann-Whitney U tests with Benjamini-Hochberg adjustment and
//!   renders report tables and boxplot data.
//! * [`synth`] generates synthetic two-group cohorts with planted effects.
//! * [`pipeline`] ties the stages together for the command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod config;
pub mod error;
pub mod features;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod stats;
pub mod store;
pub mod synth;
pub mod time;

pub use error::{Error, Result};
