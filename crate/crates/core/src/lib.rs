// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of a controlled-phase gate between two transmon qutrits in
//! separate resonators, mediated by a shared transmission-line mode.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod model;
pub mod normal_modes;

pub use error::{Error, Result};
