//! Alerting urban sound toolkit.
//!
//! The crate covers the whole classical side of a siren/horn detection and
//! localisation pipeline:
//!
//! * [`gammatone`]: ERB-spaced gammatone filterbank and gammatonegrams.
//! * [`scene`]: labelled stereo scene synthesis with Doppler, inter-channel
//!   time/level cues, echoes and SNR-controlled traffic noise.
//! * [`masking`]: ideal segmentation masks, mask application, the 2-D
//!   cross-gammatonegram and masked waveform reconstruction.
//! * [`doa`]: GCC-PHAT time-difference estimation, angle conversion, median
//!   smoothing of streaming estimates and evaluation metrics.
//! * [`container`], [`manifest`], [`config`] and [`cli`]: on-disk formats and
//!   the `sdsp` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audio;
pub mod cli;
pub mod config;
pub mod container;
pub mod doa;
pub mod dsp;
mod error;
pub mod gammatone;
pub mod manifest;
pub mod masking;
pub mod pipeline;
pub mod scene;
pub mod specs;

pub use error::{Error, Result};

/// Sample rate every on-disk audio file uses.
pub const SAMPLE_RATE: u32 = 44_100;
