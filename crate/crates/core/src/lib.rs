//! Toolkit for analysing and detecting hate speech in labeled short-text corpora.
//!
//! The pipeline stages live in separate modules: [`corpus`] ingestion and
//! tokenization, [`features`] n-gram featurization, the averaged
//! [`perceptron`], [`eval`] cross-validation, [`lexstats`] vocabulary-bias
//! statistics, [`clustering`] of context vectors, lexicon-based [`sentiment`],
//! and username/profile [`cues`]. The [`cli`] module wires them into the
//! `hsdetect` binary.

pub mod cli;
pub mod clustering;
pub mod corpus;
pub mod cues;
pub mod error;
pub mod eval;
pub mod features;
pub mod lexstats;
pub mod perceptron;
pub mod sentiment;
pub mod synthetic;

pub use error::{Error, ErrorKind, Result};
