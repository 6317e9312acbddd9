//! Sentiment polarity and emotion mining for short technical texts.
//!
//! The crate is organised around the stages of a classification run:
//!
//! - [`corpus`]: CSV ingestion, gold labels, emotion-to-polarity mapping and
//!   dataset breakdowns.
//! - [`textproc`]: tokenization, sentence splitting, n-grams and tf-idf.
//! - [`features`]: lexicon, word-space, politeness and mood extractors and the
//!   per-document feature assembly.
//! - [`learner`]: linear solvers, cost tuning, evaluation and the on-disk
//!   training layout.
//! - [`pipeline`]: the reader / router / workers / writer executor that keeps
//!   output in input order.
//! - [`bench`]: speedup measurement on top of the pipeline.

pub mod bench;
pub mod corpus;
mod error;
pub mod features;
pub mod learner;
pub mod pipeline;
pub mod resources;
pub mod textproc;

pub use error::{Error, Result};
