//! Text mining for short social-media posts: corpus loading and filtering,
//! engagement metrics, preprocessing, term-document matrices, lexicon
//! sentiment, hierarchical clustering and LDA topic models.

pub mod corpus;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod nlp;
pub mod rng;
pub mod sentiment;
pub mod cluster;
pub mod tdm;
pub mod topics;

pub use error::{Error, Result};
pub use exec::Exec;
