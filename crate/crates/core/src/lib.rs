//! Bias auditing for fake-news detectors: corpora, content features,
//! group-difference statistics, baseline detectors, evaluation, distribution
//! similarity, and LLM-driven corpus generation.

pub mod corpus;
pub mod textfeat;
pub mod stats;
pub mod models;
pub mod eval;
pub mod mauve;
pub mod llmgen;
pub mod synthetic;
