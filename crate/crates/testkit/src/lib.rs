//! Test support for fundscape: adversarial random corpora and brute-force
//! reference implementations that work on raw link lists only.

pub mod corpus;
pub mod http;
pub mod layout;
pub mod oracles;
pub mod predictor;

pub use corpus::random_corpus;
