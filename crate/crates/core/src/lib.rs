pub mod atlas;
pub mod embed;
pub mod layout;
pub mod metrics;
pub mod predictor;
pub mod store;
