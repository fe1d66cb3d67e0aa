//! HTTP API and command-line pipeline over a [`fundscape`] corpus snapshot.
//!
//! The service loads one snapshot and, optionally, a model registry at
//! startup. Requests only read precomputed tables and trained models;
//! landscapes are computed on first request and kept in a bounded cache.

pub mod api;
pub mod commands;
pub mod config;
pub mod error;
pub mod schema;
pub mod state;
pub mod views;

pub use api::{router, serve, serve_state};
pub use config::ServiceConfig;
pub use error::{ApiError, ServiceError};
pub use state::{AppState, LandscapeCache, LandscapeKey};
