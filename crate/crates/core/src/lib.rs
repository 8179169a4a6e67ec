//! Traversable-plane extraction and cross-plane trajectory optimization for
//! differential-drive ground robots in multi-layer built environments.

pub mod artifacts;
pub mod cloud;
pub mod config;
pub mod error;
pub mod extraction;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod mapping;
pub mod optimizer;
pub mod pipeline;
pub mod plane;
pub mod scenes;
pub mod trajectory;

pub use error::{Error, Result};
