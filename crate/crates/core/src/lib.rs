//! Deterministic 2D navigation simulator with a global planner, plan-aware
//! observation layouts, a shaped reward, a staged curriculum and a small
//! policy learner.

pub mod curriculum;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod observation;
pub mod parallel;
pub mod planner;
pub mod policy;
pub mod reward;
pub mod sensing;
pub mod trajectory;
pub mod waypoints;
pub mod world;

pub use error::{NavError, Result};
