pub mod error;
pub mod grid;
mod quad;
pub mod weights;
pub mod maxop;
pub mod seminorm;
pub mod capacity;
pub mod geometry;
pub mod report;
pub mod experiments;
pub mod cli;
