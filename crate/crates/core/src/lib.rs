//! Lipschitz learning on random geometric graphs.
//!
//! Build a point cloud in a domain, connect it into a weighted geometric
//! graph, and solve the graph infinity-Laplace equation with label
//! constraints. Supporting modules cover graph distances, continuum-side
//! nonlocal operators and the convergence experiments.

pub mod amle;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod nonlocal;
pub mod shortest_path;
pub mod spatial;

pub use error::{Error, Result};
