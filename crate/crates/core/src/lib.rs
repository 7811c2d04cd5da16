//! Frequency-quadrilateral edge scoring and iterative sparsification of
//! symmetric TSP instances.
//!
//! The pipeline: parse a TSPLIB instance ([`tsplib`]), score every edge by
//! the average number of optimal four-vertex paths it lies on across the
//! quadrilaterals containing it ([`quad`]), then repeatedly keep the top two
//! thirds of edges until a stop rule fires ([`sparsify`]). [`analysis`]
//! measures the outcome against a known optimal tour.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod quad;
pub mod sparsify;
pub mod tsplib;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{Adjacency, Edge, Graph};
pub use tsplib::{parse_instance, parse_tour, parse_tour_unsized, EdgeWeightKind, Instance, Tour};
