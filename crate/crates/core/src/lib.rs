//! Generating functions of walks on metric graphs with transition
//! amplitudes at the vertices, and their relation to scattering matrices
//! of Laplace operators.

pub mod chain;
pub mod error;
pub mod families;
pub mod genfun;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod scattering;
pub mod stats;
pub mod transition;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{Edge, GraphSpec, MetricGraph, Walk};
pub use linalg::{CMatrix, C64};
pub use transition::{BigM, Flags, TransitionCollection};
