//! Distributed unknown-input observers: existence conditions, gain
//! synthesis, coupling-gain certificates and simulation.

pub mod benchmark;
pub mod designer;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod simulator;

pub use designer::{CouplingGraph, CouplingMode, ObserverDesign};
pub use error::{DuioError, Result};
pub use graph::{SwitchingSchedule, Topology};
pub use model::{NodeIO, SystemModel};
