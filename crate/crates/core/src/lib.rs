//! Orbit graphs of non-deterministic substitutions, their hierarchical
//! tilings, and the reductions that turn tiling problems on those graphs
//! into finite constraint problems.
//!
//! The crate is organized around one pipeline:
//!
//! * [`substitution`]: alphabets, production rules, expanding eigenvalues.
//! * [`orbit`]: parent functions, accumulation tables, orbit patches and
//!   their labeled graphs.
//! * [`geometry`]: tile polygons, patch layouts, binary block layouts and
//!   SVG rendering.
//! * [`superposition`]: the symbol alphabet read off from overlaying a
//!   hierarchical tiling on the binary reference tiling, plus the forbidden
//!   triple rules and the witness coloring.
//! * [`lift`]: binary block graphs, seam pasting, lifted symbol checks and
//!   the power/interleaving reduction.
//! * [`surface`]: the genus-2 surface group: octagon complex, sphere growth,
//!   Dehn reduction, direction SFT, coordinate bijection and pattern
//!   transport.
//! * [`solver`]: a generic finite-patch SFT solver with an exhaustive
//!   oracle and a radius-nested semi-decision wrapper.

pub mod config;
pub mod error;
pub mod geometry;
pub mod lift;
pub mod orbit;
pub mod solver;
pub mod substitution;
pub mod superposition;
pub mod surface;

pub use config::Config;
pub use error::{Diagnostic, Error, Result};
