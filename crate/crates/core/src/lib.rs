//! Matchstick graphs: ingest figure data, verify the unit-distance and
//! non-crossing predicates, refine to machine precision, classify rigidity,
//! follow flexes, detect symmetry and assemble larger graphs from blocks.

pub mod angles;
pub mod assembler;
pub mod error;
pub mod figures;
pub mod flexer;
pub mod geometry;
pub mod ingest;
pub mod linalg;
pub mod refiner;
pub mod render;
pub mod rigidity;
pub mod symmetry;
pub mod verifier;

pub use error::{Error, Result};
pub use geometry::{
    apply_isometry, distance, DegreeProfile, Embedding, Graph, Isometry, IsometryKind, Point2,
    ToleranceProfile,
};
