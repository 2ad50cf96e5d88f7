//! Clifford quantum cellular automata as a quantum computing model.

pub mod clifford;
pub mod compiler;
pub mod cqca;
pub mod dense;
pub mod error;
pub mod mbqc;
pub mod pauli;
pub mod pqc;
pub mod resource;
pub mod rng;
pub mod stabilizer;

pub use clifford::{CliffordMap, CliffordTable};
pub use cqca::{Cqca, CqcaClassification, CqcaKind, Lemma2Coefficients, Which};
pub use error::{CaqcError, Result};
pub use pauli::{Letter, LocalPauliPattern, PauliProduct};
pub use dense::{DenseState, Gate};
pub use stabilizer::{MeasurementRecord, StabilizerCode};
pub use compiler::{GateSetReport, Rotation, RotationKind, RotationLayerProgram};
pub use mbqc::{ByproductLedger, MbqcConfig, MbqcRun, UtMap};
pub use resource::{Family, GeneratorRole, LatticeCode};
pub use pqc::{Dataset, ExperimentConfig, ExperimentResult, GradMethod, ModelSpec, PqcModel, TrainConfig, TrainingLog};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
