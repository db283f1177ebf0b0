//! Exact quantum predictions for small bipartite systems and Monte Carlo
//! simulation of local hidden-variable models.

pub mod acceptance;
pub mod bell;
pub mod error;
pub mod filters;
pub mod format;
pub mod lhv;
pub mod measure;
pub mod qmat;
pub mod states;

pub use bell::{ChshResult, ChshSettings, CorrelationMatrix};
pub use error::{Error, Result};
pub use filters::{FilterOutcome, LocalFilter};
pub use lhv::{HiddenVar, JointTable, McEstimate};
pub use measure::{BlochVector, Observable, Povm, ProjectiveMeasurement};
pub use qmat::{CMatrix, EigenDecomposition, Ket, Side, C64};
pub use states::DensityMatrix;
