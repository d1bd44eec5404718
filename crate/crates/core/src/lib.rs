pub mod error;
pub mod experiment;
pub mod gallery;
pub mod linalg;
pub mod multiplier;
pub mod ordering;
pub mod regularization;
pub mod scalar;
pub mod spectral;
pub mod verdict;

pub use error::{Error, Result};
pub use scalar::{DoubleDouble, Scalar};

pub type OperatorMatrixF64 = gallery::OperatorMatrix<f64>;
pub type OperatorMatrixDd = gallery::OperatorMatrix<DoubleDouble>;
pub type SpectrumResultF64 = spectral::SpectrumResult<f64>;
pub type SpectrumResultDd = spectral::SpectrumResult<DoubleDouble>;
