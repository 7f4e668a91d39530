//! Cellular sheaves on simplicial complexes, numerical sheaf cohomology and
//! the sampling theory built on it.
//!
//! Everything is generic over a [`Scalar`] (`f32`, `f64`, `Complex<f32>`,
//! `Complex<f64>`); the aliases below fix the common double-precision cases.
//!
//! ```
//! use sheaf_sampling::{zoo, NumericOptions, RealSheaf};
//!
//! let f: RealSheaf = zoo::pl_sheaf(zoo::path_graph(3)).unwrap();
//! let h0 = f.cohomology(0, NumericOptions::default()).unwrap();
//! assert_eq!(h0.dim, 3);
//! ```

pub mod complex;
pub mod linalg;
pub mod sampling;
pub mod scalar;
pub mod sheaf;
pub mod zoo;

pub use num_complex::Complex64;

pub use complex::{Cover, EdgeDistance, Face, FaceId, SimplicialComplex, Vertex};
pub use linalg::{NumericOptions, RankInfo, Tolerance};
pub use sampling::{SamplingReport, SheafMorphism, SimplicialMap, Verdict};
pub use scalar::{ComplexScalar, Scalar, ScalarField};
pub use sheaf::{CellularSheaf, CohomologyResult, SheafBuilder, Violation};

pub type RealSheaf = CellularSheaf<f64>;
pub type ComplexSheaf = CellularSheaf<Complex64>;
pub type RealMorphism = SheafMorphism<f64>;
pub type ComplexMorphism = SheafMorphism<Complex64>;
pub type RealCohomology = CohomologyResult<f64>;
pub type ComplexCohomology = CohomologyResult<Complex64>;
