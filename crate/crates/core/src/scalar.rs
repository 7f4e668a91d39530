//! Scalar fields the library is generic over.
//!
//! Every numerical routine works over any `S: Scalar`, which is a thin
//! extension of [`nalgebra::ComplexField`]. Implementations are provided for
//! `f32`, `f64`, `Complex<f32>` and `Complex<f64>`.

use std::fmt;

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Which field a sheaf's stalks are defined over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Real => f.write_str("real"),
            ScalarField::Complex => f.write_str("complex"),
        }
    }
}

/// A matrix entry type.
///
/// Tolerances and diagnostics are always reported in `f64`, whatever the
/// working precision, so the conversions to and from `f64` live here.
pub trait Scalar: ComplexField + Copy {
    const FIELD: ScalarField;

    /// Builds a value from real and imaginary parts. Returns `None` when a
    /// real scalar is asked to hold a nonzero imaginary part.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    /// `[re, im]`, with `im = 0` for real scalars.
    fn to_parts(self) -> [f64; 2];

    fn real_to_f64(r: Self::RealField) -> f64;

    fn real_from_f64(x: f64) -> Self::RealField;

    fn of_f64(x: f64) -> Self {
        Self::from_real(Self::real_from_f64(x))
    }

    /// Modulus as `f64`.
    fn abs_f64(self) -> f64 {
        Self::real_to_f64(self.modulus())
    }

    /// Machine epsilon of the working precision.
    fn epsilon() -> f64;
}

/// Scalars with an imaginary unit, needed by wave-propagation sheaves.
pub trait ComplexScalar: Scalar {
    fn imaginary_unit() -> Self;
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const FIELD: ScalarField = ScalarField::Real;

            fn from_parts(re: f64, im: f64) -> Option<Self> {
                (im == 0.0).then_some(re as $t)
            }

            fn to_parts(self) -> [f64; 2] {
                [self as f64, 0.0]
            }

            fn real_to_f64(r: $t) -> f64 {
                r as f64
            }

            fn real_from_f64(x: f64) -> $t {
                x as $t
            }

            fn epsilon() -> f64 {
                <$t>::EPSILON as f64
            }
        }
    };
}

macro_rules! complex_scalar {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            const FIELD: ScalarField = ScalarField::Complex;

            fn from_parts(re: f64, im: f64) -> Option<Self> {
                Some(Complex::new(re as $t, im as $t))
            }

            fn to_parts(self) -> [f64; 2] {
                [self.re as f64, self.im as f64]
            }

            fn real_to_f64(r: $t) -> f64 {
                r as f64
            }

            fn real_from_f64(x: f64) -> $t {
                x as $t
            }

            fn epsilon() -> f64 {
                <$t>::EPSILON as f64
            }
        }

        impl ComplexScalar for Complex<$t> {
            fn imaginary_unit() -> Self {
                Complex::new(0.0, 1.0)
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);
complex_scalar!(f32);
complex_scalar!(f64);
