//! Numerical rank, kernels and ranges via the singular value decomposition.

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular value decomposition of a {rows}x{cols} matrix did not converge")]
    NoConvergence { rows: usize, cols: usize },
}

/// Smallest admissible ratio between the smallest kept and the largest
/// dropped singular value.
pub const DEFAULT_MIN_GAP_RATIO: f64 = 1e3;

/// Rank threshold on singular values.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tolerance {
    /// `max(rows, cols) * eps * sigma_max`.
    #[default]
    Auto,
    /// Singular values `<= t` count as zero.
    Absolute(f64),
}

impl Tolerance {
    pub fn threshold(self, rows: usize, cols: usize, sigma_max: f64, eps: f64) -> f64 {
        match self {
            Tolerance::Auto => rows.max(cols) as f64 * eps * sigma_max,
            Tolerance::Absolute(t) => t,
        }
    }
}

/// How rank decisions are made throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericOptions {
    pub tolerance: Tolerance,
    /// When set, a rank decision whose gap ratio falls below this value is
    /// reported as ill-conditioned instead of being trusted.
    pub min_gap_ratio: Option<f64>,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions {
            tolerance: Tolerance::Auto,
            min_gap_ratio: Some(DEFAULT_MIN_GAP_RATIO),
        }
    }
}

impl NumericOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        NumericOptions {
            tolerance: Tolerance::Absolute(tol),
            ..Default::default()
        }
    }

    /// Same tolerance, no gap check.
    pub fn unchecked(self) -> Self {
        NumericOptions {
            min_gap_ratio: None,
            ..self
        }
    }
}

/// Outcome of a numerical rank decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub threshold: f64,
    /// Computed singular values, descending (`min(rows, cols)` of them).
    pub singular_values: Vec<f64>,
    /// Smallest kept over largest dropped singular value; infinite when
    /// nothing is dropped, nothing is kept, or the largest dropped value is
    /// exactly zero.
    pub gap_ratio: f64,
}

impl RankInfo {
    pub fn nullity(&self) -> usize {
        self.cols - self.rank
    }

    pub fn is_well_separated(&self, min_gap_ratio: Option<f64>) -> bool {
        min_gap_ratio.is_none_or(|g| self.gap_ratio >= g)
    }
}

/// Singular value decomposition split at the numerical rank.
#[derive(Clone, Debug)]
pub struct Decomposition<S: Scalar> {
    pub rank: RankInfo,
    /// Orthonormal basis of the column space, `rows x rank`.
    pub range: DMatrix<S>,
    /// Orthonormal basis of the null space, `cols x (cols - rank)`.
    pub kernel: DMatrix<S>,
}

/// Decomposes `a` at the rank chosen by `tol`.
pub fn decompose<S: Scalar>(
    a: &DMatrix<S>,
    tol: Tolerance,
) -> Result<Decomposition<S>, LinalgError> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(Decomposition {
            rank: RankInfo {
                rows: m,
                cols: n,
                rank: 0,
                threshold: tol.threshold(m, n, 0.0, S::epsilon()),
                singular_values: Vec::new(),
                gap_ratio: f64::INFINITY,
            },
            range: DMatrix::zeros(m, 0),
            kernel: DMatrix::identity(n, n),
        });
    }

    // Pad with zero rows so that the decomposition yields a full set of
    // right singular vectors.
    let padded_rows = m.max(n);
    let work = if padded_rows > m {
        let mut p = DMatrix::zeros(padded_rows, n);
        p.rows_mut(0, m).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::try_new(work, true, true, S::real_from_f64(S::epsilon()), 0)
        .ok_or(LinalgError::NoConvergence { rows: m, cols: n })?;
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| S::real_to_f64(s.clone()))
        .collect();

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let sigma_max = sigma[order[0]];
    let threshold = tol.threshold(m, n, sigma_max, S::epsilon());
    let p = m.min(n);
    let rank = order
        .iter()
        .take(p)
        .take_while(|&&i| sigma[i] > threshold)
        .count();

    let gap_ratio = if rank == 0 || rank == p {
        f64::INFINITY
    } else {
        let kept = sigma[order[rank - 1]];
        let dropped = sigma[order[rank]];
        if dropped == 0.0 {
            f64::INFINITY
        } else {
            kept / dropped
        }
    };

    let mut range = DMatrix::zeros(m, rank);
    for (c, &i) in order.iter().take(rank).enumerate() {
        range.column_mut(c).copy_from(&u.column(i).rows(0, m));
    }
    let mut kernel = DMatrix::zeros(n, n - rank);
    for (c, &i) in order.iter().skip(rank).enumerate() {
        kernel.column_mut(c).copy_from(&v_t.row(i).adjoint());
    }

    Ok(Decomposition {
        rank: RankInfo {
            rows: m,
            cols: n,
            rank,
            threshold,
            singular_values: order.iter().take(p).map(|&i| sigma[i]).collect(),
            gap_ratio,
        },
        range,
        kernel,
    })
}

pub fn numerical_rank<S: Scalar>(a: &DMatrix<S>, tol: Tolerance) -> Result<RankInfo, LinalgError> {
    decompose(a, tol).map(|d| d.rank)
}

pub fn frobenius_norm<S: Scalar>(a: &DMatrix<S>) -> f64 {
    a.iter().map(|x| x.abs_f64().powi(2)).sum::<f64>().sqrt()
}

/// Columns `x` of `basis` (orthonormal) projected away from the span of
/// `against` (orthonormal), keeping exactly `keep` directions: the ones
/// least aligned with `against`.
pub fn orthogonal_complement_within<S: Scalar>(
    basis: &DMatrix<S>,
    against: &DMatrix<S>,
    keep: usize,
) -> Result<DMatrix<S>, LinalgError> {
    let p = basis.ncols();
    if keep == 0 || p == 0 {
        return Ok(DMatrix::zeros(basis.nrows(), 0));
    }
    if against.ncols() == 0 {
        return Ok(basis.columns(p - keep, keep).into_owned());
    }
    // Right singular vectors of against^H * basis with the smallest singular
    // values span the directions of `basis` orthogonal to `against`.
    let overlap = against.adjoint() * basis;
    let d = decompose(&overlap, Tolerance::Absolute(f64::INFINITY))?;
    // With an infinite threshold every direction lands in `kernel`, ordered
    // by decreasing singular value.
    let coords = d.kernel.columns(p - keep, keep).into_owned();
    Ok(basis * coords)
}
