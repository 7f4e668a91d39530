//! Cellular sheaves, their cochain complexes and numerical cohomology.
//!
//! Only codimension-1 restrictions are stored. Longer restrictions are
//! obtained by composing along a chain of faces, which is path independent
//! exactly when the sheaf is functorial (see [`CellularSheaf::validate`]).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::complex::{ComplexError, Face, FaceId, SimplicialComplex};
use crate::linalg::{self, LinalgError, NumericOptions, RankInfo};
use crate::scalar::{Scalar, ScalarField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SheafError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no stalk given for face {0}")]
    MissingStalk(Face),
    #[error("no restriction given for {from} -> {to}")]
    MissingRestriction { from: Face, to: Face },
    #[error("{from} -> {to} is not a codimension-1 attachment")]
    NotCodimOne { from: Face, to: Face },
    #[error("restriction {from} -> {to} has shape {found:?}, expected {expected:?}")]
    ShapeMismatch {
        from: Face,
        to: Face,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error(
        "rank of d^{degree} is numerically unreliable: gap ratio {gap_ratio:.3e} below {min_gap_ratio:.1e}"
    )]
    IllConditioned {
        degree: usize,
        gap_ratio: f64,
        min_gap_ratio: f64,
    },
    #[error("rank d^{prev} exceeds nullity d^{degree}; coboundaries do not compose to zero", prev = .degree - 1)]
    NotACochainComplex { degree: usize },
    #[error("assignment value on {face} has length {found}, stalk has dimension {expected}")]
    AssignmentShape {
        face: Face,
        expected: usize,
        found: usize,
    },
}

/// A failed consistency check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Frobenius norm of the discrepancy.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ViolationKind {
    /// The two restriction paths `source -> via[i] -> target` disagree.
    Functoriality {
        source: Face,
        via: [Face; 2],
        target: Face,
    },
    /// A morphism square over the attachment `from -> to` does not commute.
    NonCommutingSquare { from: Face, to: Face },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Functoriality {
                source,
                via,
                target,
            } => write!(
                f,
                "functoriality {source} -> {target} via {} vs {}: deviation {:.3e}",
                via[0], via[1], self.deviation
            ),
            ViolationKind::NonCommutingSquare { from, to } => write!(
                f,
                "non-commuting square {from} -> {to}: deviation {:.3e}",
                self.deviation
            ),
        }
    }
}

/// Values on a collection of faces.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment<S: Scalar> {
    pub values: BTreeMap<Face, DVector<S>>,
}

impl<S: Scalar> Default for Assignment<S> {
    fn default() -> Self {
        Assignment {
            values: BTreeMap::new(),
        }
    }
}

impl<S: Scalar> Assignment<S> {
    pub fn get(&self, face: &Face) -> Option<&DVector<S>> {
        self.values.get(face)
    }
}

/// One stalk's slot inside a cochain vector.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainBlock {
    pub face: Face,
    pub id: FaceId,
    pub offset: usize,
    pub dim: usize,
}

/// Layout of `C^k`: faces in canonical order with their offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainSpace {
    pub degree: usize,
    pub blocks: Vec<CochainBlock>,
    pub dim: usize,
}

/// `H^k` together with the rank decisions it was computed from.
#[derive(Clone, Debug)]
pub struct CohomologyResult<S: Scalar> {
    pub degree: usize,
    pub dim: usize,
    /// Columns are cochains in `ker d^k` orthogonal to `im d^{k-1}`.
    pub basis: DMatrix<S>,
    /// Threshold applied to the singular values of `d^k`.
    pub tolerance_used: f64,
    /// Rank decision for `d^k`.
    pub kernel_rank: RankInfo,
    /// Rank decision for `d^{k-1}`.
    pub image_rank: RankInfo,
}

impl<S: Scalar> CohomologyResult<S> {
    pub fn basis_vectors(&self) -> Vec<DVector<S>> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    /// Smallest gap ratio among the two rank decisions.
    pub fn gap_ratio(&self) -> f64 {
        self.kernel_rank.gap_ratio.min(self.image_rank.gap_ratio)
    }

    pub fn is_well_conditioned(&self, min_gap_ratio: Option<f64>) -> bool {
        self.kernel_rank.is_well_separated(min_gap_ratio)
            && self.image_rank.is_well_separated(min_gap_ratio)
    }
}

/// `H^0` plus every basis section extended to all faces.
#[derive(Clone, Debug)]
pub struct GlobalSections<S: Scalar> {
    pub h0: CohomologyResult<S>,
    pub sections: Vec<Assignment<S>>,
}

/// A cellular sheaf of finite-dimensional vector spaces over `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellularSheaf<S: Scalar> {
    base: Arc<SimplicialComplex>,
    stalk_dims: Vec<Vec<usize>>,
    // restrictions[b.dim][b.index][i] is F(a -> b) for the i-th facet a of b
    restrictions: Vec<Vec<Vec<DMatrix<S>>>>,
    offsets: Vec<Vec<usize>>,
    totals: Vec<usize>,
}

/// Incremental construction of a [`CellularSheaf`].
///
/// Restrictions into or out of a zero-dimensional stalk may be omitted.
#[derive(Clone, Debug)]
pub struct SheafBuilder<S: Scalar> {
    base: Arc<SimplicialComplex>,
    stalk_dims: Vec<Vec<Option<usize>>>,
    restrictions: BTreeMap<(FaceId, FaceId), DMatrix<S>>,
}

impl<S: Scalar> SheafBuilder<S> {
    pub fn new(base: impl Into<Arc<SimplicialComplex>>) -> Self {
        let base = base.into();
        let stalk_dims = (0..base.dimension().map_or(0, |d| d + 1))
            .map(|k| vec![None; base.num_faces(k)])
            .collect();
        SheafBuilder {
            base,
            stalk_dims,
            restrictions: BTreeMap::new(),
        }
    }

    pub fn base(&self) -> &SimplicialComplex {
        &self.base
    }

    pub fn stalk(&mut self, face: &Face, dim: usize) -> Result<&mut Self, SheafError> {
        let id = self.base.require(face)?;
        self.stalk_dims[id.dim][id.index] = Some(dim);
        Ok(self)
    }

    pub fn restriction(
        &mut self,
        from: &Face,
        to: &Face,
        matrix: DMatrix<S>,
    ) -> Result<&mut Self, SheafError> {
        let a = self.base.require(from)?;
        let b = self.base.require(to)?;
        if a.dim + 1 != b.dim || !from.is_proper_subface_of(to) {
            return Err(SheafError::NotCodimOne {
                from: from.clone(),
                to: to.clone(),
            });
        }
        self.restrictions.insert((a, b), matrix);
        Ok(self)
    }

    pub fn build(self) -> Result<CellularSheaf<S>, SheafError> {
        let base = self.base;
        let mut stalk_dims = Vec::with_capacity(self.stalk_dims.len());
        for (k, bucket) in self.stalk_dims.into_iter().enumerate() {
            let dims = bucket
                .into_iter()
                .enumerate()
                .map(|(i, d)| {
                    d.ok_or_else(|| {
                        SheafError::MissingStalk(base.face(FaceId { dim: k, index: i }).clone())
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            stalk_dims.push(dims);
        }
        let mut given = self.restrictions;
        let mut restrictions = Vec::with_capacity(stalk_dims.len());
        for k in 0..stalk_dims.len() {
            let mut bucket = Vec::with_capacity(base.num_faces(k));
            for index in 0..base.num_faces(k) {
                let b = FaceId { dim: k, index };
                let mut maps = Vec::new();
                for &(a, _) in base.facets_of(b) {
                    let expected = (stalk_dims[b.dim][b.index], stalk_dims[a.dim][a.index]);
                    let m = match given.remove(&(a, b)) {
                        Some(m) => m,
                        None if expected.0 == 0 || expected.1 == 0 => {
                            DMatrix::zeros(expected.0, expected.1)
                        }
                        None => {
                            return Err(SheafError::MissingRestriction {
                                from: base.face(a).clone(),
                                to: base.face(b).clone(),
                            })
                        }
                    };
                    if m.shape() != expected {
                        return Err(SheafError::ShapeMismatch {
                            from: base.face(a).clone(),
                            to: base.face(b).clone(),
                            expected,
                            found: m.shape(),
                        });
                    }
                    maps.push(m);
                }
                bucket.push(maps);
            }
            restrictions.push(bucket);
        }
        Ok(CellularSheaf::assemble(base, stalk_dims, restrictions))
    }
}

impl<S: Scalar> CellularSheaf<S> {
    fn assemble(
        base: Arc<SimplicialComplex>,
        stalk_dims: Vec<Vec<usize>>,
        restrictions: Vec<Vec<Vec<DMatrix<S>>>>,
    ) -> Self {
        let mut offsets = Vec::with_capacity(stalk_dims.len());
        let mut totals = Vec::with_capacity(stalk_dims.len());
        for dims in &stalk_dims {
            let mut acc = 0;
            offsets.push(
                dims.iter()
                    .map(|d| {
                        let o = acc;
                        acc += d;
                        o
                    })
                    .collect(),
            );
            totals.push(acc);
        }
        CellularSheaf {
            base,
            stalk_dims,
            restrictions,
            offsets,
            totals,
        }
    }

    /// Builds a sheaf from a stalk-dimension rule and a restriction rule.
    /// `restriction(a, b)` is only called for codimension-1 pairs whose
    /// stalks are both nonzero.
    pub fn from_fn(
        base: impl Into<Arc<SimplicialComplex>>,
        mut stalk_dim: impl FnMut(&Face) -> usize,
        mut restriction: impl FnMut(&Face, &Face) -> DMatrix<S>,
    ) -> Result<Self, SheafError> {
        let mut builder = SheafBuilder::new(base);
        let base = builder.base.clone();
        for (_, f) in base.iter() {
            builder.stalk(f, stalk_dim(f))?;
        }
        for (bid, b) in base.iter() {
            let db = builder.stalk_dims[bid.dim][bid.index].unwrap_or(0);
            for &(aid, _) in base.facets_of(bid) {
                let da = builder.stalk_dims[aid.dim][aid.index].unwrap_or(0);
                if da > 0 && db > 0 {
                    let a = base.face(aid);
                    builder.restriction(a, b, restriction(a, b))?;
                }
            }
        }
        builder.build()
    }

    /// Constant sheaf: every stalk `S^dim`, every restriction the identity.
    pub fn constant(base: impl Into<Arc<SimplicialComplex>>, dim: usize) -> Self {
        Self::from_fn(base, |_| dim, |_, _| DMatrix::identity(dim, dim))
            .expect("constant sheaf is well formed")
    }

    pub fn base(&self) -> &SimplicialComplex {
        &self.base
    }

    pub fn base_arc(&self) -> &Arc<SimplicialComplex> {
        &self.base
    }

    pub fn field(&self) -> ScalarField {
        S::FIELD
    }

    pub fn stalk_dim(&self, id: FaceId) -> usize {
        self.stalk_dims[id.dim][id.index]
    }

    pub fn stalk_dim_of(&self, face: &Face) -> Result<usize, SheafError> {
        Ok(self.stalk_dim(self.base.require(face)?))
    }

    /// Stored codimension-1 restriction `F(a -> b)`.
    pub fn restriction(&self, a: FaceId, b: FaceId) -> Option<&DMatrix<S>> {
        if b.dim == 0 || b.dim >= self.restrictions.len() {
            return None;
        }
        let slot = self.base.facets_of(b).iter().position(|&(f, _)| f == a)?;
        Some(&self.restrictions[b.dim][b.index][slot])
    }

    /// Codimension-1 restrictions `(a, b, [b:a], F(a -> b))` into `b`.
    pub fn restrictions_into(&self, b: FaceId) -> impl Iterator<Item = (FaceId, i8, &DMatrix<S>)> {
        self.base
            .facets_of(b)
            .iter()
            .zip(self.restrictions[b.dim][b.index].iter())
            .map(|(&(a, s), m)| (a, s, m))
    }

    /// Restriction along any attachment, composed along the chain that adds
    /// the missing vertices of `b` in increasing order. Identity if `a = b`.
    pub fn composite_restriction(&self, a: &Face, b: &Face) -> Result<DMatrix<S>, SheafError> {
        let mut cur = self.base.require(a)?;
        self.base.require(b)?;
        if a != b && !a.is_proper_subface_of(b) {
            return Err(SheafError::NotCodimOne {
                from: a.clone(),
                to: b.clone(),
            });
        }
        let d = self.stalk_dim(cur);
        let mut acc = DMatrix::identity(d, d);
        let mut verts = a.vertices().to_vec();
        for &v in b.vertices() {
            let Err(pos) = verts.binary_search(&v) else {
                continue;
            };
            verts.insert(pos, v);
            let next = self.base.require(&Face::new(verts.iter().copied())?)?;
            let step = self
                .restriction(cur, next)
                .expect("every codimension-1 attachment has a restriction");
            acc = step * acc;
            cur = next;
        }
        Ok(acc)
    }

    /// Functoriality check. Each codimension-2 attachment `a -> c` has two
    /// paths through intermediate faces; they must agree up to
    /// `tol * max(1, |path1|, |path2|)` in Frobenius norm.
    pub fn validate(&self, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        for (cid, c) in self.base.iter() {
            if cid.dim < 2 {
                continue;
            }
            let facets = self.base.facets_of(cid);
            for i in 0..facets.len() {
                for j in (i + 1)..facets.len() {
                    let (b1, b2) = (facets[i].0, facets[j].0);
                    let f1 = self.base.face(b1);
                    let f2 = self.base.face(b2);
                    let a: Vec<_> = f1
                        .vertices()
                        .iter()
                        .copied()
                        .filter(|v| f2.vertices().contains(v))
                        .collect();
                    let a = Face::new(a).expect("two facets of a simplex of dim >= 2 meet");
                    let aid = self.base.id(&a).expect("complex is closed");
                    let p1 =
                        self.restriction(b1, cid).unwrap() * self.restriction(aid, b1).unwrap();
                    let p2 =
                        self.restriction(b2, cid).unwrap() * self.restriction(aid, b2).unwrap();
                    let deviation = linalg::frobenius_norm(&(&p1 - &p2));
                    let scale = 1f64
                        .max(linalg::frobenius_norm(&p1))
                        .max(linalg::frobenius_norm(&p2));
                    if deviation > tol * scale {
                        out.push(Violation {
                            kind: ViolationKind::Functoriality {
                                source: a,
                                via: [f1.clone(), f2.clone()],
                                target: c.clone(),
                            },
                            deviation,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn cochain_dim(&self, k: usize) -> usize {
        self.totals.get(k).copied().unwrap_or(0)
    }

    pub fn cochain_space(&self, k: usize) -> CochainSpace {
        let blocks = self
            .base
            .faces(k)
            .iter()
            .enumerate()
            .map(|(index, f)| CochainBlock {
                face: f.clone(),
                id: FaceId { dim: k, index },
                offset: self.offsets[k][index],
                dim: self.stalk_dims[k][index],
            })
            .collect();
        CochainSpace {
            degree: k,
            blocks,
            dim: self.cochain_dim(k),
        }
    }

    /// `sum_k (-1)^k dim C^k`.
    pub fn euler_characteristic(&self) -> i64 {
        self.totals
            .iter()
            .enumerate()
            .map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// `d^k : C^k -> C^{k+1}`; block `(b, a)` is `[b:a] F(a -> b)`.
    pub fn coboundary(&self, k: usize) -> DMatrix<S> {
        let mut d = DMatrix::zeros(self.cochain_dim(k + 1), self.cochain_dim(k));
        if k + 1 >= self.totals.len() {
            return d;
        }
        for index in 0..self.base.num_faces(k + 1) {
            let b = FaceId { dim: k + 1, index };
            let row = self.offsets[b.dim][b.index];
            for (a, sign, m) in self.restrictions_into(b) {
                if m.is_empty() {
                    continue;
                }
                let col = self.offsets[a.dim][a.index];
                let mut block = d.view_mut((row, col), m.shape());
                if sign > 0 {
                    block.copy_from(m);
                } else {
                    block.copy_from(&(-m));
                }
            }
        }
        d
    }

    /// `H^k = ker d^k / im d^{k-1}`.
    pub fn cohomology(
        &self,
        k: usize,
        opts: NumericOptions,
    ) -> Result<CohomologyResult<S>, SheafError> {
        let dk = linalg::decompose(&self.coboundary(k), opts.tolerance)?;
        let image = if k == 0 {
            linalg::decompose(&DMatrix::<S>::zeros(self.cochain_dim(0), 0), opts.tolerance)?
        } else {
            linalg::decompose(&self.coboundary(k - 1), opts.tolerance)?
        };
        if let Some(min) = opts.min_gap_ratio {
            for (degree, info) in [(k, &dk.rank), (k.wrapping_sub(1), &image.rank)] {
                if !info.is_well_separated(Some(min)) {
                    return Err(SheafError::IllConditioned {
                        degree,
                        gap_ratio: info.gap_ratio,
                        min_gap_ratio: min,
                    });
                }
            }
        }
        let nullity = dk.rank.nullity();
        let rank_prev = image.rank.rank;
        if rank_prev > nullity {
            return Err(SheafError::NotACochainComplex { degree: k });
        }
        let dim = nullity - rank_prev;
        let basis = linalg::orthogonal_complement_within(&dk.kernel, &image.range, dim)?;
        Ok(CohomologyResult {
            degree: k,
            dim,
            basis,
            tolerance_used: dk.rank.threshold,
            kernel_rank: dk.rank,
            image_rank: image.rank,
        })
    }

    /// `H^k` for `k = 0..=max_degree`.
    pub fn cohomology_up_to(
        &self,
        max_degree: usize,
        opts: NumericOptions,
    ) -> Result<Vec<CohomologyResult<S>>, SheafError> {
        (0..=max_degree).map(|k| self.cohomology(k, opts)).collect()
    }

    /// Betti-style dimensions of every nonvanishing degree.
    pub fn cohomology_dims(&self, opts: NumericOptions) -> Result<Vec<usize>, SheafError> {
        let top = self.base.dimension().unwrap_or(0);
        (0..=top)
            .map(|k| self.cohomology(k, opts).map(|h| h.dim))
            .collect()
    }

    /// Global sections, each extended from the vertices to every face.
    pub fn global_sections(&self, opts: NumericOptions) -> Result<GlobalSections<S>, SheafError> {
        let h0 = self.cohomology(0, opts)?;
        let sections = h0
            .basis
            .column_iter()
            .map(|c| self.extend_from_vertices(&c.into_owned()))
            .collect::<Result<_, _>>()?;
        Ok(GlobalSections { h0, sections })
    }

    /// Extends a 0-cochain to every face by restricting from the first
    /// vertex of each face.
    pub fn extend_from_vertices(&self, c0: &DVector<S>) -> Result<Assignment<S>, SheafError> {
        let mut out = Assignment::default();
        for (id, f) in self.base.iter() {
            let v = Face::vertex(f.vertices()[0]);
            let vid = self.base.require(&v)?;
            let sv = c0
                .rows(self.offsets[0][vid.index], self.stalk_dim(vid))
                .into_owned();
            let value = if id.dim == 0 {
                sv
            } else {
                self.composite_restriction(&v, f)? * sv
            };
            out.values.insert(f.clone(), value);
        }
        Ok(out)
    }

    /// Largest `|F(a -> b) s(a) - s(b)|` over codimension-1 attachments
    /// where both faces carry a value.
    pub fn section_defect(&self, s: &Assignment<S>) -> Result<f64, SheafError> {
        let mut worst = 0f64;
        for (bid, b) in self.base.iter() {
            let Some(sb) = s.get(b) else { continue };
            self.check_value(bid, b, sb)?;
            for (aid, _, m) in self.restrictions_into(bid) {
                let a = self.base.face(aid);
                let Some(sa) = s.get(a) else { continue };
                self.check_value(aid, a, sa)?;
                let r = m * sa - sb;
                worst = worst.max(r.iter().map(|x| x.abs_f64()).fold(0.0, f64::max));
            }
        }
        Ok(worst)
    }

    fn check_value(&self, id: FaceId, face: &Face, v: &DVector<S>) -> Result<(), SheafError> {
        if v.len() != self.stalk_dim(id) {
            return Err(SheafError::AssignmentShape {
                face: face.clone(),
                expected: self.stalk_dim(id),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Relative size of `d^{k+1} d^k`, maximized over `k`:
    /// `|d^{k+1} d^k|_F / (|d^{k+1}|_F |d^k|_F)`, zero when either factor is
    /// zero.
    pub fn d_squared_check(&self) -> f64 {
        let top = self.totals.len();
        let mut worst = 0f64;
        for k in 0..top.saturating_sub(2) {
            let d0 = self.coboundary(k);
            let d1 = self.coboundary(k + 1);
            let denom = linalg::frobenius_norm(&d0) * linalg::frobenius_norm(&d1);
            if denom == 0.0 {
                continue;
            }
            worst = worst.max(linalg::frobenius_norm(&(&d1 * &d0)) / denom);
        }
        worst
    }

    /// The same sheaf on a closed subcomplex of the base.
    pub fn on_subcomplex(
        &self,
        sub: impl Into<Arc<SimplicialComplex>>,
    ) -> Result<Self, SheafError> {
        let sub = sub.into();
        let mut builder = SheafBuilder::new(sub.clone());
        for (_, f) in sub.iter() {
            let id = self.base.require(f)?;
            builder.stalk(f, self.stalk_dim(id))?;
        }
        for (bid, b) in sub.iter() {
            for &(aid, _) in sub.facets_of(bid) {
                let a = sub.face(aid);
                let m = self
                    .restriction(self.base.require(a)?, self.base.require(b)?)
                    .expect("codimension-1 attachment");
                builder.restriction(a, b, m.clone())?;
            }
        }
        builder.build()
    }

    /// Copy with every stored restriction replaced by `f(a, b, F(a -> b))`.
    /// Shapes must be preserved.
    pub fn map_restrictions(
        &self,
        mut f: impl FnMut(&Face, &Face, &DMatrix<S>) -> DMatrix<S>,
    ) -> Result<Self, SheafError> {
        let mut builder = SheafBuilder::new(self.base.clone());
        for (id, face) in self.base.iter() {
            builder.stalk(face, self.stalk_dim(id))?;
        }
        for (bid, b) in self.base.iter() {
            for (aid, _, m) in self.restrictions_into(bid) {
                let a = self.base.face(aid);
                builder.restriction(a, b, f(a, b, m))?;
            }
        }
        builder.build()
    }
}
