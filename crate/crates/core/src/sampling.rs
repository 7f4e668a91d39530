//! Sheaf morphisms, sampling and the reconstruction criteria built on them.
//!
//! A sampling morphism `m: F -> S` is stalk-wise surjective. Its kernel
//! sheaf `A` (the ambiguity sheaf) fits into `0 -> A -> F -> S -> 0`;
//! `H^0(A)` measures what samples cannot distinguish and `H^1(A)` measures
//! redundancy among the samples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{ComplexError, Face, FaceId, SimplicialComplex, Vertex};
use crate::linalg::{self, LinalgError, NumericOptions};
use crate::scalar::Scalar;
use crate::sheaf::{CellularSheaf, SheafBuilder, SheafError, Violation, ViolationKind};

/// Relative deviation above which a restriction is said not to preserve
/// the kernel of a morphism.
pub const DEFAULT_INVARIANCE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("sample support contains {0}, which is not a vertex of the complex")]
    UnsupportedSupport(Vertex),
    #[error("vertex {0} has no image under the vertex map")]
    UnmappedVertex(Vertex),
    #[error("image of face {face} is not a face of the target complex")]
    NotASimplicialMap { face: Face },
    #[error("{0} sheaf does not live on the expected complex")]
    BaseMismatch(&'static str),
    #[error("no component given for face {0}")]
    MissingComponent(Face),
    #[error("component on {face} has shape {found:?}, expected {expected:?}")]
    ComponentShape {
        face: Face,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("operation needs a morphism over the identity simplicial map")]
    NotOverIdentity,
    #[error("component on {face} has rank {rank} < {rows}; not surjective")]
    NotSurjective {
        face: Face,
        rank: usize,
        rows: usize,
    },
    #[error("restriction {from} -> {to} does not preserve the kernel (relative deviation {deviation:.3e})")]
    NonInvariantKernel {
        from: Face,
        to: Face,
        deviation: f64,
    },
    #[error("induced maps in degree {0} are only implemented over the identity simplicial map")]
    UnsupportedDegree(usize),
}

/// A vertex map whose image of every face is a face.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplicialMap {
    source: Arc<SimplicialComplex>,
    target: Arc<SimplicialComplex>,
    vertex_map: BTreeMap<Vertex, Vertex>,
}

impl SimplicialMap {
    pub fn new(
        source: impl Into<Arc<SimplicialComplex>>,
        target: impl Into<Arc<SimplicialComplex>>,
        vertex_map: BTreeMap<Vertex, Vertex>,
    ) -> Result<Self, SamplingError> {
        let source = source.into();
        let target = target.into();
        for v in source.vertices() {
            if !vertex_map.contains_key(&v) {
                return Err(SamplingError::UnmappedVertex(v));
            }
        }
        let map = SimplicialMap {
            source,
            target,
            vertex_map,
        };
        for (_, f) in map.source.iter() {
            if !map.target.contains(&map.image(f)) {
                return Err(SamplingError::NotASimplicialMap { face: f.clone() });
            }
        }
        Ok(map)
    }

    pub fn identity(x: impl Into<Arc<SimplicialComplex>>) -> Self {
        let x = x.into();
        let vertex_map = x.vertices().map(|v| (v, v)).collect();
        SimplicialMap {
            source: x.clone(),
            target: x,
            vertex_map,
        }
    }

    pub fn source(&self) -> &Arc<SimplicialComplex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SimplicialComplex> {
        &self.target
    }

    pub fn vertex_map(&self) -> &BTreeMap<Vertex, Vertex> {
        &self.vertex_map
    }

    /// Image of a source face; panics on unmapped vertices.
    pub fn image(&self, face: &Face) -> Face {
        Face::new(
            face.vertices()
                .iter()
                .map(|v| self.vertex_map[v])
                .collect::<BTreeSet<_>>(),
        )
        .expect("nonempty image")
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.vertex_map.iter().all(|(a, b)| a == b)
    }
}

/// Linear maps `m_a: F(f(a)) -> G(a)` for each face `a` of the source of
/// `f`, where `F` lives on the target of `f` and `G` on its source.
#[derive(Clone, Debug)]
pub struct SheafMorphism<S: Scalar> {
    map: SimplicialMap,
    source: CellularSheaf<S>,
    destination: CellularSheaf<S>,
    components: Vec<Vec<DMatrix<S>>>,
}

impl<S: Scalar> SheafMorphism<S> {
    /// Components may be omitted where either stalk is zero-dimensional.
    pub fn new(
        map: SimplicialMap,
        source: CellularSheaf<S>,
        destination: CellularSheaf<S>,
        mut components: BTreeMap<Face, DMatrix<S>>,
    ) -> Result<Self, SamplingError> {
        if source.base() != map.target().as_ref() {
            return Err(SamplingError::BaseMismatch("source"));
        }
        if destination.base() != map.source().as_ref() {
            return Err(SamplingError::BaseMismatch("destination"));
        }
        let x = map.source().clone();
        let mut out: Vec<Vec<DMatrix<S>>> = Vec::new();
        for (id, a) in x.iter() {
            if out.len() <= id.dim {
                out.push(Vec::new());
            }
            let expected = (
                destination.stalk_dim(id),
                source.stalk_dim_of(&map.image(a))?,
            );
            let m = match components.remove(a) {
                Some(m) => m,
                None if expected.0 == 0 || expected.1 == 0 => {
                    DMatrix::zeros(expected.0, expected.1)
                }
                None => return Err(SamplingError::MissingComponent(a.clone())),
            };
            if m.shape() != expected {
                return Err(SamplingError::ComponentShape {
                    face: a.clone(),
                    expected,
                    found: m.shape(),
                });
            }
            out[id.dim].push(m);
        }
        if let Some(extra) = components.into_keys().next() {
            return Err(ComplexError::UnknownFace(extra).into());
        }
        Ok(SheafMorphism {
            map,
            source,
            destination,
            components: out,
        })
    }

    /// Morphism over the identity map of a shared base.
    pub fn over_identity(
        source: CellularSheaf<S>,
        destination: CellularSheaf<S>,
        components: BTreeMap<Face, DMatrix<S>>,
    ) -> Result<Self, SamplingError> {
        let map = SimplicialMap::identity(destination.base_arc().clone());
        Self::new(map, source, destination, components)
    }

    pub fn identity(f: &CellularSheaf<S>) -> Self {
        let comps = f
            .base()
            .iter()
            .map(|(id, a)| {
                let d = f.stalk_dim(id);
                (a.clone(), DMatrix::identity(d, d))
            })
            .collect();
        Self::over_identity(f.clone(), f.clone(), comps).expect("identity is well formed")
    }

    pub fn map(&self) -> &SimplicialMap {
        &self.map
    }

    pub fn source(&self) -> &CellularSheaf<S> {
        &self.source
    }

    pub fn destination(&self) -> &CellularSheaf<S> {
        &self.destination
    }

    /// Component on a face of the destination's base.
    pub fn component(&self, id: FaceId) -> &DMatrix<S> {
        &self.components[id.dim][id.index]
    }

    /// `blockdiag(m_a)` over the `k`-faces; requires the identity map.
    fn cochain_map(&self, k: usize) -> DMatrix<S> {
        let x = self.destination.base();
        let mut out = DMatrix::zeros(self.destination.cochain_dim(k), self.source.cochain_dim(k));
        let (mut r, mut c) = (0, 0);
        for index in 0..x.num_faces(k) {
            let m = self.component(FaceId { dim: k, index });
            out.view_mut((r, c), m.shape()).copy_from(m);
            r += m.nrows();
            c += m.ncols();
        }
        out
    }
}

/// Sheaf with `S^d` on each vertex of `support` and zero everywhere else.
pub fn sampling_sheaf<S: Scalar>(
    x: impl Into<Arc<SimplicialComplex>>,
    support: &[Vertex],
    mut stalk_dim: impl FnMut(Vertex) -> usize,
) -> Result<CellularSheaf<S>, SamplingError> {
    let x = x.into();
    let support = vertex_support(&x, support)?;
    let mut b = SheafBuilder::new(x.clone());
    for (id, f) in x.iter() {
        let d = if id.dim == 0 && support.contains(&f.vertices()[0]) {
            stalk_dim(f.vertices()[0])
        } else {
            0
        };
        b.stalk(f, d)?;
    }
    Ok(b.build()?)
}

fn vertex_support(
    x: &SimplicialComplex,
    support: &[Vertex],
) -> Result<BTreeSet<Vertex>, SamplingError> {
    support
        .iter()
        .map(|&v| {
            if x.contains(&Face::vertex(v)) {
                Ok(v)
            } else {
                Err(SamplingError::UnsupportedSupport(v))
            }
        })
        .collect()
}

/// Commutation check `m_b F(f(a) -> f(b)) = G(a -> b) m_a` over every
/// codimension-1 attachment, relative to `max(1, |lhs|, |rhs|)`.
pub fn validate_morphism<S: Scalar>(m: &SheafMorphism<S>, tol: f64) -> Vec<Violation> {
    let x = m.destination.base();
    let mut out = Vec::new();
    for (bid, b) in x.iter() {
        let fb = m.map.image(b);
        for (aid, _, g) in m.destination.restrictions_into(bid) {
            let a = x.face(aid);
            let fa = m.map.image(a);
            let f = m
                .source
                .composite_restriction(&fa, &fb)
                .expect("simplicial maps preserve attachments");
            let lhs = m.component(bid) * f;
            let rhs = g * m.component(aid);
            let deviation = linalg::frobenius_norm(&(&lhs - &rhs));
            let scale = 1f64
                .max(linalg::frobenius_norm(&lhs))
                .max(linalg::frobenius_norm(&rhs));
            if deviation > tol * scale {
                out.push(Violation {
                    kind: ViolationKind::NonCommutingSquare {
                        from: a.clone(),
                        to: b.clone(),
                    },
                    deviation,
                });
            }
        }
    }
    out
}

/// True iff the map is the identity and every component has full row rank.
pub fn is_sampling_morphism<S: Scalar>(
    m: &SheafMorphism<S>,
    opts: NumericOptions,
) -> Result<bool, SamplingError> {
    if !m.map.is_identity() {
        return Ok(false);
    }
    for (id, _) in m.destination.base().iter() {
        let c = m.component(id);
        if linalg::numerical_rank(c, opts.tolerance)?.rank < c.nrows() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A subsheaf together with its inclusion into the parent sheaf.
#[derive(Clone, Debug)]
pub struct KernelSheaf<S: Scalar> {
    pub sheaf: CellularSheaf<S>,
    /// Orthonormal columns `K_a` embedding each stalk into the parent stalk,
    /// indexed like the base's faces.
    pub inclusions: Vec<Vec<DMatrix<S>>>,
}

impl<S: Scalar> KernelSheaf<S> {
    pub fn inclusion(&self, id: FaceId) -> &DMatrix<S> {
        &self.inclusions[id.dim][id.index]
    }
}

/// The kernel sheaf of a stalk-wise surjective morphism over the identity.
pub fn ambiguity_sheaf<S: Scalar>(
    m: &SheafMorphism<S>,
    opts: NumericOptions,
) -> Result<KernelSheaf<S>, SamplingError> {
    if !m.map.is_identity() {
        return Err(SamplingError::NotOverIdentity);
    }
    let f = &m.source;
    let x = f.base_arc().clone();
    let mut inclusions: Vec<Vec<DMatrix<S>>> = Vec::new();
    for (id, a) in x.iter() {
        if inclusions.len() <= id.dim {
            inclusions.push(Vec::new());
        }
        let c = m.component(id);
        let dec = linalg::decompose(c, opts.tolerance)?;
        if dec.rank.rank < c.nrows() {
            return Err(SamplingError::NotSurjective {
                face: a.clone(),
                rank: dec.rank.rank,
                rows: c.nrows(),
            });
        }
        inclusions[id.dim].push(dec.kernel);
    }
    let mut b = SheafBuilder::new(x.clone());
    for (id, a) in x.iter() {
        b.stalk(a, inclusions[id.dim][id.index].ncols())?;
    }
    for (bid, bf) in x.iter() {
        let kb = &inclusions[bid.dim][bid.index];
        for (aid, _, r) in f.restrictions_into(bid) {
            let ka = &inclusions[aid.dim][aid.index];
            let image = r * ka;
            let coords = kb.adjoint() * &image;
            let deviation = linalg::frobenius_norm(&(&image - kb * &coords));
            let scale = linalg::frobenius_norm(r);
            if deviation > DEFAULT_INVARIANCE_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(SamplingError::NonInvariantKernel {
                    from: x.face(aid).clone(),
                    to: bf.clone(),
                    deviation: deviation / scale,
                });
            }
            b.restriction(x.face(aid), bf, coords)?;
        }
    }
    Ok(KernelSheaf {
        sheaf: b.build()?,
        inclusions,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Perfect,
    Ambiguous,
    Redundant,
    Both,
}

impl Verdict {
    pub fn from_dims(ambiguity: usize, redundancy: usize) -> Self {
        match (ambiguity > 0, redundancy > 0) {
            (false, false) => Verdict::Perfect,
            (true, false) => Verdict::Ambiguous,
            (false, true) => Verdict::Redundant,
            (true, true) => Verdict::Both,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Perfect => "PERFECT",
            Verdict::Ambiguous => "AMBIGUOUS",
            Verdict::Redundant => "REDUNDANT",
            Verdict::Both => "BOTH",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingReport {
    /// `dim H^0` of the ambiguity sheaf.
    pub ambiguity_dim: usize,
    /// `dim H^1` of the ambiguity sheaf.
    pub redundancy_dim: usize,
    pub perfect: bool,
    pub verdict: Verdict,
    /// Largest singular-value threshold used in the two computations.
    pub tolerance_used: f64,
    /// Smallest gap ratio among the rank decisions involved.
    pub gap_ratio: f64,
}

/// Global sections of `F` and of the samples agree iff the ambiguity sheaf
/// has no `H^0` and no `H^1`.
pub fn nyquist_check<S: Scalar>(
    m: &SheafMorphism<S>,
    opts: NumericOptions,
) -> Result<SamplingReport, SamplingError> {
    let a = ambiguity_sheaf(m, opts)?;
    let h0 = a.sheaf.cohomology(0, opts)?;
    let h1 = a.sheaf.cohomology(1, opts)?;
    Ok(SamplingReport {
        ambiguity_dim: h0.dim,
        redundancy_dim: h1.dim,
        perfect: h0.dim == 0 && h1.dim == 0,
        verdict: Verdict::from_dims(h0.dim, h1.dim),
        tolerance_used: h0.tolerance_used.max(h1.tolerance_used),
        gap_ratio: h0.gap_ratio().min(h1.gap_ratio()),
    })
}

/// `F -> F^Y`: identity on the faces of the closed set `y`, zero elsewhere.
pub fn canonical_surjection<S: Scalar>(
    f: &CellularSheaf<S>,
    y: &BTreeSet<Face>,
) -> Result<SheafMorphism<S>, SamplingError> {
    let x = f.base_arc().clone();
    x.check_closed_subset(y)?;
    let mut b = SheafBuilder::new(x.clone());
    for (id, a) in x.iter() {
        b.stalk(a, if y.contains(a) { f.stalk_dim(id) } else { 0 })?;
    }
    for (bid, bf) in x.iter() {
        if !y.contains(bf) {
            continue;
        }
        for (aid, _, r) in f.restrictions_into(bid) {
            b.restriction(x.face(aid), bf, r.clone())?;
        }
    }
    let fy = b.build()?;
    let comps = y
        .iter()
        .map(|a| {
            let d = f.stalk_dim_of(a)?;
            Ok((a.clone(), DMatrix::identity(d, d)))
        })
        .collect::<Result<_, SamplingError>>()?;
    SheafMorphism::over_identity(f.clone(), fy, comps)
}

/// The vertex faces of `support`.
pub fn vertex_faces(
    x: &SimplicialComplex,
    support: &[Vertex],
) -> Result<BTreeSet<Face>, SamplingError> {
    Ok(vertex_support(x, support)?
        .into_iter()
        .map(Face::vertex)
        .collect())
}

/// Full-stalk sampling at a set of vertices.
pub fn full_stalk_sampling<S: Scalar>(
    f: &CellularSheaf<S>,
    support: &[Vertex],
) -> Result<SheafMorphism<S>, SamplingError> {
    canonical_surjection(f, &vertex_faces(f.base(), support)?)
}

/// `(F^Y, F_Y)`: the sheaf kept on `y` and the kernel of `F -> F^Y`.
pub fn restrict_to_subcomplex<S: Scalar>(
    f: &CellularSheaf<S>,
    y: &BTreeSet<Face>,
) -> Result<(CellularSheaf<S>, CellularSheaf<S>), SamplingError> {
    let m = canonical_surjection(f, y)?;
    let a = ambiguity_sheaf(&m, NumericOptions::default())?;
    Ok((m.destination, a.sheaf))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub obstructed: bool,
    /// `dim H^0(F_Y)`.
    pub dim: usize,
    pub tolerance_used: f64,
    pub gap_ratio: f64,
}

/// A nonzero `H^0(F_Y)` rules out injective recovery from any sampling
/// supported on `support`.
pub fn obstruction_check<S: Scalar>(
    f: &CellularSheaf<S>,
    support: &[Vertex],
    opts: NumericOptions,
) -> Result<ObstructionReport, SamplingError> {
    let (_, fy) = restrict_to_subcomplex(f, &vertex_faces(f.base(), support)?)?;
    let h0 = fy.cohomology(0, opts)?;
    Ok(ObstructionReport {
        obstructed: h0.dim > 0,
        dim: h0.dim,
        tolerance_used: h0.tolerance_used,
        gap_ratio: h0.gap_ratio(),
    })
}

/// Matrix of an induced map between cohomology groups, in the bases
/// returned by [`CellularSheaf::cohomology`].
#[derive(Clone, Debug)]
pub struct InducedMap<S: Scalar> {
    pub degree: usize,
    pub matrix: DMatrix<S>,
    pub rank: usize,
    pub source_dim: usize,
    pub destination_dim: usize,
}

impl<S: Scalar> InducedMap<S> {
    pub fn is_injective(&self) -> bool {
        self.rank == self.source_dim
    }

    pub fn is_surjective(&self) -> bool {
        self.rank == self.destination_dim
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }
}

/// `m^k: H^k(F) -> H^k(G)`. Over the identity map every degree is
/// supported; over a general simplicial map only degree 0, where
/// `(m x)(v) = m_v x(f(v))`.
pub fn induced_map<S: Scalar>(
    m: &SheafMorphism<S>,
    k: usize,
    opts: NumericOptions,
) -> Result<InducedMap<S>, SamplingError> {
    let hf = m.source.cohomology(k, opts)?;
    let hg = m.destination.cohomology(k, opts)?;
    let cochain = if m.map.is_identity() {
        m.cochain_map(k)
    } else if k == 0 {
        vertex_cochain_map(m)?
    } else {
        return Err(SamplingError::UnsupportedDegree(k));
    };
    // hg.basis is an orthonormal basis of ker d^k orthogonal to the image of
    // d^{k-1}, so projecting onto it reads off cohomology classes.
    let matrix = hg.basis.adjoint() * (cochain * &hf.basis);
    let rank = linalg::numerical_rank(&matrix, opts.tolerance)?.rank;
    Ok(InducedMap {
        degree: k,
        matrix,
        rank,
        source_dim: hf.dim,
        destination_dim: hg.dim,
    })
}

pub fn induced_h0_map<S: Scalar>(
    m: &SheafMorphism<S>,
    opts: NumericOptions,
) -> Result<InducedMap<S>, SamplingError> {
    induced_map(m, 0, opts)
}

fn vertex_cochain_map<S: Scalar>(m: &SheafMorphism<S>) -> Result<DMatrix<S>, SamplingError> {
    let x = m.destination.base();
    let src = m.source.cochain_space(0);
    let offset: BTreeMap<&Face, usize> = src.blocks.iter().map(|b| (&b.face, b.offset)).collect();
    let mut out = DMatrix::zeros(m.destination.cochain_dim(0), src.dim);
    let mut row = 0;
    for index in 0..x.num_faces(0) {
        let id = FaceId { dim: 0, index };
        let c = m.component(id);
        let col = offset[&m.map.image(x.face(id))];
        out.view_mut((row, col), c.shape()).copy_from(c);
        row += c.nrows();
    }
    Ok(out)
}

/// Dimension bookkeeping for `0 -> A -> F -> S -> 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerCheck {
    /// `chi(F) - chi(A) - chi(S)` on cochains.
    pub cochain_deviation: i64,
    /// `sum_k (-1)^k (dim H^k(A) - dim H^k(F) + dim H^k(S))`.
    pub cohomology_deviation: i64,
}

impl EulerCheck {
    pub fn is_balanced(&self) -> bool {
        self.cochain_deviation == 0 && self.cohomology_deviation == 0
    }
}

pub fn euler_check<S: Scalar>(
    m: &SheafMorphism<S>,
    opts: NumericOptions,
) -> Result<EulerCheck, SamplingError> {
    let a = ambiguity_sheaf(m, opts)?.sheaf;
    let cochain_deviation = m.source.euler_characteristic()
        - a.euler_characteristic()
        - m.destination.euler_characteristic();
    let alt = |dims: Vec<usize>| -> i64 {
        dims.iter()
            .enumerate()
            .map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    };
    let cohomology_deviation = alt(a.cohomology_dims(opts)?)
        - alt(m.source.cohomology_dims(opts)?)
        + alt(m.destination.cohomology_dims(opts)?);
    Ok(EulerCheck {
        cochain_deviation,
        cohomology_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(faces: &[&[usize]]) -> SimplicialComplex {
        SimplicialComplex::from_maximal_faces(faces.iter().map(|f| f.iter().copied())).unwrap()
    }

    fn face(vs: &[usize]) -> Face {
        Face::new(vs.iter().copied()).unwrap()
    }

    fn opts() -> NumericOptions {
        NumericOptions::default()
    }

    #[test]
    fn sampling_sheaf_sections_are_free_stalks() {
        let x = Arc::new(cx(&[&[0, 1], &[1, 2], &[2, 3]]));
        let all = sampling_sheaf::<f64>(x.clone(), &[0, 1, 2, 3], |_| 1).unwrap();
        assert_eq!(all.cohomology(0, opts()).unwrap().dim, 4);
        let none = sampling_sheaf::<f64>(x.clone(), &[], |_| 1).unwrap();
        assert_eq!(none.cohomology(0, opts()).unwrap().dim, 0);
        let star = Arc::new(cx(&[&[0, 1], &[0, 2], &[0, 3]]));
        let leaf = sampling_sheaf::<f64>(star, &[3], |_| 2).unwrap();
        assert_eq!(leaf.cohomology(0, opts()).unwrap().dim, 2);
        assert_eq!(
            sampling_sheaf::<f64>(x, &[9], |_| 1).unwrap_err(),
            SamplingError::UnsupportedSupport(9)
        );
    }

    /// Evaluation of the constant line sheaf on an edge at vertex 0.
    fn evaluation() -> SheafMorphism<f64> {
        let x = Arc::new(cx(&[&[0, 1]]));
        let f = CellularSheaf::<f64>::constant(x.clone(), 1);
        let s = sampling_sheaf::<f64>(x, &[0], |_| 1).unwrap();
        let comps = [(face(&[0]), DMatrix::identity(1, 1))]
            .into_iter()
            .collect();
        SheafMorphism::over_identity(f, s, comps).unwrap()
    }

    #[test]
    fn evaluation_morphism_commutes() {
        let m = evaluation();
        assert!(validate_morphism(&m, 1e-12).is_empty());
        assert!(is_sampling_morphism(&m, opts()).unwrap());
        let r = nyquist_check(&m, opts()).unwrap();
        // the edge value is determined by either endpoint: one sample recovers it
        assert_eq!(r.verdict, Verdict::Perfect);
        assert!(euler_check(&m, opts()).unwrap().is_balanced());
    }

    #[test]
    fn wrong_sign_is_one_violation() {
        let x = Arc::new(cx(&[&[0, 1]]));
        let f = CellularSheaf::<f64>::constant(x.clone(), 1);
        let mut comps: BTreeMap<Face, DMatrix<f64>> = x
            .iter()
            .map(|(_, a)| (a.clone(), DMatrix::identity(1, 1)))
            .collect();
        comps.insert(face(&[1]), -DMatrix::identity(1, 1));
        let m = SheafMorphism::over_identity(f.clone(), f, comps).unwrap();
        let v = validate_morphism(&m, 1e-12);
        assert_eq!(v.len(), 1);
        assert_eq!(
            v[0].kind,
            ViolationKind::NonCommutingSquare {
                from: face(&[1]),
                to: face(&[0, 1])
            }
        );
    }

    #[test]
    fn identity_and_zero_morphisms() {
        let x = Arc::new(cx(&[&[0, 1, 2], &[2, 3]]));
        let f = CellularSheaf::<f64>::constant(x.clone(), 2);
        let id = SheafMorphism::identity(&f);
        assert!(validate_morphism(&id, 1e-12).is_empty());
        let a = ambiguity_sheaf(&id, opts()).unwrap();
        assert_eq!(a.sheaf.euler_characteristic(), 0);
        assert!(a
            .sheaf
            .base()
            .iter()
            .all(|(i, _)| a.sheaf.stalk_dim(i) == 0));
        let h = induced_h0_map(&id, opts()).unwrap();
        assert!((h.matrix.clone() - DMatrix::identity(2, 2)).norm() < 1e-12);

        let zero = sampling_sheaf::<f64>(x, &[], |_| 0).unwrap();
        let z = SheafMorphism::over_identity(f.clone(), zero, BTreeMap::new()).unwrap();
        assert!(validate_morphism(&z, 1e-12).is_empty());
        let a = ambiguity_sheaf(&z, opts()).unwrap();
        assert_eq!(
            a.sheaf.cohomology_dims(opts()).unwrap(),
            f.cohomology_dims(opts()).unwrap()
        );
        assert_eq!(
            nyquist_check(&z, opts()).unwrap().verdict,
            Verdict::Ambiguous
        );
    }

    #[test]
    fn rank_deficient_component_is_not_surjective() {
        let x = Arc::new(cx(&[&[0]]));
        let f = CellularSheaf::<f64>::constant(x.clone(), 2);
        let g = CellularSheaf::<f64>::constant(x, 3);
        let comps = [(face(&[0]), DMatrix::from_element(3, 2, 1.0))]
            .into_iter()
            .collect();
        let m = SheafMorphism::over_identity(f, g, comps).unwrap();
        assert!(!is_sampling_morphism(&m, opts()).unwrap());
        assert!(matches!(
            ambiguity_sheaf(&m, opts()),
            Err(SamplingError::NotSurjective {
                rank: 1,
                rows: 3,
                ..
            })
        ));
    }

    #[test]
    fn non_invariant_kernel_is_detected() {
        // vertex kernels are span(e2), the edge kernel is span(e1)
        let x = Arc::new(cx(&[&[0, 1]]));
        let f = CellularSheaf::<f64>::constant(x.clone(), 2);
        let g = CellularSheaf::<f64>::constant(x, 1);
        let p1 = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let p2 = DMatrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let comps = [
            (face(&[0]), p1.clone()),
            (face(&[1]), p1),
            (face(&[0, 1]), p2),
        ]
        .into_iter()
        .collect();
        let m = SheafMorphism::over_identity(f, g, comps).unwrap();
        assert_eq!(validate_morphism(&m, 1e-12).len(), 2);
        assert!(matches!(
            ambiguity_sheaf(&m, opts()),
            Err(SamplingError::NonInvariantKernel { .. })
        ));
    }

    #[test]
    fn canonical_surjection_requires_closed_support() {
        let x = cx(&[&[0, 1]]);
        let f = CellularSheaf::<f64>::constant(x, 1);
        let y: BTreeSet<Face> = [face(&[0, 1])].into_iter().collect();
        assert!(matches!(
            canonical_surjection(&f, &y),
            Err(SamplingError::Complex(ComplexError::NotClosed { .. }))
        ));
        let all: BTreeSet<Face> = f.base().iter().map(|(_, a)| a.clone()).collect();
        let (fy, quotient) = restrict_to_subcomplex(&f, &all).unwrap();
        assert_eq!(fy, f);
        assert_eq!(quotient.euler_characteristic(), 0);
        assert_eq!(quotient.cochain_dim(0) + quotient.cochain_dim(1), 0);
    }

    #[test]
    fn oversampling_kills_lower_cochains() {
        let x = cx(&[&[0, 1, 2]]);
        let f = CellularSheaf::<f64>::constant(x.clone(), 2);
        let one_skeleton: BTreeSet<Face> = x.skeleton(1).iter().map(|(_, a)| a.clone()).collect();
        let (_, q) = restrict_to_subcomplex(&f, &one_skeleton).unwrap();
        assert_eq!(q.cochain_dim(0), 0);
        assert_eq!(q.cochain_dim(1), 0);
        assert_eq!(q.cochain_dim(2), 2);
        let r = obstruction_check(&f, &[0, 1, 2], opts()).unwrap();
        assert!(!r.obstructed);
    }

    #[test]
    fn simplicial_map_checks() {
        let path = Arc::new(cx(&[&[0, 1], &[1, 2]]));
        let edge = Arc::new(cx(&[&[0, 1]]));
        // fold the path onto an edge
        let fold = SimplicialMap::new(
            path.clone(),
            edge.clone(),
            [(0, 0), (1, 1), (2, 0)].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(fold.image(&face(&[1, 2])), face(&[0, 1]));
        assert!(!fold.is_identity());
        assert!(matches!(
            SimplicialMap::new(
                path.clone(),
                edge.clone(),
                [(0, 0), (1, 1)].into_iter().collect()
            ),
            Err(SamplingError::UnmappedVertex(2))
        ));
        let disconnected = Arc::new(cx(&[&[0], &[1]]));
        assert!(matches!(
            SimplicialMap::new(edge, disconnected, [(0, 0), (1, 1)].into_iter().collect()),
            Err(SamplingError::NotASimplicialMap { .. })
        ));

        // pull the constant sheaf back along the fold and compare sections
        let f = CellularSheaf::<f64>::constant(cx(&[&[0, 1]]), 1);
        let g = CellularSheaf::<f64>::constant(path.clone(), 1);
        let comps = path
            .iter()
            .map(|(_, a)| (a.clone(), DMatrix::identity(1, 1)))
            .collect();
        let m = SheafMorphism::new(fold, f, g, comps).unwrap();
        assert!(validate_morphism(&m, 1e-12).is_empty());
        let h = induced_h0_map(&m, opts()).unwrap();
        assert!(h.is_isomorphism());
        assert!(matches!(
            induced_map(&m, 1, opts()),
            Err(SamplingError::UnsupportedDegree(1))
        ));
        assert!(matches!(
            ambiguity_sheaf(&m, opts()),
            Err(SamplingError::NotOverIdentity)
        ));
    }

    #[test]
    fn missing_and_misshapen_components() {
        let x = Arc::new(cx(&[&[0, 1]]));
        let f = CellularSheaf::<f64>::constant(x.clone(), 1);
        assert!(matches!(
            SheafMorphism::over_identity(f.clone(), f.clone(), BTreeMap::new()),
            Err(SamplingError::MissingComponent(_))
        ));
        let comps = x
            .iter()
            .map(|(_, a)| (a.clone(), DMatrix::identity(2, 1)))
            .collect();
        assert!(matches!(
            SheafMorphism::over_identity(f.clone(), f, comps),
            Err(SamplingError::ComponentShape { .. })
        ));
    }
}
