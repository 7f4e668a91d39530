//! The interchange document: one JSON file holding a complex and, optionally,
//! a sheaf on it, a morphism out of that sheaf, a sample support and edge
//! metadata for metric graphs.
//!
//! Matrices are row-major with explicit `rows` and `cols`. Entries are always
//! written as `[re, im]`; the reader also accepts bare numbers.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sheaf_sampling::sampling::SimplicialMap;
use sheaf_sampling::zoo::MetricGraph;
use sheaf_sampling::{
    CellularSheaf, Complex64, Face, Scalar, ScalarField, SheafBuilder, SheafMorphism,
    SimplicialComplex, Vertex,
};
use thiserror::Error;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported format version {0:?}, expected {FORMAT_VERSION:?}")]
    Version(String),
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> DocumentError {
    DocumentError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub version: String,
    /// Maximal faces; their closure is the complex.
    pub complex: Vec<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_lengths: Option<Vec<EdgeLength>>,
    /// `[tail, head]` for edges not pointing from the lower to the higher vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_directions: Option<Vec<[Vertex; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sheaf: Option<SheafDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<MorphismDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_support: Option<Vec<Vertex>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeLength {
    pub edge: [Vertex; 2],
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafDoc {
    pub field: ScalarField,
    pub stalks: Vec<StalkDoc>,
    pub restrictions: Vec<RestrictionDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StalkDoc {
    pub face: Vec<Vertex>,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionDoc {
    pub from: Vec<Vertex>,
    pub to: Vec<Vertex>,
    pub matrix: MatrixDoc,
}

/// A morphism `F -> G` from the document's sheaf `F` to `G`. `G` lives on
/// `complex` (the document complex when omitted) and `vertex_map` sends its
/// vertices into the document complex (the identity when omitted).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex: Option<Vec<Vec<Vertex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_map: Option<Vec<[Vertex; 2]>>,
    pub destination: SheafDoc,
    pub components: Vec<ComponentDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub face: Vec<Vertex>,
    pub matrix: MatrixDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Entry>,
}

/// A matrix entry as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawEntry", into = "[f64; 2]")]
pub struct Entry(pub [f64; 2]);

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl From<RawEntry> for Entry {
    fn from(raw: RawEntry) -> Self {
        match raw {
            RawEntry::Real(x) => Entry([x, 0.0]),
            RawEntry::Pair(p) => Entry(p),
        }
    }
}

impl From<Entry> for [f64; 2] {
    fn from(e: Entry) -> Self {
        e.0
    }
}

/// A sheaf of either field.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySheaf {
    Real(CellularSheaf<f64>),
    Complex(CellularSheaf<Complex64>),
}

#[derive(Clone, Debug)]
pub enum AnyMorphism {
    Real(SheafMorphism<f64>),
    Complex(SheafMorphism<Complex64>),
}

fn face(vertices: &[Vertex]) -> Result<Face, DocumentError> {
    Face::new(vertices.iter().copied()).map_err(|e| invalid(e.to_string()))
}

fn complex_from(faces: &[Vec<Vertex>]) -> Result<SimplicialComplex, DocumentError> {
    SimplicialComplex::from_maximal_faces(faces.iter().cloned())
        .map_err(|e| invalid(format!("complex: {e}")))
}

impl MatrixDoc {
    pub fn from_matrix<S: Scalar>(m: &DMatrix<S>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(Entry(m[(i, j)].to_parts()));
            }
        }
        MatrixDoc {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    /// `what` names the matrix in error messages.
    pub fn to_matrix<S: Scalar>(&self, what: &str) -> Result<DMatrix<S>, DocumentError> {
        if self.data.len() != self.rows * self.cols {
            return Err(invalid(format!(
                "{what}: {} entries for a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (k, Entry([re, im])) in self.data.iter().enumerate() {
            let (i, j) = (k / self.cols, k % self.cols);
            if !re.is_finite() || !im.is_finite() {
                return Err(invalid(format!("{what}: entry ({i}, {j}) is not finite")));
            }
            m[(i, j)] = S::from_parts(*re, *im).ok_or_else(|| {
                invalid(format!(
                    "{what}: entry ({i}, {j}) has imaginary part {im} in a real sheaf"
                ))
            })?;
        }
        Ok(m)
    }
}

impl SheafDoc {
    pub fn from_sheaf<S: Scalar>(f: &CellularSheaf<S>) -> Self {
        let x = f.base();
        let stalks = x
            .iter()
            .map(|(id, a)| StalkDoc {
                face: a.vertices().to_vec(),
                dim: f.stalk_dim(id),
            })
            .collect();
        let mut restrictions = Vec::new();
        for (bid, b) in x.iter() {
            for (aid, _, m) in f.restrictions_into(bid) {
                restrictions.push(RestrictionDoc {
                    from: x.face(aid).vertices().to_vec(),
                    to: b.vertices().to_vec(),
                    matrix: MatrixDoc::from_matrix(m),
                });
            }
        }
        SheafDoc {
            field: S::FIELD,
            stalks,
            restrictions,
        }
    }

    pub fn to_sheaf<S: Scalar>(
        &self,
        base: Arc<SimplicialComplex>,
    ) -> Result<CellularSheaf<S>, DocumentError> {
        let mut b = SheafBuilder::<S>::new(base);
        for s in &self.stalks {
            let f = face(&s.face)?;
            b.stalk(&f, s.dim)
                .map_err(|e| invalid(format!("stalk {f}: {e}")))?;
        }
        for r in &self.restrictions {
            let (from, to) = (face(&r.from)?, face(&r.to)?);
            let what = format!("restriction {from} -> {to}");
            let m = r.matrix.to_matrix::<S>(&what)?;
            b.restriction(&from, &to, m)
                .map_err(|e| invalid(format!("{what}: {e}")))?;
        }
        b.build().map_err(|e| invalid(e.to_string()))
    }

    pub fn to_any(&self, base: Arc<SimplicialComplex>) -> Result<AnySheaf, DocumentError> {
        Ok(match self.field {
            ScalarField::Real => AnySheaf::Real(self.to_sheaf(base)?),
            ScalarField::Complex => AnySheaf::Complex(self.to_sheaf(base)?),
        })
    }
}

impl MorphismDoc {
    pub fn from_morphism<S: Scalar>(m: &SheafMorphism<S>) -> Self {
        let map = m.map();
        let identity = map.is_identity();
        let x = map.source();
        let mut components = Vec::new();
        for (id, a) in x.iter() {
            let c = m.component(id);
            if !c.is_empty() {
                components.push(ComponentDoc {
                    face: a.vertices().to_vec(),
                    matrix: MatrixDoc::from_matrix(c),
                });
            }
        }
        MorphismDoc {
            complex: (!identity).then(|| {
                x.maximal_faces()
                    .iter()
                    .map(|f| f.vertices().to_vec())
                    .collect()
            }),
            vertex_map: (!identity)
                .then(|| map.vertex_map().iter().map(|(&a, &b)| [a, b]).collect()),
            destination: SheafDoc::from_sheaf(m.destination()),
            components,
        }
    }

    pub fn to_morphism<S: Scalar>(
        &self,
        source: CellularSheaf<S>,
    ) -> Result<SheafMorphism<S>, DocumentError> {
        if self.destination.field != S::FIELD {
            return Err(invalid(format!(
                "morphism destination is {} but the sheaf is {}",
                self.destination.field,
                S::FIELD
            )));
        }
        let target = source.base_arc().clone();
        let domain: Arc<SimplicialComplex> = match &self.complex {
            Some(faces) => Arc::new(complex_from(faces)?),
            None => target.clone(),
        };
        let map = match &self.vertex_map {
            Some(pairs) => {
                let vm: BTreeMap<Vertex, Vertex> = pairs.iter().map(|&[a, b]| (a, b)).collect();
                if vm.len() != pairs.len() {
                    return Err(invalid("vertex map lists a vertex twice"));
                }
                SimplicialMap::new(domain.clone(), target, vm)
                    .map_err(|e| invalid(format!("vertex map: {e}")))?
            }
            None if domain == target => SimplicialMap::identity(target),
            None => {
                return Err(invalid(
                    "morphism complex differs from the document complex but has no vertex map",
                ))
            }
        };
        let destination = self.destination.to_sheaf::<S>(domain)?;
        let mut comps = BTreeMap::new();
        for c in &self.components {
            let f = face(&c.face)?;
            let m = c.matrix.to_matrix::<S>(&format!("component on {f}"))?;
            if comps.insert(f.clone(), m).is_some() {
                return Err(invalid(format!("component on {f} given twice")));
            }
        }
        SheafMorphism::new(map, source, destination, comps)
            .map_err(|e| invalid(format!("morphism: {e}")))
    }
}

impl Document {
    pub fn new(complex: &SimplicialComplex) -> Self {
        Document {
            version: FORMAT_VERSION.to_string(),
            complex: complex
                .maximal_faces()
                .iter()
                .map(|f| f.vertices().to_vec())
                .collect(),
            edge_lengths: None,
            edge_directions: None,
            sheaf: None,
            morphism: None,
            sample_support: None,
        }
    }

    pub fn with_sheaf<S: Scalar>(f: &CellularSheaf<S>) -> Self {
        Document {
            sheaf: Some(SheafDoc::from_sheaf(f)),
            ..Document::new(f.base())
        }
    }

    pub fn with_morphism<S: Scalar>(m: &SheafMorphism<S>) -> Self {
        Document {
            morphism: Some(MorphismDoc::from_morphism(m)),
            ..Document::with_sheaf(m.source())
        }
    }

    /// Records lengths and non-canonical directions of a metric graph.
    pub fn set_metric(&mut self, mg: &MetricGraph) {
        self.edge_lengths = Some(
            mg.lengths()
                .iter()
                .map(|(e, &length)| EdgeLength {
                    edge: [e.vertices()[0], e.vertices()[1]],
                    length,
                })
                .collect(),
        );
        let reversed: Vec<[Vertex; 2]> = mg
            .lengths()
            .keys()
            .map(|e| mg.direction(e))
            .filter(|(t, h)| t > h)
            .map(|(t, h)| [t, h])
            .collect();
        self.edge_directions = (!reversed.is_empty()).then_some(reversed);
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.version != FORMAT_VERSION {
            return Err(DocumentError::Version(doc.version));
        }
        Ok(doc)
    }

    pub fn emit(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn complex(&self) -> Result<SimplicialComplex, DocumentError> {
        complex_from(&self.complex)
    }

    pub fn sheaf(&self) -> Result<AnySheaf, DocumentError> {
        let doc = self
            .sheaf
            .as_ref()
            .ok_or_else(|| invalid("document has no sheaf"))?;
        doc.to_any(Arc::new(self.complex()?))
    }

    /// The document's morphism applied to `source`, which defaults to the
    /// document's own sheaf.
    pub fn morphism(&self, source: Option<AnySheaf>) -> Result<AnyMorphism, DocumentError> {
        let doc = self
            .morphism
            .as_ref()
            .ok_or_else(|| invalid("document has no morphism"))?;
        let source = match source {
            Some(s) => s,
            None => self.sheaf()?,
        };
        Ok(match source {
            AnySheaf::Real(f) => AnyMorphism::Real(doc.to_morphism(f)?),
            AnySheaf::Complex(f) => AnyMorphism::Complex(doc.to_morphism(f)?),
        })
    }

    pub fn metric_graph(&self) -> Result<MetricGraph, DocumentError> {
        let lengths = self
            .edge_lengths
            .as_ref()
            .ok_or_else(|| invalid("document has no edge_lengths"))?;
        let mut map = BTreeMap::new();
        for l in lengths {
            let e = face(&l.edge)?;
            if map.insert(e.clone(), l.length).is_some() {
                return Err(invalid(format!("edge {e} has two lengths")));
            }
        }
        let mut mg = MetricGraph::new(self.complex()?, map).map_err(|e| invalid(e.to_string()))?;
        for &[tail, head] in self.edge_directions.iter().flatten() {
            mg = mg
                .with_direction(tail, head)
                .map_err(|e| invalid(e.to_string()))?;
        }
        Ok(mg)
    }
}
