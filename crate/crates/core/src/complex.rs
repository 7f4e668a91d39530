//! Abstract simplicial complexes.
//!
//! Faces are stored canonically as strictly increasing vertex lists, grouped
//! by dimension and sorted lexicographically inside each dimension. That
//! order is the one used for every cochain space in the crate.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex identifier.
pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("invalid face {0:?}: faces must be non-empty lists of distinct vertices")]
    InvalidFace(Vec<Vertex>),
    #[error("face {0} is not in the complex")]
    UnknownFace(Face),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("face set is not closed: {missing} is a face of {face} but is missing")]
    NotClosed { face: Face, missing: Face },
}

/// A face, i.e. a non-empty strictly increasing list of vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct Face(Vec<Vertex>);

impl Face {
    /// Sorts the vertices into canonical order. Rejects empty input and
    /// repeated vertices.
    pub fn new(vertices: impl IntoIterator<Item = Vertex>) -> Result<Self, ComplexError> {
        let mut vs: Vec<Vertex> = vertices.into_iter().collect();
        let raw = vs.clone();
        vs.sort_unstable();
        if vs.is_empty() || vs.windows(2).any(|w| w[0] == w[1]) {
            return Err(ComplexError::InvalidFace(raw));
        }
        Ok(Face(vs))
    }

    pub fn vertex(v: Vertex) -> Self {
        Face(vec![v])
    }

    pub fn edge(v: Vertex, w: Vertex) -> Result<Self, ComplexError> {
        Face::new([v, w])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// True iff `self` is a proper subset of `other`.
    pub fn is_proper_subface_of(&self, other: &Face) -> bool {
        self.0.len() < other.0.len() && self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }

    /// Codimension-1 faces, each paired with the position of the omitted
    /// vertex. Empty for a vertex.
    pub fn boundary(&self) -> Vec<(usize, Face)> {
        if self.0.len() < 2 {
            return Vec::new();
        }
        (0..self.0.len())
            .map(|j| {
                let mut vs = self.0.clone();
                vs.remove(j);
                (j, Face(vs))
            })
            .collect()
    }

    /// Every non-empty subset, including the face itself.
    pub fn subfaces(&self) -> Vec<Face> {
        let n = self.0.len();
        (1u64..(1u64 << n))
            .map(|mask| {
                Face(
                    (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| self.0[i])
                        .collect(),
                )
            })
            .collect()
    }
}

impl TryFrom<Vec<Vertex>> for Face {
    type Error = ComplexError;

    fn try_from(value: Vec<Vertex>) -> Result<Self, Self::Error> {
        Face::new(value)
    }
}

impl From<Face> for Vec<Vertex> {
    fn from(f: Face) -> Self {
        f.0
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// Orientation index `[b:a]`.
///
/// Zero unless `a` is a codimension-1 face of `b`; otherwise `(-1)^j` where
/// `j` is the position in `b` of the vertex that `a` omits.
pub fn orientation_index(b: &Face, a: &Face) -> i8 {
    if b.0.len() != a.0.len() + 1 || !a.is_proper_subface_of(b) {
        return 0;
    }
    let j =
        b.0.iter()
            .zip(a.0.iter().map(Some).chain(std::iter::once(None)))
            .position(|(bv, av)| av != Some(bv))
            .expect("a codimension-1 subface omits exactly one vertex");
    if j % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Position of a face inside a [`SimplicialComplex`]: its dimension and its
/// index among the faces of that dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId {
    pub dim: usize,
    pub index: usize,
}

/// Graph distance, possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeDistance {
    Finite(usize),
    Infinite,
}

impl EdgeDistance {
    pub fn finite(self) -> Option<usize> {
        match self {
            EdgeDistance::Finite(d) => Some(d),
            EdgeDistance::Infinite => None,
        }
    }

    pub fn is_at_most(self, bound: usize) -> bool {
        self <= EdgeDistance::Finite(bound)
    }
}

impl fmt::Display for EdgeDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeDistance::Finite(d) => write!(f, "{d}"),
            EdgeDistance::Infinite => f.write_str("inf"),
        }
    }
}

/// A finite abstract simplicial complex.
#[derive(Clone, Debug, Default)]
pub struct SimplicialComplex {
    faces: Vec<Vec<Face>>,
    index: HashMap<Face, FaceId>,
    // codimension-1 faces of each face, with orientation index
    facets: Vec<Vec<Vec<(FaceId, i8)>>>,
    // codimension-1 cofaces of each face
    cofaces: Vec<Vec<Vec<FaceId>>>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.faces == other.faces
    }
}

impl Eq for SimplicialComplex {}

impl SimplicialComplex {
    /// Smallest complex containing every listed face.
    pub fn from_maximal_faces<I, F>(faces: I) -> Result<Self, ComplexError>
    where
        I: IntoIterator<Item = F>,
        F: IntoIterator<Item = Vertex>,
    {
        let mut all = BTreeSet::new();
        for f in faces {
            let face = Face::new(f)?;
            all.extend(face.subfaces());
        }
        Ok(Self::from_closed_set(all))
    }

    /// Complex whose faces are exactly `faces`, which must already be closed
    /// under taking subsets.
    pub fn from_closed_faces(faces: impl IntoIterator<Item = Face>) -> Result<Self, ComplexError> {
        let set: BTreeSet<Face> = faces.into_iter().collect();
        for f in &set {
            for (_, g) in f.boundary() {
                if !set.contains(&g) {
                    return Err(ComplexError::NotClosed {
                        face: f.clone(),
                        missing: g,
                    });
                }
            }
        }
        Ok(Self::from_closed_set(set))
    }

    fn from_closed_set(set: BTreeSet<Face>) -> Self {
        let top = set.iter().map(Face::dim).max();
        let mut faces: Vec<Vec<Face>> = vec![Vec::new(); top.map_or(0, |d| d + 1)];
        // BTreeSet order is lexicographic, so each bucket ends up sorted.
        for f in set {
            faces[f.dim()].push(f);
        }
        let mut index = HashMap::new();
        for (dim, bucket) in faces.iter().enumerate() {
            for (i, f) in bucket.iter().enumerate() {
                index.insert(f.clone(), FaceId { dim, index: i });
            }
        }
        let mut facets: Vec<Vec<Vec<(FaceId, i8)>>> =
            faces.iter().map(|b| vec![Vec::new(); b.len()]).collect();
        let mut cofaces: Vec<Vec<Vec<FaceId>>> =
            faces.iter().map(|b| vec![Vec::new(); b.len()]).collect();
        for (dim, bucket) in faces.iter().enumerate().skip(1) {
            for (i, f) in bucket.iter().enumerate() {
                let me = FaceId { dim, index: i };
                for (j, g) in f.boundary() {
                    let gid = index[&g];
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    facets[dim][i].push((gid, sign));
                    cofaces[dim - 1][gid.index].push(me);
                }
                facets[dim][i].sort();
            }
        }
        for bucket in cofaces.iter_mut() {
            for c in bucket.iter_mut() {
                c.sort();
            }
        }
        SimplicialComplex {
            faces,
            index,
            facets,
            cofaces,
        }
    }

    /// Maximal dimension, `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.faces.len().checked_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Faces of dimension `k` in canonical order; empty above the dimension.
    pub fn faces(&self, k: usize) -> &[Face] {
        self.faces.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn num_faces(&self, k: usize) -> usize {
        self.faces(k).len()
    }

    /// All faces, by increasing dimension.
    pub fn iter(&self) -> impl Iterator<Item = (FaceId, &Face)> {
        self.faces.iter().enumerate().flat_map(|(dim, bucket)| {
            bucket
                .iter()
                .enumerate()
                .map(move |(index, f)| (FaceId { dim, index }, f))
        })
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.faces(0).iter().map(|f| f.0[0])
    }

    pub fn num_vertices(&self) -> usize {
        self.num_faces(0)
    }

    /// Maximal faces (faces with no cofaces), in canonical order.
    pub fn maximal_faces(&self) -> Vec<Face> {
        self.iter()
            .filter(|(id, _)| self.cofaces_of(*id).is_empty())
            .map(|(_, f)| f.clone())
            .collect()
    }

    pub fn id(&self, face: &Face) -> Option<FaceId> {
        self.index.get(face).copied()
    }

    pub fn require(&self, face: &Face) -> Result<FaceId, ComplexError> {
        self.id(face)
            .ok_or_else(|| ComplexError::UnknownFace(face.clone()))
    }

    pub fn contains(&self, face: &Face) -> bool {
        self.index.contains_key(face)
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id.dim][id.index]
    }

    /// Codimension-1 faces of `id` with their orientation indices.
    pub fn facets_of(&self, id: FaceId) -> &[(FaceId, i8)] {
        &self.facets[id.dim][id.index]
    }

    /// Codimension-1 cofaces of `id`.
    pub fn cofaces_of(&self, id: FaceId) -> &[FaceId] {
        &self.cofaces[id.dim][id.index]
    }

    /// Whether `a` is attached to `b`, i.e. a proper subset of it.
    pub fn attached(&self, a: &Face, b: &Face) -> Result<bool, ComplexError> {
        self.require(a)?;
        self.require(b)?;
        Ok(a.is_proper_subface_of(b))
    }

    /// All faces of dimension at most `k`.
    pub fn skeleton(&self, k: usize) -> SimplicialComplex {
        let set = self.faces.iter().take(k + 1).flatten().cloned().collect();
        Self::from_closed_set(set)
    }

    /// Checks closure under subsets. Always holds for complexes built by
    /// this module; exposed for diagnostics.
    pub fn check_closed(&self) -> Result<(), ComplexError> {
        for (_, f) in self.iter() {
            for g in f.subfaces() {
                if !self.contains(&g) {
                    return Err(ComplexError::NotClosed {
                        face: f.clone(),
                        missing: g,
                    });
                }
            }
        }
        Ok(())
    }

    /// Verifies that `faces` is a closed subcomplex of `self`.
    pub fn check_closed_subset(&self, faces: &BTreeSet<Face>) -> Result<(), ComplexError> {
        for f in faces {
            self.require(f)?;
            for (_, g) in f.boundary() {
                if !faces.contains(&g) {
                    return Err(ComplexError::NotClosed {
                        face: f.clone(),
                        missing: g,
                    });
                }
            }
        }
        Ok(())
    }

    /// Edges containing `v`, in canonical order.
    pub fn incident_edges(&self, v: Vertex) -> Vec<Face> {
        match self.id(&Face::vertex(v)) {
            Some(id) => self
                .cofaces_of(id)
                .iter()
                .map(|&e| self.face(e).clone())
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.id(&Face::vertex(v))
            .map_or(0, |id| self.cofaces_of(id).len())
    }

    pub fn neighbors(&self, v: Vertex) -> Vec<Vertex> {
        self.incident_edges(v)
            .into_iter()
            .map(|e| if e.0[0] == v { e.0[1] } else { e.0[0] })
            .collect()
    }

    /// Breadth-first distances through the 1-skeleton from a set of sources.
    fn distances_from(&self, sources: &[Vertex]) -> HashMap<Vertex, usize> {
        let mut dist = HashMap::new();
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist.insert(s, 0).is_none() {
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for w in self.neighbors(v) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Minimal number of edges on a path from `v` to `w`.
    pub fn edge_distance(&self, v: Vertex, w: Vertex) -> Result<EdgeDistance, ComplexError> {
        self.require(&Face::vertex(v))?;
        self.require(&Face::vertex(w))?;
        Ok(self
            .distances_from(&[v])
            .get(&w)
            .map_or(EdgeDistance::Infinite, |&d| EdgeDistance::Finite(d)))
    }

    /// Maximum over all vertices of the distance to the nearest vertex of
    /// `samples`. Infinite when `samples` is empty or does not reach every
    /// vertex. Sample ids that are not vertices are ignored.
    pub fn max_edge_distance(&self, samples: &[Vertex]) -> EdgeDistance {
        let sources: Vec<Vertex> = samples
            .iter()
            .copied()
            .filter(|&v| self.contains(&Face::vertex(v)))
            .collect();
        if sources.is_empty() {
            return EdgeDistance::Infinite;
        }
        let dist = self.distances_from(&sources);
        let mut worst = 0;
        for v in self.vertices() {
            match dist.get(&v) {
                Some(&d) => worst = worst.max(d),
                None => return EdgeDistance::Infinite,
            }
        }
        EdgeDistance::Finite(worst)
    }
}

/// A finite cover: labelled, non-empty sets of opaque point ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    sets: Vec<(String, BTreeSet<u64>)>,
}

impl Cover {
    pub fn new(sets: Vec<(String, BTreeSet<u64>)>) -> Result<Self, ComplexError> {
        let mut seen = BTreeSet::new();
        for (label, set) in &sets {
            if !seen.insert(label.as_str()) {
                return Err(ComplexError::InvalidCover(format!(
                    "duplicate label {label:?}"
                )));
            }
            if set.is_empty() {
                return Err(ComplexError::InvalidCover(format!(
                    "set {label:?} is empty"
                )));
            }
        }
        Ok(Cover { sets })
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.sets.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Nerve of the cover: vertex `i` is the `i`-th set, and a face is
    /// present iff the corresponding sets have a common point.
    pub fn nerve(&self) -> SimplicialComplex {
        let mut all = BTreeSet::new();
        // (face vertices, common points)
        let mut frontier: Vec<(Vec<Vertex>, BTreeSet<u64>)> = self
            .sets
            .iter()
            .enumerate()
            .map(|(i, (_, s))| (vec![i], s.clone()))
            .collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (vs, common) in frontier {
                let last = *vs.last().expect("faces are non-empty");
                for j in (last + 1)..self.sets.len() {
                    let meet: BTreeSet<u64> =
                        common.intersection(&self.sets[j].1).copied().collect();
                    if !meet.is_empty() {
                        let mut grown = vs.clone();
                        grown.push(j);
                        next.push((grown, meet));
                    }
                }
                all.insert(Face(vs));
            }
            frontier = next;
        }
        SimplicialComplex::from_closed_set(all)
    }
}
