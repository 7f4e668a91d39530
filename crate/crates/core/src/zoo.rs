//! Constructors for concrete sheaf families on graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::complex::{
    orientation_index, ComplexError, EdgeDistance, Face, SimplicialComplex, Vertex,
};
use crate::linalg::NumericOptions;
use crate::sampling::{self, SamplingError};
use crate::scalar::{ComplexScalar, Scalar};
use crate::sheaf::{CellularSheaf, SheafError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZooError {
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected a graph, got a complex of dimension {0}")]
    NotAGraph(usize),
    #[error("edge {0} has no length")]
    MissingLength(Face),
    #[error("edge {0} has non-positive length {1}")]
    NonPositiveLength(Face, f64),
    #[error("vertex {0} is isolated")]
    IsolatedVertex(Vertex),
    #[error("hypothesis med(Y) <= 1 violated: med(Y) = {0}")]
    HypothesisViolated(EdgeDistance),
    #[error("closed form gives {formula} but the computed dimension is {computed}")]
    FormulaMismatch { formula: usize, computed: usize },
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> SimplicialComplex {
    let faces: Vec<Vec<Vertex>> = if n == 1 {
        vec![vec![0]]
    } else {
        (1..n).map(|i| vec![i - 1, i]).collect()
    };
    SimplicialComplex::from_maximal_faces(faces).expect("path faces are valid")
}

/// Cycle on `n >= 3` vertices.
pub fn cycle_graph(n: usize) -> SimplicialComplex {
    SimplicialComplex::from_maximal_faces((0..n).map(|i| vec![i, (i + 1) % n]))
        .expect("cycle faces are valid")
}

/// Center `0` joined to leaves `1..=leaves`.
pub fn star_graph(leaves: usize) -> SimplicialComplex {
    SimplicialComplex::from_maximal_faces((1..=leaves).map(|i| vec![0, i]))
        .expect("star faces are valid")
}

fn require_graph(g: &SimplicialComplex) -> Result<(), ZooError> {
    match g.dimension() {
        Some(d) if d > 1 => Err(ZooError::NotAGraph(d)),
        _ => Ok(()),
    }
}

fn sorted_incident_edges(g: &SimplicialComplex, v: Vertex) -> Vec<Face> {
    let mut edges = g.incident_edges(v);
    edges.sort();
    edges
}

/// A graph with a positive length on every edge.
///
/// Edges point from their lower to their higher vertex unless redirected
/// with [`MetricGraph::with_direction`]; wave sheaves read orientations from
/// here rather than from the vertex order.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    graph: Arc<SimplicialComplex>,
    lengths: BTreeMap<Face, f64>,
    reversed: BTreeSet<Face>,
}

impl MetricGraph {
    pub fn new(
        graph: impl Into<Arc<SimplicialComplex>>,
        lengths: BTreeMap<Face, f64>,
    ) -> Result<Self, ZooError> {
        let graph = graph.into();
        require_graph(&graph)?;
        for e in graph.faces(1) {
            match lengths.get(e) {
                None => return Err(ZooError::MissingLength(e.clone())),
                Some(&l) if !(l > 0.0 && l.is_finite()) => {
                    return Err(ZooError::NonPositiveLength(e.clone(), l))
                }
                _ => {}
            }
        }
        let lengths = lengths
            .into_iter()
            .filter(|(e, _)| graph.contains(e) && e.dim() == 1)
            .collect();
        Ok(MetricGraph {
            graph,
            lengths,
            reversed: BTreeSet::new(),
        })
    }

    /// Points `edge` from `tail` to `head`.
    pub fn with_direction(mut self, tail: Vertex, head: Vertex) -> Result<Self, ZooError> {
        let edge = Face::edge(tail, head).map_err(SheafError::from)?;
        if !self.graph.contains(&edge) {
            return Err(SheafError::from(ComplexError::UnknownFace(edge)).into());
        }
        if tail < head {
            self.reversed.remove(&edge);
        } else {
            self.reversed.insert(edge);
        }
        Ok(self)
    }

    /// `(tail, head)` of an edge.
    pub fn direction(&self, edge: &Face) -> (Vertex, Vertex) {
        let (a, b) = (edge.vertices()[0], edge.vertices()[1]);
        if self.reversed.contains(edge) {
            (b, a)
        } else {
            (a, b)
        }
    }

    /// `+1` if `v` is the head of `edge`, `-1` if it is the tail.
    pub fn orientation(&self, edge: &Face, v: Vertex) -> i8 {
        if self.direction(edge).1 == v {
            1
        } else {
            -1
        }
    }

    pub fn uniform(
        graph: impl Into<Arc<SimplicialComplex>>,
        length: f64,
    ) -> Result<Self, ZooError> {
        let graph = graph.into();
        let lengths = graph.faces(1).iter().map(|e| (e.clone(), length)).collect();
        Self::new(graph, lengths)
    }

    pub fn graph(&self) -> &Arc<SimplicialComplex> {
        &self.graph
    }

    pub fn lengths(&self) -> &BTreeMap<Face, f64> {
        &self.lengths
    }

    pub fn length(&self, edge: &Face) -> Option<f64> {
        self.lengths.get(edge).copied()
    }
}

/// The `m`-term grouping sheaf of `S^v_dim` on a path with `n` vertices.
/// Vertex stalks hold `m` consecutive blocks, edge stalks `m - 1`; a vertex
/// drops its first block toward its right edge and its last block toward its
/// left edge.
pub fn grouping_sheaf<S: Scalar>(
    n: usize,
    m: usize,
    v_dim: usize,
) -> Result<CellularSheaf<S>, ZooError> {
    if n < 2 || m < 1 || v_dim < 1 {
        return Err(ZooError::InvalidParameter(format!(
            "grouping sheaf needs N >= 2, m >= 1, dim V >= 1 (got {n}, {m}, {v_dim})"
        )));
    }
    let edge_dim = (m - 1) * v_dim;
    let sheaf = CellularSheaf::from_fn(
        path_graph(n),
        |f| if f.dim() == 0 { m * v_dim } else { edge_dim },
        |v, e| {
            let mut r = DMatrix::zeros(edge_dim, m * v_dim);
            // the left end of an edge sees its right neighbourhood
            let skip = if v.vertices()[0] == e.vertices()[0] {
                v_dim
            } else {
                0
            };
            for i in 0..edge_dim {
                r[(i, i + skip)] = S::one();
            }
            r
        },
    )?;
    Ok(sheaf)
}

/// Piecewise-linear functions on a graph. A vertex of degree `d` carries
/// `(y, m_1, ..., m_d)`, a value and one slope per incident edge in sorted
/// order; edges carry two numbers and the restriction to the `j`-th edge is
/// `(y + ([e:v] - 1) m_j / 2, m_j)`. Isolated vertices carry a value only.
pub fn pl_sheaf<S: Scalar>(
    graph: impl Into<Arc<SimplicialComplex>>,
) -> Result<CellularSheaf<S>, ZooError> {
    let graph = graph.into();
    require_graph(&graph)?;
    let g = graph.clone();
    let sheaf = CellularSheaf::from_fn(
        graph,
        |f| {
            if f.dim() == 0 {
                1 + g.degree(f.vertices()[0])
            } else {
                2
            }
        },
        |v, e| {
            let vertex = v.vertices()[0];
            let j = sorted_incident_edges(&g, vertex)
                .iter()
                .position(|x| x == e)
                .expect("edge is incident");
            let sign = orientation_index(e, v) as f64;
            let mut r = DMatrix::zeros(2, 1 + g.degree(vertex));
            r[(0, 0)] = S::one();
            r[(0, 1 + j)] = S::of_f64((sign - 1.0) / 2.0);
            r[(1, 1 + j)] = S::one();
            r
        },
    )?;
    Ok(sheaf)
}

/// Traveling-wave solutions of the Helmholtz equation with wavenumber `k`.
/// A vertex of degree `d` carries the `d` incoming amplitudes `u_j`, an edge
/// carries the two amplitudes of its waves. With `w = 2/d sum u_j - u_m`,
/// the restriction to the `m`-th incident edge is `(u_m, e^{-ikL} w)` if
/// `v` is the head of `e` and `(e^{ikL} w, u_m)` if it is the tail.
pub fn transmission_line_sheaf<S: ComplexScalar>(
    mg: &MetricGraph,
    k: S,
) -> Result<CellularSheaf<S>, ZooError> {
    let g = mg.graph().clone();
    if let Some(v) = g.vertices().find(|&v| g.degree(v) == 0) {
        return Err(ZooError::IsolatedVertex(v));
    }
    let i = S::imaginary_unit();
    let sheaf = CellularSheaf::from_fn(
        g.clone(),
        |f| {
            if f.dim() == 0 {
                g.degree(f.vertices()[0])
            } else {
                2
            }
        },
        |v, e| {
            let vertex = v.vertices()[0];
            let deg = g.degree(vertex);
            let m = sorted_incident_edges(&g, vertex)
                .iter()
                .position(|x| x == e)
                .expect("edge is incident");
            let phase = i * k * S::of_f64(mg.length(e).expect("validated lengths"));
            let avg = S::of_f64(2.0 / deg as f64);
            // row of w = 2/d sum u_j - u_m
            let mut w = DMatrix::from_element(1, deg, avg);
            w[(0, m)] -= S::one();
            let mut r = DMatrix::zeros(2, deg);
            let (keep_row, wave_row, factor) = if mg.orientation(e, vertex) > 0 {
                (0, 1, (-phase).exp())
            } else {
                (1, 0, phase.exp())
            };
            r[(keep_row, m)] = S::one();
            r.row_mut(wave_row).copy_from(&(w * factor));
            r
        },
    )?;
    Ok(sheaf)
}

/// Degree and knot spacing of a polynomial spline sheaf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplineParams {
    pub degree: usize,
    pub spacing: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Restriction from the left knot of a segment: keeps `a_0..a_{n-1}` and
/// `a_n^+`.
pub fn spline_left_restriction<S: Scalar>(n: usize) -> DMatrix<S> {
    let mut r = DMatrix::zeros(n + 1, n + 2);
    for k in 0..n {
        r[(k, k)] = S::one();
    }
    r[(n, n + 1)] = S::one();
    r
}

/// Restriction from the right knot of a segment of length `l`: rewrites
/// `sum_{i<n} b_i (x - l)^i + b_n^- (x - l)^n` in powers of `x`, so that
/// `a_k = sum_{i=k}^{n-1} C(i,k) (-l)^(i-k) b_i + C(n,k) (-l)^(n-k) b_n^-`.
pub fn spline_right_restriction<S: Scalar>(n: usize, l: f64) -> DMatrix<S> {
    let mut r = DMatrix::zeros(n + 1, n + 2);
    for k in 0..=n {
        for i in k..=n {
            r[(k, i)] = S::of_f64(binomial(i, k) * (-l).powi((i - k) as i32));
        }
    }
    r
}

/// Degree-`n` splines on a path of `vertices` knots, segment `i` of length
/// `spacings[i]`. Vertex coordinates are `(a_0, ..., a_{n-1}, a_n^-, a_n^+)`,
/// edge coordinates are the `n + 1` coefficients of the segment polynomial
/// expanded at its left knot.
pub fn spline_sheaf_with_spacings<S: Scalar>(
    vertices: usize,
    degree: usize,
    spacings: &[f64],
) -> Result<CellularSheaf<S>, ZooError> {
    if vertices < 2 {
        return Err(ZooError::InvalidParameter(format!(
            "spline sheaf needs at least 2 vertices, got {vertices}"
        )));
    }
    if spacings.len() != vertices - 1 {
        return Err(ZooError::InvalidParameter(format!(
            "{} spacings given for {} segments",
            spacings.len(),
            vertices - 1
        )));
    }
    if let Some(&l) = spacings.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(ZooError::InvalidParameter(format!(
            "spacing {l} is not positive"
        )));
    }
    let sheaf = CellularSheaf::from_fn(
        path_graph(vertices),
        |f| if f.dim() == 0 { degree + 2 } else { degree + 1 },
        |v, e| {
            let left = e.vertices()[0];
            if v.vertices()[0] == left {
                spline_left_restriction(degree)
            } else {
                spline_right_restriction(degree, spacings[left])
            }
        },
    )?;
    Ok(sheaf)
}

pub fn spline_sheaf<S: Scalar>(
    vertices: usize,
    params: SplineParams,
) -> Result<CellularSheaf<S>, ZooError> {
    let spacings = vec![params.spacing; vertices.saturating_sub(1)];
    spline_sheaf_with_spacings(vertices, params.degree, &spacings)
}

/// `2|X^1| - sum_{y not in Y} (deg y + 1)`, the redundancy of full-stalk
/// sampling of the piecewise-linear sheaf when `med(Y) <= 1`, checked
/// against the numerically computed `dim H^1` of the ambiguity sheaf.
pub fn pl_redundancy_dim(
    graph: impl Into<Arc<SimplicialComplex>>,
    support: &[Vertex],
    opts: NumericOptions,
) -> Result<usize, ZooError> {
    let graph = graph.into();
    require_graph(&graph)?;
    let med = graph.max_edge_distance(support);
    if !med.is_at_most(1) {
        return Err(ZooError::HypothesisViolated(med));
    }
    let formula = pl_redundancy_formula(&graph, support);
    let f = pl_sheaf::<f64>(graph)?;
    let m = sampling::full_stalk_sampling(&f, support)?;
    let computed = sampling::nyquist_check(&m, opts)?.redundancy_dim;
    if formula != computed {
        return Err(ZooError::FormulaMismatch { formula, computed });
    }
    Ok(formula)
}

/// The closed form alone; saturates at zero.
pub fn pl_redundancy_formula(graph: &SimplicialComplex, support: &[Vertex]) -> usize {
    let unsampled: usize = graph
        .vertices()
        .filter(|v| !support.contains(v))
        .map(|v| graph.degree(v) + 1)
        .sum();
    (2 * graph.num_faces(1)).saturating_sub(unsampled)
}
