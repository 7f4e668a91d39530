mod common;

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sheaf_sampling::sampling::{self, full_stalk_sampling, SheafMorphism};
use sheaf_sampling::zoo;
use sheaf_sampling::{
    Complex64, ComplexSheaf, EdgeDistance, Face, NumericOptions, RealSheaf, Scalar,
    SimplicialComplex, Vertex,
};

fn opts() -> NumericOptions {
    NumericOptions::default()
}

fn random_complex(
    rng: &mut ChaCha8Rng,
    vertices: usize,
    facets: usize,
    max_dim: usize,
) -> SimplicialComplex {
    let mut faces: Vec<Vec<Vertex>> = (0..vertices).map(|v| vec![v]).collect();
    for _ in 0..facets {
        let size = rng.random_range(2..=(max_dim + 1).min(vertices).max(2));
        let mut f: BTreeSet<Vertex> = BTreeSet::new();
        while f.len() < size.min(vertices) {
            f.insert(rng.random_range(0..vertices));
        }
        faces.push(f.into_iter().collect());
    }
    SimplicialComplex::from_maximal_faces(faces).unwrap()
}

fn random_matrix<S: Scalar>(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<S> {
    DMatrix::from_fn(r, c, |_, _| {
        let re = rng.random_range(-1.0..1.0);
        let im = if S::FIELD == sheaf_sampling::ScalarField::Complex {
            rng.random_range(-1.0..1.0)
        } else {
            0.0
        };
        S::from_parts(re, im).unwrap()
    })
}

/// A constant sheaf seen through a random change of basis on every stalk:
/// `F(a -> b) = G_b G_a^{-1}`. Functorial by construction and isomorphic
/// to the constant sheaf.
fn gauge_sheaf<S: Scalar>(
    x: &SimplicialComplex,
    dim: usize,
    rng: &mut ChaCha8Rng,
    relabel: impl Fn(&Face) -> Face,
    gauges: &mut BTreeMap<Face, DMatrix<S>>,
) -> sheaf_sampling::CellularSheaf<S> {
    for (_, f) in x.iter() {
        let key = relabel(f);
        gauges.entry(key).or_insert_with(|| {
            let mut g = random_matrix::<S>(rng, dim, dim);
            for i in 0..dim {
                g[(i, i)] += S::of_f64(3.0);
            }
            g
        });
    }
    sheaf_sampling::CellularSheaf::from_fn(
        x.clone(),
        |_| dim,
        |a, b| {
            let ga = &gauges[&relabel(a)];
            let gb = &gauges[&relabel(b)];
            gb * ga.clone().try_inverse().expect("diagonally dominant")
        },
    )
    .unwrap()
}

fn betti(x: &SimplicialComplex) -> Vec<usize> {
    RealSheaf::constant(x.clone(), 1)
        .cohomology_dims(opts())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coboundaries_compose_to_zero(seed in any::<u64>(), n in 3usize..7, facets in 1usize..5, dim in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_complex(&mut rng, n, facets, 3);
        let f: RealSheaf = gauge_sheaf(&x, dim, &mut rng, |f| f.clone(), &mut BTreeMap::new());
        prop_assert!(f.d_squared_check() <= 1e-10);
        prop_assert!(f.validate(1e-10).is_empty());
        let g: ComplexSheaf = gauge_sheaf(&x, dim, &mut rng, |f| f.clone(), &mut BTreeMap::new());
        prop_assert!(g.d_squared_check() <= 1e-10);
    }

    #[test]
    fn gauge_sheaves_have_constant_cohomology(seed in any::<u64>(), n in 3usize..7, facets in 1usize..5, dim in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_complex(&mut rng, n, facets, 3);
        let f: RealSheaf = gauge_sheaf(&x, dim, &mut rng, |f| f.clone(), &mut BTreeMap::new());
        let expected: Vec<usize> = betti(&x).iter().map(|b| b * dim).collect();
        prop_assert_eq!(f.cohomology_dims(opts()).unwrap(), expected);
    }

    #[test]
    fn cohomology_ignores_vertex_labels(seed in any::<u64>(), n in 3usize..7, facets in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_complex(&mut rng, n, facets, 3);
        let mut perm: Vec<Vertex> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let mut inverse = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let relabelled = SimplicialComplex::from_maximal_faces(
            x.maximal_faces().iter().map(|f| f.vertices().iter().map(|&v| perm[v]).collect::<Vec<_>>()),
        )
        .unwrap();
        let mut gauges = BTreeMap::new();
        let f: RealSheaf = gauge_sheaf(&x, 2, &mut rng, |f| f.clone(), &mut gauges);
        let back = |f: &Face| Face::new(f.vertices().iter().map(|&v| inverse[v])).unwrap();
        let g: RealSheaf = gauge_sheaf(&relabelled, 2, &mut rng, back, &mut gauges);
        prop_assert_eq!(f.cohomology_dims(opts()).unwrap(), g.cohomology_dims(opts()).unwrap());
    }

    #[test]
    fn constant_sheaf_counts_components(seed in any::<u64>(), sizes in prop::collection::vec(1usize..5, 1..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut faces: Vec<Vec<Vertex>> = Vec::new();
        let mut offset = 0;
        for &s in &sizes {
            let g = common::random_connected_graph(&mut rng, s, 0.3);
            faces.extend(g.maximal_faces().iter().map(|f| f.vertices().iter().map(|v| v + offset).collect::<Vec<_>>()));
            offset += s;
        }
        let x = SimplicialComplex::from_maximal_faces(faces).unwrap();
        let h0 = RealSheaf::constant(x, 1).cohomology(0, opts()).unwrap();
        prop_assert_eq!(h0.dim, sizes.len());
    }

    #[test]
    fn scaling_one_degree_keeps_dimensions(seed in any::<u64>(), n in 3usize..7, facets in 1usize..5, degree in 0usize..3, c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_complex(&mut rng, n, facets, 3);
        let f: RealSheaf = gauge_sheaf(&x, 2, &mut rng, |f| f.clone(), &mut BTreeMap::new());
        let g = f.map_restrictions(|_, b, m| if b.dim() == degree + 1 { m * c } else { m.clone() }).unwrap();
        prop_assert!(g.validate(1e-9).is_empty());
        prop_assert_eq!(f.cohomology_dims(opts()).unwrap(), g.cohomology_dims(opts()).unwrap());
    }

    #[test]
    fn global_sections_agree_from_both_endpoints(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_connected_graph(&mut rng, n, 0.3);
        let pl: RealSheaf = zoo::pl_sheaf(g.clone()).unwrap();
        let x = random_complex(&mut rng, n.max(3), 3, 3);
        let gauge: RealSheaf = gauge_sheaf(&x, 2, &mut rng, |f| f.clone(), &mut BTreeMap::new());
        for f in [pl, gauge] {
            let gs = f.global_sections(opts()).unwrap();
            for s in &gs.sections {
                // every stored restriction, not only the one used to extend
                prop_assert!(f.section_defect(s).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn edge_distance_is_a_metric(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_connected_graph(&mut rng, n, 0.2);
        let d = |a, b| g.edge_distance(a, b).unwrap().finite().unwrap();
        for a in 0..n {
            prop_assert_eq!(d(a, a), 0);
            for b in 0..n {
                prop_assert_eq!(d(a, b), d(b, a));
                if a != b {
                    prop_assert!(d(a, b) >= 1);
                }
                for c in 0..n {
                    prop_assert!(d(a, c) <= d(a, b) + d(b, c));
                }
            }
        }
        let y = common::random_subset(&mut rng, n, 0.4);
        let med = g.max_edge_distance(&y);
        if y.is_empty() {
            prop_assert_eq!(med, EdgeDistance::Infinite);
        } else {
            let brute = (0..n).map(|v| y.iter().map(|&s| d(v, s)).min().unwrap()).max().unwrap();
            prop_assert_eq!(med, EdgeDistance::Finite(brute));
        }
    }

    #[test]
    fn short_exactness_and_euler_balance(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_connected_graph(&mut rng, n, 0.3);
        let y = common::random_subset(&mut rng, n, 0.5);
        let f: RealSheaf = zoo::pl_sheaf(g).unwrap();
        let m = full_stalk_sampling(&f, &y).unwrap();
        let a = sampling::ambiguity_sheaf(&m, opts()).unwrap();
        for (id, _) in f.base().iter() {
            prop_assert_eq!(a.sheaf.stalk_dim(id) + m.destination().stalk_dim(id), f.stalk_dim(id));
        }
        prop_assert!(sampling::euler_check(&m, opts()).unwrap().is_balanced());
    }

    #[test]
    fn obstruction_defeats_every_sampling(seed in any::<u64>(), n in 3usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_connected_graph(&mut rng, n, 0.2);
        let y = common::random_subset(&mut rng, n, 0.4);
        let f: RealSheaf = zoo::pl_sheaf(g.clone()).unwrap();
        let report = sampling::obstruction_check(&f, &y, opts()).unwrap();
        // random surjective components of random rank on the support
        let ranks: BTreeMap<Vertex, usize> = y
            .iter()
            .map(|&v| (v, rng.random_range(1..=f.stalk_dim_of(&Face::vertex(v)).unwrap())))
            .collect();
        let s: RealSheaf = sampling::sampling_sheaf(g, &y, |v| ranks[&v]).unwrap();
        let comps = y
            .iter()
            .map(|&v| {
                let d = f.stalk_dim_of(&Face::vertex(v)).unwrap();
                (Face::vertex(v), random_matrix::<f64>(&mut rng, ranks[&v], d))
            })
            .collect();
        let m = SheafMorphism::over_identity(f, s, comps).unwrap();
        prop_assert!(sampling::validate_morphism(&m, 1e-12).is_empty());
        let induced = sampling::induced_h0_map(&m, opts()).unwrap();
        if report.obstructed {
            prop_assert!(!induced.is_injective());
        }
        let verdict = sampling::nyquist_check(&m, opts()).unwrap();
        if verdict.perfect {
            prop_assert!(induced.is_isomorphism());
        }
    }

    #[test]
    fn spline_restriction_reexpands_polynomials(n in 1usize..5, l in 0.1f64..3.0, b in prop::collection::vec(-2.0f64..2.0, 6)) {
        let b = &b[..n + 2];
        let r: DMatrix<f64> = zoo::spline_right_restriction(n, l);
        let a = r * nalgebra::DVector::from_column_slice(b);
        for step in 0..=20 {
            let x = -1.0 + step as f64 * 0.2;
            // segment polynomial written at the right knot, using b_n^-
            let right: f64 = (0..n).map(|i| b[i] * (x - l).powi(i as i32)).sum::<f64>() + b[n] * (x - l).powi(n as i32);
            let left: f64 = (0..=n).map(|k| a[k] * x.powi(k as i32)).sum();
            prop_assert!((right - left).abs() <= 1e-9 * right.abs().max(1.0));
        }
    }

    #[test]
    fn transmission_sections_ignore_lengths_on_paths(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = zoo::path_graph(n);
        let k = Complex64::new(rng.random_range(0.1..4.0), rng.random_range(-0.5..0.5));
        let mut dims = Vec::new();
        for _ in 0..3 {
            let lengths = g.faces(1).iter().map(|e| (e.clone(), rng.random_range(0.05..5.0))).collect();
            let mg = zoo::MetricGraph::new(g.clone(), lengths).unwrap();
            let t = zoo::transmission_line_sheaf(&mg, k).unwrap();
            dims.push(t.cohomology(0, opts()).unwrap().dim);
        }
        prop_assert_eq!(dims, vec![1, 1, 1]);
    }
}
