//! Property tests for the module invariants: randomized cross-route
//! equalities, round trips and basis-change invariance.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tropglue_core::basic_cone::basic_cone;
use tropglue_core::complex::{complex_from_fan, ConeComplex};
use tropglue_core::cones::Cone;
use tropglue_core::formulas::{partition_aut, partitions};
use tropglue_core::gluing::GluingProblem;
use tropglue_core::lattice::{cokernel, smith_normal_form, torsion_order, IntMatrix};
use tropglue_core::monoids::{nonempty_sufficient, FsSharpMonoid, NonemptyVerdict, PointDiagram};
use tropglue_core::types::{
    are_isomorphic, reglue, split, CurveClass, DecoratedType, Edge, TropicalType, TypeGraph,
};

fn bi(x: i64) -> BigInt {
    BigInt::from(x)
}

fn v(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

fn three_ray_complex() -> ConeComplex {
    complex_from_fan(
        2,
        &[
            ("ray1", vec![v(&[1, 0])]),
            ("ray2", vec![v(&[0, 1])]),
            ("ray3", vec![v(&[-1, 2])]),
            ("c12", vec![v(&[1, 0]), v(&[0, 1])]),
            ("c23", vec![v(&[0, 1]), v(&[-1, 2])]),
        ],
        Some(v(&[1, 1])),
    )
    .unwrap()
}

fn random_chain_type(rng: &mut ChaCha8Rng, complex: &ConeComplex) -> DecoratedType {
    let three = rng.gen_bool(0.5);
    let n12 = rng.gen_range(1..=3usize);
    let n23 = if three { rng.gen_range(1..=3usize) } else { 0 };
    let nv = if three { 3 } else { 2 };
    let mut edges = Vec::new();
    let mut sigma_e = Vec::new();
    let mut u_e = Vec::new();
    for _ in 0..n12 {
        let w = rng.gen_range(1..=4i64);
        edges.push(Edge { v1: 0, v2: 1 });
        sigma_e.push("c12".to_string());
        u_e.push(v(&[-w, w]));
    }
    for _ in 0..n23 {
        let w = rng.gen_range(1..=4i64);
        edges.push(Edge { v1: 1, v2: 2 });
        sigma_e.push("c23".to_string());
        u_e.push(v(&[-w, w]));
    }
    let graph = TypeGraph { genus: vec![0; nv], edges, legs: vec![] };
    let mut sigma_v = vec!["ray1".to_string(), "ray2".to_string()];
    if three {
        sigma_v.push("ray3".to_string());
    }
    let t = TropicalType::new(graph, sigma_v, sigma_e, vec![], u_e, vec![], complex).unwrap();
    DecoratedType::new(t, vec![CurveClass::default(); nv]).unwrap()
}

#[test]
fn theta_psi_consistency_on_randomized_instances() {
    let complex = three_ray_complex();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for case in 0..50 {
        let t = random_chain_type(&mut rng, &complex);
        let n_edges = t.base.graph.edges.len();
        // random nonempty splitting subset
        let mut split_set: BTreeSet<usize> = BTreeSet::new();
        for e in 0..n_edges {
            if rng.gen_bool(0.6) {
                split_set.insert(e);
            }
        }
        if split_set.is_empty() {
            split_set.insert(0);
        }
        let p = GluingProblem::new(complex.clone(), t, split_set).unwrap();
        assert!(p.theta_psi_consistency().unwrap(), "case {case}");
    }
}

#[test]
fn mu_under_component_relabeling() {
    // splitting at all edges in two different vertex labelings yields the
    // same multiplicity
    let complex = three_ray_complex();
    let make = |flip: bool| -> DecoratedType {
        let graph = TypeGraph {
            genus: vec![0, 0],
            edges: vec![Edge { v1: 0, v2: 1 }, Edge { v1: 0, v2: 1 }],
            legs: vec![],
        };
        let (s1, s2) = if flip { ("ray2", "ray1") } else { ("ray1", "ray2") };
        let sign = if flip { -1 } else { 1 };
        let t = TropicalType::new(
            graph,
            vec![s1.into(), s2.into()],
            vec!["c12".into(), "c12".into()],
            vec![],
            vec![v(&[-2 * sign, 2 * sign]), v(&[-4 * sign, 4 * sign])],
            vec![],
            &complex,
        )
        .unwrap();
        DecoratedType::new(t, vec![CurveClass::default(); 2]).unwrap()
    };
    let p1 = GluingProblem::new(complex.clone(), make(false), [0, 1].into_iter().collect()).unwrap();
    let p2 = GluingProblem::new(complex.clone(), make(true), [0, 1].into_iter().collect()).unwrap();
    assert_eq!(p1.mu().unwrap(), p2.mu().unwrap());
    assert_eq!(
        p1.glue_verdict().unwrap().kernel_rank,
        p2.glue_verdict().unwrap().kernel_rank
    );
}

#[test]
fn split_then_reglue_roundtrip() {
    let complex = three_ray_complex();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let t = random_chain_type(&mut rng, &complex);
        let n_edges = t.base.graph.edges.len();
        let mut split_set: BTreeSet<usize> = BTreeSet::new();
        for e in 0..n_edges {
            if rng.gen_bool(0.5) {
                split_set.insert(e);
            }
        }
        let (parts, flags) = split(&t, &split_set);
        let glued = reglue(&parts, &flags);
        assert!(are_isomorphic(&t, &glued).unwrap(), "roundtrip isomorphism");
    }
}

#[test]
fn single_vertex_basic_cone_equals_sigma() {
    // the basic cone of a one-vertex split piece is sigma(v) exactly:
    // identical lattice (identity basis) and identical inequalities
    let complex = three_ray_complex();
    for id in ["ray1", "ray2", "ray3", "c12", "c23"] {
        let graph = TypeGraph { genus: vec![0], edges: vec![], legs: vec![] };
        let t = TropicalType::new(
            graph,
            vec![id.into()],
            vec![],
            vec![],
            vec![],
            vec![],
            &complex,
        )
        .unwrap();
        let bc = basic_cone(&t, &complex).unwrap();
        let cone = complex.cone(id).unwrap();
        assert_eq!(bc.dim, cone.ambient_rank(), "cone {id}");
        assert_eq!(bc.basis, IntMatrix::identity(cone.ambient_rank()), "cone {id}");
        // the witness is an interior point of sigma(v)
        assert!(cone.contains(&bc.witness, cone.ambient_rank() > 0), "cone {id}");
    }
}

#[test]
fn witness_round_trip_on_random_types() {
    let complex = three_ray_complex();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let t = random_chain_type(&mut rng, &complex);
        let bc = basic_cone(&t.base, &complex).unwrap();
        for eq in &bc.equalities {
            let val: BigInt = eq.iter().zip(&bc.witness).map(|(a, b)| a * b).sum();
            assert!(val.is_zero());
        }
        for ineq in &bc.inequalities {
            let val: BigInt = ineq.iter().zip(&bc.witness).map(|(a, b)| a * b).sum();
            assert!(val.is_positive());
        }
    }
}

#[test]
fn canonical_orientation_idempotent() {
    // flipping an edge in the input and re-canonicalizing yields the same
    // stored type
    let complex = three_ray_complex();
    let g1 = TypeGraph {
        genus: vec![0, 0],
        edges: vec![Edge { v1: 0, v2: 1 }],
        legs: vec![],
    };
    let t1 = TropicalType::new(
        g1,
        vec!["ray1".into(), "ray2".into()],
        vec!["c12".into()],
        vec![],
        vec![v(&[-3, 3])],
        vec![],
        &complex,
    )
    .unwrap();
    let g2 = TypeGraph {
        genus: vec![0, 0],
        edges: vec![Edge { v1: 1, v2: 0 }],
        legs: vec![],
    };
    let t2 = TropicalType::new(
        g2,
        vec!["ray1".into(), "ray2".into()],
        vec!["c12".into()],
        vec![],
        vec![v(&[3, -3])],
        vec![],
        &complex,
    )
    .unwrap();
    assert_eq!(t1, t2);
}

#[test]
fn nonempty_guard_zero_fibre_cone() {
    // local homs with fibre-product cone = 0 while both Q_i are nonzero:
    // theta1^t(a) = (a, a), theta2^t(b) = (b, 2b) meet only at the origin
    let p = FsSharpMonoid::free(2);
    let q1 = FsSharpMonoid::free(1);
    let q2 = FsSharpMonoid::free(1);
    let theta1 = IntMatrix::from_rows_i64(&[vec![1, 1]]);
    let theta2 = IntMatrix::from_rows_i64(&[vec![1, 2]]);
    let d = PointDiagram::new(p, q1, q2, theta1, theta2);
    let r = nonempty_sufficient(&d).unwrap();
    assert!(!r.projections_interior);
    assert_eq!(r.verdict(), NonemptyVerdict::Unknown);
}

#[test]
fn k_tau_invariant_under_basis_change() {
    // replacing N_{sigma(L_out)} by another presentation conjugates h_* by
    // a unimodular matrix and leaves the torsion order alone
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for _ in 0..50 {
        let h = {
            let mut m = IntMatrix::zero(2, 2);
            for r in 0..2 {
                for c in 0..2 {
                    m.set(r, c, bi(rng.gen_range(-5..=5)));
                }
            }
            m
        };
        // random unimodular 2x2 from elementary operations
        let mut u = IntMatrix::identity(2);
        for _ in 0..6 {
            let q = bi(rng.gen_range(-3..=3));
            let (i, j) = if rng.gen_bool(0.5) { (0, 1) } else { (1, 0) };
            let mut e = IntMatrix::identity(2);
            e.set(i, j, q);
            u = e.mul(&u);
        }
        assert_eq!(
            torsion_order(&cokernel(&h)),
            torsion_order(&cokernel(&u.mul(&h))),
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snf_factorization_holds(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = IntMatrix::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, bi(rng.gen_range(-8..=8)));
            }
        }
        let snf = smith_normal_form(&m);
        prop_assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.d.clone());
        // transpose duality of torsion as a blanket matrix property
        prop_assert_eq!(
            torsion_order(&cokernel(&m)),
            torsion_order(&cokernel(&m.transpose()))
        );
    }

    #[test]
    fn dual_dual_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // random full-dimensional strictly convex cone in rank 2 or 3:
        // perturbations of the positive orthant
        let n = rng.gen_range(2..=3usize);
        let mut gens: Vec<Vec<BigInt>> = Vec::new();
        for i in 0..n {
            let mut g = vec![BigInt::zero(); n];
            g[i] = bi(rng.gen_range(1..=3));
            for j in 0..n {
                if j != i {
                    g[j] = bi(rng.gen_range(0..=2));
                }
            }
            gens.push(g);
        }
        let c = Cone::from_generators(n, gens);
        prop_assume!(c.is_full_dimensional() && c.is_strictly_convex());
        let dd = c.dual().dual();
        prop_assert_eq!(dd.generators(), c.generators());
    }

    #[test]
    fn partitions_are_partitions(w in 0u64..9) {
        let ps = partitions(w);
        // counts match the partition numbers p(0..8)
        let expected = [1usize, 1, 2, 3, 5, 7, 11, 15, 22];
        prop_assert_eq!(ps.len(), expected[w as usize]);
        let mut seen = BTreeSet::new();
        for p in &ps {
            prop_assert!(p.windows(2).all(|x| x[0] >= x[1]), "non-increasing");
            prop_assert!(p.iter().all(|&x| x > 0));
            prop_assert_eq!(p.iter().sum::<u64>(), w);
            prop_assert!(seen.insert(p.clone()), "no duplicates");
            prop_assert!(partition_aut(p) >= BigInt::one());
        }
    }
}

#[test]
fn value_types_are_send_and_sync() {
    // all domain types are immutable values, safe to share across threads
    fn ok<T: Send + Sync>() {}
    ok::<IntMatrix>();
    ok::<Cone>();
    ok::<ConeComplex>();
    ok::<TropicalType>();
    ok::<DecoratedType>();
    ok::<FsSharpMonoid>();
    ok::<PointDiagram>();
    ok::<tropglue_core::basic_cone::BasicCone>();
    ok::<tropglue_core::formulas::WallType>();
    ok::<tropglue_core::toric::ToricCountProblem>();
}

#[test]
fn weight_keys_accept_parentheses() {
    let mut w = std::collections::BTreeMap::new();
    w.insert("(1,2)".to_string(), 3u64);
    w.insert("4,5".to_string(), 6u64);
    let parsed = tropglue_core::json::parse_weights(&w).unwrap();
    assert_eq!(parsed[&(1, 2)], 3);
    assert_eq!(parsed[&(4, 5)], 6);
}
