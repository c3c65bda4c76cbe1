mod common;

use mhbddc::assembly::{assemble, full_solve_direct, BlockSystem};
use mhbddc::mesh::{
    generate_cross_fracture_cube, generate_unit_square, BcSpec, FractureParams, Mesh,
};
use mhbddc::partition::{classify_interface, partition_elements, InterfaceLayout, Partition};
use mhbddc::subsolve::{build_substructures, InterfaceProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    mesh: Mesh,
    sys: BlockSystem,
    part: Partition,
    layout: InterfaceLayout,
}

fn setup(mesh: Mesh, n_sub: usize) -> Setup {
    let sys = assemble(&mesh).unwrap();
    let part = partition_elements(&mesh, n_sub, 0).unwrap();
    let layout = classify_interface(&mesh, &sys.dofs, &part);
    Setup {
        mesh,
        sys,
        part,
        layout,
    }
}

fn fracture(n: usize, n_sub: usize) -> Setup {
    let params = FractureParams {
        delta1: 0.3,
        delta2: 0.05,
        ..Default::default()
    };
    setup(
        generate_cross_fracture_cube(n, &params, &BcSpec::default()).unwrap(),
        n_sub,
    )
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[test]
fn single_substructure_is_the_global_system() {
    let s = setup(generate_unit_square(3, &BcSpec::default()).unwrap(), 1);
    let subs = build_substructures(&s.sys, &s.part, &s.layout).unwrap();
    assert_eq!(subs.len(), 1);
    assert!(subs[0].interface().is_empty());
    assert_eq!(
        subs[0].global_dofs(),
        (0..s.sys.n_total()).collect::<Vec<_>>()
    );
    assert_eq!(subs[0].local_matrix(), &s.sys.full_matrix());
    let problem = InterfaceProblem::new(&s.sys, &s.part, &s.layout).unwrap();
    assert!(problem.reduced_rhs().is_empty());
    let direct = full_solve_direct(&s.sys).unwrap();
    let recovered = problem.recover(&[]);
    assert!(common::max_abs_diff(&recovered.to_full(), &direct.to_full()) < 1e-12);
}

#[test]
fn local_products_assemble_to_global_product() {
    let s = fracture(4, 5);
    let subs = build_substructures(&s.sys, &s.part, &s.layout).unwrap();
    let k = s.sys.full_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = random_vec(&mut rng, k.nrows());
        let expected = k.mul_vec(&x);
        let mut got = vec![0.0; x.len()];
        for sub in &subs {
            let xl: Vec<f64> = sub.global_dofs().iter().map(|&g| x[g]).collect();
            for (&g, v) in sub
                .global_dofs()
                .iter()
                .zip(sub.local_matrix().mul_vec(&xl))
            {
                got[g] += v;
            }
        }
        assert!(common::max_abs_diff(&got, &expected) < 1e-12);
    }
}

#[test]
fn coupling_entries_belong_to_the_lower_element_owner() {
    let s = fracture(2, 4);
    let subs = build_substructures(&s.sys, &s.part, &s.layout).unwrap();
    let (po, lo) = s.sys.offsets();
    let mut split = 0;
    for link in s.sys.dofs.links() {
        let upper = s.sys.dofs.lambda_faces(link.lambda)[0].0;
        if s.part.owner(upper) != s.part.owner(link.lower) {
            split += 1;
        }
        for (gi, gj, value) in [
            (lo + link.lambda, lo + link.lambda, -link.weight),
            (lo + link.lambda, po + link.lower, link.weight),
        ] {
            let mut holders = Vec::new();
            for sub in &subs {
                let pos = |g: usize| sub.global_dofs().iter().position(|&x| x == g);
                if let (Some(i), Some(j)) = (pos(gi), pos(gj)) {
                    let v = sub.local_matrix().get(i, j);
                    if v != 0.0 {
                        holders.push((sub.id(), v));
                    }
                }
            }
            assert_eq!(holders.len(), 1);
            assert_eq!(holders[0].0, s.part.owner(link.lower));
            assert!((holders[0].1 - value).abs() < 1e-15);
        }
    }
    assert!(split > 0, "the partition should cut some couplings");
}

fn check_local_schur_against_dense(s: &Setup) {
    let subs = build_substructures(&s.sys, &s.part, &s.layout).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for sub in &subs {
        assert!(sub.n_local() <= 400);
        let k = sub.local_matrix().to_dense();
        let interior: Vec<usize> = (0..sub.n_interior()).collect();
        let gamma: Vec<usize> = (sub.n_interior()..sub.n_local()).collect();
        let oracle = common::dense_schur(&k, &interior, &gamma);
        let got = common::operator_matrix(gamma.len(), |x| sub.schur_apply(x));
        let scale = oracle.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in got.iter().zip(&oracle) {
            assert!(common::max_abs_diff(a, b) < 1e-10 * scale.max(1.0));
        }
        let ev = common::sym_eigenvalues(&oracle);
        assert!(ev[0] >= -1e-10 * scale);
        if sub.has_natural_boundary() {
            assert!(
                ev[0] > 1e-8 * scale,
                "substructure {} eigenvalue {}",
                sub.id(),
                ev[0]
            );
        }
        for _ in 0..10 {
            let x = random_vec(&mut rng, gamma.len());
            let y = random_vec(&mut rng, gamma.len());
            let lhs = dot(&x, &sub.schur_apply(&y));
            let rhs = dot(&y, &sub.schur_apply(&x));
            assert!((lhs - rhs).abs() <= 1e-10 * norm(&x) * norm(&y) * scale.max(1.0));
        }
    }
}

#[test]
fn local_schur_matches_dense_oracle_on_square() {
    check_local_schur_against_dense(&setup(
        generate_unit_square(4, &BcSpec::default()).unwrap(),
        3,
    ));
}

#[test]
fn local_schur_matches_dense_oracle_on_fractures() {
    check_local_schur_against_dense(&fracture(2, 3));
}

#[test]
fn assembled_schur_equals_global_elimination() {
    let s = fracture(2, 4);
    let problem = InterfaceProblem::new(&s.sys, &s.part, &s.layout).unwrap();
    let k = s.sys.full_matrix().to_dense();
    let (_, lo) = s.sys.offsets();
    let gamma: Vec<usize> = (0..s.layout.n_interface())
        .map(|g| lo + s.layout.lambda(g))
        .collect();
    let interior: Vec<usize> = (0..k.len()).filter(|i| !gamma.contains(i)).collect();
    let oracle = common::dense_schur(&k, &interior, &gamma);
    let got = common::operator_matrix(gamma.len(), |x| problem.apply(x));
    let scale = oracle.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in got.iter().zip(&oracle) {
        assert!(common::max_abs_diff(a, b) < 1e-12 * scale.max(1.0) * 10.0);
    }
}

#[test]
fn assembled_schur_is_symmetric_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in [
        setup(generate_unit_square(8, &BcSpec::default()).unwrap(), 6),
        fracture(4, 8),
    ] {
        let problem = InterfaceProblem::new(&s.sys, &s.part, &s.layout).unwrap();
        let n = problem.n_interface();
        for _ in 0..100 {
            let x = random_vec(&mut rng, n);
            let y = random_vec(&mut rng, n);
            let sx = problem.apply(&x);
            let sy = problem.apply(&y);
            assert!((dot(&x, &sy) - dot(&y, &sx)).abs() <= 1e-10 * norm(&x) * norm(&y));
            assert!(dot(&x, &sx) > 0.0);
        }
    }
}

fn solve_via_interface(s: &Setup) -> Vec<f64> {
    let problem = InterfaceProblem::new(&s.sys, &s.part, &s.layout).unwrap();
    let n = problem.n_interface();
    let dense = common::operator_matrix(n, |x| problem.apply(x));
    let lambda = common::dense_solve(&dense, &problem.reduced_rhs());
    problem.recover(&lambda).to_full()
}

#[test]
fn interface_solve_reproduces_direct_solution() {
    for s in [
        setup(generate_unit_square(6, &BcSpec::default()).unwrap(), 4),
        fracture(4, 6),
    ] {
        let x = solve_via_interface(&s);
        let direct = full_solve_direct(&s.sys).unwrap().to_full();
        let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(common::max_abs_diff(&x, &direct) < 1e-8 * scale);
        let rhs = s.sys.full_rhs();
        let kx = s.sys.full_matrix().mul_vec(&x);
        let r: Vec<f64> = kx.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(norm(&r) <= 1e-8 * norm(&rhs));
    }
}

#[test]
fn recovery_is_exact_for_linear_pressure() {
    let s = setup(generate_unit_square(6, &BcSpec::default()).unwrap(), 5);
    let x = solve_via_interface(&s);
    let (po, _) = s.sys.offsets();
    for e in 0..s.mesh.elements().len() {
        let c = s.mesh.element_centroid(e);
        assert!((x[po + e] - (1.0 - c[0])).abs() < 1e-9);
    }
}

#[test]
fn element_mass_balance_after_recovery() {
    let base =
        generate_cross_fracture_cube(4, &FractureParams::default(), &BcSpec::default()).unwrap();
    let mut elements = base.elements().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for el in &mut elements {
        el.source = rng.gen_range(-2.0..2.0);
    }
    let mesh = Mesh::new(
        base.nodes().to_vec(),
        elements,
        base.boundary().clone(),
        false,
    )
    .unwrap();
    let s = setup(mesh, 6);
    let x = solve_via_interface(&s);
    let sol = mhbddc::assembly::SolutionTriple::from_full(&s.sys.dofs, &x);
    for (e, el) in s.mesh.elements().iter().enumerate() {
        let outflow: f64 = (0..=el.dim).map(|j| sol.flux(&s.sys.dofs, e, j)).sum();
        let exchange: f64 = s
            .sys
            .dofs
            .links()
            .iter()
            .filter(|l| l.lower == e)
            .map(|l| l.weight * (sol.p[e] - sol.lambda[l.lambda]))
            .sum();
        let produced = el.cross_section * el.source * s.mesh.element_measure(e);
        assert!(
            (outflow + exchange - produced).abs() < 1e-9,
            "element {e}: {outflow} + {exchange} vs {produced}"
        );
    }
}

#[test]
fn homogeneous_data_gives_zero_reduced_rhs() {
    let bc = BcSpec {
        axis: 0,
        low: Some(0.0),
        high: Some(0.0),
    };
    let s = setup(generate_unit_square(5, &bc).unwrap(), 4);
    let problem = InterfaceProblem::new(&s.sys, &s.part, &s.layout).unwrap();
    assert!(problem.reduced_rhs().iter().all(|&v| v == 0.0));
}
