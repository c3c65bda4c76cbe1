mod common;

use std::collections::BTreeMap;

use mhbddc::assembly::{assemble, assemble_unchecked, full_solve_direct, FaceDof};
use mhbddc::ldlt::LdltFactorization;
use mhbddc::mesh::{
    generate_cross_fracture_cube, generate_unit_cube, generate_unit_square, BcSpec, BoundaryKind,
    FractureParams, Mesh, Point,
};
use mhbddc::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Outward unit normal of local face `j` within the element's own span.
fn outward_normal(mesh: &Mesh, e: usize, j: usize) -> Point {
    let pts = mesh.element_points(e);
    let face: Vec<Point> = pts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, &p)| p)
        .collect();
    let mut basis: Vec<Point> = Vec::new();
    for p in &face[1..] {
        let mut v = sub(*p, face[0]);
        for q in &basis {
            let c = dot(v, *q);
            v = [v[0] - c * q[0], v[1] - c * q[1], v[2] - c * q[2]];
        }
        let n = dot(v, v).sqrt();
        basis.push(v.map(|x| x / n));
    }
    let mut n = sub(face[0], pts[j]);
    for q in &basis {
        let c = dot(n, *q);
        n = [n[0] - c * q[0], n[1] - c * q[1], n[2] - c * q[2]];
    }
    let len = dot(n, n).sqrt();
    n.map(|x| x / len)
}

/// Checks that p = 1 − x_axis is reproduced exactly in every dimension.
fn check_linear_pressure(mesh: &Mesh, axis: usize) {
    let sys = assemble(mesh).unwrap();
    let sol = full_solve_direct(&sys).unwrap();
    let exact = |x: Point| 1.0 - x[axis];
    for e in 0..mesh.elements().len() {
        let el = &mesh.elements()[e];
        assert!((sol.p[e] - exact(mesh.element_centroid(e))).abs() < 1e-10);
        let scale = el.cross_section * el.conductivity.values()[0];
        for j in 0..=el.dim {
            let face = mesh.face(e, j);
            let expected = face.measure * scale * outward_normal(mesh, e, j)[axis];
            let got = sol.flux(&sys.dofs, e, j);
            assert!(
                (got - expected).abs() < 1e-10,
                "element {e} face {j}: {got} vs {expected}"
            );
        }
    }
    for l in 0..sys.dofs.n_lambda() {
        let (e, j) = sys.dofs.lambda_faces(l)[0];
        let c = mesh.centroid(&mesh.face(e, j).nodes);
        assert!((sol.lambda[l] - exact(c)).abs() < 1e-10);
    }
}

#[test]
fn linear_pressure_square_matches_dense_oracle() {
    let mesh = generate_unit_square(2, &BcSpec::default()).unwrap();
    let sys = assemble(&mesh).unwrap();
    let x = common::dense_solve(&sys.full_matrix().to_dense(), &sys.full_rhs());
    let sol = full_solve_direct(&sys).unwrap();
    assert!(common::max_abs_diff(&x, &sol.to_full()) < 1e-12);
    check_linear_pressure(&mesh, 0);
}

#[test]
fn linear_pressure_cube() {
    let mesh = generate_unit_cube(2, &BcSpec::default()).unwrap();
    check_linear_pressure(&mesh, 0);
}

#[test]
fn linear_pressure_along_fractures() {
    let bc = BcSpec {
        axis: 2,
        ..BcSpec::default()
    };
    let params = FractureParams {
        delta1: 0.3,
        delta2: 0.05,
        ..FractureParams::default()
    };
    let mesh = generate_cross_fracture_cube(2, &params, &bc).unwrap();
    check_linear_pressure(&mesh, 2);
}

#[test]
fn hydrostatic_state_has_zero_velocity() {
    let base =
        generate_cross_fracture_cube(2, &FractureParams::default(), &BcSpec::default()).unwrap();
    // p = −z on every boundary face of every dimension
    let sys0 = assemble_unchecked(&base).unwrap();
    let mut bc = BTreeMap::new();
    for (e, el) in base.elements().iter().enumerate() {
        for j in 0..=el.dim {
            if !matches!(sys0.dofs.face(e, j), FaceDof::Multiplier(_)) {
                let key = base.face(e, j).nodes;
                let z = base.centroid(&key)[2];
                bc.insert(key, BoundaryKind::Natural(-z));
            }
        }
    }
    let mesh = Mesh::new(base.nodes().to_vec(), base.elements().to_vec(), bc, true).unwrap();
    let sys = assemble(&mesh).unwrap();
    let sol = full_solve_direct(&sys).unwrap();
    assert!(sol.u.iter().all(|u| u.abs() < 1e-12));
    for e in 0..mesh.elements().len() {
        assert!((sol.p[e] + mesh.element_centroid(e)[2]).abs() < 1e-12);
    }
}

#[test]
fn column_structure_and_symmetry() {
    let mesh =
        generate_cross_fracture_cube(2, &FractureParams::default(), &BcSpec::default()).unwrap();
    let sys = assemble(&mesh).unwrap();
    let bt = sys.b.transpose();
    let bft = sys.bf.transpose();
    for u in 0..sys.dofs.n_velocity() {
        let bcol: Vec<_> = bt.row(u).collect();
        assert_eq!(bcol.len(), 1);
        assert_eq!(bcol[0], (sys.dofs.velocity_face(u).0, -1.0));
        let fcol: Vec<_> = bft.row(u).collect();
        assert!(fcol.len() <= 1);
        assert!(fcol.iter().all(|&(_, v)| v == 1.0));
        let (e, j) = sys.dofs.velocity_face(u);
        assert_eq!(
            fcol.is_empty(),
            matches!(sys.dofs.face(e, j), FaceDof::Natural(_))
        );
    }
    let k = sys.full_matrix();
    for (i, j, v) in k.iter() {
        assert_eq!(v.to_bits(), k.get(j, i).to_bits());
    }
    // A is block diagonal with one block per element
    for (r, c, _) in sys.a.iter() {
        assert_eq!(sys.dofs.velocity_face(r).0, sys.dofs.velocity_face(c).0);
    }
}

#[test]
fn no_fractures_means_no_coupling_blocks() {
    let mesh = generate_unit_cube(2, &BcSpec::default()).unwrap();
    let sys = assemble(&mesh).unwrap();
    assert_eq!(sys.c.nnz() + sys.cf.nnz() + sys.ct.nnz(), 0);
}

#[test]
fn c_bar_quadratic_form_is_sum_of_squares() {
    let mesh =
        generate_cross_fracture_cube(2, &FractureParams::default(), &BcSpec::default()).unwrap();
    let sys = assemble(&mesh).unwrap();
    let cbar = sys.c_bar();
    let np = sys.dofs.n_pressure();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..cbar.nrows())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let q: f64 = cbar.mul_vec(&x).iter().zip(&x).map(|(a, b)| a * b).sum();
        let expected: f64 = sys
            .dofs
            .links()
            .iter()
            .map(|l| l.weight * (x[l.lower] - x[np + l.lambda]).powi(2))
            .sum();
        assert!(q >= -1e-14);
        assert!((q - expected).abs() <= 1e-12 * expected.max(1.0));
    }
}

fn b_bar_transpose_nullity(sys: &mhbddc::assembly::BlockSystem) -> usize {
    let np = sys.dofs.n_pressure();
    let nl = sys.dofs.n_lambda();
    let mut m = sys.b.to_dense();
    m.extend(sys.bf.to_dense());
    np + nl - common::dense_rank(&m, 1e-12)
}

#[test]
fn null_space_census() {
    let closed = BcSpec {
        axis: 0,
        low: None,
        high: None,
    };
    let sq = generate_unit_square(2, &closed).unwrap();
    let sys = assemble_unchecked(&sq).unwrap();
    assert_eq!(b_bar_transpose_nullity(&sys), 1);
    assert_eq!(sys.dofs.floating_components(false).len(), 1);
    assert!(matches!(assemble(&sq), Err(Error::Config(_))));

    let sq = generate_unit_square(2, &BcSpec::default()).unwrap();
    assert_eq!(b_bar_transpose_nullity(&assemble(&sq).unwrap()), 0);

    // the plane x = 1/2 splits into two halves along the channel and, like
    // the channel, touches neither x = 0 nor x = 1
    let fc =
        generate_cross_fracture_cube(2, &FractureParams::default(), &BcSpec::default()).unwrap();
    let sys = assemble(&fc).unwrap();
    let floating = sys.dofs.floating_components(false);
    assert_eq!(floating.len(), 3);
    assert_eq!(b_bar_transpose_nullity(&sys), 3);
    // coupling removes them again
    assert!(sys.dofs.floating_components(true).is_empty());
    assert!(full_solve_direct(&sys).is_ok());
}

#[test]
fn singular_system_names_floating_component() {
    let closed = BcSpec {
        axis: 0,
        low: None,
        high: None,
    };
    let sq = generate_unit_square(2, &closed).unwrap();
    let sys = assemble_unchecked(&sq).unwrap();
    match full_solve_direct(&sys) {
        Err(Error::Singular { reason, .. }) => assert!(reason.contains("natural boundary")),
        other => panic!("expected a singular system, got {other:?}"),
    }
}

#[test]
fn mass_balance_with_sources() {
    let base =
        generate_cross_fracture_cube(2, &FractureParams::default(), &BcSpec::default()).unwrap();
    let mut elements = base.elements().to_vec();
    for (i, e) in elements.iter_mut().enumerate() {
        e.source = 0.1 * (i % 5) as f64 - 0.2;
        if e.dim < 3 {
            e.cross_section = 0.01 * (1 + i % 3) as f64;
        }
    }
    let mesh = Mesh::new(
        base.nodes().to_vec(),
        elements,
        base.boundary().clone(),
        false,
    )
    .unwrap();
    let sys = assemble(&mesh).unwrap();
    let sol = full_solve_direct(&sys).unwrap();
    let mut exchange = vec![0.0; mesh.elements().len()];
    for l in sys.dofs.links() {
        exchange[l.lower] += l.weight * (sol.lambda[l.lambda] - sol.p[l.lower]);
    }
    for (e, el) in mesh.elements().iter().enumerate() {
        let outflow: f64 = (0..=el.dim).map(|j| sol.flux(&sys.dofs, e, j)).sum();
        let produced = el.cross_section * el.source * mesh.element_measure(e) + exchange[e];
        assert!((outflow - produced).abs() < 1e-10, "element {e}");
    }
    // flux leaving a tetrahedron into a fracture equals the Robin exchange
    for l in sys.dofs.links() {
        let (e, j) = sys.dofs.lambda_faces(l.lambda)[0];
        let q = sol.flux(&sys.dofs, e, j);
        assert!((q - l.weight * (sol.lambda[l.lambda] - sol.p[l.lower])).abs() < 1e-10);
    }
}

#[test]
fn large_sigma_ties_fracture_pressure_to_traces() {
    let solve = |sigma: f64| {
        let params = FractureParams {
            k: [1.0, 1.0, 1.0],
            sigma,
            ..FractureParams::default()
        };
        let mesh = generate_cross_fracture_cube(2, &params, &BcSpec::default()).unwrap();
        let sys = assemble(&mesh).unwrap();
        let sol = full_solve_direct(&sys).unwrap();
        let gap = sys
            .dofs
            .links()
            .iter()
            .map(|l| (sol.p[l.lower] - sol.lambda[l.lambda]).abs())
            .fold(0.0, f64::max);
        (sol, gap)
    };
    let (s6, gap6) = solve(1e6);
    let (s9, gap9) = solve(1e9);
    assert!(gap9 < 1e-3 && gap6 < 1e-3);
    assert!(gap9 <= gap6);
    assert!(common::max_abs_diff(&s6.p, &s9.p) < 1e-4);
}

#[test]
fn full_matrix_inertia() {
    let mesh =
        generate_cross_fracture_cube(2, &FractureParams::default(), &BcSpec::default()).unwrap();
    let sys = assemble(&mesh).unwrap();
    let f = LdltFactorization::factor(&sys.full_matrix()).unwrap();
    let inertia = f.inertia();
    assert_eq!(inertia.positive, sys.dofs.n_velocity());
    assert_eq!(
        inertia.negative,
        sys.dofs.n_pressure() + sys.dofs.n_lambda()
    );
    assert_eq!(inertia.zero, 0);
}

#[test]
fn essential_faces_are_eliminated() {
    let mesh = generate_unit_square(3, &BcSpec::default()).unwrap();
    let sys = assemble(&mesh).unwrap();
    // 18 triangles × 3 faces, minus 6 faces on y = 0 and y = 1
    assert_eq!(sys.dofs.n_velocity(), 54 - 6);
    // 2n(n + 1) + n² − 4n interior edges
    assert_eq!(sys.dofs.n_lambda(), 21);
    let mm = sys.to_matrix_market();
    assert!(mm.starts_with("%%MatrixMarket matrix coordinate real general\n"));
}
