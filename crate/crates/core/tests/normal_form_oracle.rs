use hopf_takens::normal_form::{
    averaged_hh_coefficients, homological_solve, reduce_to_normal_form, reduce_with, span_coordinates,
    ComplementRegistry,
};
use hopf_takens::poly::{exponents_of_degree, monomial_value, CubicFieldSpace, Exponent, PolyVectorField};
use hopf_takens::system::OscillatorSystem;
use hopf_takens::versal::{oscillator_linear_part, PhysicalParams};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matvec(a: &DMatrix<f64>, y: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[(i, j)] * y[j];
        }
    }
    out
}

/// `Dh(y)·v` by a five-point stencil, exact for polynomials of degree ≤ 4.
fn directional_derivative(h: &PolyVectorField, y: &[f64; 4], v: &[f64; 4]) -> [f64; 4] {
    let step = 0.25;
    let at = |s: f64| {
        let p = [y[0] + s * v[0], y[1] + s * v[1], y[2] + s * v[2], y[3] + s * v[3]];
        h.eval(&p)
    };
    let (p1, m1, p2, m2) = (at(step), at(-step), at(2.0 * step), at(-2.0 * step));
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = (8.0 * (p1[k] - m1[k]) - (p2[k] - m2[k])) / (12.0 * step);
    }
    out
}

/// Pointwise `Dh(y)·Ay − Ah(y)` sampled and fitted back onto all 80 cubic
/// monomial slots by least squares.
fn bracket_by_sampling(h: &PolyVectorField, a: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Vec<(usize, Exponent, f64)> {
    let monomials = exponents_of_degree(3);
    let m = monomials.len();
    let samples = 3 * m;
    let mut design = DMatrix::zeros(samples, m);
    let mut rhs = DMatrix::zeros(samples, 4);
    for s in 0..samples {
        let y: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        for (j, e) in monomials.iter().enumerate() {
            design[(s, j)] = monomial_value(e, &y);
        }
        let dh = directional_derivative(h, &y, &matvec(a, &y));
        let ah = matvec(a, &h.eval(&y));
        for k in 0..4 {
            rhs[(s, k)] = dh[k] - ah[k];
        }
    }
    let coef = design.svd(true, true).solve(&rhs, 1e-12).unwrap();
    let mut out = Vec::new();
    for k in 0..4 {
        for (j, e) in monomials.iter().enumerate() {
            out.push((k, *e, coef[(j, k)]));
        }
    }
    out
}

#[test]
fn bracket_matrix_matches_sampled_operator() {
    let space = CubicFieldSpace::equivariant();
    let a = oscillator_linear_part();
    let m = space.bracket_matrix(&a).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (j, &(c, e)) in space.basis().iter().enumerate() {
        let h = PolyVectorField::from_terms([(c, e, 1.0)]);
        for (k, ex, v) in bracket_by_sampling(&h, &a, &mut rng) {
            let expected = space.index_of(k, ex).map_or(0.0, |i| m[(i, j)]);
            assert!((v - expected).abs() < 1e-9, "column {j}, slot ({k}, {ex:?}): {v} vs {expected}");
        }
    }
}

#[test]
fn bracket_has_eight_dimensional_cokernel() {
    let space = CubicFieldSpace::equivariant();
    assert_eq!(space.dimension(), 40);
    let m = space.bracket_matrix(&oscillator_linear_part()).unwrap();
    let sv = m.singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-10 * smax).count();
    assert_eq!(rank, 32);
}

fn assert_coeffs(got: [f64; 8], want: [f64; 8], tol: f64) {
    for k in 0..8 {
        assert!((got[k] - want[k]).abs() <= tol, "slot {k}: {} vs {}", got[k], want[k]);
    }
}

#[test]
fn worked_example_matches_hand_reduction() {
    let nf = reduce_to_normal_form(&OscillatorSystem::worked_example()).unwrap();
    assert_coeffs(nf.flat(), [-1.0, -0.5, -1.0, -0.5, 0.1, -0.125, -0.1, 0.375], 1e-10);
    assert!((nf.c - 0.05).abs() < 1e-10);
    assert!((nf.d + 0.25).abs() < 1e-10);
}

fn torus_demo() -> OscillatorSystem {
    OscillatorSystem::new(
        PhysicalParams::new(0.3, -0.05, -0.1),
        [([2, 1, 0, 0], 8.0), ([0, 1, 2, 0], -1.0), ([0, 1, 0, 2], -1.0)],
        [([2, 0, 0, 1], 2.0), ([0, 0, 2, 1], 2.0), ([0, 0, 0, 3], 2.0)],
    )
    .unwrap()
}

#[test]
fn torus_demo_matches_hand_reduction() {
    let nf = reduce_to_normal_form(&torus_demo()).unwrap();
    assert_coeffs(nf.flat(), [0.0, 0.0, -8.0, 1.0, -1.0, -1.0, 0.0, 0.0], 1e-10);
    assert_eq!(averaged_hh_coefficients(&nf), (nf.c, nf.d));
    assert!((nf.c + 0.5).abs() < 1e-10 && (nf.d - 0.5).abs() < 1e-10);
}

#[test]
fn coefficients_do_not_depend_on_complement() {
    let sys = OscillatorSystem::worked_example();
    let reference = reduce_to_normal_form(&sys).unwrap().flat();
    for complement in ComplementRegistry::default().iter() {
        let got = reduce_with(&sys, complement).unwrap().flat();
        assert_coeffs(got, reference, 1e-10);
    }
}

#[test]
fn random_fields_split_exactly() {
    let space = CubicFieldSpace::equivariant();
    let a = oscillator_linear_part();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let v = DVector::from_fn(space.dimension(), |_, _| rng.gen_range(-1.0..1.0));
        let field = space.from_vector(&v);
        let sol = homological_solve(&field, 1e-11).unwrap();
        let rebuilt = sol.transform.linear_bracket(&a).add(&sol.resonant_remainder);
        let err = space.to_vector(&rebuilt.sub(&field)).unwrap().amax();
        assert!(err < 1e-12, "reconstruction error {err:e}");
        let (_, defect) = span_coordinates(&sol.resonant_remainder, true).unwrap();
        assert!(defect < 1e-12, "remainder off the resonant span by {defect:e}");
    }
}
