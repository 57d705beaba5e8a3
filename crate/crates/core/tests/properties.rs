use hopf_takens::branches::{
    classify_stratum, hh_branches, hh_residual, linear_eigenvalues, ph_branches, ph_residual, torus_loci, BranchKind,
    StratumKind, DEFAULT_STRATUM_TOL,
};
use hopf_takens::cli::output::format_float;
use hopf_takens::normal_form::{reduce_to_normal_form, NormalFormCoeffs};
use hopf_takens::system::OscillatorSystem;
use hopf_takens::versal::{
    codimension, commutator_nullity, eigenvalues, physical_to_unfolding, spectrum_distance, unfolded_matrix,
    unfolding_to_physical, JordanEntry, JordanSpec, PhysicalParams, UnfoldingPoint,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = f64> {
    -1.0f64..1.0
}

fn alpha() -> impl Strategy<Value = UnfoldingPoint> {
    (unit(), unit(), unit()).prop_map(|(a, b, c)| UnfoldingPoint::new(a, b, c))
}

/// Coefficients bounded away from zero where they appear as divisors.
fn coeffs() -> impl Strategy<Value = NormalFormCoeffs> {
    let nz = prop_oneof![-2.0f64..-0.1, 0.1f64..2.0];
    (nz.clone(), unit(), nz.clone(), unit(), unit(), nz, unit(), unit())
        .prop_map(|(a, b, c, d, e, f, g, h)| NormalFormCoeffs::from_flat([a, b, c, d, e, f, g, h]))
}

fn jordan_spec() -> impl Strategy<Value = JordanSpec> {
    prop::collection::vec(prop::collection::vec(1usize..4, 1..3), 1..3).prop_map(|groups| {
        let entries = groups
            .into_iter()
            .enumerate()
            .map(|(i, mut blocks)| {
                blocks.sort_unstable_by(|a, b| b.cmp(a));
                JordanEntry {
                    eigenvalue: Complex64::new(i as f64, 0.5 * i as f64),
                    block_sizes: blocks,
                }
            })
            .collect();
        JordanSpec::new(entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn codimension_equals_commutator_nullity(spec in jordan_spec()) {
        prop_assume!(spec.dimension() <= 8);
        let nullity = commutator_nullity(&spec.jordan_matrix(), 1e-10).unwrap();
        prop_assert_eq!(codimension(&spec), nullity);
    }

    #[test]
    fn parameter_map_is_invertible(o in unit(), d1 in unit(), d2 in unit()) {
        let mu = PhysicalParams::new(o, d1, d2);
        let back = unfolding_to_physical(physical_to_unfolding(mu));
        prop_assert_eq!(back, mu);
    }

    #[test]
    fn closed_form_eigenvalues_match_solver(a in alpha()) {
        let closed = linear_eigenvalues(a);
        let numeric = eigenvalues(&unfolded_matrix(a));
        prop_assert!(spectrum_distance(&closed, &numeric) <= 1e-10);
    }

    #[test]
    fn stable_interior_iff_all_eigenvalues_left(a in alpha()) {
        let label = classify_stratum(a, DEFAULT_STRATUM_TOL).unwrap();
        let max_re = linear_eigenvalues(a).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if label.signs.iter().all(|&s| s != 0) {
            prop_assert_eq!(label.kind == StratumKind::InteriorStable, max_re < 0.0);
        }
    }

    #[test]
    fn existing_branches_solve_the_amplitude_equations(a in alpha(), c in coeffs()) {
        for b in ph_branches(a.alpha1, a.alpha3, &c, a.alpha2).iter().filter(|b| b.exists) {
            let res = ph_residual(a.alpha1, a.alpha3, &c, b.amplitude("y1").unwrap(), b.amplitude("r").unwrap());
            prop_assert!(res[0].abs() <= 1e-10 && res[1].abs() <= 1e-10, "{:?} {:?}", b.kind, res);
            let state = [b.amplitude("y1").unwrap(), 0.0, b.amplitude("r").unwrap()];
            let f = c.rhs(&a, &state);
            prop_assert!(f.iter().all(|v| v.abs() <= 1e-10));
        }
        for b in hh_branches(a.alpha2, a.alpha3, &c).iter().filter(|b| b.exists) {
            let res = hh_residual(a.alpha2, a.alpha3, &c, b.amplitude("r").unwrap(), b.amplitude("rho").unwrap());
            prop_assert!(res[0].abs() <= 1e-10 && res[1].abs() <= 1e-10, "{:?} {:?}", b.kind, res);
        }
    }

    #[test]
    fn torus_family_is_born_on_the_loci(c in coeffs(), s in -1.0f64..1.0) {
        let loci = torus_loci(&c);
        for (locus, key) in [(&loci.from_h1, "rho_squared"), (&loci.from_h0, "r_squared")] {
            prop_assume!(!locus.degenerate);
            let (a2, a3) = locus.point_at(s).unwrap();
            let torus = hh_branches(a2, a3, &c).into_iter().find(|b| b.kind == BranchKind::Torus2HH).unwrap();
            let v = torus.diagnostics[key];
            if torus.diagnostics["delta2"].abs() > 1e-3 {
                prop_assert!(v.abs() <= 1e-12, "{} = {:e}", key, v);
            }
        }
    }

    #[test]
    fn reduction_is_linear_in_the_cubic_terms(p in unit(), q in unit(), s in unit(), t in unit()) {
        let mu = PhysicalParams::zero();
        let f = |a: f64, b: f64| {
            OscillatorSystem::new(mu, [([3, 0, 0, 0], a), ([1, 0, 0, 2], b)], [([2, 0, 1, 0], a), ([0, 0, 0, 3], b)])
                .unwrap()
        };
        let g = |a: f64, b: f64| {
            OscillatorSystem::new(mu, [([0, 1, 2, 0], a), ([2, 1, 0, 0], b)], [([0, 0, 2, 1], a), ([2, 0, 0, 1], b)])
                .unwrap()
        };
        let both = OscillatorSystem::new(
            mu,
            [([3, 0, 0, 0], p), ([1, 0, 0, 2], q), ([0, 1, 2, 0], s), ([2, 1, 0, 0], t)],
            [([2, 0, 1, 0], p), ([0, 0, 0, 3], q), ([0, 0, 2, 1], s), ([2, 0, 0, 1], t)],
        )
        .unwrap();
        let sum = reduce_to_normal_form(&both).unwrap().flat();
        let (x, y) = (reduce_to_normal_form(&f(p, q)).unwrap().flat(), reduce_to_normal_form(&g(s, t)).unwrap().flat());
        for k in 0..8 {
            prop_assert!((sum[k] - x[k] - y[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn printed_floats_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let s = format_float(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}
