use hopf_takens::branches::{hh_branches, BranchKind, Stability};
use hopf_takens::normal_form::reduce_to_normal_form;
use hopf_takens::simulate::{integrate, IntegratorConfig, Trajectory};
use hopf_takens::system::OscillatorSystem;
use hopf_takens::torus::{
    classify_attractor, dominant_frequencies, hausdorff_distance, poincare_section, AttractorLabel, ClassifyConfig,
    SectionConfig,
};
use hopf_takens::versal::{physical_to_unfolding, PhysicalParams};

const T_END: f64 = 6000.0;
const TRANSIENT: f64 = 1000.0;

fn system() -> OscillatorSystem {
    OscillatorSystem::new(
        PhysicalParams::new(0.3, -0.05, -0.1),
        [([2, 1, 0, 0], 8.0), ([0, 1, 2, 0], -1.0), ([0, 1, 0, 2], -1.0)],
        [([2, 0, 0, 1], 2.0), ([0, 0, 2, 1], 2.0), ([0, 0, 0, 3], 2.0)],
    )
    .unwrap()
}

fn run(initial: [f64; 4]) -> Trajectory {
    integrate(&system(), initial, T_END, &IntegratorConfig::default()).unwrap()
}

#[test]
fn catalog_predicts_a_stable_torus() {
    let sys = system();
    let nf = reduce_to_normal_form(&sys).unwrap();
    let alpha = physical_to_unfolding(sys.mu);
    let torus = hh_branches(alpha.alpha2, alpha.alpha3, &nf)
        .into_iter()
        .find(|b| b.kind == BranchKind::Torus2HH)
        .unwrap();
    assert!(torus.exists);
    assert_eq!(torus.stability, Stability::Stable);
    assert!((torus.diagnostics["r_squared"] - 0.03).abs() < 1e-12);
    assert!((torus.diagnostics["rho_squared"] - 0.04).abs() < 1e-12);
}

#[test]
fn simulation_lands_on_the_predicted_torus() {
    let traj = run([0.1, 0.0, 0.1, 0.0]);
    let section = SectionConfig::coordinate(4, 2, TRANSIENT);
    let map = poincare_section(&traj, &section).unwrap();
    let class = classify_attractor(&map, &ClassifyConfig::default());
    assert_eq!(class.label, AttractorLabel::Torus2, "{}", class.reason);
    assert!((class.return_frequency.unwrap() - 1.0).abs() < 0.02);

    // Amplitudes against the averaged prediction, up to the near-identity change.
    let tail = traj.tail_from(TRANSIENT);
    let slow = tail.iter().map(|(_, y)| y[0].abs()).fold(0.0, f64::max);
    let fast: f64 = tail.iter().map(|(_, y)| y[2] * y[2] + y[3] * y[3]).sum::<f64>() / tail.len() as f64;
    assert!((slow - 0.2).abs() < 0.02, "slow amplitude {slow}");
    assert!((fast - 0.03).abs() < 0.003, "fast mean square {fast}");

    let slow_peak = dominant_frequencies(&traj, 0, TRANSIENT, T_END, 16384, 1).unwrap()[0];
    assert!((slow_peak.frequency - 0.3f64.sqrt()).abs() < 0.02 * 0.3f64.sqrt(), "{slow_peak:?}");
    let fast_peak = dominant_frequencies(&traj, 2, TRANSIENT, T_END, 16384, 1).unwrap()[0];
    assert!((fast_peak.frequency - 1.0).abs() < 0.02, "{fast_peak:?}");
}

#[test]
fn section_curve_does_not_depend_on_initial_state() {
    let cfg = ClassifyConfig::default();
    let section = SectionConfig::coordinate(4, 2, TRANSIENT);
    let curves: Vec<_> = [[0.1, 0.0, 0.1, 0.0], [-0.3, 0.0, 0.25, 0.2]]
        .into_iter()
        .map(|y0| {
            let class = classify_attractor(&poincare_section(&run(y0), &section).unwrap(), &cfg);
            assert_eq!(class.label, AttractorLabel::Torus2, "{}", class.reason);
            class.curve.unwrap()
        })
        .collect();
    let d = hausdorff_distance(&curves[0], &curves[1], 720);
    assert!(d < 0.05 * curves[0].diameter(), "distance {d}");
}
