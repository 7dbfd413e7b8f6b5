mod common;

use common::*;
use nmisc::cycle::{run_monte_carlo, PulseProtocol};
use nmisc::device::build_default_device;
use nmisc::electrostatics::bias_sweep;
use nmisc::mesh::RefinementSpec;
use nmisc::qdot::{find_alignment_bias, find_onset_bias, fit_parabola, ConfinementProfile};
use nmisc::zeeman::apply_pi_pulse;
use proptest::prelude::*;

fn random_mesh() -> impl Strategy<Value = RefinementSpec> {
    (2.0f64..5.0, 1.1f64..1.5, 30.0f64..60.0).prop_map(|(h, g, max)| RefinementSpec {
        min_spacing_nm: h,
        growth_ratio: g,
        max_spacing_nm: max,
        ..RefinementSpec::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn min_conduction_edge_falls_with_bias(
        refine in random_mesh(),
        radius in 25.0f64..60.0,
        start in 0.0f64..2.5,
        step in 0.05f64..0.3,
    ) {
        let d = build_default_device().with_gate_radius(radius);
        let s = solver_for(&d, &refine);
        let biases: Vec<f64> = (0..4).map(|k| start + step * k as f64).collect();
        let fields = bias_sweep(&s, &biases).unwrap();
        prop_assert!(fields.iter().all(|f| f.converged));
        let ec: Vec<f64> = fields.iter().map(|f| f.min_conduction_edge_mev()).collect();
        prop_assert!(ec.windows(2).all(|w| w[1] < w[0]), "{:?}", ec);
    }

    #[test]
    fn onset_never_precedes_alignment(
        refine in random_mesh(),
        radius in 25.0f64..70.0,
        offset in -0.3f64..0.3,
    ) {
        let mut d = build_default_device().with_gate_radius(radius);
        d.gate.offset_v = offset;
        let s = solver_for(&d, &refine);
        let a = find_alignment_bias(&s, (1.0, 4.5), 0.05).unwrap();
        let o = find_onset_bias(&s, (a.bias, 4.5), 0.05).unwrap();
        prop_assert!(o.bias >= a.bias);
    }

    #[test]
    fn electrons_are_conserved(
        t1 in 0.1f64..20.0,
        t2 in 0.0f64..1.0,
        t3 in 0.05f64..20.0,
        tau_t in 0.1f64..5.0,
        tau_r in 0.1f64..5.0,
        tau_n in prop_oneof![Just(f64::INFINITY), 0.1f64..10.0],
        early in 0.0f64..1.0,
        pulses in 1u64..3000,
        seed in any::<u64>(),
    ) {
        let p = PulseProtocol {
            t1_ns: t1, t2_ns: t2, t3_ns: t3,
            tau_tunnel_ns: tau_t, tau_rad_ns: tau_r, tau_nonrad_ns: tau_n,
            early_emission_enabled: early > 0.5, early_emission_scale: early,
        };
        let s = run_monte_carlo(&p, pulses, seed).unwrap();
        prop_assert!(s.conserves_electrons());
        prop_assert_eq!(s.p_multi, 0.0);
        prop_assert!(s.photons <= s.pulses);
    }

    #[test]
    fn pi_pulse_is_an_involution(up in any::<bool>()) {
        let s = if up { 0.5 } else { -0.5 };
        let once = apply_pi_pulse(s).unwrap();
        prop_assert_eq!(once, -s);
        prop_assert_eq!(apply_pi_pulse(once).unwrap(), s);
    }

    #[test]
    fn exact_quadratic_is_recovered(
        offset in -50.0f64..50.0,
        c in 1e-3f64..1.0,
        dr in 0.1f64..2.0,
        window in 5usize..200,
    ) {
        let radii: Vec<f64> = (0..300).map(|k| k as f64 * dr).collect();
        let profile = ConfinementProfile {
            well_conduction_edge: radii.iter().map(|r| offset + c * r * r).collect(),
            radii,
            bias: 0.0,
            electron_mass: 0.045,
        };
        let fit = fit_parabola(&profile, Some(window as f64 * dr)).unwrap();
        prop_assert!((fit.curvature - c).abs() <= 1e-9 * c);
        let auto = fit_parabola(&profile, None).unwrap();
        prop_assert!((auto.curvature - c).abs() <= 1e-9 * c);
    }
}
