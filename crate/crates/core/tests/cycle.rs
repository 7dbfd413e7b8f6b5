use nmisc::cycle::*;

fn sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn monte_carlo_matches_closed_form() {
    let p = PulseProtocol::default();
    let s = run_monte_carlo(&p, 100_000, DEFAULT_SEED).unwrap();
    let expected = (1.0 - (-10f64).exp()).powi(2);
    assert!((s.analytic_efficiency - expected).abs() < 1e-15);
    // At p ≈ 1 the binomial σ is tiny; allow one count of slack on top.
    let tol = 3.0 * sigma(expected, s.pulses) + 1.0 / s.pulses as f64;
    assert!(
        (s.efficiency - expected).abs() <= tol,
        "{} vs {expected}",
        s.efficiency
    );
    assert_eq!(s.p_multi, 0.0);
    assert_eq!(s.p0 + s.p1, 1.0);
    assert_eq!(s.efficiency, s.p1);
    let t = s.mean_emission_time.unwrap();
    // mean recombination time within T3 is τ_rad up to the truncation at t3
    let target = p.t1_ns + p.t2_ns + p.tau_rad_ns;
    assert!(
        (t - target).abs() < 3.0 * p.tau_rad_ns / (s.photons as f64).sqrt() + 1e-3,
        "{t}"
    );
}

#[test]
fn lossy_protocol_matches_closed_form() {
    let p = PulseProtocol {
        tau_tunnel_ns: 3.0,
        tau_nonrad_ns: 2.0,
        ..Default::default()
    };
    let s = run_monte_carlo(&p, 100_000, 77).unwrap();
    let e = analytic_efficiency(&p);
    assert!(
        (s.efficiency - e).abs() < 3.0 * sigma(e, s.pulses),
        "{} {e}",
        s.efficiency
    );
    assert!(s.conserves_electrons());
}

#[test]
fn same_seed_same_stats() {
    let p = PulseProtocol::default();
    let a = run_monte_carlo(&p, 5000, 42).unwrap();
    let b = run_monte_carlo(&p, 5000, 42).unwrap();
    assert_eq!(a, b);
    let c = run_monte_carlo(&p, 5000, 43).unwrap();
    assert_eq!(c.rng_seed, 43);
    let one = run_monte_carlo(&p, 1, 42).unwrap();
    assert_eq!(one, run_monte_carlo(&p, 1, 42).unwrap());
}

#[test]
fn efficiency_is_monotone_with_common_random_numbers() {
    let base = PulseProtocol {
        tau_nonrad_ns: 3.0,
        t3_ns: 2.0,
        t1_ns: 2.0,
        ..Default::default()
    };
    let eff = |p: &PulseProtocol| run_monte_carlo(p, 20_000, 5).unwrap().efficiency;
    let grid = [0.5, 1.0, 2.0, 4.0, 8.0];
    let by_t1: Vec<f64> = grid
        .iter()
        .map(|&t| {
            eff(&PulseProtocol {
                t1_ns: t,
                ..base.clone()
            })
        })
        .collect();
    let by_t3: Vec<f64> = grid
        .iter()
        .map(|&t| {
            eff(&PulseProtocol {
                t3_ns: t,
                ..base.clone()
            })
        })
        .collect();
    let by_tau: Vec<f64> = grid
        .iter()
        .map(|&t| {
            eff(&PulseProtocol {
                tau_tunnel_ns: t,
                ..base.clone()
            })
        })
        .collect();
    assert!(by_t1.windows(2).all(|w| w[1] >= w[0]), "{by_t1:?}");
    assert!(by_t3.windows(2).all(|w| w[1] >= w[0]), "{by_t3:?}");
    assert!(by_tau.windows(2).all(|w| w[1] <= w[0]), "{by_tau:?}");
}

#[test]
fn short_emission_window_carries_electrons_over() {
    let p = PulseProtocol {
        t3_ns: 0.3,
        ..Default::default()
    };
    let (s, events) = run_monte_carlo_with_events(&p, 10_000, 8).unwrap();
    assert!(s.carryover_cycles > 0);
    assert!(s.conserves_electrons());
    assert!(events
        .iter()
        .all(|e| !(e.outcome.photon_emitted && e.outcome.nonradiative_loss)));
    assert!(events
        .iter()
        .filter(|e| e.outcome.photon_emitted)
        .all(|e| e.outcome.emission_phase == Some(EmissionPhase::Reset)));
}
