//! Cross-checks between independent computation routes: the full
//! per-element vector route (explicit reflection vectors, per-period phase
//! application) against the scalarized statistics the Monte Carlo engine
//! samples from, and the reflection-optimizer route against the direct
//! product-sum gain formula.

use irslink::analytics::{self, LinkBudget};
use irslink::beamforming;
use irslink::channel::{self, reference_geometry, reference_params};
use irslink::simkit::{self, MonteCarloBudget, RunSpec};
use irslink::stc::{self, Scheme};
use irslink::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The engine draws the two effective scalars directly; this simulates the
/// physical route instead — per-element reflected vectors, the encoder's
/// per-period common phases, full reflection sums — and both must agree
/// with the quadrature SER and with each other.
#[test]
fn vector_and_scalar_transmit_routes_agree_on_ser() {
    let geom = reference_geometry(7);
    let mut params = reference_params();
    params.tx_power_user1 = 10.0; // low power so errors are plentiful
    let m = params.psk_order;
    let analytic =
        analytics::ser_mpsk(&LinkBudget::from_scenario(&geom, &params), m).unwrap();

    // vector route
    let pairs = 200_000u64;
    let theta_bar = vec![Complex64::new(1.0, 0.0); geom.num_elements()];
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A1);
    let mut vector_errors = 0u64;
    for _ in 0..pairs {
        let ch = channel::sample_user1_channels(&geom, &params, None, &mut rng).unwrap();
        let k1 = rng.random_range(0..m);
        let k2 = rng.random_range(0..m);
        let cw = stc::encode_pair(
            stc::psk_modulate(k1, m).unwrap(),
            stc::psk_modulate(k2, m).unwrap(),
        )
        .unwrap();
        let noise = [
            channel::complex_gaussian(&mut rng, params.noise_power),
            channel::complex_gaussian(&mut rng, params.noise_power),
        ];
        let y = stc::transmit_full_reflection(
            &cw,
            &ch,
            &theta_bar,
            params.tx_power_user1,
            noise,
        );
        let det = stc::combine_and_detect(
            &y,
            ch.h1,
            ch.g_bar_1,
            params.tx_power_user1,
            params.noise_power,
            m,
        )
        .unwrap();
        vector_errors += u64::from(det.indices[0] != k1) + u64::from(det.indices[1] != k2);
    }
    let vector_trials = 2 * pairs;
    let vector_ser = vector_errors as f64 / vector_trials as f64;
    let vector_se = (vector_ser * (1.0 - vector_ser) / vector_trials as f64).sqrt();

    // scalar route, through the shipped engine
    let spec = RunSpec {
        geom: geom.clone(),
        params,
        schemes: vec![Scheme::Proposed],
        seed: 0xD0A2,
        config_hash: "dual-route".to_string(),
        budget: MonteCarloBudget {
            target_errors: u64::MAX,
            max_pairs: 200_000,
        },
    };
    let result = simkit::run_ser_vs_power(&spec, &[params.tx_power_user1]).unwrap();
    let engine = result
        .records
        .iter()
        .find(|r| r.metric == "ser_mc")
        .unwrap();

    assert!(
        (vector_ser - analytic).abs() <= 3.0 * vector_se,
        "vector route {vector_ser:.5e} vs analytic {analytic:.5e} (se {vector_se:.2e})"
    );
    assert!(
        (engine.value - analytic).abs() <= 3.0 * engine.std_error,
        "engine {:.5e} vs analytic {analytic:.5e} (se {:.2e})",
        engine.value,
        engine.std_error
    );
    let combined = (vector_se * vector_se + engine.std_error * engine.std_error).sqrt();
    assert!(
        (vector_ser - engine.value).abs() <= 3.0 * combined,
        "routes disagree: {vector_ser:.5e} vs {:.5e} (combined se {combined:.2e})",
        engine.value
    );
}

/// The optimizer route (cascade, align, evaluate) must land exactly on the
/// closed product-sum gain, across sizes and user distances.
#[test]
fn optimizer_route_matches_product_sum_gain() {
    for (n, user2_distance) in [(10usize, 50.0), (30, 20.0), (55, 120.0)] {
        let geom = reference_geometry(n);
        let mut params = reference_params();
        params.user2_distance = user2_distance;
        let g0 = channel::los_vector_g0(&geom, &params);
        let g2 = channel::los_vector_g2(&geom, &params);
        let cascaded = beamforming::cascaded_vector(&g0, &g2).unwrap();
        let optimal = beamforming::optimal_theta(&cascaded).unwrap();
        let via_optimizer = beamforming::beamforming_gain(&cascaded, &optimal).unwrap();
        let via_sum = analytics::pbf_exact(&geom, &params);
        let rel = ((via_optimizer - via_sum) / via_sum).abs();
        assert!(
            rel < 1e-12,
            "N̄={n}, r̃={user2_distance}: optimizer {via_optimizer:e} vs sum {via_sum:e}"
        );
        let aligned = beamforming::optimal_effective_gain(&cascaded);
        assert!(((aligned * aligned - via_sum) / via_sum).abs() < 1e-12);
    }
}

/// Sampling the reflected channel through an arbitrary unit-modulus base
/// reflection must reproduce the gain statistic the closed sum predicts —
/// the per-element phases cannot change the effective gain distribution.
#[test]
fn sampled_reflected_power_matches_numeric_sum() {
    let geom = reference_geometry(9);
    let params = reference_params();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A3);
    let theta_bar: Vec<Complex64> = (0..geom.num_elements())
        .map(|_| Complex64::cis(rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let draws = 200_000;
    let mut acc = 0.0;
    for _ in 0..draws {
        let ch =
            channel::sample_user1_channels(&geom, &params, Some(&theta_bar), &mut rng).unwrap();
        acc += ch.g_bar_1.norm_sqr();
    }
    let sampled = acc / draws as f64;
    let numeric = channel::avg_reflected_gain_numeric(&geom, &params);
    let rel = ((sampled - numeric) / numeric).abs();
    assert!(rel < 0.02, "sampled {sampled:e} vs numeric {numeric:e} ({rel:.4} off)");
}
