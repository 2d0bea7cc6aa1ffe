//! Sampling cross-checks of the analytic variance functional and closed forms.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use squeezetap::experiment::{
    build_number_difference, closed_form_variance, phase_scan, restored_ratio,
};
use squeezetap::montecarlo::{sample_iterated_bounce, sample_operator, SamplerConfig};
use squeezetap::reservoir::{iterated_bounce, BounceChannel};
use squeezetap::{ExperimentConfig, FluctuationOperator, ModeId, PairSource, Phases, SqueezeParam};

const SIGMA: f64 = 4.0;

fn q(mode: u32, theta: f64) -> FluctuationOperator {
    FluctuationOperator::quadrature(ModeId(mode), theta)
}

fn sampled(op: &FluctuationOperator, n: usize, seed: u64) -> f64 {
    let rep = sample_operator(op, &SamplerConfig::new(n, seed).unwrap());
    assert!(rep.z_score.abs() < SIGMA, "{rep:?}");
    rep.sample_variance
}

#[test]
fn difference_of_independent_quadratures() {
    let x = &q(1, 0.0) - &q(2, 0.0);
    assert!((x.variance() - 1.0).abs() < 1e-15);
    sampled(&x, 400_000, 1);
}

#[test]
fn covariance_at_sixty_degrees() {
    // cov = (V(x + y) - V(x) - V(y)) / 2, all three sampled on the same draws
    let (x, y) = (q(1, 0.0), q(1, FRAC_PI_3));
    let n = 1_000_000;
    let vs = sampled(&(&x + &y), n, 2);
    let vx = sampled(&x, n, 2);
    let vy = sampled(&y, n, 2);
    let cov = (vs - vx - vy) / 2.0;
    assert!((cov - 0.25).abs() < 5e-3, "cov {cov}");
    assert!((x.covariance(&y) - 0.25).abs() < 1e-15);
}

#[test]
fn single_mode_squeezing_both_quadratures() {
    let r = SqueezeParam::new(0.6).unwrap();
    let amp = q(3, 0.0).single_mode_squeeze(ModeId(3), r, PI);
    let phase = q(3, FRAC_PI_2).single_mode_squeeze(ModeId(3), r, PI);
    assert!((amp.variance() - (-1.2f64).exp() / 2.0).abs() < 1e-14);
    assert!((phase.variance() - 1.2f64.exp() / 2.0).abs() < 1e-13);
    sampled(&amp, 400_000, 3);
    sampled(&phase, 400_000, 4);
}

#[test]
fn two_mode_squeezed_quadrature() {
    let x = q(1, 0.0)
        .two_mode_squeeze((ModeId(1), ModeId(2)), SqueezeParam::new(0.5).unwrap())
        .unwrap();
    sampled(&x, 400_000, 5);
}

#[test]
fn unsqueezed_number_difference_is_shot_noise() {
    let cfg = ExperimentConfig::epr(0.0, 0.0, 1.0, 0.0, 0.3, 0.1).unwrap();
    let op = build_number_difference(&cfg);
    assert!((op.variance() - 1.0).abs() < 1e-15);
    sampled(&op, 400_000, 6);
}

#[test]
fn lone_pair_degradation() {
    let r = 0.7;
    let cfg = ExperimentConfig::epr(r, 0.0, 1.5, 0.0, 0.4, 2.0).unwrap();
    let v = sampled(&build_number_difference(&cfg), 1_000_000, 7);
    let shot = 1.5f64 * 1.5;
    assert!((v / shot - (1.0 + (-2.0 * r).exp()) / 2.0).abs() < 5e-3);
}

#[test]
fn number_difference_matches_closed_form() {
    let cfg = ExperimentConfig::epr(0.5, 0.5, 1.2, 0.8, 0.7, -0.7).unwrap();
    let op = build_number_difference(&cfg);
    let rep = sample_operator(&op, &SamplerConfig::new(1_000_000, 8).unwrap());
    let closed = closed_form_variance(&cfg).unwrap();
    assert!(
        (rep.sample_variance - closed).abs() < SIGMA * rep.standard_error,
        "{rep:?}"
    );
}

#[test]
fn antisqueezed_phase_pair() {
    let cfg = ExperimentConfig::epr(0.5, 0.5, 1.0, 1.0, 0.0, PI).unwrap();
    let v = sampled(&build_number_difference(&cfg), 1_000_000, 9);
    assert!((v / 2.0 - 1f64.cosh()).abs() < 1.5e-2);
}

#[test]
fn local_squeezing_fails_at_quadrature_phases() {
    let cfg = ExperimentConfig::new(
        PairSource::single_mode(0.5, 1.0).unwrap(),
        PairSource::single_mode(0.5, 1.0).unwrap(),
        Phases::from_differences(FRAC_PI_2, -FRAC_PI_2),
    )
    .unwrap();
    let op = build_number_difference(&cfg);
    let v = sampled(&op, 1_000_000, 10);
    assert!(v / 2.0 >= 1.0, "sampled ratio {}", v / 2.0);
}

#[test]
fn scan_points_sampled() {
    let template = ExperimentConfig::epr(0.5, 0.3, 1.1, 0.9, 0.0, 0.0).unwrap();
    let scan = phase_scan(&template, -2.5, 2.5, 5).unwrap();
    for (i, rec) in scan.records.iter().enumerate() {
        let cfg = template
            .with_phases(Phases::from_differences(rec.value, -rec.value))
            .unwrap();
        let rep = sample_operator(
            &build_number_difference(&cfg),
            &SamplerConfig::new(400_000, 100 + i as u64).unwrap(),
        );
        assert!(rep.z_score.abs() < SIGMA, "{rep:?}");
        assert!((rec.ratio.unwrap() - restored_ratio(0.5, 0.3)).abs() < 1e-12);
        assert!((rec.variance - rep.analytic_variance).abs() < 1e-12);
    }
}

#[test]
fn iterated_bounce_trajectories() {
    let ch = BounceChannel::new(0.1, 1e-9).unwrap();
    let input_var = 0.5 * (-2.0f64).exp();
    let cfg = SamplerConfig::new(100_000, 11).unwrap();
    let rep = sample_iterated_bounce(&ch, 200, input_var.sqrt(), &cfg).unwrap();
    let c400 = 0.1f64.cos().powi(400);
    let expected = 0.5 * ((-2.0f64).exp() * c400 + 1.0 - c400);
    assert!((rep.analytic_variance - expected).abs() < 1e-15);
    assert!(rep.z_score.abs() < SIGMA, "{rep:?}");

    let start = sample_iterated_bounce(&ch, 0, 1.3, &cfg).unwrap();
    assert_eq!(
        start.analytic_variance,
        iterated_bounce(&ch, 0, 1.3 * 1.3).variance
    );
    assert!(start.z_score.abs() < SIGMA, "{start:?}");
}

#[test]
fn seed_determinism_across_chunking() {
    let cfg = ExperimentConfig::epr(0.4, 0.9, 1.0, 2.0, 0.2, 1.1).unwrap();
    let op = build_number_difference(&cfg);
    let reference = sample_operator(
        &op,
        &SamplerConfig::with_chunk_size(50_001, 42, 50_001).unwrap(),
    );
    for chunk in [1, 7, 1000, 16_384] {
        let rep = sample_operator(
            &op,
            &SamplerConfig::with_chunk_size(50_001, 42, chunk).unwrap(),
        );
        assert_eq!(
            rep.sample_variance.to_bits(),
            reference.sample_variance.to_bits()
        );
    }
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let rep = single.install(|| {
        sample_operator(
            &op,
            &SamplerConfig::with_chunk_size(50_001, 42, 999).unwrap(),
        )
    });
    assert_eq!(
        rep.sample_variance.to_bits(),
        reference.sample_variance.to_bits()
    );

    let other = sample_operator(&op, &SamplerConfig::new(50_001, 43).unwrap());
    assert_ne!(other.sample_variance, reference.sample_variance);

    let ch = BounceChannel::new(0.2, 1.0).unwrap();
    let a = sample_iterated_bounce(
        &ch,
        30,
        0.4,
        &SamplerConfig::with_chunk_size(20_000, 9, 3).unwrap(),
    )
    .unwrap();
    let b = sample_iterated_bounce(
        &ch,
        30,
        0.4,
        &SamplerConfig::with_chunk_size(20_000, 9, 20_000).unwrap(),
    )
    .unwrap();
    assert_eq!(a.sample_variance.to_bits(), b.sample_variance.to_bits());
}

#[test]
fn scaling_is_quadratic_under_a_fixed_seed() {
    let x = &q(1, 0.3) + &q(4, 2.0).scaled(0.7);
    let cfg = SamplerConfig::new(100_000, 12).unwrap();
    let base = sample_operator(&x, &cfg).sample_variance;
    for a in [2.0, -0.5, 8.0] {
        assert_eq!(
            sample_operator(&x.scaled(a), &cfg).sample_variance,
            a * a * base
        );
    }
    for a in [0.3, -1.7, 3.1] {
        let v = sample_operator(&x.scaled(a), &cfg).sample_variance;
        assert!((v - a * a * base).abs() <= 1e-12 * a * a * base);
    }
}

fn random_operator(rng: &mut ChaCha8Rng) -> FluctuationOperator {
    let unit = |rng: &mut ChaCha8Rng| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let modes = 1 + (rng.next_u32() % 5) as usize;
    FluctuationOperator::from_coefficients((0..modes).map(|m| {
        let w = num_complex::Complex64::new(unit(rng) * 4.0 - 2.0, unit(rng) * 4.0 - 2.0);
        (ModeId(m as u32), w)
    }))
}

#[test]
fn sample_variance_is_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let seeds = 50;
    for _ in 0..20 {
        let op = random_operator(&mut rng);
        let reports: Vec<_> = (0..seeds)
            .map(|seed| sample_operator(&op, &SamplerConfig::new(n, 1000 + seed).unwrap()))
            .collect();
        let mean = reports.iter().map(|r| r.sample_variance).sum::<f64>() / seeds as f64;
        let pooled = reports
            .iter()
            .map(|r| r.standard_error.powi(2))
            .sum::<f64>()
            .sqrt()
            / seeds as f64;
        assert!(
            (mean - op.variance()).abs() < 2.0 * pooled,
            "mean {mean} vs {}",
            op.variance()
        );
    }
}
