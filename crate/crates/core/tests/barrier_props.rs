//! Randomized sweeps over the barrier parameter space.

use eigentrace::barrier::{
    build, closed_form_b0, log_spaced_nodes, verify_properties, BarrierParams,
};
use eigentrace::sampling;
use rand::Rng;

fn random_params<R: Rng>(rng: &mut R) -> BarrierParams {
    BarrierParams::new(
        rng.gen_range(0.05..0.95),
        rng.gen_range(0.0..5.0),
        rng.gen_range(0.1..10.0),
        rng.gen_range(0.0..5.0),
        rng.gen_range(0.1..2.0),
    )
    .unwrap()
}

#[test]
fn hundred_random_draws_pass_all_properties() {
    for trial in 0..100u64 {
        let mut rng = sampling::rng_for(3001, trial);
        let params = random_params(&mut rng);
        let barrier = build(params).unwrap();
        let report = verify_properties(&barrier, 200).unwrap();
        assert!(report.all_passed(), "params {params:?}: {report:?}");
    }
}

#[test]
fn derivative_consistency_across_draws() {
    // phi'' comes from the ODE, so the meaningful consistency check is that
    // a central difference of the quadrature phi reproduces psi. The residual
    // is scaled by 1 + |psi| because psi itself grows like r^{-a} near zero.
    for trial in 0..100u64 {
        let mut rng = sampling::rng_for(3002, trial);
        let params = random_params(&mut rng);
        let barrier = build(params).unwrap();
        let nodes = log_spaced_nodes(params.delta, 40);
        for &r in nodes.iter().take(39) {
            let h = r * 1e-4;
            let fd = (barrier.phi(r + h).unwrap() - barrier.phi(r - h).unwrap()) / (2.0 * h);
            let psi = barrier.phi_prime(r).unwrap();
            let residual = (fd - psi).abs() / (1.0 + psi.abs());
            assert!(
                residual <= 1e-6,
                "params {params:?}, r = {r}: scaled residual {residual}"
            );
        }
    }
}

#[test]
fn slope_is_strictly_decreasing_across_draws() {
    for trial in 0..40u64 {
        let mut rng = sampling::rng_for(3003, trial);
        let params = random_params(&mut rng);
        let barrier = build(params).unwrap();
        let nodes = log_spaced_nodes(params.delta, 150);
        let mut prev = f64::INFINITY;
        for &r in &nodes {
            let psi = barrier.phi_prime(r).unwrap();
            assert!(psi < prev, "psi not decreasing at r = {r} for {params:?}");
            prev = psi;
        }
    }
}

#[test]
fn terminal_mass_dominates_mean_value_bound() {
    // phi(delta) >= delta * psi(delta) = d, the mean value bound used to pin
    // the terminal mass.
    for trial in 0..40u64 {
        let mut rng = sampling::rng_for(3004, trial);
        let params = random_params(&mut rng);
        let barrier = build(params).unwrap();
        let phi_delta = barrier.phi(params.delta).unwrap();
        let bound = params.delta * barrier.phi_prime(params.delta).unwrap();
        assert!(phi_delta >= bound - 1e-9 * (1.0 + bound.abs()));
        assert!(phi_delta >= params.d - 1e-9 * (1.0 + params.d));
    }
}

#[test]
fn zero_drift_quadrature_agrees_with_closed_form() {
    for trial in 0..40u64 {
        let mut rng = sampling::rng_for(3005, trial);
        let params = BarrierParams::new(
            rng.gen_range(0.05..0.95),
            0.0,
            rng.gen_range(0.1..10.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.1..2.0),
        )
        .unwrap();
        let barrier = build(params).unwrap();
        let (c1, c2) = closed_form_b0(&params).unwrap();
        assert!(
            (barrier.normalization() - c1 * (1.0 - params.a)).abs()
                <= 1e-10 * (1.0 + barrier.normalization().abs())
        );
        for &r in &log_spaced_nodes(params.delta, 200) {
            let exact = c1 * r.powf(1.0 - params.a) - c2 * r * r;
            let got = barrier.phi(r).unwrap();
            assert!(
                (got - exact).abs() <= 1e-8 * (1.0 + exact.abs()),
                "params {params:?}, r = {r}: {got} vs {exact}"
            );
        }
    }
}

#[test]
fn ode_identity_holds_through_the_derivatives() {
    // phi'' + (a/r + b) phi' = -c by construction; the check exercises the
    // accessor plumbing end to end. Near r = 0 the drift term grows past
    // 1e12, so the rounding slack scales with its magnitude.
    for trial in 0..20u64 {
        let mut rng = sampling::rng_for(3006, trial);
        let params = random_params(&mut rng);
        let barrier = build(params).unwrap();
        for &r in &log_spaced_nodes(params.delta, 60) {
            let drift = (params.a / r + params.b) * barrier.phi_prime(r).unwrap();
            let lhs = barrier.phi_double_prime(r).unwrap() + drift;
            assert!(
                (lhs + params.c).abs() <= 1e-12 * (1.0 + params.c + drift.abs()),
                "r = {r}: {lhs} vs {}",
                -params.c
            );
        }
    }
}
