use super::*;
use crate::fields::{synth_field, GridSpec, SynthSpec};
use crate::norms::{inner_quadrature, l2_norm};

fn grid(n: usize) -> GridSpec {
    GridSpec::standard(n).unwrap()
}

fn shear(g: &GridSpec) -> VectorField {
    synth_field(g, &SynthSpec::SingleMode { k: [0, 1, 0], direction: [1.0, 0.0, 0.0], amplitude: 1.0 }).unwrap()
}

fn random(g: &GridSpec, seed: u64, kmax: usize, amplitude: f64, divergence_free: bool) -> VectorField {
    synth_field(g, &SynthSpec::RandomBandlimited { seed, kmax, amplitude, divergence_free }).unwrap()
}

fn random_state(g: &GridSpec, seed: u64, kmax: usize, amplitude: f64) -> State {
    State::new(random(g, seed, kmax, amplitude, true), random(g, seed + 1000, kmax, amplitude, true), 0.0).unwrap()
}

fn params() -> SolverParams {
    SolverParams::new(0.1, 0.1, 1e-3, 1.0).unwrap()
}

fn nonlinear_power(s: &State, t: &Tendency) -> f64 {
    inner_quadrature(&t.du, &s.u) + inner_quadrature(&t.db, &s.b)
}

fn rel_diff(a: &VectorField, b: &VectorField) -> f64 {
    l2_norm(&a.sub(b)) / l2_norm(b).max(1e-300)
}

#[test]
fn shear_velocity_has_no_tendency() {
    let g = grid(16);
    let s = State::new(shear(&g), VectorField::zeros(&g), 0.0).unwrap();
    let t = rhs(&s, &params());
    assert!(t.du.max_coeff() < 1e-15 && t.db.max_coeff() < 1e-15);
}

#[test]
fn shear_field_hall_term_cancels() {
    let g = grid(16);
    let s = State::new(VectorField::zeros(&g), shear(&g), 0.0).unwrap();
    let t = rhs(&s, &params());
    assert!(t.db.max_coeff() < 1e-15);
}

#[test]
fn nonlinear_terms_are_energy_neutral() {
    let g = grid(32);
    for seed in 0..4 {
        let s = random_state(&g, seed, 6, 0.3);
        let scale = (seminorms(&s.u).h1 + seminorms(&s.b).h2).powi(3);
        for p in [params(), params().with_hall(false), params().with_mollifier(Some(3))] {
            let t = tendency(&s, &p);
            assert!(nonlinear_power(&s, &t).abs() <= 1e-10 * scale, "{p:?}");
        }
    }
}

#[test]
fn regularized_matches_plain_when_band_covers_grid() {
    let g = grid(16);
    let s = random_state(&g, 3, 5, 1.0);
    let a = rhs(&s, &params());
    let b = rhs_regularized(&s, &params(), 8);
    assert!(rel_diff(&b.du, &a.du) <= 1e-13 && rel_diff(&b.db, &a.db) <= 1e-13);
}

#[test]
fn regularized_ignores_modes_above_band() {
    let g = grid(16);
    let hi = synth_field(&g, &SynthSpec::SingleMode { k: [0, 4, 0], direction: [1.0, 0.0, 0.0], amplitude: 1.0 })
        .unwrap();
    let hi_b = synth_field(&g, &SynthSpec::SingleMode { k: [3, 0, 3], direction: [0.0, 1.0, 0.0], amplitude: 1.0 })
        .unwrap();
    let s = State::new(hi, hi_b, 0.0).unwrap();
    let t = rhs_regularized(&s, &params(), 2);
    assert_eq!(t.du.max_coeff(), 0.0);
    assert_eq!(t.db.max_coeff(), 0.0);
}

#[test]
fn pressure_cases() {
    let g = grid(16);
    let zero = State::new(VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap();
    assert_eq!(recover_pressure(&zero, &params()).coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm())), 0.0);
    let sh = State::new(shear(&g), VectorField::zeros(&g), 0.0).unwrap();
    assert!(recover_pressure(&sh, &params()).coeffs().iter().all(|c| c.norm() < 1e-15));

    let s = random_state(&g, 4, 5, 1.0);
    let p = recover_pressure(&s, &params());
    let src = pressure_source(&s.u, &s.b);
    let lap_p = crate::calculus::laplacian_scalar(&p);
    let div_src = div(&src);
    let scale = l2_norm_scalar(&div_src);
    let mut resid = lap_p.coeffs().to_vec();
    for (r, d) in resid.iter_mut().zip(div_src.coeffs()) {
        *r += d;
    }
    resid[0] = crate::fields::ZERO;
    let worst = resid.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    assert!(worst <= 1e-12 * scale.max(1.0));

    let total = src.add(&crate::calculus::grad(&p));
    let residual = l2_norm(&leray_project(&total).sub(&total));
    assert!(residual <= 1e-10 * l2_norm(&src));
}

#[test]
fn velocity_shear_decays_exactly() {
    let g = grid(16);
    let mu = 0.3;
    let p = SolverParams::new(mu, 0.1, 1e-3, 1.0).unwrap();
    let s0 = State::new(shear(&g), VectorField::zeros(&g), 0.0).unwrap();
    let end = run(s0.clone(), &p, 1000, &mut |_, _| {}).unwrap();
    let exact = shear(&g).scaled((-mu).exp());
    assert!(rel_diff(&end.u, &exact) <= 1e-8);
    assert!(end.b.max_coeff() == 0.0);
    assert!((end.t - 1.0).abs() < 1e-15);
}

#[test]
fn magnetic_shear_decays_exactly() {
    let g = grid(16);
    let gamma = 0.2;
    let p = SolverParams::new(0.1, gamma, 1e-3, 1.0).unwrap();
    let s0 = State::new(VectorField::zeros(&g), shear(&g), 0.0).unwrap();
    let end = run(s0, &p, 1000, &mut |_, _| {}).unwrap();
    assert!(rel_diff(&end.b, &shear(&g).scaled((-gamma).exp())) <= 1e-8);
}

#[test]
fn zero_state_stays_zero() {
    let g = grid(8);
    let s0 = State::new(VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap();
    for scheme in [Scheme::IfRk4, Scheme::Imex2] {
        let s = step(&s0, &params().with_scheme(scheme)).unwrap();
        assert_eq!(s.u.max_coeff() + s.b.max_coeff(), 0.0);
    }
}

#[test]
fn empty_horizon_observes_once() {
    let g = grid(8);
    let s0 = random_state(&g, 5, 2, 1.0);
    let mut calls = 0;
    let end = run(s0.clone(), &params().with_t_end(0.0), 1, &mut |_, _| calls += 1).unwrap();
    assert_eq!(calls, 1);
    assert_eq!(end.u.components(), s0.u.components());
}

#[test]
fn run_equals_step_composition() {
    let g = grid(16);
    let s0 = random_state(&g, 6, 4, 1.0);
    let p = params().with_dt(0.01).with_t_end(0.05);
    let via_run = run(s0.clone(), &p, 1, &mut |_, _| {}).unwrap();
    let mut s = s0;
    for _ in 0..5 {
        s = step(&s, &p).unwrap();
    }
    assert_eq!(via_run.u.components(), s.u.components());
    assert_eq!(via_run.b.components(), s.b.components());
}

#[test]
fn remainder_step_lands_on_t_end() {
    assert_eq!(step_schedule(0.0, 1.0, 0.3).len(), 4);
    assert_eq!(step_schedule(0.0, 1.0, 0.25), vec![0.25; 4]);
    let g = grid(8);
    let s0 = random_state(&g, 7, 2, 0.5);
    let mut times = Vec::new();
    let end = run(s0, &params().with_dt(0.3).with_t_end(1.0), 1, &mut |s, _| times.push(s.t)).unwrap();
    assert_eq!(end.t, 1.0);
    assert_eq!(times.len(), 5);
}

#[test]
fn divergence_is_preserved() {
    let g = grid(16);
    let u = random(&g, 8, 5, 1.0, true);
    let b = random(&g, 9, 5, 1.0, false);
    let s0 = State::new(u, b, 0.0).unwrap();
    let gamma = 0.1;
    let p = params().with_dt(5e-3).with_t_end(0.1);
    let div0 = div(&s0.b);
    let mut worst_u = 0.0f64;
    let end = run(s0, &p, 1, &mut |s, _| {
        worst_u = worst_u.max(l2_norm_scalar(&div(&s.u)) / seminorms(&s.u).h1);
    })
    .unwrap();
    assert!(worst_u <= 1e-10);
    // div b obeys the heat equation exactly
    let expected = div0.map_spectral(|idx, c| {
        let k = g.k_vec(idx);
        c * (-gamma * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * end.t).exp()
    });
    let got = div(&end.b);
    let err: f64 = got.coeffs().iter().zip(expected.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-10 * l2_norm_scalar(&div0));
}

#[test]
fn solenoidal_field_stays_solenoidal() {
    let g = grid(16);
    let s0 = random_state(&g, 10, 5, 1.0);
    let end = run(s0, &params().with_dt(5e-3).with_t_end(0.05), 1, &mut |_, _| {}).unwrap();
    assert!(div_b_l2(&end) <= 1e-10 * seminorms(&end.b).h1);
}

#[test]
fn navier_stokes_reduction_keeps_b_zero() {
    let g = grid(16);
    let s0 = State::new(random(&g, 11, 5, 1.0, true), VectorField::zeros(&g), 0.0).unwrap();
    let end = run(s0, &params().with_dt(5e-3).with_t_end(0.05), 1, &mut |_, _| {}).unwrap();
    assert_eq!(end.b.max_coeff(), 0.0);
    assert!(end.u.max_coeff() > 0.0);
}

#[test]
fn hall_switch_changes_evolution() {
    let g = grid(16);
    let s0 = random_state(&g, 12, 4, 1.0);
    let with = rhs(&s0, &params());
    let without = rhs(&s0, &params().with_hall(false));
    assert!(rel_diff(&with.du, &without.du) <= 1e-14);
    assert!(rel_diff(&with.db, &without.db) > 1e-3);
}

#[test]
fn non_finite_state_is_reported() {
    let g = grid(8);
    let mut u = VectorField::zeros(&g);
    u.component_mut(0)[1] = num_complex::Complex64::new(f64::NAN, 0.0);
    let s = State { u, b: VectorField::zeros(&g), t: 0.25 };
    match step(&s, &params()) {
        Err(DynamicsError::NonFinite { t, snapshot }) => {
            assert!((t - 0.251).abs() < 1e-15);
            assert_eq!(snapshot.t, 0.25);
        }
        other => panic!("expected failure, got {other:?}"),
    }
}

#[test]
fn parameter_validation() {
    let msg = |r: Result<SolverParams, DynamicsError>| r.unwrap_err().to_string();
    assert_eq!(msg(SolverParams::new(0.0, 1.0, 0.1, 1.0)), "mu must be > 0");
    assert_eq!(msg(SolverParams::new(1.0, -1.0, 0.1, 1.0)), "gamma must be > 0");
    assert_eq!(msg(SolverParams::new(1.0, 1.0, 0.0, 1.0)), "dt must be > 0");
    assert_eq!(msg(SolverParams::new(1.0, 1.0, 0.1, -1.0)), "t_end must be >= 0");
    assert!(params().with_mollifier(Some(0)).validate().is_err());
}

#[test]
fn state_rejects_compressible_velocity() {
    let g = grid(8);
    let u = random(&g, 13, 2, 1.0, false);
    assert!(matches!(State::new(u.clone(), VectorField::zeros(&g), 0.0), Err(DynamicsError::NotSolenoidal { .. })));
    assert!(State::projected(u, VectorField::zeros(&g), 0.0).is_ok());
    let other = VectorField::zeros(&grid(16));
    assert!(matches!(State::new(VectorField::zeros(&g), other, 0.0), Err(DynamicsError::GridMismatch)));
}

#[test]
fn cfl_report_values() {
    let g = grid(16);
    let s = State::new(shear(&g), shear(&g).scaled(2.0), 0.0).unwrap();
    let r = cfl_report(&s, &params());
    let dx = g.spacing();
    assert!((r.max_u - 1.0).abs() < 0.05 && (r.max_b - 2.0).abs() < 0.1);
    assert!((r.dt_advective - dx / r.max_u).abs() < 1e-15);
    assert!((r.advised - 0.5 * r.dt_advective.min(r.dt_whistler)).abs() < 1e-15);
    assert!(r.satisfied());
}

fn self_convergence_order(scheme: Scheme) -> f64 {
    let g = grid(16);
    let s0 = random_state(&g, 14, 3, 1.5);
    let p = SolverParams::new(0.05, 0.05, 0.04, 0.4).unwrap().with_scheme(scheme);
    let solve = |dt: f64| run(s0.clone(), &p.clone().with_dt(dt), 1000, &mut |_, _| {}).unwrap();
    let (a, b, c) = (solve(0.04), solve(0.02), solve(0.01));
    let e1 = l2_norm(&a.u.sub(&b.u)) + l2_norm(&a.b.sub(&b.b));
    let e2 = l2_norm(&b.u.sub(&c.u)) + l2_norm(&b.b.sub(&c.b));
    (e1 / e2).log2()
}

#[test]
fn if_rk4_fourth_order_on_nonlinear_flow() {
    let order = self_convergence_order(Scheme::IfRk4);
    assert!(order >= 3.8, "observed order {order}");
}

#[test]
fn imex2_second_order_on_nonlinear_flow() {
    let order = self_convergence_order(Scheme::Imex2);
    assert!(order >= 1.9, "observed order {order}");
}

#[test]
fn imex2_second_order_on_decay() {
    let g = grid(8);
    let mu: f64 = 1.0;
    let s0 = State::new(shear(&g), VectorField::zeros(&g), 0.0).unwrap();
    let exact = shear(&g).scaled((-mu).exp());
    let err = |dt: f64| {
        let p = SolverParams::new(mu, 1.0, dt, 1.0).unwrap().with_scheme(Scheme::Imex2);
        rel_diff(&run(s0.clone(), &p, 1000, &mut |_, _| {}).unwrap().u, &exact)
    };
    let order = (err(0.02) / err(0.01)).log2();
    assert!((order - 2.0).abs() < 0.1, "observed order {order}");
}
