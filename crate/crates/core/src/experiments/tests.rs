use super::*;
use crate::fields::{synth_field, GridSpec, SynthSpec, VectorField};

fn shear(g: &GridSpec) -> VectorField {
    synth_field(g, &SynthSpec::SingleMode { k: [0, 1, 0], direction: [1.0, 0.0, 0.0], amplitude: 1.0 }).unwrap()
}

fn decay_state(g: &GridSpec) -> State {
    State::new(shear(g), VectorField::zeros(g), 0.0).unwrap()
}

fn nonlinear_state(g: &GridSpec, seed: u64) -> State {
    random_state(g, seed, 3, 1.0, SizeNorm::H1).unwrap()
}

#[test]
fn decay_budget_residual_small() {
    let g = GridSpec::standard(8).unwrap();
    let p = SolverParams::new(0.005, 0.005, 1e-2, 1.0).unwrap();
    let sim = simulate(decay_state(&g), &p, 1, &[0, 1, 2]).unwrap();
    assert!(sim.outcome.is_ok());
    for r in &sim.records {
        assert!(r.r0.unwrap() <= 1e-8, "{r:?}");
        assert!(r.r1.unwrap() <= 1e-8);
        assert!(r.r2.unwrap() <= 1e-8);
    }
    // E(t) = ½ e^{−2μt} ‖u₀‖²
    let e0 = sim.records[0].energy;
    let last = sim.records.last().unwrap();
    assert!((last.energy - e0 * (-2.0 * p.mu).exp()).abs() <= 1e-12 * e0);
}

#[test]
fn decay_blowup_integral_matches_closed_form() {
    let g = GridSpec::standard(8).unwrap();
    let mu = 0.5;
    let p = SolverParams::new(mu, mu, 1e-3, 1.0).unwrap();
    let sim = simulate(decay_state(&g), &p, 1, &[]).unwrap();
    let grad0 = sim.records[0].u.grad_l2;
    let exact = grad0.powi(4) * (1.0 - (-4.0 * mu * 1.0f64).exp()) / (4.0 * mu);
    let summary = blowup_monitor(&sim.records).unwrap();
    assert!((summary.integral_total - exact).abs() <= 1e-6 * exact);
    assert!(summary.quiescent);
    assert!(summary.window_rate < summary.early_rate);
}

#[test]
fn budget_residuals_converge_at_second_order() {
    let g = GridSpec::standard(16).unwrap();
    let p = SolverParams::new(0.1, 0.1, 2.5e-3, 0.2).unwrap();
    let worst = |interval: usize, level: usize| {
        let sim = simulate(nonlinear_state(&g, 4), &p, interval, &[level]).unwrap();
        let r = |rec: &DiagnosticsRecord| [rec.r0, rec.r1, rec.r2][level].unwrap();
        // compare on interior samples shared by both spacings
        sim.records[1..sim.records.len() - 1].iter().map(r).fold(0.0, f64::max)
    };
    for level in 0..3 {
        let coarse = worst(8, level);
        let fine = worst(4, level);
        let ratio = coarse / fine;
        assert!((3.0..5.0).contains(&ratio), "level {level}: {coarse:.3e} / {fine:.3e} = {ratio}");
    }
}

#[test]
fn records_are_consistent() {
    let g = GridSpec::standard(16).unwrap();
    let p = SolverParams::new(0.2, 0.2, 5e-3, 0.1).unwrap();
    let sim = simulate(nonlinear_state(&g, 9), &p, 2, &[0]).unwrap();
    assert_eq!(sim.records.len(), 11);
    for w in sim.records.windows(2) {
        assert!(w[1].blowup_running >= w[0].blowup_running);
        assert!(w[1].l_running >= w[0].l_running);
        assert!(w[1].t > w[0].t);
    }
    for r in &sim.records {
        assert!(r.energy >= 0.0 && r.dissipation >= 0.0);
        assert!(r.r0.unwrap().is_finite());
        assert!(r.r1.is_none() && r.r2.is_none());
        assert!(r.div_u_l2 <= 1e-10 * r.u.h1);
        assert!(r.div_b_l2 <= 1e-12);
    }
}

#[test]
fn short_runs_have_no_residuals() {
    let g = GridSpec::standard(8).unwrap();
    let p = SolverParams::new(1.0, 1.0, 0.1, 0.0).unwrap();
    let sim = simulate(decay_state(&g), &p, 1, &[0]).unwrap();
    assert_eq!(sim.records.len(), 1);
    assert_eq!(sim.records[0].r0, None);
    assert_eq!(sim.records[0].blowup_running, 0.0);
    let p = p.with_t_end(0.1);
    let sim = simulate(decay_state(&g), &p, 1, &[0]).unwrap();
    assert_eq!(sim.records.len(), 2);
    assert_eq!(sim.records[1].r0, None);
}

#[test]
fn invalid_inputs() {
    let g = GridSpec::standard(8).unwrap();
    let mut p = SolverParams::new(1.0, 1.0, 0.1, 0.3).unwrap();
    assert!(matches!(simulate(decay_state(&g), &p, 1, &[3]), Err(ExperimentError::InvalidInput(_))));
    p.mu = 0.0;
    match simulate(decay_state(&g), &p, 1, &[]) {
        Err(ExperimentError::InvalidInput(m)) => assert_eq!(m, "mu must be > 0"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(blowup_monitor(&[]), Err(ExperimentError::InsufficientSamples { .. })));
}

#[test]
fn zero_run_diagnostics_vanish() {
    let g = GridSpec::standard(8).unwrap();
    let z = State::new(VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap();
    let p = SolverParams::new(1.0, 1.0, 0.1, 0.5).unwrap();
    let sim = simulate(z, &p, 1, &[0, 1, 2]).unwrap();
    let b = blowup_monitor(&sim.records).unwrap();
    assert_eq!(b.integral_total, 0.0);
    for r in &sim.records {
        assert_eq!((r.energy, r.l_running, r.r0, r.r2), (0.0, 0.0, Some(0.0), Some(0.0)));
    }
    let m = trajectory_monitors(&sim.records, &p);
    assert_eq!(m.rows.len(), sim.records.len());
    assert!(m.rows.iter().all(|row| row[1..].iter().all(|v| *v == 0.0)));
}

#[test]
fn navier_stokes_runs_keep_magnetic_diagnostics_zero() {
    let g = GridSpec::standard(16).unwrap();
    let s = nonlinear_state(&g, 2);
    let ns = State::new(s.u, VectorField::zeros(&g), 0.0).unwrap();
    let p = SolverParams::new(0.1, 0.1, 5e-3, 0.05).unwrap();
    let with_hall = simulate(ns.clone(), &p, 1, &[0, 1, 2]).unwrap().records;
    let without = simulate(ns, &p.clone().with_hall(false), 1, &[0, 1, 2]).unwrap().records;
    assert_eq!(with_hall, without);
    for r in &with_hall {
        assert_eq!(r.b, Default::default());
        assert_eq!(r.div_b_l2, 0.0);
    }
    let last = with_hall.last().unwrap();
    assert!(last.r2.unwrap() < 1e-3 * last.u.lap_l2.powi(2));
}

#[test]
fn blowup_integral_grows_with_magnetic_amplitude() {
    let g = GridSpec::standard(8).unwrap();
    let base = random_state(&g, 6, 2, 1.0, SizeNorm::H2).unwrap();
    let p = SolverParams::new(0.5, 0.5, 1e-2, 0.2).unwrap();
    let totals: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|&a| {
            let s = State::new(base.u.clone(), base.b.scaled(a), 0.0).unwrap();
            blowup_monitor(&simulate(s, &p, 1, &[]).unwrap().records).unwrap().integral_total
        })
        .collect();
    println!("blow-up integral vs b0 amplitude 1, 2, 4: {totals:?}");
    assert!(totals.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn mollified_runs_approach_the_plain_run() {
    let g = GridSpec::standard(32).unwrap();
    let s = random_state(&g, 11, 2, 1.0, SizeNorm::H1).unwrap();
    let p = SolverParams::new(0.5, 0.5, 1e-3, 0.01).unwrap();
    let rows = mollifier_convergence(&s, &p, &[2, 4, 6, 8]).unwrap();
    let e: Vec<f64> = rows.iter().map(|r| r.error.unwrap()).collect();
    assert!(e[0] > e[1] && e[1] > e[2] && e[2] >= e[3], "{e:?}");
    assert!(e[2] <= 1e-8, "{e:?}");
}

#[test]
fn difference_monitor_shapes() {
    let g = GridSpec::standard(8).unwrap();
    let base = random_state(&g, 1, 2, 0.5, SizeNorm::H2).unwrap();
    let p = SolverParams::new(1.0, 1.0, 1e-2, 0.05).unwrap();
    let o = StabilityOptions { perturbation: Perturbation::Both, kmax: 2, sample_interval: 1 };
    let reps = stability_sweep(&base, &[3], &[1e-4], &p, &o).unwrap();
    let m = difference_monitors(&reps[0].trace, &p);
    assert_eq!(m.header.len(), 7);
    assert_eq!(m.rows.len(), 6);
    assert!(m.rows.iter().flatten().all(|v| v.is_finite()));
    assert!(m.rows.iter().all(|r| r[2] > 0.0));
}
