use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::checkpoint::{read_checkpoint, write_checkpoint};
use super::config::{Experiment, InitKind, RunConfig};
use super::CliError;
use crate::dynamics::{run, step_schedule, DynamicsError, State};
use crate::experiments::{
    blowup_monitor, difference_monitors, mollifier_convergence, random_state, smalldata_sweep, stability_sweep,
    trajectory_monitors, DiagnosticsRecord, MonitorTable, Recorder, StabilityOptions,
};
use crate::fields::{synth_field, GridSpec, SynthSpec, VectorField};
use crate::norms::seminorms;

/// Time-series columns, in file order.
pub const CSV_COLUMNS: [&str; 13] = [
    "t",
    "E",
    "D",
    "energy_residual_l0",
    "H1_u",
    "H2_u",
    "H1_b",
    "H2_b",
    "lap_b",
    "curl_lap_b",
    "div_lap_b",
    "blowup_running",
    "L_running",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    SolverFailure,
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

fn row(r: &DiagnosticsRecord) -> [f64; 13] {
    [
        r.t,
        r.energy,
        r.dissipation,
        r.r0.unwrap_or(f64::NAN),
        r.u.h1,
        r.u.h2,
        r.b.h1,
        r.b.h2,
        r.b.lap_l2,
        r.b.curl_lap_l2,
        r.b.div_lap_l2,
        r.blowup_running,
        r.l_running,
    ]
}

pub fn timeseries_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        out.push_str(&row(r).map(num).join(","));
        out.push('\n');
    }
    out
}

fn table_csv(table: &MonitorTable) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for r in &table.rows {
        out.push_str(&r.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), text).map_err(|e| CliError::Io(format!("{}: {e}", dir.join(name).display())))
}

fn write_plots(dir: &Path, prefix: &str, records: &[DiagnosticsRecord]) -> Result<(), CliError> {
    for (c, name) in CSV_COLUMNS.iter().enumerate().skip(1) {
        let mut text = String::new();
        for r in records {
            let v = row(r);
            let _ = writeln!(text, "{} {}", num(v[0]), num(v[c]));
        }
        write(dir, &format!("{prefix}plot_{name}.dat"), &text)?;
    }
    Ok(())
}

fn shear(grid: &GridSpec, amplitude: f64) -> VectorField {
    synth_field(grid, &SynthSpec::SingleMode { k: [0, 1, 0], direction: [1.0, 0.0, 0.0], amplitude })
        .expect("mode (0, 1, 0) fits every grid")
}

pub fn initial_state(config: &RunConfig) -> Result<State, CliError> {
    let grid = config.grid_spec();
    let init = &config.init;
    let zeros = || VectorField::zeros(&grid);
    let state = match &init.kind {
        InitKind::Zero => State::new(zeros(), zeros(), 0.0),
        InitKind::Shear => State::new(shear(&grid, init.amplitude), zeros(), 0.0),
        InitKind::MagneticShear => State::new(zeros(), shear(&grid, init.amplitude), 0.0),
        InitKind::Random => return Ok(random_state(&grid, init.seed, init.kmax, init.amplitude, init.norm)?),
        InitKind::NavierStokes => {
            let u = random_state(&grid, init.seed, init.kmax, 1.0, init.norm)?.u;
            let r = seminorms(&u);
            let size = match init.norm {
                crate::experiments::SizeNorm::H1 => r.h1,
                crate::experiments::SizeNorm::H2 => r.h2,
            };
            State::new(u.scaled(init.amplitude / size), zeros(), 0.0)
        }
        InitKind::Checkpoint(path) => {
            let c = read_checkpoint(path).map_err(|e| CliError::Config(format!("init.path: {e}")))?;
            let g = c.state.u.grid();
            if g.n() != grid.n() || g.length() != grid.length() {
                return Err(CliError::Config("init.path: checkpoint grid differs from [grid]".into()));
            }
            let rebuild = |f: &VectorField| {
                VectorField::from_components(&grid, f.components().clone()).expect("same shape")
            };
            State::new(rebuild(&c.state.u), rebuild(&c.state.b), c.state.t)
        }
    };
    state.map_err(|e| CliError::Config(format!("init: {e}")))
}

struct Summary(String);

impl Summary {
    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key} = {value}");
    }
}

/// Run the configured experiment and write its artifacts into `output.dir`.
pub fn execute(config: &RunConfig) -> Result<RunStatus, CliError> {
    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let initial = initial_state(config)?;
    let p = &config.params;
    let mut s = Summary(String::new());
    let mode = match &config.experiment {
        Experiment::Run { .. } => "run",
        Experiment::SmallData { .. } => "smalldata",
        Experiment::Stability { .. } => "stability",
        Experiment::Mollifier { .. } => "mollifier",
    };
    s.kv("mode", mode);
    s.kv("n", config.grid.n);
    s.kv("length", num(config.grid.length));
    s.kv("dealias", num(config.grid.dealias));
    s.kv("mu", num(p.mu));
    s.kv("gamma", num(p.gamma));
    s.kv("dt", num(p.dt));
    s.kv("t_end", num(p.t_end));
    s.kv("scheme", p.scheme.name());
    s.kv("hall_on", p.hall_on);
    s.kv("mollifier_level", p.mollifier_level.map_or("none".to_string(), |l| l.to_string()));

    let status = match &config.experiment {
        Experiment::Run { budget_levels } => run_mode(config, initial, budget_levels, &mut s)?,
        Experiment::SmallData { amplitudes } => {
            let grid = config.grid_spec();
            let reports = smalldata_sweep(&grid, amplitudes, p, config.init.seed, config.init.kmax)?;
            for (i, r) in reports.iter().enumerate() {
                s.kv(
                    &format!("smalldata.{i}"),
                    format!(
                        "amplitude={} initial={} max_over_time={} ratio={} survived={} bound_satisfied={} failure_time={}",
                        num(r.amplitude),
                        num(r.initial),
                        num(r.max_over_time),
                        num(if r.initial > 0.0 { r.max_over_time / r.initial } else { 0.0 }),
                        r.survived,
                        r.bound_satisfied,
                        r.failure_time.map_or("none".into(), num)
                    ),
                );
                write(dir, &format!("timeseries_smalldata_{i}.csv"), &timeseries_csv(&r.records))?;
            }
            let first = reports.iter().find(|r| !r.bound_satisfied).map(|r| num(r.amplitude));
            s.kv("first_violation", first.unwrap_or_else(|| "none".into()));
            RunStatus::Ok
        }
        Experiment::Stability { deltas, seeds, perturbation, kmax } => {
            let options =
                StabilityOptions { perturbation: *perturbation, kmax: *kmax, sample_interval: config.output.sample_interval };
            let reports = match stability_sweep(&initial, seeds, deltas, p, &options) {
                Ok(r) => r,
                Err(crate::experiments::ExperimentError::BaseRunFailed(e)) => {
                    s.kv("status", "solver_failure");
                    s.kv("failure", &e);
                    if let DynamicsError::NonFinite { t, .. } = e {
                        s.kv("failure_time", num(t));
                    }
                    write(dir, "summary.txt", &s.0)?;
                    return Ok(RunStatus::SolverFailure);
                }
                Err(e) => return Err(e.into()),
            };
            for (i, r) in reports.iter().enumerate() {
                s.kv(
                    &format!("stability.{i}"),
                    format!(
                        "seed={} delta={} initial_distance={} sup_distance={} final_distance={} L_total={} survived={} failure_time={}",
                        r.seed,
                        num(r.delta),
                        num(r.initial_distance),
                        num(r.sup_distance),
                        num(r.final_distance),
                        num(r.l_total),
                        r.survived,
                        r.failure_time.map_or("none".into(), num)
                    ),
                );
                write(dir, &format!("monitors_stability_{i}.csv"), &table_csv(&difference_monitors(&r.trace, p)))?;
                let mut text = String::new();
                for t in &r.trace {
                    let d = t.diff_u.h2.powi(2) + t.diff_b.h2.powi(2);
                    let _ = writeln!(text, "{} {}", num(t.t), num(d));
                }
                write(dir, &format!("plot_stability_{i}_distance.dat"), &text)?;
            }
            RunStatus::Ok
        }
        Experiment::Mollifier { levels } => {
            let rows = match mollifier_convergence(&initial, p, levels) {
                Ok(r) => r,
                Err(crate::experiments::ExperimentError::BaseRunFailed(e)) => {
                    s.kv("status", "solver_failure");
                    s.kv("failure", &e);
                    write(dir, "summary.txt", &s.0)?;
                    return Ok(RunStatus::SolverFailure);
                }
                Err(e) => return Err(e.into()),
            };
            let mut text = String::new();
            for (i, r) in rows.iter().enumerate() {
                let e = r.error.map_or("nan".to_string(), num);
                s.kv(&format!("mollifier.{i}"), format!("level={} error={e}", r.level));
                let _ = writeln!(text, "{} {e}", r.level);
            }
            write(dir, "plot_mollifier_error.dat", &text)?;
            RunStatus::Ok
        }
    };
    if status == RunStatus::Ok {
        s.kv("status", "ok");
    }
    write(dir, "summary.txt", &s.0)?;
    Ok(status)
}

fn run_mode(config: &RunConfig, initial: State, levels: &[usize], s: &mut Summary) -> Result<RunStatus, CliError> {
    let p = &config.params;
    let dir = &config.output.dir;
    let out = &config.output;
    let mut recorder = Recorder::new(p, levels)?;
    let last = step_schedule(initial.t, p.t_end, p.dt).len();
    let mut io_error: Option<CliError> = None;
    let result = run(initial, p, 1, &mut |state, step| {
        if step % out.sample_interval == 0 || step == last {
            recorder.observe(state);
        }
        if out.checkpoint_interval > 0 && step > 0 && step % out.checkpoint_interval == 0 && io_error.is_none() {
            let path = dir.join(format!("checkpoint_{step:08}.chk"));
            if let Err(e) = write_checkpoint(&path, state, p.mu, p.gamma) {
                io_error = Some(CliError::Io(format!("{}: {e}", path.display())));
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let records = recorder.records();
    write(dir, "timeseries.csv", &timeseries_csv(&records))?;
    write(dir, "monitors.csv", &table_csv(&trajectory_monitors(&records, p)))?;
    write_plots(dir, "", &records)?;
    s.kv("samples", records.len());
    if let Some(b) = records.first().and_then(|_| blowup_monitor(&records).ok()) {
        s.kv("blowup_integral", num(b.integral_total));
        s.kv("blowup_window_rate", num(b.window_rate));
        s.kv("blowup_early_rate", num(b.early_rate));
        s.kv("regime", if b.quiescent { "quiescent" } else { "active" });
    }
    let max_div_u = records.iter().map(|r| r.div_u_l2 / r.u.h1.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let div_b_drift = records.iter().map(|r| (r.div_b_l2 - records[0].div_b_l2).abs()).fold(0.0, f64::max);
    s.kv("max_div_u_over_h1", num(max_div_u));
    s.kv("div_b_drift", num(div_b_drift));
    match result {
        Ok(final_state) => {
            s.kv("final_t", num(final_state.t));
            let path = dir.join("final.chk");
            write_checkpoint(&path, &final_state, p.mu, p.gamma)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(RunStatus::Ok)
        }
        Err(e) => {
            s.kv("status", "solver_failure");
            s.kv("failure", &e);
            if let DynamicsError::NonFinite { t, snapshot } = &e {
                s.kv("failure_time", num(*t));
                let path = dir.join("last_good.chk");
                write_checkpoint(&path, snapshot, p.mu, p.gamma)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            Ok(RunStatus::SolverFailure)
        }
    }
}
