use std::path::PathBuf;

use toml::{Table, Value};

use crate::dynamics::{Scheme, SolverParams};
use crate::experiments::{Perturbation, SizeNorm};
use crate::fields::GridSpec;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

fn err<T>(key: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { key: key.to_string(), message: message.into() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
    pub dealias: f64,
}

/// Initial data.
#[derive(Clone, Debug, PartialEq)]
pub enum InitKind {
    Zero,
    /// `u = amplitude (sin y, 0, 0)`, `b = 0`.
    Shear,
    /// `u = 0`, `b = amplitude (sin y, 0, 0)`.
    MagneticShear,
    /// Seeded divergence-free `u` and `b`.
    Random,
    /// Seeded divergence-free `u` with `b = 0`.
    NavierStokes,
    Checkpoint(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    pub kind: InitKind,
    pub amplitude: f64,
    pub seed: u64,
    pub kmax: usize,
    /// Norm that `amplitude` measures for random kinds.
    pub norm: SizeNorm,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Run { budget_levels: Vec<usize> },
    SmallData { amplitudes: Vec<f64> },
    Stability { deltas: Vec<f64>, seeds: Vec<u64>, perturbation: Perturbation, kmax: usize },
    Mollifier { levels: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub sample_interval: usize,
    /// Steps between checkpoints; 0 writes only the final state.
    pub checkpoint_interval: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: SolverParams,
    pub init: InitConfig,
    pub experiment: Experiment,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid.n, self.grid.length, self.grid.dealias).expect("validated at parse time")
    }
}

/// Reads one section, tracking which keys were consumed.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a Table>,
    used: Vec<&'static str>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str) -> Result<Self, ConfigError> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return err(name, "must be a table"),
        };
        Ok(Self { name, table, used: Vec::new() })
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{}", self.name, k)
    }

    fn raw(&mut self, k: &'static str) -> Option<&'a Value> {
        self.used.push(k);
        self.table.and_then(|t| t.get(k))
    }

    fn float(&mut self, k: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => err(&self.key(k), "must be a number"),
        }
    }

    fn required_float(&mut self, k: &'static str) -> Result<f64, ConfigError> {
        self.float(k)?.map_or_else(|| err(&self.key(k), "is required"), Ok)
    }

    fn uint(&mut self, k: &'static str) -> Result<Option<u64>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => err(&self.key(k), "must be a nonnegative integer"),
        }
    }

    fn boolean(&mut self, k: &'static str) -> Result<Option<bool>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => err(&self.key(k), "must be true or false"),
        }
    }

    fn string(&mut self, k: &'static str) -> Result<Option<&'a str>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => err(&self.key(k), "must be a string"),
        }
    }

    fn float_list(&mut self, k: &'static str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => err(&self.key(k), "must be a list of numbers"),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => err(&self.key(k), "must be a list of numbers"),
        }
    }

    fn uint_list(&mut self, k: &'static str) -> Result<Option<Vec<u64>>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Ok(*i as u64),
                    _ => err(&self.key(k), "must be a list of nonnegative integers"),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => err(&self.key(k), "must be a list of nonnegative integers"),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(t) = self.table {
            // sorted so the reported key does not depend on table order
            let mut unknown: Vec<&String> = t.keys().filter(|k| !self.used.contains(&k.as_str())).collect();
            unknown.sort();
            if let Some(k) = unknown.first() {
                return err(&format!("{}.{}", self.name, k), "unknown key");
            }
        }
        Ok(())
    }
}

const SECTIONS: [&str; 5] = ["grid", "params", "init", "experiment", "output"];

fn to_usize(key: String, v: u64) -> Result<usize, ConfigError> {
    usize::try_from(v).or_else(|_| err(&key, "is too large"))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        key: "<config>".into(),
        message: e.message().trim().to_string(),
    })?;
    if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return err(k, "unknown section");
    }

    let mut s = Section::new(&root, "grid")?;
    let n = to_usize(s.key("n"), s.uint("n")?.map_or_else(|| err("grid.n", "is required"), Ok)?)?;
    let length = s.float("length")?.unwrap_or(2.0 * std::f64::consts::PI);
    let dealias = s.float("dealias")?.unwrap_or(2.0 / 3.0);
    s.finish()?;
    if let Err(e) = GridSpec::new(n, length, dealias) {
        let key = match e {
            crate::fields::FieldError::BadLength(_) => "grid.length",
            crate::fields::FieldError::BadDealias(_) => "grid.dealias",
            _ => "grid.n",
        };
        return err(key, e.to_string());
    }
    let grid = GridConfig { n, length, dealias };

    let mut s = Section::new(&root, "params")?;
    let mu = s.required_float("mu")?;
    let gamma = s.required_float("gamma")?;
    let dt = s.required_float("dt")?;
    let t_end = s.required_float("t_end")?;
    let scheme = match s.string("scheme")? {
        None => Scheme::IfRk4,
        Some(name) => name.parse().or_else(|m: String| err("params.scheme", m))?,
    };
    let mollifier_level = s.uint("mollifier_level")?.map(|v| to_usize(s.key("mollifier_level"), v)).transpose()?;
    let hall_on = s.boolean("hall_on")?.unwrap_or(true);
    s.finish()?;
    let params = SolverParams { mu, gamma, dt, t_end, scheme, mollifier_level, hall_on };
    if let Err(e) = params.validate() {
        let msg = e.to_string();
        let field = msg.split_whitespace().next().unwrap_or("params");
        return err(&format!("params.{field}"), msg);
    }

    let mut s = Section::new(&root, "init")?;
    let kind_name = s.string("kind")?.unwrap_or("random");
    let path = s.string("path")?;
    let kind = match kind_name {
        "zero" => InitKind::Zero,
        "shear" => InitKind::Shear,
        "magnetic_shear" => InitKind::MagneticShear,
        "random" => InitKind::Random,
        "navier_stokes" => InitKind::NavierStokes,
        "checkpoint" => match path {
            Some(p) => InitKind::Checkpoint(PathBuf::from(p)),
            None => return err("init.path", "is required when init.kind = \"checkpoint\""),
        },
        other => {
            return err(
                "init.kind",
                format!("unknown kind '{other}' (expected zero, shear, magnetic_shear, random, navier_stokes or checkpoint)"),
            )
        }
    };
    let amplitude = s.float("amplitude")?.unwrap_or(1.0);
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return err("init.amplitude", "amplitude must be finite and >= 0");
    }
    let seed = s.uint("seed")?.unwrap_or(0);
    let kmax = to_usize(s.key("kmax"), s.uint("kmax")?.unwrap_or(2))?;
    let cutoff = GridSpec::new(n, length, dealias).expect("checked").cutoff();
    if kmax == 0 || kmax > cutoff {
        return err("init.kmax", format!("kmax must lie in [1, {cutoff}]"));
    }
    let norm = match s.string("norm")?.unwrap_or("h2") {
        "h1" => SizeNorm::H1,
        "h2" => SizeNorm::H2,
        other => return err("init.norm", format!("unknown norm '{other}' (expected h1 or h2)")),
    };
    s.finish()?;
    let init = InitConfig { kind, amplitude, seed, kmax, norm };

    let mut s = Section::new(&root, "experiment")?;
    let mode = s.string("mode")?.unwrap_or("run");
    let experiment = match mode {
        "run" | "budget" => {
            let default = if mode == "budget" { vec![0, 1, 2] } else { vec![0] };
            let levels = match s.uint_list("budget_levels")? {
                None => default,
                Some(l) => l.into_iter().map(|v| v as usize).collect(),
            };
            if levels.iter().any(|&l| l > 2) {
                return err("experiment.budget_levels", "levels must be 0, 1 or 2");
            }
            Experiment::Run { budget_levels: levels }
        }
        "smalldata" => {
            let amplitudes = s.float_list("amplitudes")?.unwrap_or_else(|| vec![amplitude]);
            if amplitudes.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                return err("experiment.amplitudes", "amplitudes must be finite and >= 0");
            }
            Experiment::SmallData { amplitudes }
        }
        "stability" => {
            let deltas = s.float_list("deltas")?.map_or_else(|| err("experiment.deltas", "is required"), Ok)?;
            if deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) || deltas.windows(2).any(|w| w[1] > w[0]) {
                return err("experiment.deltas", "deltas must be >= 0 and sorted in descending order");
            }
            let seeds = s.uint_list("seeds")?.unwrap_or_else(|| vec![0]);
            let perturbation = match s.string("perturb")?.unwrap_or("both") {
                "both" => Perturbation::Both,
                "magnetic" => Perturbation::MagneticOnly,
                other => return err("experiment.perturb", format!("unknown target '{other}' (expected both or magnetic)")),
            };
            let pk = to_usize(s.key("kmax"), s.uint("kmax")?.unwrap_or(kmax as u64))?;
            if pk == 0 || pk > cutoff {
                return err("experiment.kmax", format!("kmax must lie in [1, {cutoff}]"));
            }
            Experiment::Stability { deltas, seeds, perturbation, kmax: pk }
        }
        "mollifier" => {
            let levels: Vec<usize> = s
                .uint_list("levels")?
                .map_or_else(|| err("experiment.levels", "is required"), Ok)?
                .into_iter()
                .map(|v| v as usize)
                .collect();
            if levels.first() == Some(&0) || levels.windows(2).any(|w| w[1] <= w[0]) {
                return err("experiment.levels", "levels must be >= 1 and strictly increasing");
            }
            if levels.last().is_some_and(|&l| l > cutoff) {
                return err("experiment.levels", format!("levels must not exceed the grid cutoff {cutoff}"));
            }
            Experiment::Mollifier { levels }
        }
        other => {
            return err(
                "experiment.mode",
                format!("unknown mode '{other}' (expected run, budget, smalldata, stability or mollifier)"),
            )
        }
    };
    s.finish()?;

    let mut s = Section::new(&root, "output")?;
    let dir = PathBuf::from(s.string("dir")?.unwrap_or("out"));
    let sample_interval = to_usize(s.key("sample_interval"), s.uint("sample_interval")?.unwrap_or(1))?;
    if sample_interval == 0 {
        return err("output.sample_interval", "sample_interval must be >= 1");
    }
    let checkpoint_interval = to_usize(s.key("checkpoint_interval"), s.uint("checkpoint_interval")?.unwrap_or(0))?;
    s.finish()?;

    Ok(RunConfig { grid, params, init, experiment, output: OutputConfig { dir, sample_interval, checkpoint_interval } })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
        # smallest valid config
        [grid]
        n = 32
        [params]
        mu = 1
        gamma = 1
        dt = 1e-3
        t_end = 1
    ";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid, GridConfig { n: 32, length: 2.0 * std::f64::consts::PI, dealias: 2.0 / 3.0 });
        assert_eq!(c.params.scheme, Scheme::IfRk4);
        assert!(c.params.hall_on);
        assert_eq!(c.params.mollifier_level, None);
        assert_eq!(c.experiment, Experiment::Run { budget_levels: vec![0] });
        assert_eq!(c.output.sample_interval, 1);
        assert_eq!(c.init.kind, InitKind::Random);
    }

    #[test]
    fn zero_viscosity_rejected() {
        let e = parse_config(&MINIMAL.replace("mu = 1", "mu = 0")).unwrap_err();
        assert_eq!(e.key, "params.mu");
        assert!(e.to_string().contains("mu must be > 0"));
    }

    #[test]
    fn unknown_key_named() {
        let e = parse_config(&format!("{MINIMAL}\neta = 2\n")).unwrap_err();
        assert_eq!(e.key, "params.eta");
        let e = parse_config(&format!("{MINIMAL}\n[extra]\nx = 1\n")).unwrap_err();
        assert_eq!(e.key, "extra");
    }

    #[test]
    fn missing_and_mistyped_values() {
        assert_eq!(parse_config("[grid]\nn = 32\n").unwrap_err().key, "params.mu");
        assert_eq!(parse_config(&MINIMAL.replace("n = 32", "n = \"big\"")).unwrap_err().key, "grid.n");
        assert_eq!(parse_config(&MINIMAL.replace("n = 32", "n = 31")).unwrap_err().key, "grid.n");
        let bad_scheme = format!("{MINIMAL}\nscheme = \"euler\"\n");
        assert_eq!(parse_config(&bad_scheme).unwrap_err().key, "params.scheme");
    }

    #[test]
    fn experiment_modes() {
        let c = parse_config(&format!(
            "{MINIMAL}\n[experiment]\nmode = \"stability\"\ndeltas = [1e-2, 1e-4, 1e-6]\nperturb = \"magnetic\"\n"
        ))
        .unwrap();
        assert_eq!(
            c.experiment,
            Experiment::Stability {
                deltas: vec![1e-2, 1e-4, 1e-6],
                seeds: vec![0],
                perturbation: Perturbation::MagneticOnly,
                kmax: 2
            }
        );
        let unsorted = format!("{MINIMAL}\n[experiment]\nmode = \"stability\"\ndeltas = [1e-4, 1e-2]\n");
        assert_eq!(parse_config(&unsorted).unwrap_err().key, "experiment.deltas");
        let c = parse_config(&format!("{MINIMAL}\n[experiment]\nmode = \"budget\"\n")).unwrap();
        assert_eq!(c.experiment, Experiment::Run { budget_levels: vec![0, 1, 2] });
        let big = format!("{MINIMAL}\n[experiment]\nmode = \"mollifier\"\nlevels = [2, 40]\n");
        assert_eq!(parse_config(&big).unwrap_err().key, "experiment.levels");
    }

    #[test]
    fn checkpoint_kind_needs_path() {
        let c = format!("{MINIMAL}\n[init]\nkind = \"checkpoint\"\n");
        assert_eq!(parse_config(&c).unwrap_err().key, "init.path");
    }
}
