//! Scenario runner: resolves a TOML config against the named scenarios,
//! evaluates the curves and writes `<scenario>_curves.txt` and
//! `<scenario>_summary.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tunneltime::params::{derive_params, Regime, ScenarioParams, SPEED_OF_LIGHT};
use tunneltime::quadrature::ContourSpec;
use tunneltime::tunneling::{default_pz_range, scan_pz, MomentumScan};
use tunneltime::wigner::{
    classical_curves, exit_point, wigner_curves, wigner_delay, DelayReport, DerivativeMethod, TrajectoryCurve,
    WignerOptions,
};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "TUNNELTIME_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Arrival times along the tunneling direction.
    Time,
    /// Displacement along the propagation direction (crossed field only).
    Drift,
    /// Transmission against `pz` (crossed field only).
    PzScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    /// Geometric between `x_min` and `x_max`, preceded by the entry point.
    Geometric,
}

/// Positions in multiples of the tunnel exit `x_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    /// Multipliers of `x_e`.
    pub fn multipliers(&self) -> Vec<f64> {
        let n = self.n;
        match self.spacing {
            Spacing::Linear => {
                (0..n).map(|k| self.x_min + (self.x_max - self.x_min) * k as f64 / (n - 1) as f64).collect()
            }
            Spacing::Geometric => {
                let r = (self.x_max / self.x_min).ln();
                let mut v = vec![0.0];
                v.extend((0..n - 1).map(|k| self.x_min * (r * k as f64 / (n - 2) as f64).exp()));
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub n: usize,
    /// Defaults to `-3 Ip/(2c)`.
    pub pz_min: Option<f64>,
    /// Defaults to `Ip/c`.
    pub pz_max: Option<f64>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { n: 121, pz_min: None, pz_max: None }
    }
}

pub struct Scenario {
    pub name: &'static str,
    pub about: &'static str,
    pub regime: Regime,
    pub kappa: f64,
    pub ratio: f64,
    pub observable: Observable,
    pub grid: GridSpec,
    pub window: [f64; 2],
}

const LINEAR: GridSpec = GridSpec { x_min: 0.0, x_max: 25.0, n: 251, spacing: Spacing::Linear };

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "fig1a",
        about: "constant field, kappa = 1, E0/Ea = 1/7",
        regime: Regime::Nonrelativistic,
        kappa: 1.0,
        ratio: 1.0 / 7.0,
        observable: Observable::Time,
        grid: LINEAR,
        window: [10.0, 20.0],
    },
    Scenario {
        name: "fig1b",
        about: "constant field, kappa = 1, E0/Ea = 1",
        regime: Regime::Nonrelativistic,
        kappa: 1.0,
        ratio: 1.0,
        observable: Observable::Time,
        grid: LINEAR,
        window: [10.0, 20.0],
    },
    Scenario {
        name: "fig2",
        about: "crossed field transmission against pz, kappa = 90, E0/Ea = 1/7",
        regime: Regime::Relativistic,
        kappa: 90.0,
        ratio: 1.0 / 7.0,
        observable: Observable::PzScan,
        grid: LINEAR,
        window: [10.0, 20.0],
    },
    Scenario {
        name: "fig3a",
        about: "crossed field, kappa = 90, E0/Ea = 1/7",
        regime: Regime::Relativistic,
        kappa: 90.0,
        ratio: 1.0 / 7.0,
        observable: Observable::Time,
        grid: LINEAR,
        window: [10.0, 20.0],
    },
    Scenario {
        name: "fig3b",
        about: "crossed field, kappa = 90, E0/Ea = 1",
        regime: Regime::Relativistic,
        kappa: 90.0,
        ratio: 1.0,
        observable: Observable::Time,
        grid: LINEAR,
        window: [10.0, 20.0],
    },
    Scenario {
        name: "fig4",
        about: "crossed field drift along z, kappa = 90, E0/Ea = 10",
        regime: Regime::Relativistic,
        kappa: 90.0,
        ratio: 10.0,
        observable: Observable::Drift,
        grid: GridSpec { x_min: 0.01, x_max: 4000.0, n: 241, spacing: Spacing::Geometric },
        window: [2000.0, 4000.0],
    },
];

pub fn scenario(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown scenario `{0}` (known: fig1a, fig1b, fig2, fig3a, fig3b, fig4, custom)")]
    UnknownScenario(String),
    #[error("no scenario given")]
    MissingScenario,
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, message: message.into() }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: Option<f64>,
    x_max: Option<f64>,
    n: Option<usize>,
    spacing: Option<Spacing>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    n: Option<usize>,
    pz_min: Option<f64>,
    pz_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    regime: Option<Regime>,
    kappa: Option<f64>,
    ratio: Option<f64>,
    c: Option<f64>,
    observable: Option<Observable>,
    grid: Option<RawGrid>,
    contour: Option<ContourSpec>,
    delay_window: Option<[f64; 2]>,
    derivative_method: Option<DerivativeMethod>,
    output_dir: Option<PathBuf>,
    threads: Option<usize>,
    scan: Option<RawScan>,
}

/// A resolved, range-checked configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: String,
    pub regime: Regime,
    pub kappa: f64,
    pub ratio: f64,
    pub c: f64,
    pub observable: Observable,
    pub grid: GridSpec,
    pub contour: ContourSpec,
    /// Multiples of `|x_e|`.
    pub delay_window: [f64; 2],
    pub derivative_method: DerivativeMethod,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub scan: ScanSpec,
}

impl RunConfig {
    pub fn params(&self) -> tunneltime::Result<ScenarioParams> {
        derive_params(self.regime, self.kappa, self.ratio, self.c)
    }
}

/// Parses `raw`, fills defaults from the scenario and checks ranges.
/// `scenario` overrides the name in the file.
pub fn validate_config(raw: &str, scenario_name: Option<&str>) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(raw)?;
    let name = scenario_name.map(str::to_owned).or(raw.scenario.clone()).ok_or(ConfigError::MissingScenario)?;

    let (regime, kappa, ratio, c, observable, grid, window) = if name == "custom" {
        let regime = raw.regime.ok_or_else(|| field("regime", "required for custom scenarios"))?;
        let kappa = raw.kappa.ok_or_else(|| field("kappa", "required for custom scenarios"))?;
        let ratio = raw.ratio.ok_or_else(|| field("ratio", "required for custom scenarios"))?;
        (
            regime,
            kappa,
            ratio,
            raw.c.unwrap_or(SPEED_OF_LIGHT),
            raw.observable.unwrap_or(Observable::Time),
            LINEAR,
            [10.0, 20.0],
        )
    } else {
        let s = scenario(&name).ok_or_else(|| ConfigError::UnknownScenario(name.clone()))?;
        for (key, set) in [
            ("regime", raw.regime.is_some()),
            ("kappa", raw.kappa.is_some()),
            ("ratio", raw.ratio.is_some()),
            ("c", raw.c.is_some()),
            ("observable", raw.observable.is_some()),
        ] {
            if set {
                return Err(ConfigError::Field {
                    field: key,
                    message: format!("fixed by scenario {name}; use scenario = \"custom\" to change it"),
                });
            }
        }
        (s.regime, s.kappa, s.ratio, SPEED_OF_LIGHT, s.observable, s.grid, s.window)
    };

    let g = raw.grid.unwrap_or_default();
    let grid = GridSpec {
        x_min: g.x_min.unwrap_or(grid.x_min),
        x_max: g.x_max.unwrap_or(grid.x_max),
        n: g.n.unwrap_or(grid.n),
        spacing: g.spacing.unwrap_or(grid.spacing),
    };
    let s = raw.scan.unwrap_or_default();
    let scan = ScanSpec { n: s.n.unwrap_or(121), pz_min: s.pz_min, pz_max: s.pz_max };
    let cfg = RunConfig {
        scenario: name,
        regime,
        kappa,
        ratio,
        c,
        observable,
        grid,
        contour: raw.contour.unwrap_or_default(),
        delay_window: raw.delay_window.unwrap_or(window),
        derivative_method: raw.derivative_method.unwrap_or_default(),
        output_dir: raw.output_dir,
        threads: raw.threads,
        scan,
    };
    check(&cfg)?;
    Ok(cfg)
}

fn check(cfg: &RunConfig) -> Result<(), ConfigError> {
    let params = cfg.params().map_err(|e| field("kappa", e.to_string()))?;
    if cfg.observable != Observable::Time && params.regime != Regime::Relativistic {
        return Err(field("observable", "drift and pz_scan need the relativistic regime"));
    }
    let g = &cfg.grid;
    if !(g.x_min.is_finite() && g.x_max.is_finite() && g.x_max > g.x_min) {
        return Err(field("grid", format!("need x_max > x_min, got [{}, {}]", g.x_min, g.x_max)));
    }
    match g.spacing {
        Spacing::Linear if g.n < 2 => return Err(field("grid.n", "need at least 2 points")),
        Spacing::Geometric if g.n < 3 => return Err(field("grid.n", "need at least 3 points")),
        Spacing::Geometric if g.x_min <= 0.0 => return Err(field("grid.x_min", "geometric spacing needs x_min > 0")),
        _ => {}
    }
    let [lo, hi] = cfg.delay_window;
    if !(lo.is_finite() && hi > lo && lo > 1.0) {
        return Err(field("delay_window", format!("need 1 < lo < hi (multiples of |x_e|), got [{lo}, {hi}]")));
    }
    if cfg.observable != Observable::PzScan && !g.multipliers().iter().any(|&m| m >= lo && m <= hi) {
        return Err(field("delay_window", "no grid point falls inside the window"));
    }
    cfg.contour.validate().map_err(|e| field("contour", e.to_string()))?;
    if cfg.scan.n < 3 {
        return Err(field("scan.n", "need at least 3 points"));
    }
    if cfg.threads == Some(0) {
        return Err(field("threads", "need at least one thread"));
    }
    Ok(())
}

/// Machine-readable result of one run. Every quantity except the timing
/// also appears in the header of the curves file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub observable: Observable,
    pub params: ScenarioParams,
    pub x_e: f64,
    pub pz_star: Option<f64>,
    pub qz_entry: Option<f64>,
    pub qz_exit: Option<f64>,
    pub transfer: Option<f64>,
    pub tau_w: Option<f64>,
    pub delay: Option<DelayReport>,
    /// The z offset between the Wigner and classical drift.
    pub z_offset: Option<DelayReport>,
    pub converged: Option<bool>,
    pub derivative_method: DerivativeMethod,
    pub underflow_samples: usize,
    pub wall_time_seconds: f64,
}

pub struct RunOutput {
    pub summary: RunSummary,
    pub curves_path: PathBuf,
    pub summary_path: PathBuf,
}

/// The output directory: explicit argument, then config, then
/// [`OUT_ENV`], then `out`.
pub fn output_dir(cli: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_owned(), num)
}

struct Computed {
    summary: RunSummary,
    body: String,
    header: Vec<String>,
}

fn scan_of(cfg: &RunConfig, params: &ScenarioParams) -> anyhow::Result<MomentumScan> {
    let (lo, hi) = default_pz_range(params);
    let range = (cfg.scan.pz_min.unwrap_or(lo), cfg.scan.pz_max.unwrap_or(hi));
    scan_pz(params, range, cfg.scan.n, &cfg.contour).context("pz scan failed")
}

fn curve_rows(x: &[f64], w: &TrajectoryCurve, c: &TrajectoryCurve) -> String {
    let mut out = String::new();
    for ((x, a), b) in x.iter().zip(w.values()).zip(c.values()) {
        let d = a.zip(b).map(|(a, b)| a - b);
        writeln!(out, "{} {} {} {}", num(*x), opt(a), opt(b), opt(d)).unwrap();
    }
    out
}

fn compute(cfg: &RunConfig) -> anyhow::Result<Computed> {
    let params = cfg.params()?;
    let x_e = exit_point(&params);
    let mut summary = RunSummary {
        scenario: cfg.scenario.clone(),
        observable: cfg.observable,
        params,
        x_e,
        pz_star: None,
        qz_entry: None,
        qz_exit: None,
        transfer: None,
        tau_w: None,
        delay: None,
        z_offset: None,
        converged: None,
        derivative_method: cfg.derivative_method,
        underflow_samples: 0,
        wall_time_seconds: 0.0,
    };
    let mut scan = None;
    if params.regime == Regime::Relativistic {
        let s = scan_of(cfg, &params)?;
        summary.pz_star = Some(s.pz_star);
        summary.qz_entry = Some(s.qz_entry);
        summary.qz_exit = Some(s.qz_exit);
        summary.transfer = Some(s.transfer);
        scan = Some(s);
    }

    if cfg.observable == Observable::PzScan {
        let s = scan.expect("relativistic");
        let mut body = String::new();
        for (&pz, &t2) in s.pz_grid.iter().zip(&s.t2) {
            let qx = tunneltime::classical::exit_rel(pz, params.ip, params.e0, params.c)
                .map(|x| tunneltime::tunneling::kinetic_momentum(x, pz, params.e0, params.c))
                .ok();
            writeln!(body, "{} {} {} {}", num(pz), num(pz), opt(qx), num(t2)).unwrap();
        }
        let header = vec![
            "columns: pz [a.u.]  qz_entry [a.u.]  qz_exit [a.u.]  T2 (peak = 1)".to_owned(),
            format!("edge_peak = {}", s.edge_peak),
        ];
        return Ok(Computed { summary, body, header });
    }

    let x: Vec<f64> = cfg.grid.multipliers().iter().map(|m| m * x_e).collect();
    let opts = WignerOptions { contour: cfg.contour, derivative: cfg.derivative_method, phase_offset: 0.0 };
    let (wt, wz) = wigner_curves(&x, &params, &opts)?;
    let (ct, cz) = classical_curves(&x, &params)?;
    summary.underflow_samples = wt.samples.iter().filter(|s| s.value.is_none()).count();
    let window = (cfg.delay_window[0] * x_e, cfg.delay_window[1] * x_e);
    let (body, columns) = match cfg.observable {
        Observable::Time => {
            let r = wigner_delay(&wt, &ct, window)?;
            summary.tau_w = Some(r.tau_w);
            summary.converged = Some(r.converged);
            summary.delay = Some(r);
            (curve_rows(&x, &wt, &ct), "x [a.u.]  t_wigner [a.u.]  t_classical [a.u.]  delta [a.u.]")
        }
        _ => {
            let (wz, cz) = (wz.expect("relativistic"), cz.expect("relativistic"));
            let r = wigner_delay(&wz, &cz, window)?;
            summary.converged = Some(r.converged);
            summary.z_offset = Some(r);
            (curve_rows(&x, &wz, &cz), "x [a.u.]  z_wigner [a.u.]  z_classical [a.u.]  delta [a.u.]")
        }
    };
    Ok(Computed { summary, body, header: vec![format!("columns: {columns}")] })
}

fn header(cfg: &RunConfig, s: &RunSummary, extra: &[String]) -> String {
    let p = &s.params;
    let mut h = String::new();
    let mut line = |l: String| writeln!(h, "# {l}").unwrap();
    line(format!("scenario = {}", s.scenario));
    line(format!("regime = {}", p.regime.as_str()));
    line(format!("kappa = {}  ratio = {}  c = {}", num(p.kappa), num(p.ratio), num(p.c)));
    line(format!("ip = {}  eps0 = {}  e0 = {}", num(p.ip), num(p.eps0), num(p.e0)));
    line(format!("x_e = {}", num(s.x_e)));
    line(format!("derivative_method = {:?}", cfg.derivative_method).to_lowercase());
    for (k, v) in [("pz_star", s.pz_star), ("qz_entry", s.qz_entry), ("qz_exit", s.qz_exit), ("transfer", s.transfer)] {
        if let Some(v) = v {
            line(format!("{k} = {}", num(v)));
        }
    }
    for (k, r) in [("delay", s.delay), ("z_offset", s.z_offset)] {
        if let Some(r) = r {
            line(format!(
                "{k}: mean = {}  window = [{}, {}]  spread = {}  converged = {}  samples = {}",
                num(r.tau_w),
                num(r.plateau_window.0),
                num(r.plateau_window.1),
                num(r.plateau_spread),
                r.converged,
                r.samples
            ));
        }
    }
    for l in extra {
        line(l.clone());
    }
    h
}

/// Runs `cfg` and writes both files into `out`.
pub fn run_scenario(cfg: &RunConfig, out: &Path) -> anyhow::Result<RunOutput> {
    let start = Instant::now();
    let computed = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(|| compute(cfg))?,
        None => compute(cfg)?,
    };
    let mut summary = computed.summary;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let curves_path = out.join(format!("{}_curves.txt", cfg.scenario));
    let text = header(cfg, &summary, &computed.header) + &computed.body;
    fs::write(&curves_path, text).with_context(|| format!("cannot write {}", curves_path.display()))?;
    summary.wall_time_seconds = start.elapsed().as_secs_f64();
    let summary_path = out.join(format!("{}_summary.json", cfg.scenario));
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("cannot write {}", summary_path.display()))?;
    Ok(RunOutput { summary, curves_path, summary_path })
}

/// Rows of a curves file, skipping comments. Entries written as `nan`
/// come back as NaN.
pub fn read_curves(text: &str) -> anyhow::Result<Vec<Vec<f64>>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|v| v.parse::<f64>().with_context(|| format!("bad number {v}"))).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_takes_scenario_defaults() {
        let cfg = validate_config("", Some("fig1a")).unwrap();
        assert_eq!(cfg.regime, Regime::Nonrelativistic);
        assert_eq!(cfg.ratio, 1.0 / 7.0);
        assert_eq!(cfg.grid, LINEAR);
        assert_eq!(cfg.contour, ContourSpec::default());
        assert_eq!(cfg.delay_window, [10.0, 20.0]);
    }

    #[test]
    fn geometric_grid_starts_at_the_entry() {
        let g = GridSpec { x_min: 1.0, x_max: 100.0, n: 4, spacing: Spacing::Geometric };
        let m = g.multipliers();
        assert_eq!(m[0], 0.0);
        assert_eq!(m[1], 1.0);
        assert!((m[2] - 10.0).abs() < 1e-12 && (m[3] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn bad_values_are_rejected() {
        let e = validate_config("scenario = \"custom\"\nregime = \"nonrelativistic\"\nkappa = -1.0\nratio = 1.0", None);
        assert!(matches!(e, Err(ConfigError::Field { field: "kappa", .. })), "{e:?}");
        let e = validate_config("scenario = \"custom\"\nregime = \"relativistic\"\nkappa = 140.0\nratio = 1.0", None);
        assert!(matches!(e, Err(ConfigError::Field { field: "kappa", .. })), "{e:?}");
        assert!(matches!(validate_config("colour = 1", Some("fig1a")), Err(ConfigError::Parse(_))));
        assert!(matches!(validate_config("kappa = 2.0", Some("fig1a")), Err(ConfigError::Field { .. })));
        assert!(matches!(validate_config("", Some("fig9")), Err(ConfigError::UnknownScenario(_))));
        assert!(matches!(validate_config("", None), Err(ConfigError::MissingScenario)));
        assert!(validate_config("[grid]\nn = 1", Some("fig1a")).is_err());
        assert!(validate_config("[grid]\nx_max = -1.0", Some("fig1a")).is_err());
        assert!(validate_config("delay_window = [30.0, 40.0]", Some("fig1a")).is_err());
        assert!(validate_config("[contour]\nrotation_angle = 2.0", Some("fig1a")).is_err());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = validate_config("scenario = \"fig1a\"\n[grid]\nn = \"many\"\n", None).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/runner.md")]
mod book_runner {}
