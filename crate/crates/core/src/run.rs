//! End-to-end experiment runs: configuration, solver dispatch and artifact
//! emission.
//!
//! A run writes, into its output directory:
//!
//! * `staf_init.csv`, `staf_final.csv`: `K` rows by `Nv` columns of
//!   peak-normalized STAF in dB, six decimals, row `r`, column `h`;
//! * `code_final.csv`: one `index,real,imag` line per entry, 17 significant
//!   digits;
//! * `cuts_r<r>.csv`: header `v,init_db,final_db`, one line per Doppler bin,
//!   for every range index carrying interference weight;
//! * `summary.json`: the [`RunReport`];
//! * `timing.json`: wall-clock seconds, kept apart so that the other files
//!   are byte-identical across repeated runs.
//!
//! Batch runs write one `seed_<n>` subdirectory per seed plus
//! `batch_summary.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adpm::{adpm_solve, AdpmConfig, AdpmStop};
use crate::error::{Error, Result};
use crate::model::{staf, staf_db, staf_grid, Code, InterferenceMap, MapBin, C64};
use crate::quartic::{cost, QuarticObjective};
use crate::rtr::{rtr_minimize, RtrConfig, RtrStop};
use crate::scenarios::{p4_code, random_unimodular, scene_map, SceneId, RANDOM_CODE_GENERATOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneSource {
    Named(SceneId),
    Inline { bins: Vec<MapBin> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSource {
    P4,
    Random { seed: u64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    AdpmRtr,
    RtrOnly,
}

impl Algorithm {
    pub fn id(self) -> &'static str {
        match self {
            Algorithm::AdpmRtr => "adpm_rtr",
            Algorithm::RtrOnly => "rtr_only",
        }
    }

    fn other(self) -> Self {
        match self {
            Algorithm::AdpmRtr => Algorithm::RtrOnly,
            Algorithm::RtrOnly => Algorithm::AdpmRtr,
        }
    }
}

/// Optional overrides of the penalty-loop settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdpmOverrides {
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub w_max: Option<f64>,
    pub eps_abs: Option<f64>,
    pub eps_rel: Option<f64>,
    pub outer_max_iters: Option<usize>,
    pub rho0_override: Option<f64>,
}

/// Optional overrides of the trust-region settings. `max_iters = 0` removes
/// the iteration cap.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtrOverrides {
    pub delta_bar: Option<f64>,
    pub delta0: Option<f64>,
    pub chi_accept: Option<f64>,
    pub grad_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub tcg_kappa: Option<f64>,
    pub tcg_theta: Option<f64>,
    pub tcg_max_iters: Option<usize>,
}

impl RtrOverrides {
    fn apply(&self, cfg: &mut RtrConfig) {
        if let Some(v) = self.delta_bar {
            cfg.delta_bar = v;
            if self.delta0.is_none() {
                cfg.delta0 = v / 8.0;
            }
        }
        if let Some(v) = self.delta0 {
            cfg.delta0 = v;
        }
        if let Some(v) = self.chi_accept {
            cfg.chi_accept = v;
        }
        if let Some(v) = self.grad_tol {
            cfg.grad_tol = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_iters = (v > 0).then_some(v);
        }
        if let Some(v) = self.tcg_kappa {
            cfg.tcg_kappa = v;
        }
        if let Some(v) = self.tcg_theta {
            cfg.tcg_theta = v;
        }
        if let Some(v) = self.tcg_max_iters {
            cfg.tcg_max_iters = Some(v);
        }
    }
}

fn default_algorithm() -> Algorithm {
    Algorithm::AdpmRtr
}

fn default_init() -> InitSource {
    InitSource::P4
}

fn default_true() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Run description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSource,
    pub k: usize,
    pub nv: usize,
    #[serde(default = "default_init")]
    pub init: InitSource,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub adpm: AdpmOverrides,
    /// Applies to the inner solver of `adpm_rtr` and to `rtr_only`.
    #[serde(default)]
    pub rtr: RtrOverrides,
    /// Also run the other algorithm from the same start and report both.
    #[serde(default = "default_true")]
    pub compare_baseline: bool,
    #[serde(default)]
    pub batch_seeds: Option<Vec<u64>>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn interference_map(&self) -> Result<InterferenceMap> {
        match &self.scene {
            SceneSource::Named(id) => scene_map(*id, self.k, self.nv),
            SceneSource::Inline { bins } => InterferenceMap::new(self.k, self.nv, bins.iter().copied()),
        }
    }

    pub fn adpm_config(&self) -> Result<AdpmConfig> {
        let mut cfg = AdpmConfig::for_length(self.k);
        let o = &self.adpm;
        if let Some(v) = o.delta1 {
            cfg.delta1 = v;
        }
        if let Some(v) = o.delta2 {
            cfg.delta2 = v;
        }
        if let Some(v) = o.w_max {
            cfg.w_max = v;
        }
        if let Some(v) = o.eps_abs {
            cfg.eps_abs = v;
        }
        if let Some(v) = o.eps_rel {
            cfg.eps_rel = v;
        }
        if let Some(v) = o.outer_max_iters {
            cfg.outer_max_iters = v;
        }
        if o.rho0_override.is_some() {
            cfg.rho0_override = o.rho0_override;
        }
        self.rtr.apply(&mut cfg.inner);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rtr_config(&self) -> Result<RtrConfig> {
        let mut cfg = RtrConfig::for_length(self.k);
        self.rtr.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    fn initial_code(&self, init: &InitSource) -> Result<Code> {
        let code = match init {
            InitSource::P4 => p4_code(self.k)?,
            InitSource::Random { seed } => random_unimodular(self.k, *seed)?,
            InitSource::File { path } => read_code_csv(path)?,
        };
        if code.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                actual: code.len(),
            });
        }
        Ok(code)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.nv == 0 {
            return Err(Error::InvalidConfig("k and nv must be positive".into()));
        }
        if let Some(seeds) = &self.batch_seeds {
            if seeds.is_empty() {
                return Err(Error::InvalidConfig("batch_seeds must not be empty".into()));
            }
        }
        Ok(())
    }
}

/// Solver outcome common to both algorithms.
#[derive(Debug, Clone)]
struct Solved {
    code: Code,
    outer_iters: usize,
    total_inner_iters: usize,
    stop: String,
    rho0: Option<f64>,
    cost_trace: Vec<f64>,
    primal_residuals: Vec<f64>,
    dual_residuals: Vec<f64>,
    seconds: f64,
}

fn solve(
    algorithm: Algorithm,
    obj: &QuarticObjective,
    s_init: &Code,
    adpm_cfg: &AdpmConfig,
    rtr_cfg: &RtrConfig,
) -> Result<Solved> {
    let start = Instant::now();
    let solved = match algorithm {
        Algorithm::AdpmRtr => {
            let (code, report) = adpm_solve(obj, s_init, adpm_cfg)?;
            let mut cost_trace = vec![report.initial_cost];
            cost_trace.extend(report.iterations.iter().map(|it| it.cost));
            Solved {
                code,
                outer_iters: report.outer_iters,
                total_inner_iters: report.total_inner_iters,
                stop: match report.stop {
                    AdpmStop::Converged => "converged",
                    AdpmStop::MaxIterations => "max_iterations",
                }
                .to_string(),
                rho0: Some(report.rho0),
                cost_trace,
                primal_residuals: report.iterations.iter().map(|it| it.primal_residual).collect(),
                dual_residuals: report.iterations.iter().map(|it| it.dual_residual).collect(),
                seconds: 0.0,
            }
        }
        Algorithm::RtrOnly => {
            let (code, trace) = rtr_minimize(obj, None, s_init, rtr_cfg)?;
            let mut cost_trace = vec![trace.initial_cost];
            let mut last = trace.initial_cost;
            for it in &trace.iterations {
                if it.accepted && it.cost != last {
                    cost_trace.push(it.cost);
                    last = it.cost;
                }
            }
            if trace.final_cost != last {
                cost_trace.push(trace.final_cost);
            }
            Solved {
                code,
                outer_iters: trace.iterations.len(),
                total_inner_iters: trace.total_tcg_iters(),
                stop: match trace.stop {
                    RtrStop::GradientTolerance => "gradient_tolerance",
                    RtrStop::MaxIterations => "max_iterations",
                }
                .to_string(),
                rho0: None,
                cost_trace,
                primal_residuals: Vec::new(),
                dual_residuals: Vec::new(),
                seconds: 0.0,
            }
        }
    };
    Ok(Solved {
        seconds: start.elapsed().as_secs_f64(),
        ..solved
    })
}

/// Mean of the per-bin dB values and dB of the mean linear value, over the
/// positive-weight bins of `map`.
pub fn suppressed_staf_db(s: &Code, map: &InterferenceMap) -> Result<(f64, f64)> {
    let grid = map.doppler_grid();
    let k = s.len();
    let mut sum_db = 0.0;
    let mut sum_lin = 0.0;
    let mut n = 0usize;
    for b in map.active_bins() {
        let v = staf(s, b.r, grid.value(b.h))?;
        sum_db += staf_db(v, k);
        sum_lin += v;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyObjective);
    }
    Ok((sum_db / n as f64, staf_db(sum_lin / n as f64, k)))
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// SIRs of both algorithms from the same start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub initial_sir_db: f64,
    pub adpm_rtr_sir_db: f64,
    pub rtr_only_sir_db: f64,
    pub adpm_rtr_mean_suppressed_staf_db: f64,
    pub rtr_only_mean_suppressed_staf_db: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub k: usize,
    pub nv: usize,
    pub support_size: usize,
    pub init: String,
    pub random_generator: String,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub initial_sir: f64,
    pub final_sir: f64,
    pub initial_sir_db: f64,
    pub final_sir_db: f64,
    /// Mean over suppressed bins of `10 log10(staf / K)`.
    pub initial_mean_suppressed_staf_db: f64,
    pub final_mean_suppressed_staf_db: f64,
    /// `10 log10` of the mean linear `staf / K` over suppressed bins.
    pub final_suppressed_staf_db_of_mean: f64,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub stop: String,
    pub rho0: Option<f64>,
    pub cost_trace: Vec<f64>,
    pub primal_residuals: Vec<f64>,
    pub dual_residuals: Vec<f64>,
    pub comparison: Option<Comparison>,
    pub config: ConfigEcho,
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

/// Fully resolved settings, echoed into the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub run: RunConfig,
    pub adpm: AdpmConfig,
    pub rtr_only: RtrConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_seconds: f64,
    pub baseline_wall_clock_seconds: Option<f64>,
}

/// Result of a single run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub final_code: Code,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub stddev: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            stddev: var.sqrt(),
        }
    }
}

/// Contents of `batch_summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub algorithm: String,
    pub seeds: Vec<u64>,
    pub final_sir: MeanStd,
    pub final_sir_db: MeanStd,
    pub wall_clock_seconds: MeanStd,
}

#[derive(Debug, Clone)]
pub enum RunResult {
    Single(Box<RunOutcome>),
    Batch {
        runs: Vec<RunOutcome>,
        summary: BatchSummary,
    },
}

/// Executes the configured run (or batch) and writes all artifacts.
pub fn run_optimize(config: &RunConfig, out_override: Option<&Path>) -> Result<RunResult> {
    config.validate()?;
    let out = out_override.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.clone());
    match &config.batch_seeds {
        None => {
            let outcome = run_single(config, &config.init, &out)?;
            Ok(RunResult::Single(Box::new(outcome)))
        }
        Some(seeds) => {
            let mut runs = Vec::with_capacity(seeds.len());
            for &seed in seeds {
                let dir = out.join(format!("seed_{seed}"));
                runs.push(run_single(config, &InitSource::Random { seed }, &dir)?);
            }
            let sirs: Vec<f64> = runs.iter().map(|r| r.report.final_sir).collect();
            let sirs_db: Vec<f64> = sirs.iter().map(|&s| db(s)).collect();
            let walls: Vec<f64> = runs.iter().map(|r| r.report.wall_clock_seconds).collect();
            let summary = BatchSummary {
                algorithm: config.algorithm.id().to_string(),
                seeds: seeds.clone(),
                final_sir: MeanStd::of(&sirs),
                final_sir_db: MeanStd::of(&sirs_db),
                wall_clock_seconds: MeanStd::of(&walls),
            };
            write_json(&out.join("batch_summary.json"), &summary)?;
            Ok(RunResult::Batch { runs, summary })
        }
    }
}

fn init_label(init: &InitSource) -> String {
    match init {
        InitSource::P4 => "p4".to_string(),
        InitSource::Random { seed } => format!("random:{seed}"),
        InitSource::File { path } => format!("file:{}", path.display()),
    }
}

fn run_single(config: &RunConfig, init: &InitSource, out: &Path) -> Result<RunOutcome> {
    let map = config.interference_map()?;
    let obj = QuarticObjective::from_map(&map)?;
    let adpm_cfg = config.adpm_config()?;
    let rtr_cfg = config.rtr_config()?;
    let s_init = config.initial_code(init)?;

    let main = solve(config.algorithm, &obj, &s_init, &adpm_cfg, &rtr_cfg)?;
    let baseline = if config.compare_baseline {
        Some(solve(config.algorithm.other(), &obj, &s_init, &adpm_cfg, &rtr_cfg)?)
    } else {
        None
    };

    let k = config.k;
    let initial_cost = cost(s_init.as_slice(), &obj, None)?;
    let final_cost = cost(main.code.as_slice(), &obj, None)?;
    let sir_of = |f: f64| (k * k) as f64 / f;
    let (init_mean_db, _) = suppressed_staf_db(&s_init, &map)?;
    let (final_mean_db, final_db_of_mean) = suppressed_staf_db(&main.code, &map)?;

    let comparison = match &baseline {
        Some(other) => {
            let other_cost = cost(other.code.as_slice(), &obj, None)?;
            let (other_mean_db, _) = suppressed_staf_db(&other.code, &map)?;
            let (adpm_cost, rtr_cost, adpm_db, rtr_db) = match config.algorithm {
                Algorithm::AdpmRtr => (final_cost, other_cost, final_mean_db, other_mean_db),
                Algorithm::RtrOnly => (other_cost, final_cost, other_mean_db, final_mean_db),
            };
            Some(Comparison {
                initial_sir_db: db(sir_of(initial_cost)),
                adpm_rtr_sir_db: db(sir_of(adpm_cost)),
                rtr_only_sir_db: db(sir_of(rtr_cost)),
                adpm_rtr_mean_suppressed_staf_db: adpm_db,
                rtr_only_mean_suppressed_staf_db: rtr_db,
            })
        }
        None => None,
    };

    let mut echo_run = config.clone();
    echo_run.init = init.clone();
    echo_run.batch_seeds = None;

    let report = RunReport {
        algorithm: config.algorithm.id().to_string(),
        k,
        nv: config.nv,
        support_size: map.active_bins().count(),
        init: init_label(init),
        random_generator: RANDOM_CODE_GENERATOR.to_string(),
        initial_cost,
        final_cost,
        initial_sir: sir_of(initial_cost),
        final_sir: sir_of(final_cost),
        initial_sir_db: db(sir_of(initial_cost)),
        final_sir_db: db(sir_of(final_cost)),
        initial_mean_suppressed_staf_db: init_mean_db,
        final_mean_suppressed_staf_db: final_mean_db,
        final_suppressed_staf_db_of_mean: final_db_of_mean,
        outer_iters: main.outer_iters,
        total_inner_iters: main.total_inner_iters,
        stop: main.stop.clone(),
        rho0: main.rho0,
        cost_trace: main.cost_trace.clone(),
        primal_residuals: main.primal_residuals.clone(),
        dual_residuals: main.dual_residuals.clone(),
        comparison,
        config: ConfigEcho {
            run: echo_run,
            adpm: adpm_cfg,
            rtr_only: rtr_cfg,
        },
        wall_clock_seconds: main.seconds,
    };

    write_artifacts(out, &map, &s_init, &main.code, &report)?;
    write_json(
        &out.join("timing.json"),
        &Timing {
            wall_clock_seconds: main.seconds,
            baseline_wall_clock_seconds: baseline.as_ref().map(|b| b.seconds),
        },
    )?;
    Ok(RunOutcome {
        report,
        final_code: main.code,
        output_dir: out.to_path_buf(),
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_artifacts(
    out: &Path,
    map: &InterferenceMap,
    s_init: &Code,
    s_final: &Code,
    report: &RunReport,
) -> Result<()> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let doppler = map.doppler_grid();
    let init_grid = db_grid(s_init, map);
    let final_grid = db_grid(s_final, map);
    write_text(&out.join("staf_init.csv"), &format_grid(&init_grid))?;
    write_text(&out.join("staf_final.csv"), &format_grid(&final_grid))?;
    write_text(&out.join("code_final.csv"), &format_code(s_final))?;
    for r in map.active_ranges() {
        let mut text = String::from("v,init_db,final_db\n");
        for h in 0..doppler.len() {
            text.push_str(&format!(
                "{},{:.6},{:.6}\n",
                doppler.value(h),
                init_grid[r][h],
                final_grid[r][h]
            ));
        }
        write_text(&out.join(format!("cuts_r{r}.csv")), &text)?;
    }
    write_json(&out.join("summary.json"), report)
}

/// Peak-normalized dB grid, `K x Nv`.
pub fn db_grid(s: &Code, map: &InterferenceMap) -> Vec<Vec<f64>> {
    let k = s.len();
    staf_grid(s, map.doppler_grid())
        .into_iter()
        .map(|row| row.into_iter().map(|v| staf_db(v, k)).collect())
        .collect()
}

pub fn format_grid(grid: &[Vec<f64>]) -> String {
    let mut text = String::new();
    for row in grid {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    text
}

pub fn format_code(s: &Code) -> String {
    s.as_slice()
        .iter()
        .enumerate()
        .map(|(i, z)| format!("{i},{:.16e},{:.16e}\n", z.re, z.im))
        .collect()
}

pub fn format_map(map: &InterferenceMap) -> String {
    let mut text = String::from("r,h,weight\n");
    for b in map.support() {
        text.push_str(&format!("{},{},{}\n", b.r, b.h, b.weight));
    }
    text
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn csv_err(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.display().to_string(),
            source,
        },
        kind => parse_err(path, line, format!("{kind:?}")),
    }
}

/// Header-less records of a rectangular CSV file with their line numbers.
fn csv_records(path: &Path) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            Ok((line, rec))
        })
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, text: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    text.parse::<T>().map_err(|e| parse_err(path, line, format!("'{text}': {e}")))
}

/// Reads a grid written by [`format_grid`].
pub fn read_grid_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    csv_records(path)?
        .into_iter()
        .map(|(line, rec)| rec.iter().map(|f| field(path, line, f)).collect())
        .collect()
}

/// Reads `index,real,imag` records; a non-numeric first record is skipped as
/// a header. Entries must be unimodular.
pub fn read_code_csv(path: &Path) -> Result<Code> {
    let mut entries: Vec<(usize, C64)> = Vec::new();
    for (n, (line, rec)) in csv_records(path)?.into_iter().enumerate() {
        if rec.len() != 3 {
            return Err(parse_err(path, line, "expected index,real,imag"));
        }
        if n == 0 && rec[0].parse::<usize>().is_err() {
            continue;
        }
        let index: usize = field(path, line, &rec[0])?;
        let re: f64 = field(path, line, &rec[1])?;
        let im: f64 = field(path, line, &rec[2])?;
        entries.push((index, C64::new(re, im)));
    }
    entries.sort_by_key(|(i, _)| *i);
    for (expected, (i, _)) in entries.iter().enumerate() {
        if *i != expected {
            return Err(parse_err(path, 0, format!("missing or duplicate index {expected}")));
        }
    }
    Code::new(entries.into_iter().map(|(_, z)| z).collect())
}
