//! Monte Carlo harness: figure presets, the sweep engine, CSV emission,
//! chart rendering, the channel demo and the refinement-trace demo.
//!
//! Trials are independent tasks distributed over the worker pool; every
//! trial derives its seed from `(base_seed, cell index, trial index)`, so a
//! sweep is reproducible regardless of thread count. All decoders in a
//! cell run on the same instances.

mod channel;
mod chart;
mod csv;
mod demo;

pub use channel::{channel_roundtrip, ChannelParams, ChannelRun};
pub use chart::{render_chart, ChartSpec};
pub use csv::{emit_csv, parse_csv, write_csv, CSV_HEADER};
pub use demo::{run_certificate_demo, CertificateDemoConfig, CertificateDemoSummary};

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::baselines::{self, GreedyOptions, GreedyVariant};
use crate::certificate;
use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::par;
use crate::rng::{domain, sub_seed};
use crate::solver::{self, SolveOptions};

/// Decoders and certificate checks that can run in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExtendedL1,
    OrthComplement,
    Omp,
    Romp,
    CertificateExact,
    CertificateIterative,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExtendedL1 => "extended_l1",
            Method::OrthComplement => "orth_complement",
            Method::Omp => "omp",
            Method::Romp => "romp",
            Method::CertificateExact => "certificate_exact",
            Method::CertificateIterative => "certificate_iterative",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extended_l1" => Ok(Method::ExtendedL1),
            "orth_complement" => Ok(Method::OrthComplement),
            "omp" => Ok(Method::Omp),
            "romp" => Ok(Method::Romp),
            "certificate_exact" => Ok(Method::CertificateExact),
            "certificate_iterative" => Ok(Method::CertificateIterative),
            other => Err(Error::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// Signal support size as a function of the ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum K1Rule {
    Fixed(usize),
    /// `k1 = round(sqrt(m))`
    SqrtM,
    /// `k1 = round(fraction * m)`
    FracM(f64),
    /// `k1 = round(c0 * m^(1 - eta0))`
    Wpg { c0: f64, eta0: f64 },
}

impl K1Rule {
    pub fn k1_for(&self, m: usize, n: usize) -> Result<usize> {
        let k1 = match self {
            K1Rule::Fixed(k) => *k,
            K1Rule::SqrtM => (m as f64).sqrt().round() as usize,
            K1Rule::FracM(fraction) => {
                if !(*fraction > 0.0 && *fraction < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "FracM fraction must be in (0,1), got {fraction}"
                    )));
                }
                (fraction * m as f64).round() as usize
            }
            K1Rule::Wpg { c0, eta0 } => (c0 * (m as f64).powf(1.0 - eta0)).round() as usize,
        };
        Ok(k1.clamp(1, n))
    }
}

/// Axis-spec form of a sweep, as stored in JSON config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    /// Ambient dimensions.
    pub m: Vec<usize>,
    /// Explicit bouquet sizes; mutually exclusive with `delta`.
    #[serde(default)]
    pub n: Option<Vec<usize>>,
    /// Aspect ratio: `n = round(delta * m)`.
    #[serde(default)]
    pub delta: Option<f64>,
    pub nu: Vec<f64>,
    pub rho: Vec<f64>,
    pub k1_rule: K1Rule,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    /// Trial count the original experiments used, recorded in CSV metadata.
    #[serde(default)]
    pub paper_trials: Option<usize>,
}

impl SweepSpec {
    /// Expands the axes into the flat cell grid.
    pub fn expand(&self) -> Result<SweepConfig> {
        if self.trials_per_cell < 1 {
            return Err(Error::InvalidParameter("trials_per_cell must be >= 1".to_string()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("methods must be nonempty".to_string()));
        }
        let n_values: Vec<Option<usize>> = match (&self.n, self.delta) {
            (Some(ns), None) => ns.iter().map(|&n| Some(n)).collect(),
            (None, Some(_)) => vec![None],
            _ => {
                return Err(Error::InvalidParameter(
                    "exactly one of n or delta must be given".to_string(),
                ))
            }
        };
        let mut cells = Vec::new();
        for &m in &self.m {
            for n_choice in &n_values {
                let n = match n_choice {
                    Some(n) => *n,
                    None => ((self.delta.expect("checked") * m as f64).round() as usize).max(1),
                };
                let k1 = self.k1_rule.k1_for(m, n)?;
                for &nu in &self.nu {
                    for &rho in &self.rho {
                        let params = ModelParams::new(m, n, nu, k1, rho, 0);
                        params.validate()?;
                        cells.push(params);
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::InvalidParameter("empty grid".to_string()));
        }
        Ok(SweepConfig {
            name: self.name.clone(),
            cells,
            trials_per_cell: self.trials_per_cell,
            base_seed: self.base_seed,
            methods: self.methods.clone(),
            paper_trials: self.paper_trials,
        })
    }
}

/// Fully expanded sweep: one [`ModelParams`] per grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub name: String,
    pub cells: Vec<ModelParams>,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub paper_trials: Option<usize>,
}

impl SweepConfig {
    /// Parameters (including the derived seed) of one trial of one cell.
    pub fn trial_params(&self, cell_index: usize, trial: usize) -> ModelParams {
        let seed = sub_seed(
            self.base_seed,
            &[domain::TRIAL, cell_index as u64, trial as u64],
        );
        self.cells[cell_index].clone().with_seed(seed)
    }

    /// Metadata lines for the CSV comment header.
    pub fn metadata_comments(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "preset={} trials_per_cell={} base_seed={}",
            self.name, self.trials_per_cell, self.base_seed
        )];
        if let Some(paper) = self.paper_trials {
            lines.push(format!("paper_trials={paper}"));
        }
        lines
    }
}

/// One Monte Carlo grid cell for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub m: usize,
    pub n: usize,
    pub nu: f64,
    pub rho: f64,
    pub k1: usize,
    pub k2: usize,
    pub method: Method,
    pub trials: usize,
    pub successes: usize,
    pub mean_solve_seconds: f64,
    pub mean_iterations: f64,
}

impl SweepRecord {
    pub fn success_frac(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Execution knobs for [`run_sweep`].
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    /// Margin parameter for certificate methods.
    pub eps: f64,
    pub max_refine_iterations: usize,
    /// Record wall-clock times. Disable for byte-reproducible CSV output
    /// (the timing column is then exactly 0).
    pub capture_timings: bool,
    /// Cells whose projected cost (first trial extrapolated) exceeds this
    /// are skipped with a stderr marker and a trials=0 record. Skipping
    /// depends on wall clock, so sweeps with a budget are not reproducible.
    pub cell_time_budget: Option<Duration>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solve: SolveOptions::default(),
            eps: 0.05,
            max_refine_iterations: 50,
            capture_timings: true,
            cell_time_budget: None,
        }
    }
}

#[derive(Debug, Clone)]
struct TrialOutcome {
    success: bool,
    seconds: f64,
    iterations: f64,
}

fn run_method(
    method: Method,
    inst: &model::ProblemInstance,
    opts: &SweepOptions,
) -> Result<(bool, f64)> {
    match method {
        Method::ExtendedL1 => {
            let sol = solver::solve_extended_l1(&inst.a, &inst.y, &opts.solve)?;
            Ok((
                solver::judge_success(&sol, inst, opts.solve.success_threshold),
                sol.iterations as f64,
            ))
        }
        Method::OrthComplement => {
            let sol = baselines::orthogonal_complement_decode(&inst.a, &inst.y, &opts.solve)?;
            Ok((
                solver::judge_success(&sol, inst, opts.solve.success_threshold),
                sol.iterations as f64,
            ))
        }
        Method::Omp | Method::Romp => {
            let budget = (inst.pattern.i.len() + inst.pattern.j.len()).max(1);
            let greedy = GreedyOptions {
                max_atoms: budget.min(inst.params.m + inst.params.n),
                residual_tolerance: 1e-8,
                variant: if method == Method::Omp {
                    GreedyVariant::Omp
                } else {
                    GreedyVariant::Romp
                },
            };
            let sol = baselines::greedy_decode(&inst.a, &inst.y, &greedy)?;
            Ok((
                solver::judge_success(&sol, inst, opts.solve.success_threshold),
                sol.iterations as f64,
            ))
        }
        Method::CertificateExact => {
            let prob = certificate::build_separator_problem(&inst.a, &inst.pattern, opts.eps)?;
            let verdict = certificate::verify_recoverability_exact(&prob)?;
            Ok((verdict.recoverable, 0.0))
        }
        Method::CertificateIterative => {
            let prob = certificate::build_separator_problem(&inst.a, &inst.pattern, opts.eps)?;
            let cert = certificate::refine_separator(&prob, opts.max_refine_iterations)?;
            Ok((cert.converged, cert.iterations as f64))
        }
    }
}

fn run_trial(
    config: &SweepConfig,
    cell_index: usize,
    trial: usize,
    opts: &SweepOptions,
) -> Vec<TrialOutcome> {
    let params = config.trial_params(cell_index, trial);
    let instance = match model::synthesize(&params) {
        Ok(inst) => inst,
        Err(err) => {
            eprintln!("sweep: cell {cell_index} trial {trial}: synthesis failed: {err}");
            return config
                .methods
                .iter()
                .map(|_| TrialOutcome {
                    success: false,
                    seconds: 0.0,
                    iterations: 0.0,
                })
                .collect();
        }
    };
    config
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(method, &instance, opts);
            let seconds = if opts.capture_timings {
                start.elapsed().as_secs_f64()
            } else {
                0.0
            };
            match outcome {
                Ok((success, iterations)) => TrialOutcome {
                    success,
                    seconds,
                    iterations,
                },
                Err(err) => {
                    eprintln!(
                        "sweep: cell {cell_index} trial {trial} method {}: {err}",
                        method.name()
                    );
                    TrialOutcome {
                        success: false,
                        seconds,
                        iterations: 0.0,
                    }
                }
            }
        })
        .collect()
}

/// Runs every cell x method of the sweep. Trials run in parallel; records
/// come back ordered by (cell, method).
pub fn run_sweep(config: &SweepConfig, opts: &SweepOptions) -> Vec<SweepRecord> {
    let mut records = Vec::with_capacity(config.cells.len() * config.methods.len());
    for (cell_index, cell) in config.cells.iter().enumerate() {
        let make_record = |trials: usize, totals: Option<&[(usize, f64, f64)]>| {
            config
                .methods
                .iter()
                .enumerate()
                .map(|(mi, &method)| {
                    let (successes, seconds, iterations) = totals
                        .map(|t| t[mi])
                        .unwrap_or((0, 0.0, 0.0));
                    SweepRecord {
                        m: cell.m,
                        n: cell.n,
                        nu: cell.nu,
                        rho: cell.rho,
                        k1: cell.k1,
                        k2: cell.k2(),
                        method,
                        trials,
                        successes,
                        mean_solve_seconds: if trials == 0 { 0.0 } else { seconds / trials as f64 },
                        mean_iterations: if trials == 0 { 0.0 } else { iterations / trials as f64 },
                    }
                })
                .collect::<Vec<_>>()
        };

        let mut first_outcome = None;
        if let Some(budget) = opts.cell_time_budget {
            let start = Instant::now();
            let outcome = run_trial(config, cell_index, 0, opts);
            let projected = start.elapsed() * config.trials_per_cell as u32;
            if projected > budget {
                eprintln!(
                    "sweep: skipping cell {cell_index} (m={} rho={}): projected {:?} over budget {:?}",
                    cell.m, cell.rho, projected, budget
                );
                records.extend(make_record(0, None));
                continue;
            }
            first_outcome = Some(outcome);
        }

        let offset = usize::from(first_outcome.is_some());
        let mut outcomes: Vec<Vec<TrialOutcome>> =
            par::map_indexed(config.trials_per_cell - offset, |t| {
                run_trial(config, cell_index, t + offset, opts)
            });
        if let Some(first) = first_outcome {
            outcomes.insert(0, first);
        }

        let mut totals = vec![(0usize, 0.0f64, 0.0f64); config.methods.len()];
        for trial_outcomes in &outcomes {
            for (mi, outcome) in trial_outcomes.iter().enumerate() {
                if outcome.success {
                    totals[mi].0 += 1;
                }
                totals[mi].1 += outcome.seconds;
                totals[mi].2 += outcome.iterations;
            }
        }
        records.extend(make_record(config.trials_per_cell, Some(&totals)));
    }
    records
}

/// The figure presets offered by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    Fig5,
    Fig6Left,
    Fig6Right,
    Fig7Left,
    Fig7Right,
    Fig8,
}

impl std::str::FromStr for FigurePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig5" => Ok(FigurePreset::Fig5),
            "fig6_left" => Ok(FigurePreset::Fig6Left),
            "fig6_right" => Ok(FigurePreset::Fig6Right),
            "fig7_left" => Ok(FigurePreset::Fig7Left),
            "fig7_right" => Ok(FigurePreset::Fig7Right),
            "fig8" => Ok(FigurePreset::Fig8),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset {other:?} (expected fig5, fig6_left, fig6_right, fig7_left, fig7_right, fig8)"
            ))),
        }
    }
}

fn rho_axis() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Dimension axis for the growth experiments; the m=1600 point is expensive
/// and only included when `full` is set.
fn m_axis(full: bool) -> Vec<usize> {
    let mut ms = vec![100, 200, 400, 800];
    if full {
        ms.push(1600);
    }
    ms
}

/// The sweep grids behind the published curves, at desk-scale trial counts
/// (100 per cell; the original figures used 500).
pub fn figure_preset(preset: FigurePreset, full: bool) -> SweepConfig {
    let spec = match preset {
        FigurePreset::Fig5 => SweepSpec {
            name: "fig5".to_string(),
            m: vec![500],
            n: Some(vec![125]),
            delta: None,
            nu: vec![0.05],
            rho: std::iter::once(0.0).chain(rho_axis()).collect(),
            k1_rule: K1Rule::Fixed(15),
            trials_per_cell: 100,
            base_seed: 5,
            methods: vec![Method::ExtendedL1, Method::OrthComplement, Method::Romp],
            paper_trials: Some(500),
        },
        FigurePreset::Fig6Left => SweepSpec {
            name: "fig6_left".to_string(),
            m: m_axis(full),
            n: None,
            delta: Some(0.25),
            nu: vec![0.05],
            rho: rho_axis(),
            k1_rule: K1Rule::Fixed(1),
            trials_per_cell: 100,
            base_seed: 6,
            methods: vec![Method::ExtendedL1],
            paper_trials: Some(500),
        },
        FigurePreset::Fig6Right => SweepSpec {
            name: "fig6_right".to_string(),
            m: m_axis(full),
            n: None,
            delta: Some(0.25),
            nu: vec![0.05],
            rho: rho_axis(),
            k1_rule: K1Rule::SqrtM,
            trials_per_cell: 100,
            base_seed: 6,
            methods: vec![Method::ExtendedL1],
            paper_trials: Some(500),
        },
        FigurePreset::Fig7Left => SweepSpec {
            name: "fig7_left".to_string(),
            m: vec![400],
            n: Some(vec![100, 200, 300, 400, 500]),
            delta: None,
            nu: vec![0.3],
            rho: rho_axis(),
            k1_rule: K1Rule::Fixed(15),
            trials_per_cell: 100,
            base_seed: 7,
            methods: vec![Method::ExtendedL1],
            paper_trials: Some(500),
        },
        FigurePreset::Fig7Right => SweepSpec {
            name: "fig7_right".to_string(),
            m: vec![400],
            n: Some(vec![200]),
            delta: None,
            nu: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            rho: rho_axis(),
            k1_rule: K1Rule::Fixed(15),
            trials_per_cell: 100,
            base_seed: 7,
            methods: vec![Method::ExtendedL1],
            paper_trials: Some(500),
        },
        FigurePreset::Fig8 => SweepSpec {
            name: "fig8".to_string(),
            m: m_axis(full),
            n: None,
            delta: Some(0.25),
            nu: vec![0.05],
            rho: rho_axis(),
            k1_rule: K1Rule::FracM(0.05),
            trials_per_cell: 100,
            base_seed: 8,
            methods: vec![Method::ExtendedL1],
            paper_trials: Some(500),
        },
    };
    spec.expand().expect("presets are valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(methods: Vec<Method>, rho: Vec<f64>, trials: usize) -> SweepConfig {
        SweepSpec {
            name: "tiny".to_string(),
            m: vec![24],
            n: Some(vec![8]),
            delta: None,
            nu: vec![0.1],
            rho,
            k1_rule: K1Rule::Fixed(2),
            trials_per_cell: trials,
            base_seed: 11,
            methods,
            paper_trials: None,
        }
        .expand()
        .unwrap()
    }

    fn fast_opts() -> SweepOptions {
        SweepOptions {
            capture_timings: false,
            ..SweepOptions::default()
        }
    }

    #[test]
    fn preset_grids_match_published_setups() {
        let fig5 = figure_preset(FigurePreset::Fig5, false);
        assert_eq!(fig5.cells.len(), 20); // rho in {0, 0.05, .., 0.95}
        assert!(fig5.cells.iter().all(|c| c.m == 500 && c.n == 125 && c.k1 == 15));
        assert_eq!(
            fig5.methods,
            vec![Method::ExtendedL1, Method::OrthComplement, Method::Romp]
        );

        let fig6_left = figure_preset(FigurePreset::Fig6Left, false);
        assert!(fig6_left.cells.iter().all(|c| c.k1 == 1));
        let ms: std::collections::BTreeSet<usize> =
            fig6_left.cells.iter().map(|c| c.m).collect();
        assert_eq!(ms.into_iter().collect::<Vec<_>>(), vec![100, 200, 400, 800]);
        assert!(figure_preset(FigurePreset::Fig6Left, true)
            .cells
            .iter()
            .any(|c| c.m == 1600));
        assert!(fig6_left.cells.iter().all(|c| c.n == c.m / 4));

        let fig7_right = figure_preset(FigurePreset::Fig7Right, false);
        let nus: std::collections::BTreeSet<String> = fig7_right
            .cells
            .iter()
            .map(|c| format!("{}", c.nu))
            .collect();
        assert_eq!(nus.len(), 5);
        assert!(fig7_right.cells.iter().all(|c| c.m == 400 && c.n == 200));

        let fig8 = figure_preset(FigurePreset::Fig8, false);
        assert!(fig8.cells.iter().all(|c| c.k1 == c.m / 20));
    }

    #[test]
    fn k1_rules() {
        assert_eq!(K1Rule::Fixed(3).k1_for(100, 25).unwrap(), 3);
        assert_eq!(K1Rule::SqrtM.k1_for(400, 100).unwrap(), 20);
        assert_eq!(K1Rule::FracM(0.05).k1_for(800, 200).unwrap(), 40);
        let (n, k1) = (100, K1Rule::Wpg { c0: 1.0, eta0: 0.5 }.k1_for(400, 100).unwrap());
        assert_eq!(k1, 20);
        assert!(k1 <= n);
        assert!(K1Rule::FracM(1.5).k1_for(100, 25).is_err());
    }

    #[test]
    fn clean_single_atom_cell_always_succeeds() {
        // rho = 0, k1 = 1: the decoder must recover, and the exact
        // certificate confirms recoverability on the same instance
        let config = SweepSpec {
            name: "clean".to_string(),
            m: vec![30],
            n: Some(vec![8]),
            delta: None,
            nu: vec![0.1],
            rho: vec![0.0],
            k1_rule: K1Rule::Fixed(1),
            trials_per_cell: 1,
            base_seed: 3,
            methods: vec![Method::ExtendedL1],
            paper_trials: None,
        }
        .expand()
        .unwrap();
        let records = run_sweep(&config, &fast_opts());
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].successes, 1);

        let inst = model::synthesize(&config.trial_params(0, 0)).unwrap();
        let prob = certificate::build_separator_problem(&inst.a, &inst.pattern, 0.05).unwrap();
        let verdict = certificate::verify_recoverability_exact(&prob).unwrap();
        assert!(verdict.recoverable);
    }

    #[test]
    fn record_grid_shape_and_bounds() {
        let config = tiny_config(
            vec![Method::ExtendedL1, Method::CertificateExact],
            vec![0.2, 0.5],
            4,
        );
        let records = run_sweep(&config, &fast_opts());
        assert_eq!(records.len(), config.cells.len() * config.methods.len());
        for record in &records {
            assert!(record.successes <= record.trials);
            assert!((0.0..=1.0).contains(&record.success_frac()));
        }
    }

    #[test]
    fn sweep_is_deterministic_without_timings() {
        let config = tiny_config(vec![Method::ExtendedL1], vec![0.3], 5);
        let a = run_sweep(&config, &fast_opts());
        let b = run_sweep(&config, &fast_opts());
        assert_eq!(emit_csv(&a), emit_csv(&b));

        // with timings on, everything except the timing column agrees
        let timed = run_sweep(&config, &SweepOptions::default());
        for (x, y) in a.iter().zip(&timed) {
            assert_eq!(x.successes, y.successes);
            assert_eq!(x.mean_iterations, y.mean_iterations);
        }
    }

    #[test]
    fn decoder_success_implies_certificate_recoverable() {
        let config = tiny_config(
            vec![Method::ExtendedL1, Method::CertificateExact],
            vec![0.2, 0.4],
            20,
        );
        let opts = fast_opts();
        let mut mismatches = 0usize;
        let mut total = 0usize;
        for (cell_index, _) in config.cells.iter().enumerate() {
            for trial in 0..config.trials_per_cell {
                let inst = model::synthesize(&config.trial_params(cell_index, trial)).unwrap();
                let (decoder, _) = run_method(Method::ExtendedL1, &inst, &opts).unwrap();
                let (cert, _) = run_method(Method::CertificateExact, &inst, &opts).unwrap();
                total += 1;
                if decoder && !cert {
                    mismatches += 1;
                }
            }
        }
        assert!(
            (mismatches as f64) <= 0.02 * total as f64,
            "{mismatches}/{total} decoder successes lacked a certificate"
        );
    }

    #[test]
    fn sweep_spec_json_roundtrip() {
        let spec = SweepSpec {
            name: "custom".to_string(),
            m: vec![50, 100],
            n: None,
            delta: Some(0.4),
            nu: vec![0.1],
            rho: vec![0.1, 0.2],
            k1_rule: K1Rule::Wpg { c0: 0.8, eta0: 0.4 },
            trials_per_cell: 3,
            base_seed: 9,
            methods: vec![Method::ExtendedL1, Method::Omp],
            paper_trials: Some(500),
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: SweepSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.expand().unwrap().cells, spec.expand().unwrap().cells);
    }
}
