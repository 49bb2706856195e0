//! Monte Carlo comparison of the solvers on random clustered deployments.
//!
//! Every trial draws one instance from its own seeded stream and runs all
//! selected solvers on it, so solver results are paired. Trials run on a
//! rayon pool; results are collected and reduced in trial order, so the
//! output does not depend on the thread count.

mod config;
mod output;
mod presets;

pub use config::{ExperimentMode, ExperimentSpec, SolverKind, SolverSettings, Sweep, SweepVariable};
pub use output::{content_hash, write_csv};
pub use presets::{fig_mode, FIGURES};

use log::warn;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bb::{bb_solve, BbConfig};
use crate::channel::sample_instance;
use crate::error::{Error, Result};
use crate::model::{oma_profile, oma_total, SystemInstance};
use crate::sca::{sca_solve, ScaOptions};
use crate::two_user::{solve_conventional_two_user, solve_two_user, CandidateKind, TwoUserInstance};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at sweep point `point`.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point as u64) ^ trial as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcome {
    pub objective: f64,
    pub iterations: usize,
    pub oracle_calls: u64,
    pub oracle_work: u64,
    /// Two-user solution class (closed-form solver only).
    pub class: Option<CandidateKind>,
    /// Per-iteration objective (SCA) or incumbent (BB).
    pub trace: Vec<f64>,
}

impl SolverOutcome {
    fn plain(objective: f64) -> Self {
        Self {
            objective,
            iterations: 0,
            oracle_calls: 0,
            oracle_work: 0,
            class: None,
            trace: Vec::new(),
        }
    }
}

pub fn run_solver(kind: SolverKind, inst: &SystemInstance, settings: &SolverSettings) -> Result<SolverOutcome> {
    match kind {
        SolverKind::Oma => Ok(SolverOutcome::plain(oma_total(inst))),
        SolverKind::TwoUserClosedForm => {
            let sol = solve_two_user(&TwoUserInstance::from_system(inst)?)?;
            let mut out = SolverOutcome::plain(sol.report.objective);
            out.class = Some(sol.kind);
            Ok(out)
        }
        SolverKind::ConventionalTwoUser => {
            if inst.num_users() != 2 {
                return Err(Error::InvalidInstance("conventional solver needs 2 users".into()));
            }
            let sol = solve_conventional_two_user(inst.gamma(0, 0), inst.gamma(1, 1), inst.target_rate())?;
            let mut out = SolverOutcome::plain(sol.objective);
            out.oracle_work = sol.report.stats.work;
            Ok(out)
        }
        SolverKind::Sca => {
            let opts = ScaOptions {
                rel_tol: settings.sca_rel_tol,
                max_iter: settings.sca_max_iter,
                ..Default::default()
            };
            let r = sca_solve(inst, &oma_profile(inst), &opts)?;
            Ok(SolverOutcome {
                objective: r.objective,
                iterations: r.iterations,
                oracle_calls: r.stats.calls,
                oracle_work: r.stats.work,
                class: None,
                trace: r.trace,
            })
        }
        SolverKind::BbSra | SolverKind::BbSca => {
            let cfg = BbConfig {
                xi: Some(settings.xi_rel * oma_total(inst)),
                n_max: settings.n_max,
                feas_mode: kind.feas_mode().expect("BB kind"),
                initial_box_scale: settings.initial_box_scale,
                ..Default::default()
            };
            let r = bb_solve(inst, &cfg)?.report;
            Ok(SolverOutcome {
                objective: r.objective,
                iterations: r.iterations,
                oracle_calls: r.stats.calls,
                oracle_work: r.stats.work,
                class: None,
                trace: r.trace,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub seed: u64,
    pub oma: f64,
    /// One entry per solver, in spec order; failures hold the error text.
    pub outcomes: Vec<std::result::Result<SolverOutcome, String>>,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub value: f64,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub solvers: Vec<SolverKind>,
    pub points: Vec<PointResult>,
}

fn run_trial(
    spec: &ExperimentSpec,
    solvers: &[SolverKind],
    cfg: &crate::channel::ScenarioConfig,
    point: usize,
    trial: usize,
) -> Result<TrialRecord> {
    let seed = trial_seed(spec.seed, point, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = sample_instance(cfg, &mut rng)?;
    let outcomes = solvers
        .iter()
        .map(|&kind| {
            run_solver(kind, &inst, &spec.settings).map_err(|e| {
                warn!(
                    "{} failed on trial {trial} of point {point} (seed {seed}): {e}",
                    kind.label()
                );
                e.to_string()
            })
        })
        .collect();
    Ok(TrialRecord {
        seed,
        oma: oma_total(&inst),
        outcomes,
    })
}

/// Solvers actually run for `spec` (class mode always needs the closed form).
fn effective_solvers(spec: &ExperimentSpec) -> Vec<SolverKind> {
    let mut solvers = spec.solvers.clone();
    if spec.mode == ExperimentMode::Classes && !solvers.contains(&SolverKind::TwoUserClosedForm) {
        solvers.push(SolverKind::TwoUserClosedForm);
    }
    solvers
}

/// Runs every trial of `spec` on `jobs` threads (`None`: rayon's default).
pub fn run_experiment(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<ExperimentResult> {
    spec.validate()?;
    let scenarios = spec.scenarios()?;
    let solvers = effective_solvers(spec);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut points = Vec::with_capacity(scenarios.len());
    for (k, (cfg, &value)) in scenarios.iter().zip(&spec.sweep.values).enumerate() {
        let trials = pool.install(|| {
            (0..spec.trials)
                .into_par_iter()
                .map(|t| run_trial(spec, &solvers, cfg, k, t))
                .collect::<Result<Vec<_>>>()
        })?;
        points.push(PointResult { value, trials });
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        solvers,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStat {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Mean and standard error, summed in slice order.
pub fn mean_stat(xs: &[f64]) -> MeanStat {
    let n = xs.len();
    if n == 0 {
        return MeanStat {
            mean: f64::NAN,
            std_err: f64::NAN,
            n,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let std_err = if n > 1 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    MeanStat { mean, std_err, n }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub value: f64,
    pub solver: SolverKind,
    pub power: MeanStat,
    pub mean_iterations: f64,
    pub mean_oracle_calls: f64,
    pub mean_oracle_work: f64,
    /// Paired `OMA - solver` over the trials where the solver succeeded.
    pub gap_to_oma: MeanStat,
    /// Paired `OMA / solver`.
    pub ratio_to_oma: MeanStat,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassRow {
    pub value: f64,
    pub class: CandidateKind,
    pub count: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub value: f64,
    pub solver: SolverKind,
    pub iteration: usize,
    /// Mean objective, each trial's trace held at its last value once it
    /// has stopped.
    pub mean_objective: f64,
    pub mean_ratio_to_oma: f64,
}

impl ExperimentResult {
    fn solver_index(&self, kind: SolverKind) -> Option<usize> {
        self.solvers.iter().position(|&s| s == kind)
    }

    /// Successful `(oma, outcome)` pairs of `kind` at point `p`.
    pub fn samples(&self, p: usize, kind: SolverKind) -> Vec<(f64, &SolverOutcome)> {
        let Some(k) = self.solver_index(kind) else {
            return Vec::new();
        };
        self.points[p]
            .trials
            .iter()
            .filter_map(|t| t.outcomes[k].as_ref().ok().map(|o| (t.oma, o)))
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.points
            .iter()
            .flat_map(|p| &p.trials)
            .flat_map(|t| &t.outcomes)
            .filter(|o| o.is_err())
            .count()
    }

    pub fn power_rows(&self) -> Vec<PowerRow> {
        let mut rows = Vec::new();
        for (p, point) in self.points.iter().enumerate() {
            for &kind in &self.solvers {
                let s = self.samples(p, kind);
                let count = s.len().max(1) as f64;
                let objective: Vec<f64> = s.iter().map(|(_, o)| o.objective).collect();
                let gap: Vec<f64> = s.iter().map(|(oma, o)| oma - o.objective).collect();
                let ratio: Vec<f64> = s.iter().map(|(oma, o)| oma / o.objective).collect();
                rows.push(PowerRow {
                    value: point.value,
                    solver: kind,
                    power: mean_stat(&objective),
                    mean_iterations: s.iter().map(|(_, o)| o.iterations as f64).sum::<f64>() / count,
                    mean_oracle_calls: s.iter().map(|(_, o)| o.oracle_calls as f64).sum::<f64>() / count,
                    mean_oracle_work: s.iter().map(|(_, o)| o.oracle_work as f64).sum::<f64>() / count,
                    gap_to_oma: mean_stat(&gap),
                    ratio_to_oma: mean_stat(&ratio),
                    n_failed: point.trials.len() - s.len(),
                });
            }
        }
        rows
    }

    pub fn class_rows(&self) -> Vec<ClassRow> {
        let mut rows = Vec::new();
        for (p, point) in self.points.iter().enumerate() {
            let s = self.samples(p, SolverKind::TwoUserClosedForm);
            let total = s.len();
            for class in CandidateKind::NOMA {
                let count = s.iter().filter(|(_, o)| o.class == Some(class)).count();
                rows.push(ClassRow {
                    value: point.value,
                    class,
                    count,
                    frequency: if total > 0 {
                        count as f64 / total as f64
                    } else {
                        f64::NAN
                    },
                });
            }
        }
        rows
    }

    pub fn trace_rows(&self) -> Vec<TraceRow> {
        let mut rows = Vec::new();
        for (p, point) in self.points.iter().enumerate() {
            for &kind in &self.solvers {
                let s = self.samples(p, kind);
                let len = s.iter().map(|(_, o)| o.trace.len()).max().unwrap_or(0);
                for it in 0..len {
                    let at = |o: &SolverOutcome| o.trace.get(it).or(o.trace.last()).copied().unwrap_or(o.objective);
                    let n = s.len() as f64;
                    rows.push(TraceRow {
                        value: point.value,
                        solver: kind,
                        iteration: it,
                        mean_objective: s.iter().map(|(_, o)| at(o)).sum::<f64>() / n,
                        mean_ratio_to_oma: s.iter().map(|(oma, o)| at(o) / oma).sum::<f64>() / n,
                    });
                }
            }
        }
        rows
    }
}
