//! Study drivers. Independent solver runs fan out over the rayon pool and are
//! collected in declaration order, so reports do not depend on scheduling.

use rayon::prelude::*;

use super::config::StudyConfig;
use super::report::{ConvergenceReport, Refinement};
use crate::error::{Error, Result};
use crate::march::{run, steps_for, RunConfig, RunOutput};
use crate::problems::ProblemSpec;

fn wrap_row(row: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config(_) => e,
        other => Error::Solver {
            row,
            source: Box::new(other),
        },
    }
}

fn metadata(
    cfg: &StudyConfig,
    problem: &ProblemSpec,
    study: &str,
    stamp: &str,
) -> Vec<(String, String)> {
    let mut m = vec![
        ("study".to_string(), study.to_string()),
        ("label".to_string(), problem.label.clone()),
        ("bc".to_string(), problem.bc.name().to_string()),
        ("final_time".to_string(), format!("{}", problem.final_time)),
    ];
    for (k, v) in cfg.entries() {
        if k != "final_time" {
            m.push((k.to_string(), v));
        }
    }
    m.push(("version".to_string(), env!("CARGO_PKG_VERSION").to_string()));
    m.push(("timestamp".to_string(), stamp.to_string()));
    m
}

fn require_exact(problem: &ProblemSpec) -> Result<()> {
    if problem.exact.is_none() {
        return Err(Error::Config(format!(
            "{} has no exact solution; convergence studies need one",
            problem.label
        )));
    }
    Ok(())
}

fn solve_row(problem: &ProblemSpec, rc: &RunConfig, row: usize) -> Result<f64> {
    let out: RunOutput<f64> = run(problem, rc).map_err(wrap_row(row))?;
    out.final_error()
        .ok_or_else(|| Error::Config("missing exact solution".into()))
}

/// Mesh refinement with `tau = h^r` coupled to each mesh.
pub fn run_spatial_study(cfg: &StudyConfig, stamp: &str) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    require_exact(&problem)?;
    let r = cfg.coupling();
    let len = problem.x_right - problem.x_left;
    let data = cfg
        .cells
        .par_iter()
        .enumerate()
        .map(|(row, &n)| {
            let h = len / n as f64;
            let m = steps_for(problem.final_time, h.powf(r))?;
            let mut rc = RunConfig::new(n, cfg.k, cfg.q, m);
            rc.initial = cfg.initial;
            let e = solve_row(&problem, &rc, row)?;
            Ok((h, problem.final_time / m as f64, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_errors(
        metadata(cfg, &problem, "converge-space", stamp),
        data,
        Refinement::Space,
    ))
}

/// Step refinement on the single mesh `cells[0]`.
pub fn run_temporal_study(cfg: &StudyConfig, stamp: &str) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    require_exact(&problem)?;
    let n = cfg.cells[0];
    let h = (problem.x_right - problem.x_left) / n as f64;
    let data = cfg
        .steps
        .par_iter()
        .enumerate()
        .map(|(row, &m)| {
            if m == 0 {
                return Err(Error::Config("temporal study needs steps >= 1".into()));
            }
            let mut rc = RunConfig::new(n, cfg.k, cfg.q, m);
            rc.initial = cfg.initial;
            let e = solve_row(&problem, &rc, row)?;
            Ok((h, problem.final_time / m as f64, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_errors(
        metadata(cfg, &problem, "converge-time", stamp),
        data,
        Refinement::Time,
    ))
}

/// One configuration of a stability sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRun {
    pub alpha: f64,
    pub lambda: f64,
    pub h: f64,
    pub tau: f64,
    pub rule: String,
    /// `||u^n||` for `n = 0..=M`.
    pub norms: Vec<f64>,
    /// `max_n ||u^n|| / ||u^0||` (0 for zero data).
    pub max_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityOutcome {
    pub metadata: Vec<(String, String)>,
    pub runs: Vec<StabilityRun>,
}

/// Relative slack allowed in `||u^n|| <= ||u^0||`.
pub const STABILITY_SLACK: f64 = 1e-10;

impl StabilityOutcome {
    pub fn all_passed(&self) -> bool {
        self.runs.iter().all(|r| r.passed)
    }

    pub fn violations(&self) -> Vec<&StabilityRun> {
        self.runs.iter().filter(|r| !r.passed).collect()
    }

    /// `alpha,lambda,h,tau,rule,n,t,norm` rows after the metadata block.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str("alpha,lambda,h,tau,rule,n,t,norm\n");
        for r in &self.runs {
            for (n, norm) in r.norms.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{},{n},{:.16e},{norm:.16e}\n",
                    r.alpha,
                    r.lambda,
                    r.h,
                    r.tau,
                    r.rule,
                    n as f64 * r.tau
                ));
            }
        }
        s
    }
}

/// `alphas x lambdas x taus` grid on the mesh `cells[0]` with order `q`.
pub fn run_stability_sweep(cfg: &StudyConfig, stamp: &str) -> Result<StabilityOutcome> {
    cfg.validate()?;
    let base = cfg.build_problem()?;
    let alphas = if cfg.alphas.is_empty() {
        vec![cfg.alpha]
    } else {
        cfg.alphas.clone()
    };
    let lambdas = if cfg.lambdas.is_empty() {
        vec![cfg.lambda]
    } else {
        cfg.lambdas.clone()
    };
    let n = cfg.cells[0];
    let h = (base.x_right - base.x_left) / n as f64;
    let mut grid = Vec::new();
    for &a in &alphas {
        for &l in &lambdas {
            for rule in &cfg.taus {
                grid.push((a, l, *rule));
            }
        }
    }
    let runs = grid
        .par_iter()
        .enumerate()
        .map(|(row, &(alpha, lambda, rule))| {
            let mut problem = cfg.problem_with(alpha, lambda)?;
            if problem.forcing.is_some() {
                problem.forcing = None;
                problem.exact = None;
            }
            let m = steps_for(problem.final_time, rule.tau(h))?;
            let mut rc = RunConfig::new(n, cfg.k, cfg.q, m);
            rc.initial = cfg.initial;
            let out: RunOutput<f64> = run(&problem, &rc).map_err(wrap_row(row))?;
            let n0 = out.norms[0];
            let max_ratio = if n0 == 0.0 {
                if out.norms.iter().all(|&v| v == 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                out.norms.iter().fold(0.0f64, |a, &v| a.max(v / n0))
            };
            let passed = out.norms.iter().all(|&v| v <= n0 * (1.0 + STABILITY_SLACK));
            Ok(StabilityRun {
                alpha,
                lambda,
                h,
                tau: out.tau,
                rule: rule.to_string(),
                norms: out.norms,
                max_ratio,
                passed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityOutcome {
        metadata: metadata(cfg, &base, "stability", stamp),
        runs,
    })
}

/// Sampled snapshots `(t, x, u)`, grouped by `t` and sorted by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<(f64, f64, f64)>,
}

impl Profile {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str("t,x,u\n");
        for (t, x, u) in &self.rows {
            s.push_str(&format!("{t:.16e},{x:.16e},{u:.16e}\n"));
        }
        s
    }

    /// Rows of one snapshot.
    pub fn snapshot(&self, t: f64) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.0 == t)
            .map(|r| (r.1, r.2))
            .collect()
    }

    pub fn times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = Vec::new();
        for r in &self.rows {
            if ts.last() != Some(&r.0) {
                ts.push(r.0);
            }
        }
        ts
    }
}

/// Sample points per cell in profile dumps.
pub fn profile_points_per_cell(k: usize) -> usize {
    10 * (k + 1)
}

/// Snapshots at the requested times on the mesh `cells[0]`, with
/// `tau = taus[0](h)`, `10 (k + 1)` cell-centred samples per cell.
pub fn run_profile(cfg: &StudyConfig, stamp: &str) -> Result<Profile> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let times = if cfg.times.is_empty() {
        vec![problem.final_time]
    } else {
        cfg.times.clone()
    };
    for &t in &times {
        if !(t >= 0.0 && t <= problem.final_time * (1.0 + 1e-12)) {
            return Err(Error::Config(format!(
                "sample time {t} outside [0, {}]",
                problem.final_time
            )));
        }
    }
    let n = cfg.cells[0];
    let h = (problem.x_right - problem.x_left) / n as f64;
    let rule = cfg.taus.first().copied().unwrap_or(super::config::TauRule {
        factor: 1.0,
        power: 2.0,
    });
    let t_max = times.iter().fold(0.0f64, |a, &b| a.max(b));
    let tau_target = rule.tau(h);
    let steps = if t_max == 0.0 {
        0
    } else {
        steps_for(t_max, tau_target)?
    };
    let march_problem = if t_max > 0.0 {
        problem.clone().with_final_time(t_max)?
    } else {
        problem.clone()
    };
    let mut rc = RunConfig::new(n, cfg.k, cfg.q, steps);
    rc.initial = cfg.initial;
    rc.keep_history = true;
    let out: RunOutput<f64> = run(&march_problem, &rc).map_err(wrap_row(0))?;
    let history = out.history.expect("history requested");
    let tau = out.tau;
    let per_cell = profile_points_per_cell(cfg.k);
    let mut rows = Vec::new();
    for &t in &times {
        let idx = if tau == 0.0 {
            0
        } else {
            (t / tau).round() as usize
        };
        let snap = &history[idx.min(history.len() - 1)];
        let mesh = snap.mesh();
        for j in 0..mesh.num_cells() {
            for i in 0..per_cell {
                let xi = -1.0 + (2 * i + 1) as f64 / per_cell as f64;
                let x = mesh.to_physical(j, xi);
                rows.push((t, x, snap.eval_in_cell(j, xi)));
            }
        }
    }
    let mut meta = metadata(cfg, &problem, "profile", stamp);
    meta.push(("tau".to_string(), format!("{tau:.16e}")));
    Ok(Profile {
        metadata: meta,
        rows,
    })
}

/// Single run with per-step norms and errors.
#[derive(Debug, Clone)]
pub struct SolveSummary {
    pub metadata: Vec<(String, String)>,
    pub tau: f64,
    pub norms: Vec<f64>,
    pub errors: Option<Vec<f64>>,
}

impl SolveSummary {
    /// `n,t,norm,l2_error` rows (error empty without an exact solution).
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str("n,t,norm,l2_error\n");
        for (n, norm) in self.norms.iter().enumerate() {
            let err = self
                .errors
                .as_ref()
                .map(|e| format!("{:.16e}", e[n]))
                .unwrap_or_default();
            s.push_str(&format!(
                "{n},{:.16e},{norm:.16e},{err}\n",
                n as f64 * self.tau
            ));
        }
        s
    }
}

/// Solves on `cells[0]` with `steps[0]` steps.
pub fn run_solve(cfg: &StudyConfig, stamp: &str) -> Result<SolveSummary> {
    cfg.validate()?;
    let problem = cfg.build_problem()?;
    let mut rc = RunConfig::new(cfg.cells[0], cfg.k, cfg.q, cfg.steps[0]);
    rc.initial = cfg.initial;
    rc.step_errors = true;
    let out: RunOutput<f64> = run(&problem, &rc).map_err(wrap_row(0))?;
    Ok(SolveSummary {
        metadata: metadata(cfg, &problem, "solve", stamp),
        tau: out.tau,
        norms: out.norms,
        errors: out.errors,
    })
}
