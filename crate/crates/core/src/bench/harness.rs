//! Benchmark sweeps, Dolan–Moré performance profiles and their CSV tables.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::crossover::solve_with_crossover;
use crate::error::Result;
use crate::ipm::Status;
use crate::model::MpccProblem;
use crate::options::{Algorithm, Options};
use crate::penalty::solve_penalty;
use crate::relax::solve_relaxation;
use crate::result::SolveResult;

/// A named solver configuration.
#[derive(Debug, Clone)]
pub struct BenchSolver {
    pub name: String,
    pub algorithm: Algorithm,
    pub crossover: bool,
    pub options: Options,
}

impl BenchSolver {
    pub fn new(algorithm: Algorithm, options: Options) -> Self {
        BenchSolver {
            name: algorithm.to_string(),
            algorithm,
            crossover: false,
            options,
        }
    }

    pub fn solve(&self, problem: &MpccProblem) -> Result<SolveResult> {
        if self.crossover {
            return solve_with_crossover(problem, self.algorithm, &self.options).map(|(_, c)| c.result);
        }
        match self.algorithm {
            Algorithm::Relaxation => solve_relaxation(problem, &self.options),
            Algorithm::Penalty => solve_penalty(problem, &self.options),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchProblem {
    pub name: String,
    pub problem: MpccProblem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub solver: String,
    pub problem: String,
    pub status: Status,
    pub objective: f64,
    pub wall_time: f64,
    pub iterations: usize,
    pub factorizations: usize,
    /// `‖l‖∞` of the final point.
    pub residual: f64,
    pub comp: f64,
    pub message: Option<String>,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str =
        "solver,problem,status,objective,wall_time,iterations,factorizations,residual,comp";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{},{},{:e},{:e}",
            self.solver,
            self.problem,
            self.status,
            self.objective,
            self.wall_time,
            self.iterations,
            self.factorizations,
            self.residual,
            self.comp
        )
    }
}

pub fn records_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(BenchRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    /// Per-run wall-clock limit in seconds.
    pub timeout: Option<f64>,
    pub workers: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            timeout: None,
            workers: 1,
        }
    }
}

fn run_cell(solver: &BenchSolver, problem: &BenchProblem, timeout: Option<f64>) -> BenchRecord {
    let mut solver = solver.clone();
    if let Some(t) = timeout {
        solver.options.time_limit = Some(solver.options.time_limit.map_or(t, |l| l.min(t)));
    }
    let start = Instant::now();
    let res = solver.solve(&problem.problem);
    let wall_time = start.elapsed().as_secs_f64();
    let mut rec = match res {
        Ok(r) => BenchRecord {
            solver: solver.name.clone(),
            problem: problem.name.clone(),
            status: r.status,
            objective: r.objective,
            wall_time,
            iterations: r.iterations,
            factorizations: r.factorizations,
            residual: r.report.overall,
            comp: r.comp_residual,
            message: r.message,
        },
        Err(e) => BenchRecord {
            solver: solver.name.clone(),
            problem: problem.name.clone(),
            status: Status::Failure,
            objective: f64::NAN,
            wall_time,
            iterations: 0,
            factorizations: 0,
            residual: f64::NAN,
            comp: f64::NAN,
            message: Some(e.to_string()),
        },
    };
    if timeout.is_some_and(|t| wall_time > t) && rec.status == Status::Success {
        rec.status = Status::Failure;
        rec.message = Some("time limit exceeded".into());
    }
    rec
}

/// Runs every (solver, problem) cell. Records come back ordered by problem,
/// then solver, whatever the worker count; errors become `failure` records.
pub fn run_bench(solvers: &[BenchSolver], problems: &[BenchProblem], opts: &BenchOptions) -> Vec<BenchRecord> {
    let cells: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..solvers.len()).map(move |s| (p, s)))
        .collect();
    let workers = opts.workers.max(1).min(cells.len().max(1));
    if workers == 1 {
        return cells
            .iter()
            .map(|&(p, s)| run_cell(&solvers[s], &problems[p], opts.timeout))
            .collect();
    }
    let mut slots: Vec<Option<BenchRecord>> = vec![None; cells.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        let Some(&(p, s)) = cells.get(k) else { break };
                        done.push((k, run_cell(&solvers[s], &problems[p], opts.timeout)));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (k, rec) in h.join().expect("bench worker panicked") {
                slots[k] = Some(rec);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every cell ran")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMetric {
    WallTime,
    Iterations,
}

impl std::str::FromStr for ProfileMetric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "time" | "wall_time" => Ok(ProfileMetric::WallTime),
            "iterations" => Ok(ProfileMetric::Iterations),
            _ => Err(format!("unknown profile metric `{s}` (expected time|iterations)")),
        }
    }
}

/// Dolan–Moré profile: `ratios[s][p]` is solver `s`'s metric on problem `p`
/// over the best solver's, `∞` for a failed run.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceProfile {
    pub solvers: Vec<String>,
    pub problems: Vec<String>,
    pub ratios: Vec<Vec<f64>>,
    /// Problems no solver solved; they are left out of the profile.
    pub excluded: Vec<String>,
}

impl PerformanceProfile {
    /// Fraction of problems solver `s` solves within factor `theta`.
    pub fn fraction(&self, s: usize, theta: f64) -> f64 {
        if self.problems.is_empty() {
            return 0.0;
        }
        let k = self.ratios[s].iter().filter(|&&r| r <= theta).count();
        k as f64 / self.problems.len() as f64
    }

    /// Breakpoints of all curves: 1 and every finite ratio, sorted.
    pub fn thetas(&self) -> Vec<f64> {
        let mut t: Vec<f64> = std::iter::once(1.0)
            .chain(self.ratios.iter().flatten().copied().filter(|r| r.is_finite()))
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    /// `theta,<solver>,...` table at the breakpoints.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("theta");
        for s in &self.solvers {
            let _ = write!(out, ",{s}");
        }
        out.push('\n');
        for theta in self.thetas() {
            let _ = write!(out, "{theta:e}");
            for s in 0..self.solvers.len() {
                let _ = write!(out, ",{}", self.fraction(s, theta));
            }
            out.push('\n');
        }
        for p in &self.excluded {
            let _ = writeln!(out, "# excluded {p}: no solver succeeded");
        }
        out
    }
}

fn metric(r: &BenchRecord, m: ProfileMetric) -> f64 {
    match m {
        // a zero count would make every ratio infinite
        ProfileMetric::Iterations => (r.iterations as f64).max(1.0),
        ProfileMetric::WallTime => r.wall_time.max(1e-9),
    }
}

/// Profile over the records; solvers and problems keep first-seen order.
pub fn performance_profile(records: &[BenchRecord], m: ProfileMetric) -> PerformanceProfile {
    let mut solvers: Vec<String> = Vec::new();
    let mut problems: Vec<String> = Vec::new();
    for r in records {
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver.clone());
        }
        if !problems.contains(&r.problem) {
            problems.push(r.problem.clone());
        }
    }
    let value = |s: &str, p: &str| -> f64 {
        records
            .iter()
            .find(|r| r.solver == s && r.problem == p && r.status == Status::Success)
            .map_or(f64::INFINITY, |r| metric(r, m))
    };
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    let mut ratios = vec![Vec::new(); solvers.len()];
    for p in &problems {
        let vals: Vec<f64> = solvers.iter().map(|s| value(s, p)).collect();
        let best = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            excluded.push(p.clone());
            continue;
        }
        kept.push(p.clone());
        for (s, v) in vals.into_iter().enumerate() {
            ratios[s].push(v / best);
        }
    }
    PerformanceProfile {
        solvers,
        problems: kept,
        ratios,
        excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(solver: &str, problem: &str, status: Status, iterations: usize) -> BenchRecord {
        BenchRecord {
            solver: solver.into(),
            problem: problem.into(),
            status,
            objective: 0.0,
            wall_time: 0.0,
            iterations,
            factorizations: 0,
            residual: 0.0,
            comp: 0.0,
            message: None,
        }
    }

    #[test]
    fn single_solver_is_flat() {
        let recs = vec![
            rec("a", "p", Status::Success, 3),
            rec("a", "q", Status::MaxIter, 3),
            rec("a", "r", Status::Success, 7),
        ];
        let prof = performance_profile(&recs, ProfileMetric::Iterations);
        assert_eq!(prof.excluded, vec!["q".to_string()]);
        assert_eq!(prof.fraction(0, 1.0), 1.0);
        assert_eq!(prof.fraction(0, 100.0), 1.0);
    }

    #[test]
    fn dominated_solver_reaches_one_at_two() {
        let mut recs = Vec::new();
        for (p, it) in [("p", 3), ("q", 5), ("r", 11)] {
            recs.push(rec("fast", p, Status::Success, it));
            recs.push(rec("slow", p, Status::Success, 2 * it));
        }
        let prof = performance_profile(&recs, ProfileMetric::Iterations);
        assert_eq!(prof.fraction(1, 2.0 - 1e-12), 0.0);
        assert_eq!(prof.fraction(1, 2.0), 1.0);
        assert_eq!(prof.fraction(0, 1.0), 1.0);
    }

    #[test]
    fn failures_never_count() {
        let recs = vec![rec("a", "p", Status::Success, 1), rec("b", "p", Status::Stalled, 1)];
        let prof = performance_profile(&recs, ProfileMetric::Iterations);
        assert_eq!(prof.fraction(1, f64::MAX), 0.0);
        let t = prof.thetas();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(t.iter().all(|&th| (0..2).all(|s| (0.0..=1.0).contains(&prof.fraction(s, th)))));
    }
}
