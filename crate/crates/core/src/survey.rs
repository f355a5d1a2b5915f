//! Multistart census of critical values: clustering by energy, the
//! `J(N-1)` estimate and the threshold counts.
//!
//! Start `k` draws its guess from stream `k` of the configured seed, so any
//! subset of starts can be run anywhere and in any order; reports are built
//! from records sorted by start index.

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::integrals::IntegralTables;
use crate::scf::{scf_solve, Guess, Outcome, ScfOptions};

/// Slack of the `E - ε_N ≥ J_est` audit.
pub const AUDIT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyConfig {
    pub n_starts: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub cluster_tol: f64,
    /// Start 0 uses the core guess instead of a random one.
    pub core_first: bool,
    pub scf: ScfOptions,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        Self { n_starts: 100, seed: 0, epsilon: 1e-3, cluster_tol: 1e-6, core_first: false, scf: ScfOptions::default() }
    }
}

impl SurveyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts < 1 {
            return Err(Error::InvalidOption("n_starts must be at least 1"));
        }
        if !(self.cluster_tol > 0.0) {
            return Err(Error::InvalidOption("cluster_tol must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::NonPositiveEpsilon(self.epsilon));
        }
        self.scf.validate()
    }

    pub fn guess(&self, start: usize) -> Guess {
        if self.core_first && start == 0 {
            Guess::Core
        } else {
            Guess::Random { seed: self.seed, stream: start as u64 }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Oscillating,
    MaxIter,
    /// The run aborted with a numerical error.
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::Oscillating => "oscillating",
            RunStatus::MaxIter => "max_iter",
            RunStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub start: usize,
    pub status: RunStatus,
    pub iterations: usize,
    /// Certified values, present when converged.
    pub energy: Option<f64>,
    pub orbital_energies: Option<DVector<f64>>,
    pub residual: Option<f64>,
    pub degenerate: bool,
    pub cluster: Option<usize>,
}

pub fn run_start(tables: &IntegralTables, n_orbitals: usize, config: &SurveyConfig, start: usize) -> RunRecord {
    let mut rec = RunRecord {
        start,
        status: RunStatus::Failed,
        iterations: 0,
        energy: None,
        orbital_energies: None,
        residual: None,
        degenerate: false,
        cluster: None,
    };
    let Ok(res) = scf_solve(tables, n_orbitals, &config.scf, config.guess(start)) else {
        return rec;
    };
    rec.iterations = res.trace.records.len();
    rec.status = match res.outcome {
        Outcome::Converged => RunStatus::Converged,
        Outcome::Oscillating => RunStatus::Oscillating,
        Outcome::MaxIter => RunStatus::MaxIter,
    };
    if let Some(cp) = res.critical_point {
        rec.energy = Some(cp.energy);
        rec.residual = Some(cp.residual);
        rec.degenerate = cp.degenerate;
        rec.orbital_energies = Some(cp.orbitals.energies);
    }
    rec
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Lowest member energy.
    pub energy: f64,
    pub multiplicity: usize,
    /// Orbital energies of the representative.
    pub orbital_energies: DVector<f64>,
    /// Smallest and largest orbital energy over all members.
    pub min_eps: f64,
    pub max_eps: f64,
    pub degenerate: bool,
    /// `E - ε_N < J_est - slack`: an `N-1` minimum below `J_est` must exist.
    pub audit_flag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyReport {
    pub runs: Vec<RunRecord>,
    pub clusters: Vec<Cluster>,
    /// `None` when no `N-1` run converged.
    pub j_est: Option<f64>,
    pub epsilon: f64,
    pub gamma_count: usize,
    pub below_count: usize,
    pub converged: usize,
    pub oscillating: usize,
    pub max_iter: usize,
    pub failed: usize,
}

impl SurveyReport {
    /// Every below-threshold cluster also has `ε_N < -ε`.
    pub fn census_contract_holds(&self) -> bool {
        let j = match self.j_est {
            Some(j) => j,
            None => return true,
        };
        self.clusters.iter().filter(|c| c.energy < j - self.epsilon).all(|c| c.max_eps < -self.epsilon)
    }

    pub fn audit_flags(&self) -> usize {
        self.clusters.iter().filter(|c| c.audit_flag).count()
    }
}

/// Sorts by start, clusters certified energies (single linkage on gaps
/// larger than `cluster_tol`) and fills the census.
pub fn assemble_report(mut runs: Vec<RunRecord>, config: &SurveyConfig, j_est: Option<f64>) -> SurveyReport {
    runs.sort_by_key(|r| r.start);
    let mut order: Vec<usize> = (0..runs.len()).filter(|&k| runs[k].energy.is_some()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (runs[a].energy.unwrap_or(0.0), runs[b].energy.unwrap_or(0.0));
        ea.total_cmp(&eb).then(runs[a].start.cmp(&runs[b].start))
    });
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &k in &order {
        let e = runs[k].energy.unwrap_or(0.0);
        let eps = runs[k].orbital_energies.clone().unwrap_or_else(|| DVector::zeros(0));
        let lo = eps.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let hi = eps.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        if clusters.is_empty() || e - last > config.cluster_tol {
            clusters.push(Cluster {
                energy: e,
                multiplicity: 0,
                orbital_energies: eps,
                min_eps: lo,
                max_eps: hi,
                degenerate: false,
                audit_flag: false,
            });
        }
        let id = clusters.len() - 1;
        let c = &mut clusters[id];
        c.multiplicity += 1;
        c.min_eps = c.min_eps.min(lo);
        c.max_eps = c.max_eps.max(hi);
        c.degenerate |= runs[k].degenerate;
        runs[k].cluster = Some(id);
        last = e;
    }
    let j_ref = j_est.unwrap_or(f64::NEG_INFINITY);
    for c in &mut clusters {
        let eps_n = c.orbital_energies.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        c.audit_flag = j_est.is_some() && c.energy - eps_n < j_ref - AUDIT_SLACK;
    }
    let (gamma_count, below_count) = threshold_census(&clusters, j_est, config.epsilon);
    let count = |s: RunStatus| runs.iter().filter(|r| r.status == s).count();
    SurveyReport {
        converged: count(RunStatus::Converged),
        oscillating: count(RunStatus::Oscillating),
        max_iter: count(RunStatus::MaxIter),
        failed: count(RunStatus::Failed),
        runs,
        clusters,
        j_est,
        epsilon: config.epsilon,
        gamma_count,
        below_count,
    }
}

/// `(clusters with max ε_i < -ε, clusters with E < J_est - ε)`.
pub fn threshold_census(clusters: &[Cluster], j_est: Option<f64>, epsilon: f64) -> (usize, usize) {
    let gamma = clusters.iter().filter(|c| c.max_eps < -epsilon).count();
    let below = match j_est {
        Some(j) => clusters.iter().filter(|c| c.energy < j - epsilon).count(),
        None => 0,
    };
    (gamma, below)
}

/// Minimum certified `N-1` energy over the same starts; `Some(0)` for `N = 1`.
pub fn estimate_ionization_floor(tables: &IntegralTables, n_orbitals: usize, config: &SurveyConfig) -> Option<f64> {
    if n_orbitals <= 1 {
        return Some(0.0);
    }
    let runs: Vec<RunRecord> = (0..config.n_starts).map(|k| run_start(tables, n_orbitals - 1, config, k)).collect();
    floor_from_runs(&runs)
}

pub fn floor_from_runs(runs: &[RunRecord]) -> Option<f64> {
    runs.iter().filter_map(|r| r.energy).fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))))
}

/// Sequential survey; the std companion runs the same starts in parallel.
pub fn run_survey(tables: &IntegralTables, n_orbitals: usize, config: &SurveyConfig) -> Result<SurveyReport> {
    config.validate()?;
    let j_est = estimate_ionization_floor(tables, n_orbitals, config);
    let runs = (0..config.n_starts).map(|k| run_start(tables, n_orbitals, config, k)).collect();
    Ok(assemble_report(runs, config, j_est))
}
