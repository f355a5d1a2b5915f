//! The five commands as library functions: each takes input text and flags
//! and returns a report, a companion CSV and an exit status.

use hflab_core::radial::{
    decay_fit, farfield_q_check, h2norm_report, radial_scf, weighted_tail_norm, RadialGrid, RadialOptions,
    DEFAULT_POINTS, DEFAULT_R_MAX, DEFAULT_R_MIN,
};
use hflab_core::scf::{koopmans_check, orbital_energy_bound_check, scf_solve, Guess, Outcome, ScfOptions, ScfResult};
use hflab_core::spectra::{
    assemble_hessian, default_epsilon, directional_check, lm_certificate, paired_hessian, rq_identity_check,
    rs_positivity_check, PerturbationW,
};
use hflab_core::survey::SurveyConfig;
use hflab_core::{Convention, IntegralTables};
use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use crate::input::{echo, parse_input, RunInput};
use crate::parallel::run_survey_parallel;
use crate::report::{finite, RunReport};
use crate::tables::{survey_csv, tail_csv, trace_csv};
use crate::InputError;

/// Process exit status; the numeric values are a stable contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Failure = 1,
    Oscillation = 2,
    MaxIter = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn from_outcome(o: Outcome) -> Self {
        match o {
            Outcome::Converged => Exit::Ok,
            Outcome::Oscillating => Exit::Oscillation,
            Outcome::MaxIter => Exit::MaxIter,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Compute(hflab_core::Error),
    #[error("radial solve failed: {0}")]
    Radial(hflab_core::Error),
}

impl From<hflab_core::Error> for CommandError {
    fn from(e: hflab_core::Error) -> Self {
        CommandError::Compute(e)
    }
}

impl CommandError {
    pub fn exit(&self) -> Exit {
        match self {
            CommandError::Radial(_) => Exit::Oscillation,
            _ => Exit::Failure,
        }
    }
}

/// Flags shared by every command; `None` falls back to the input document,
/// then to library defaults.
#[derive(Debug, Clone, Default)]
pub struct CommonFlags {
    pub tol_energy: Option<f64>,
    pub tol_commutator: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub seed: Option<u64>,
    pub standard_units: bool,
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: RunReport,
    pub exit: Exit,
    /// Trace, per-run or tail-profile CSV, depending on the command.
    pub companion_csv: Option<String>,
}

fn scf_options(flags: &CommonFlags, input: &RunInput) -> ScfOptions {
    let d = ScfOptions::default();
    let o = &input.options;
    ScfOptions {
        max_iter: flags.max_iter.or(o.max_iter).unwrap_or(d.max_iter),
        tol_energy: flags.tol_energy.or(o.tol_energy).unwrap_or(d.tol_energy),
        tol_commutator: flags.tol_commutator.or(o.tol_commutator).unwrap_or(d.tol_commutator),
        damping: flags.damping.or(o.damping).unwrap_or(d.damping),
        ..d
    }
}

fn seed(flags: &CommonFlags, input: &RunInput) -> Option<u64> {
    flags.seed.or(input.options.seed)
}

fn tables(input: &RunInput) -> IntegralTables {
    IntegralTables::compute(&input.molecule, &input.basis, Convention::Paper)
}

fn vec_value(v: &DVector<f64>) -> Value {
    json!(v.iter().map(|&x| finite(x)).collect::<Vec<_>>())
}

fn doubled(v: &DVector<f64>) -> Value {
    vec_value(&(v * 2.0))
}

fn solve(input: &RunInput, flags: &CommonFlags) -> Result<(IntegralTables, ScfResult, Guess), CommandError> {
    let t = tables(input);
    let guess = match seed(flags, input) {
        Some(s) => Guess::Random { seed: s, stream: 0 },
        None => Guess::Core,
    };
    let res = scf_solve(&t, input.molecule.n_electrons(), &scf_options(flags, input), guess)?;
    Ok((t, res, guess))
}

fn seeds_value(guess: Guess) -> Value {
    match guess {
        Guess::Core => json!({ "guess": "core", "seed": null }),
        Guess::Random { seed, stream } => json!({ "guess": "random", "seed": seed, "stream": stream }),
    }
}

pub fn cmd_scf(input_text: &str, flags: &CommonFlags) -> Result<CommandOutput, CommandError> {
    let input = parse_input(input_text)?;
    let n_orb = input.molecule.n_electrons();
    let (t, res, guess) = solve(&input, flags)?;
    let mut results = json!({
        "outcome": res.outcome.as_str(),
        "iterations": res.trace.records.len(),
        "overlap_condition": finite(t.overlap_condition()),
        "max_bivariate_increase": finite(res.trace.max_bivariate_increase()),
        "n_orbitals": n_orb,
    });
    let mut standard = None;
    match &res.critical_point {
        Some(cp) => {
            let k = koopmans_check(cp, &t);
            let bound = orbital_energy_bound_check(cp, &t)?;
            let r = results.as_object_mut().expect("object");
            r.insert("energy".into(), json!(finite(cp.energy)));
            r.insert("orbital_energies".into(), vec_value(&cp.orbitals.energies));
            r.insert("residual".into(), json!(finite(cp.residual)));
            r.insert("degenerate".into(), json!(cp.degenerate));
            r.insert(
                "koopmans".into(),
                json!({
                    "residual": finite(k.residual),
                    "ionization_potential": finite(k.ionization_potential),
                    "eps_n": finite(k.eps_n),
                }),
            );
            r.insert("orbital_energy_bound".into(), json!({ "margin": finite(bound), "holds": bound >= -1e-10 }));
            if flags.standard_units {
                standard = Some(json!({
                    "energy": finite(2.0 * cp.energy),
                    "orbital_energies": doubled(&cp.orbitals.energies),
                    "ionization_potential": finite(2.0 * k.ionization_potential),
                }));
            }
        }
        None => {
            let last = res.trace.records.last();
            let r = results.as_object_mut().expect("object");
            r.insert("energy".into(), json!(last.and_then(|l| finite(l.energy))));
            r.insert("orbital_energies".into(), vec_value(&res.last.energies));
            r.insert("commutator".into(), json!(last.and_then(|l| finite(l.commutator))));
        }
    }
    Ok(CommandOutput {
        report: RunReport {
            command: "scf",
            input: echo(&input),
            results,
            seeds: seeds_value(guess),
            standard_units: standard,
        },
        exit: Exit::from_outcome(res.outcome),
        companion_csv: Some(trace_csv(&res.trace, n_orb)),
    })
}

#[derive(Debug, Clone)]
pub struct SurveyFlags {
    pub starts: usize,
    pub epsilon: f64,
    pub cluster_tol: f64,
}

impl Default for SurveyFlags {
    fn default() -> Self {
        let d = SurveyConfig::default();
        Self { starts: d.n_starts, epsilon: d.epsilon, cluster_tol: d.cluster_tol }
    }
}

pub fn cmd_survey(input_text: &str, flags: &CommonFlags, survey: &SurveyFlags) -> Result<CommandOutput, CommandError> {
    let input = parse_input(input_text)?;
    let n_orb = input.molecule.n_electrons();
    let t = tables(&input);
    let seed = seed(flags, &input).unwrap_or(0);
    let config = SurveyConfig {
        n_starts: survey.starts,
        seed,
        epsilon: survey.epsilon,
        cluster_tol: survey.cluster_tol,
        core_first: false,
        scf: scf_options(flags, &input),
    };
    let rep = run_survey_parallel(&t, n_orb, &config)?;
    let clusters: Vec<Value> = rep
        .clusters
        .iter()
        .map(|c| {
            json!({
                "energy": finite(c.energy),
                "multiplicity": c.multiplicity,
                "orbital_energies": vec_value(&c.orbital_energies),
                "min_eps": finite(c.min_eps),
                "max_eps": finite(c.max_eps),
                "degenerate": c.degenerate,
                "unexplored_n_minus_1_minimum": c.audit_flag,
            })
        })
        .collect();
    let results = json!({
        "n_starts": config.n_starts,
        "epsilon": config.epsilon,
        "cluster_tol": config.cluster_tol,
        "j_est": rep.j_est.and_then(finite),
        "gamma_census": rep.gamma_count,
        "below_threshold_census": rep.below_count,
        "census_contract_holds": rep.census_contract_holds(),
        "audit_flags": rep.audit_flags(),
        "clusters": clusters,
        "failures": {
            "converged": rep.converged,
            "oscillating": rep.oscillating,
            "max_iter": rep.max_iter,
            "failed": rep.failed,
        },
    });
    let standard = flags.standard_units.then(|| {
        json!({
            "j_est": rep.j_est.map(|j| 2.0 * j).and_then(finite),
            "cluster_energies": rep.clusters.iter().map(|c| finite(2.0 * c.energy)).collect::<Vec<_>>(),
        })
    });
    Ok(CommandOutput {
        companion_csv: Some(survey_csv(&rep, seed, n_orb)),
        report: RunReport {
            command: "survey",
            input: echo(&input),
            results,
            seeds: json!({ "seed": seed, "streams": format!("0..{}", config.n_starts) }),
            standard_units: standard,
        },
        exit: Exit::Ok,
    })
}

/// `--epsilon-split`: the default `ε* = min(-ε_i)`, a fixed value, or the
/// sweep `{0.5, 1, 1.5}·ε*`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EpsilonSplit {
    #[default]
    Default,
    Value(f64),
    Sweep,
}

impl std::str::FromStr for EpsilonSplit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "sweep" => Ok(EpsilonSplit::Sweep),
            "default" => Ok(EpsilonSplit::Default),
            v => match v.parse::<f64>() {
                Ok(x) if x > 0.0 && x.is_finite() => Ok(EpsilonSplit::Value(x)),
                _ => Err(format!("expected a positive number or `sweep`, got `{s}`")),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct HessianFlags {
    pub epsilon_split: EpsilonSplit,
    /// Random directions for the derivative and identity checks.
    pub directions: usize,
}

impl Default for HessianFlags {
    fn default() -> Self {
        Self { epsilon_split: EpsilonSplit::Default, directions: 20 }
    }
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn cmd_hessian(input_text: &str, flags: &CommonFlags, hess: &HessianFlags) -> Result<CommandOutput, CommandError> {
    let input = parse_input(input_text)?;
    let (t, res, guess) = solve(&input, flags)?;
    let exit = Exit::from_outcome(res.outcome);
    let Some(cp) = res.critical_point.as_ref() else {
        let message = format!("SCF did not converge ({})", res.outcome.as_str());
        return Ok(precondition_output(&input, guess, exit, message));
    };
    let n = t.n();
    let n_orb = cp.orbitals.n_orbitals();
    let eps_star = default_epsilon(&cp.orbitals.energies)?;
    let epsilons: Vec<f64> = match hess.epsilon_split {
        EpsilonSplit::Default => vec![eps_star],
        EpsilonSplit::Value(x) => vec![x],
        EpsilonSplit::Sweep => vec![0.5 * eps_star, eps_star, 1.5 * eps_star],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed(flags, &input).unwrap_or(0));

    let positivity = rs_positivity_check(&cp.orbitals, &t)?;
    let mut rq_first = None;
    let mut rq_max_disc = 0.0f64;
    let mut rq_min = f64::INFINITY;
    for _ in 0..hess.directions {
        let w = PerturbationW { w: gaussian(&mut rng, n, n_orb), de: DVector::zeros(n_orb) };
        let id = rq_identity_check(&cp.orbitals, &w, &t);
        rq_first.get_or_insert(id);
        rq_max_disc = rq_max_disc.max(id.max_discrepancy());
        rq_min = rq_min.min(id.operator.min(id.bracket).min(id.pair_integral));
    }

    let mut certificates = Vec::new();
    let mut all_pass = true;
    for &eps in &epsilons {
        let blocks = assemble_hessian(cp, &t, eps)?;
        let cert = lm_certificate(&blocks)?;
        let mut fd_max = 0.0f64;
        let mut richardson = 0usize;
        for _ in 0..hess.directions {
            let dir = PerturbationW { w: gaussian(&mut rng, n, n_orb), de: gaussian(&mut rng, n_orb, 1).column(0).into() };
            let c = directional_check(&blocks, &t, &dir, 1e-6)?;
            fd_max = fd_max.max(c.relative_error);
            richardson += c.richardson as usize;
        }
        let paired = paired_hessian(&blocks);
        let asym = (&paired - paired.transpose()).abs().max();
        let pass = cert.l_bound_holds() && cert.h2_rank_holds(n_orb) && cert.m_count_holds() && fd_max <= 1e-6;
        all_pass &= pass;
        certificates.push(json!({
            "epsilon": finite(eps),
            "eps_half": finite(eps / 2.0),
            "min_eig_lcal": finite(cert.min_eig_lcal),
            "L_min_eig": finite(cert.min_eig_l),
            "L_min_eig_ge_eps_half": cert.l_bound_holds(),
            "ranks": {
                "Scal": cert.ranks.scal,
                "Sbar": cert.ranks.sbar,
                "Sbar_t": cert.ranks.sbar_t,
                "H2": cert.ranks.h2,
                "projector": cert.ranks.projector,
                "M": cert.ranks.m_full,
            },
            "m_rank_bound": cert.m_rank_bound,
            "m_count_holds": cert.m_count_holds(),
            "h2_rank_holds": cert.h2_rank_holds(n_orb),
            "m_spectrum": cert.m_spectrum.iter().map(|&x| finite(x)).collect::<Vec<_>>(),
            "reassembly_error": finite(cert.reassembly_error),
            "hcal_split_error": finite(cert.hcal_split_error),
            "finite_difference": {
                "directions": hess.directions,
                "max_relative_error": finite(fd_max),
                "richardson_used": richardson,
            },
            "paired_hessian_asymmetry": finite(asym),
            "passes": pass,
        }));
    }
    let rq = rq_first.map_or(json!([0.0, 0.0]), |id| json!([finite(id.operator), finite(id.bracket)]));
    let results = json!({
        "energy": finite(cp.energy),
        "orbital_energies": vec_value(&cp.orbitals.energies),
        "eps_star": finite(eps_star),
        "certificates": certificates,
        "all_certificates_pass": all_pass,
        "identities": {
            "rs_min_eig": finite(positivity.min_rs),
            "qs_min_eig": finite(positivity.min_overall),
            "rq_identity": rq,
            "rq_max_discrepancy": finite(rq_max_disc),
            "rq_min_value": finite(if rq_min.is_finite() { rq_min } else { 0.0 }),
        },
    });
    let standard = flags.standard_units.then(|| {
        json!({ "energy": finite(2.0 * cp.energy), "orbital_energies": doubled(&cp.orbitals.energies) })
    });
    Ok(CommandOutput {
        report: RunReport {
            command: "hessian",
            input: echo(&input),
            results,
            seeds: json!({ "scf": seeds_value(guess), "directions": seed(flags, &input).unwrap_or(0) }),
            standard_units: standard,
        },
        exit,
        companion_csv: Some(trace_csv(&res.trace, n_orb)),
    })
}

/// Report for a command whose SCF precondition failed; carries the SCF exit.
fn precondition_output(input: &RunInput, guess: Guess, exit: Exit, message: String) -> CommandOutput {
    CommandOutput {
        report: RunReport {
            command: "hessian",
            input: echo(input),
            results: json!({ "error": message }),
            seeds: seeds_value(guess),
            standard_units: None,
        },
        exit,
        companion_csv: None,
    }
}

#[derive(Debug, Clone)]
pub struct RadialFlags {
    pub z: u32,
    pub n: usize,
    pub r_max: f64,
    pub points: usize,
    pub window: Option<(f64, f64)>,
}

impl Default for RadialFlags {
    fn default() -> Self {
        Self { z: 1, n: 1, r_max: DEFAULT_R_MAX, points: DEFAULT_POINTS, window: None }
    }
}

pub fn cmd_radial(radial: &RadialFlags, flags: &CommonFlags) -> Result<CommandOutput, CommandError> {
    let grid = RadialGrid::new(DEFAULT_R_MIN, radial.r_max, radial.points)?;
    let d = RadialOptions::default();
    let opts = RadialOptions {
        max_iter: flags.max_iter.unwrap_or(d.max_iter),
        tol_energy: flags.tol_energy.unwrap_or(d.tol_energy),
        damping: flags.damping.unwrap_or(d.damping),
        ..d
    };
    let orbs = radial_scf(radial.z, radial.n, &grid, &opts).map_err(CommandError::Radial)?;
    let slopes = decay_fit(&orbs, radial.window)?;
    let eps_min = orbs.energies.iter().map(|e| -e).fold(f64::INFINITY, f64::min);
    let eps_tilde = 0.9 * eps_min;
    let decay_bound = -eps_tilde.sqrt() + 0.02;
    let ff = farfield_q_check(&orbs, 20.0);
    let wn = weighted_tail_norm(&orbs, eps_tilde);
    let ovl = orbs.overlap();
    let ortho_err = (&ovl - DMatrix::identity(radial.n, radial.n)).abs().max();
    let results = json!({
        "Z": radial.z,
        "N": radial.n,
        "grid": { "r_min": grid.r_min(), "r_max": grid.r_max(), "n_points": grid.n_points() },
        "energy": finite(orbs.total_energy),
        "orbital_energies": vec_value(&orbs.energies),
        "iterations": orbs.iterations,
        "orthonormality_error": finite(ortho_err),
        "boundary_amplitude": finite(orbs.boundary_amplitude()),
        "kinetic_expectations": orbs.kinetic_expectations().iter().map(|&x| finite(x)).collect::<Vec<_>>(),
        "nuclear_expectations": orbs.nuclear_expectations().iter().map(|&x| finite(x)).collect::<Vec<_>>(),
        "decay": {
            "slopes": slopes.iter().map(|&x| finite(x)).collect::<Vec<_>>(),
            "eps_tilde": finite(eps_tilde),
            "bound": finite(decay_bound),
            "holds": slopes.iter().all(|&s| s <= decay_bound),
        },
        "weighted_tail_norm": { "value": finite(wn.value), "tail_fraction": finite(wn.tail_fraction) },
        "farfield": {
            "r_tail": ff.r_tail,
            "newton_deviation": finite(ff.newton_deviation),
            "newton_monotone": ff.newton_monotone,
            "bound_margin": finite(ff.bound_margin),
            "offdiag_rq": finite(ff.offdiag_rq),
        },
        "h2norm": h2norm_report(&orbs).iter().map(|&x| finite(x)).collect::<Vec<_>>(),
    });
    let standard = flags.standard_units.then(|| {
        json!({ "energy": finite(2.0 * orbs.total_energy), "orbital_energies": doubled(&orbs.energies) })
    });
    Ok(CommandOutput {
        companion_csv: Some(tail_csv(&orbs)),
        report: RunReport {
            command: "radial",
            input: json!({ "Z": radial.z, "N": radial.n, "window": radial.window.map(|(a, b)| [a, b]) }),
            results,
            seeds: Value::Null,
            standard_units: standard,
        },
        exit: Exit::Ok,
    })
}

/// Binary integral dump of the input's tables.
pub fn cmd_dump_integrals(input_text: &str) -> Result<Vec<u8>, CommandError> {
    let input = parse_input(input_text)?;
    Ok(crate::dump::to_bytes(&tables(&input)))
}
