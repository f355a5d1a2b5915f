use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hflab::commands::{
    cmd_dump_integrals, cmd_hessian, cmd_radial, cmd_scf, cmd_survey, CommandError, CommandOutput, CommonFlags,
    EpsilonSplit, Exit, HessianFlags, RadialFlags, SurveyFlags,
};
use hflab_core::radial::{DEFAULT_POINTS, DEFAULT_R_MAX};
use hflab_core::survey::SurveyConfig;

#[derive(Parser)]
#[command(name = "hflab", version, about = "Hartree-Fock functional laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Companion CSV: SCF trace, per-run survey rows or radial tail profile.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    #[arg(long, global = true)]
    tol_energy: Option<f64>,
    #[arg(long, global = true)]
    tol_commutator: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    damping: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also print energies doubled (standard quantum-chemistry units).
    #[arg(long, global = true)]
    standard_units: bool,
}

impl Common {
    fn flags(&self) -> CommonFlags {
        CommonFlags {
            tol_energy: self.tol_energy,
            tol_commutator: self.tol_commutator,
            max_iter: self.max_iter,
            damping: self.damping,
            seed: self.seed,
            standard_units: self.standard_units,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Self-consistent field run with Koopmans and orbital-energy checks.
    Scf {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Multistart survey of critical values with threshold censuses.
    Survey {
        input: PathBuf,
        #[arg(long, default_value_t = SurveyConfig::default().n_starts)]
        starts: usize,
        #[arg(long, default_value_t = SurveyConfig::default().epsilon)]
        epsilon: f64,
        #[arg(long, default_value_t = SurveyConfig::default().cluster_tol)]
        cluster_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// L + M certificates, identity residuals and derivative checks.
    Hessian {
        input: PathBuf,
        /// Positive number, `default` (min of -eps_i) or `sweep`.
        #[arg(long, default_value = "default")]
        epsilon_split: EpsilonSplit,
        #[arg(long, default_value_t = 20)]
        directions: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Radial finite-difference solve for an s-only atom.
    Radial {
        #[arg(long = "Z")]
        z: u32,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        rmax: f64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        /// Decay-fit window `lo,hi`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
        #[command(flatten)]
        common: Common,
    },
    /// Binary dump of the integral tables.
    DumpIntegrals {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    Ok((lo, hi))
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn fail(message: &str, exit: Exit) -> ExitCode {
    // one line, whatever the underlying error looked like
    eprintln!("hflab: {}", message.replace('\n', " "));
    ExitCode::from(exit.code() as u8)
}

fn emit(result: Result<CommandOutput, CommandError>, common: &Common) -> ExitCode {
    let out = match result {
        Ok(o) => o,
        Err(e) => return fail(&e.to_string(), e.exit()),
    };
    if let (Some(path), Some(csv)) = (&common.trace, &out.companion_csv) {
        if let Err(e) = fs::write(path, csv) {
            return fail(&format!("{}: {e}", path.display()), Exit::Failure);
        }
    }
    if let Err(e) = write_out(common.out.as_deref(), out.report.to_json().as_bytes()) {
        return fail(&e.to_string(), Exit::Failure);
    }
    ExitCode::from(out.exit.code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            return fail(msg.lines().next().unwrap_or("bad arguments"), Exit::Failure);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match cli.command {
        Command::Scf { input, common } => match read(&input) {
            Ok(text) => emit(cmd_scf(&text, &common.flags()), &common),
            Err(m) => fail(&m, Exit::Failure),
        },
        Command::Survey { input, starts, epsilon, cluster_tol, common } => match read(&input) {
            Ok(text) => {
                let s = SurveyFlags { starts, epsilon, cluster_tol };
                emit(cmd_survey(&text, &common.flags(), &s), &common)
            }
            Err(m) => fail(&m, Exit::Failure),
        },
        Command::Hessian { input, epsilon_split, directions, common } => match read(&input) {
            Ok(text) => {
                let h = HessianFlags { epsilon_split, directions };
                emit(cmd_hessian(&text, &common.flags(), &h), &common)
            }
            Err(m) => fail(&m, Exit::Failure),
        },
        Command::Radial { z, n, rmax, points, window, common } => {
            let r = RadialFlags { z, n, r_max: rmax, points, window };
            emit(cmd_radial(&r, &common.flags()), &common)
        }
        Command::DumpIntegrals { input, common } => {
            let bytes = read(&input).map_err(|m| (m, Exit::Failure)).and_then(|text| {
                cmd_dump_integrals(&text).map_err(|e| (e.to_string(), e.exit()))
            });
            match bytes {
                Ok(b) => match write_out(common.out.as_deref(), &b) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(&e.to_string(), Exit::Failure),
                },
                Err((m, exit)) => fail(&m, exit),
            }
        }
    }
}
