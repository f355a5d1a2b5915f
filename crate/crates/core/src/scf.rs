//! Plain Roothaan iteration with Aufbau selection, convergence and
//! oscillation detection, and certification of the limit.

use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hfcore::{build_fock, density_matrix, energy_with_fock, hf_energy, FockMatrices, OrbitalSet};
use crate::integrals::IntegralTables;
use crate::linalg::{frobenius, s_orthonormalize, sym_eigen_sorted, Orthogonalizer};

/// Density distance below which two iterates count as the same state.
pub const OSCILLATION_TOL: f64 = 1e-8;
/// Consecutive 2-periodic iterations needed to report oscillation.
pub const OSCILLATION_WINDOW: usize = 10;
/// Minimum distance between the two alternating states.
const OSCILLATION_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScfOptions {
    pub max_iter: usize,
    pub tol_energy: f64,
    pub tol_commutator: f64,
    /// Weight of the previous density, `0 ≤ d < 1`.
    pub damping: f64,
    pub degeneracy_tol: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol_energy: 1e-10, tol_commutator: 1e-8, damping: 0.0, degeneracy_tol: 1e-9 }
    }
}

impl ScfOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidOption("max_iter must be at least 1"));
        }
        if !(self.tol_energy > 0.0) || !(self.tol_commutator > 0.0) || !(self.degeneracy_tol > 0.0) {
            return Err(Error::InvalidOption("tolerances must be positive"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidOption("damping must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guess {
    Core,
    /// Gaussian random columns; `stream` separates starts sharing a seed.
    Random { seed: u64, stream: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    Oscillating,
    MaxIter,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::Oscillating => "oscillating",
            Outcome::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// `E(Φ^j)`.
    pub energy: f64,
    /// `E(Φ^j, Φ^{j+1})`.
    pub bivariate: f64,
    /// `‖FDS - SDF‖_F` at `Φ^j`.
    pub commutator: f64,
    /// Eigenvalues selected by the step producing `Φ^{j+1}`.
    pub orbital_energies: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScfTrace {
    pub records: Vec<IterationRecord>,
    pub outcome: Outcome,
}

impl ScfTrace {
    /// Largest increase between consecutive bivariate values.
    pub fn max_bivariate_increase(&self) -> f64 {
        self.records.windows(2).map(|w| w[1].bivariate - w[0].bivariate).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    /// Canonical orbitals, energies ascending.
    pub orbitals: OrbitalSet,
    pub energy: f64,
    /// `max_i ‖(F - ε_i S) c_i‖` from a fresh Fock build.
    pub residual: f64,
    pub iterations: usize,
    /// The N-th and (N+1)-th levels were closer than the degeneracy tolerance.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScfResult {
    pub outcome: Outcome,
    pub trace: ScfTrace,
    /// Present only for a certified converged run.
    pub critical_point: Option<CriticalPoint>,
    /// Last iterate, whatever the outcome.
    pub last: OrbitalSet,
}

pub fn initial_guess(tables: &IntegralTables, n_orbitals: usize, guess: Guess) -> Result<OrbitalSet> {
    let n = tables.n();
    if n_orbitals == 0 {
        return Err(Error::NoElectrons);
    }
    if n_orbitals > n {
        return Err(Error::BasisTooSmall { functions: n, electrons: n_orbitals });
    }
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    match guess {
        Guess::Core => {
            let (vals, vecs, _) = aufbau(&ortho, &tables.hcore(), n_orbitals, 1e-9)?;
            OrbitalSet::new(vecs, vals)
        }
        Guess::Random { seed, stream } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let mut c = DMatrix::zeros(n, n_orbitals);
            for j in 0..n_orbitals {
                for i in 0..n {
                    c[(i, j)] = StandardNormal.sample(&mut rng);
                }
            }
            Ok(OrbitalSet::from_coeffs(s_orthonormalize(&c, &tables.overlap)?))
        }
    }
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        if (x - y).abs() > 1e-12 {
            return y.partial_cmp(x).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

/// Lowest `n_occ` eigenpairs of `A c = ε S c`. Near-degenerate groups are
/// ordered lexicographically by eigenvector; the flag reports a group
/// straddling the occupied boundary.
fn aufbau(
    ortho: &Orthogonalizer,
    a: &DMatrix<f64>,
    n_occ: usize,
    degeneracy_tol: f64,
) -> Result<(DVector<f64>, DMatrix<f64>, bool)> {
    let (vals, mut vecs) = ortho.generalized_eigen(a)?;
    let n = vals.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] < degeneracy_tol {
            end += 1;
        }
        if end - start > 1 {
            let mut cols: Vec<DVector<f64>> = (start..end).map(|k| vecs.column(k).into_owned()).collect();
            cols.sort_by(lexicographic);
            for (k, c) in cols.iter().enumerate() {
                vecs.set_column(start + k, c);
            }
        }
        start = end;
    }
    let degenerate = n_occ < n && vals[n_occ] - vals[n_occ - 1] < degeneracy_tol;
    let occ_vals = DVector::from_iterator(n_occ, vals.iter().take(n_occ).copied());
    Ok((occ_vals, vecs.columns(0, n_occ).into_owned(), degenerate))
}

/// `‖FDS - SDF‖_F`.
pub fn commutator_norm(fock: &DMatrix<f64>, density: &DMatrix<f64>, overlap: &DMatrix<f64>) -> f64 {
    let fds = fock * density * overlap;
    frobenius(&(&fds - fds.transpose()))
}

/// `max_i ‖(F - ε_i S) c_i‖`.
pub fn orbital_residual(orbitals: &OrbitalSet, fock: &DMatrix<f64>, overlap: &DMatrix<f64>) -> f64 {
    (0..orbitals.n_orbitals())
        .map(|i| {
            let c = orbitals.orbital(i);
            (fock * &c - overlap * &c * orbitals.energies[i]).norm()
        })
        .fold(0.0, f64::max)
}

/// One Roothaan step: the `N` lowest eigenpairs of `F(D)` where `D` is the
/// density of `orbitals`. Returns the new orbitals and the degeneracy flag.
pub fn roothaan_step(orbitals: &OrbitalSet, tables: &IntegralTables, options: &ScfOptions) -> Result<(OrbitalSet, bool)> {
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let f = build_fock(&orbitals.density(), tables);
    let (vals, vecs, deg) = aufbau(&ortho, &f.fock, orbitals.n_orbitals(), options.degeneracy_tol)?;
    Ok((OrbitalSet::new(vecs, vals)?, deg))
}

/// Rotates to canonical orbitals (eigenvectors of `CᵀFC`) and measures the
/// residual with the given Fock matrix.
fn certify(orbitals: &OrbitalSet, f: &FockMatrices, tables: &IntegralTables) -> Result<(OrbitalSet, f64)> {
    let c = &orbitals.coeffs;
    let (vals, u) = sym_eigen_sorted(&(c.transpose() * &f.fock * c))?;
    let canon = OrbitalSet::new(c * u, vals)?;
    let residual = orbital_residual(&canon, &f.fock, &tables.overlap);
    Ok((canon, residual))
}

pub fn scf_solve(tables: &IntegralTables, n_orbitals: usize, options: &ScfOptions, guess: Guess) -> Result<ScfResult> {
    let start = initial_guess(tables, n_orbitals, guess)?;
    scf_from(tables, start, options)
}

/// Runs the iteration from explicit starting orbitals.
pub fn scf_from(tables: &IntegralTables, start: OrbitalSet, options: &ScfOptions) -> Result<ScfResult> {
    options.validate()?;
    let n_occ = start.n_orbitals();
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let h = tables.hcore();
    let s = &tables.overlap;

    let mut current = start;
    let mut d = current.density();
    let mut f = build_fock(&d, tables);
    let mut energy = energy_with_fock(&d, &f, tables);
    // density fed to the next Fock build (differs from `d` when damping)
    let mut d_in = d.clone();
    let mut f_in = f.clone();
    let mut history: Vec<DMatrix<f64>> = alloc::vec![d.clone()];
    let mut periodic = 0usize;
    let mut records = Vec::new();

    for iter in 1..=options.max_iter {
        let (vals, vecs, deg) = aufbau(&ortho, &f_in.fock, n_occ, options.degeneracy_tol)?;
        let degenerate = deg;
        let next = OrbitalSet::new(vecs, vals.clone())?;
        let d_next = density_matrix(&next.coeffs);
        let bivariate = d.component_mul(&h).sum() + d_next.component_mul(&f_in.fock).sum();
        records.push(IterationRecord {
            energy,
            bivariate,
            commutator: commutator_norm(&f.fock, &d, s),
            orbital_energies: vals,
        });

        let f_next = build_fock(&d_next, tables);
        let e_next = energy_with_fock(&d_next, &f_next, tables);
        let comm = commutator_norm(&f_next.fock, &d_next, s);
        let delta_e = (e_next - energy).abs();

        if options.damping > 0.0 {
            d_in = &d_next * (1.0 - options.damping) + &d_in * options.damping;
            f_in = build_fock(&d_in, tables);
        } else {
            d_in = d_next.clone();
            f_in = f_next.clone();
        }

        current = next;
        d = d_next;
        f = f_next;
        energy = e_next;

        if delta_e <= options.tol_energy && comm <= options.tol_commutator {
            let (canon, residual) = certify(&current, &f, tables)?;
            if residual <= options.tol_commutator {
                let energy = hf_energy(&canon, tables);
                let cp = CriticalPoint { orbitals: canon.clone(), energy, residual, iterations: iter, degenerate };
                return Ok(ScfResult {
                    outcome: Outcome::Converged,
                    trace: ScfTrace { records, outcome: Outcome::Converged },
                    critical_point: Some(cp),
                    last: canon,
                });
            }
        }

        history.push(d.clone());
        if history.len() > 3 {
            history.remove(0);
        }
        if history.len() == 3 {
            let two = frobenius(&(&history[2] - &history[0]));
            let one = frobenius(&(&history[2] - &history[1]));
            if two <= OSCILLATION_TOL && one > OSCILLATION_SEPARATION {
                periodic += 1;
            } else {
                periodic = 0;
            }
            if periodic >= OSCILLATION_WINDOW {
                return Ok(ScfResult {
                    outcome: Outcome::Oscillating,
                    trace: ScfTrace { records, outcome: Outcome::Oscillating },
                    critical_point: None,
                    last: current,
                });
            }
        }
    }
    Ok(ScfResult {
        outcome: Outcome::MaxIter,
        trace: ScfTrace { records, outcome: Outcome::MaxIter },
        critical_point: None,
        last: current,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KoopmansReport {
    /// `|E_N(Φ) - E_{N-1}(Φ̂) - ε_N|`.
    pub residual: f64,
    /// `E_{N-1}(Φ̂) - E_N(Φ)`.
    pub ionization_potential: f64,
    pub eps_n: f64,
}

/// Removes the highest canonical orbital without relaxing the rest.
pub fn koopmans_check(cp: &CriticalPoint, tables: &IntegralTables) -> KoopmansReport {
    let n = cp.orbitals.n_orbitals();
    let eps_n = cp.orbitals.energies[n - 1];
    let e_n = hf_energy(&cp.orbitals, tables);
    let e_hat = if n == 1 {
        0.0
    } else {
        hf_energy(&OrbitalSet::from_coeffs(cp.orbitals.coeffs.columns(0, n - 1).into_owned()), tables)
    };
    KoopmansReport { residual: (e_n - e_hat - eps_n).abs(), ionization_potential: e_hat - e_n, eps_n }
}

/// `min_i ε_i - λ_min(h)`.
pub fn orbital_energy_bound_check(cp: &CriticalPoint, tables: &IntegralTables) -> Result<f64> {
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let (vals, _) = ortho.generalized_eigen(&tables.hcore())?;
    let min_eps = cp.orbitals.energies.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(min_eps - vals[0])
}
