//! Second-derivative machinery at a critical point: positivity of `R - S`,
//! the operator family `𝓗, 𝓡, 𝓠, 𝓢, 𝓢̄`, the spectral split of `h`, and the
//! decomposition `F′ = L + M` with finite-difference checks.
//!
//! All operators act in the symmetrically orthonormalized basis, where an
//! orbital with AO coefficients `c` has coordinates `S^{1/2} c` and an operator
//! with AO matrix elements `A` is `S^{-1/2} A S^{-1/2}`. Coefficients are real,
//! so `S̄_ij` coincides with `S_ij` as a linear map.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hfcore::{build_fock, OrbitalSet};
use crate::integrals::IntegralTables;
use crate::linalg::{numerical_rank, sym_eigen_sorted, symmetrize, Orthogonalizer};
use crate::scf::{orbital_residual, CriticalPoint};

/// Fresh residual above which a critical point is refused.
pub const CERTIFY_TOL: f64 = 1e-7;
/// Relative singular-value cutoff for rank reports.
pub const RANK_TOL: f64 = 1e-10;

/// A tangent direction `[W, ẽ]` in AO coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationW {
    pub w: DMatrix<f64>,
    pub de: DVector<f64>,
}

impl PerturbationW {
    pub fn zeros(n: usize, n_orb: usize) -> Self {
        Self { w: DMatrix::zeros(n, n_orb), de: DVector::zeros(n_orb) }
    }
}

/// Per-pair AO matrices of the operators built from one orbital set.
struct PairOperators {
    /// `Q_ij`: multiplication by `∫|x-y|⁻¹ φ_j φ_i`, i.e. `J[c_j c_iᵀ]`.
    q: Vec<Vec<DMatrix<f64>>>,
    /// `S_ij w = (∫|x-y|⁻¹ φ_j w) φ_i`, i.e. `K[c_i c_jᵀ]`.
    s: Vec<Vec<DMatrix<f64>>>,
}

impl PairOperators {
    fn new(c: &DMatrix<f64>, tables: &IntegralTables) -> Self {
        let n_orb = c.ncols();
        let mut q = Vec::with_capacity(n_orb);
        let mut s = Vec::with_capacity(n_orb);
        for i in 0..n_orb {
            let ci = c.column(i);
            let mut qrow = Vec::with_capacity(n_orb);
            let mut srow = Vec::with_capacity(n_orb);
            for j in 0..n_orb {
                let cj = c.column(j);
                let p = &ci * cj.transpose();
                qrow.push(symmetrize(&tables.eri.coulomb(&p.transpose())));
                srow.push(tables.eri.exchange(&p));
            }
            q.push(qrow);
            s.push(srow);
        }
        Self { q, s }
    }

    /// `R_i = Σ_{j≠i} Q_jj`.
    fn r_i(&self, i: usize) -> DMatrix<f64> {
        let n = self.q[0][0].nrows();
        let mut r = DMatrix::zeros(n, n);
        for j in 0..self.q.len() {
            if j != i {
                r += &self.q[j][j];
            }
        }
        r
    }

    /// `S_i = Σ_{j≠i} S_jj`.
    fn s_i(&self, i: usize) -> DMatrix<f64> {
        let n = self.s[0][0].nrows();
        let mut r = DMatrix::zeros(n, n);
        for j in 0..self.s.len() {
            if j != i {
                r += &self.s[j][j];
            }
        }
        r
    }
}

fn set_block(m: &mut DMatrix<f64>, i: usize, j: usize, block: &DMatrix<f64>) {
    let n = block.nrows();
    m.view_mut((i * n, j * n), (n, n)).copy_from(block);
}

/// Minimum eigenvalues of `R^Φ - S^Φ` and of each `Q_ii - S_ii`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub min_rs: f64,
    pub min_per_orbital: Vec<f64>,
    pub min_overall: f64,
}

pub fn rs_positivity_check(orbitals: &OrbitalSet, tables: &IntegralTables) -> Result<PositivityReport> {
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let f = build_fock(&orbitals.density(), tables);
    let min_rs = sym_eigen_sorted(&ortho.to_orthonormal(&f.two_electron()))?.0[0];
    let ops = PairOperators::new(&orbitals.coeffs, tables);
    let mut per = Vec::with_capacity(orbitals.n_orbitals());
    for i in 0..orbitals.n_orbitals() {
        let a = &ops.q[i][i] - &ops.s[i][i];
        per.push(sym_eigen_sorted(&ortho.to_orthonormal(&a))?.0[0]);
    }
    let min_overall = per.iter().fold(min_rs, |a, &b| a.min(b));
    Ok(PositivityReport { min_rs, min_per_orbital: per, min_overall })
}

/// `½ Σ T_{μλ} T_{νσ} (μν|λσ)`: the Coulomb self-energy of the two-point
/// function `Σ T_{μλ} χ_μ(x) χ_λ(y)`.
pub fn pair_self_energy(t: &DMatrix<f64>, tables: &IntegralTables) -> f64 {
    let n = t.nrows();
    let mut total = 0.0;
    for lam in 0..n {
        for sig in 0..n {
            let mut inner = 0.0;
            for mu in 0..n {
                let tml = t[(mu, lam)];
                if tml == 0.0 {
                    continue;
                }
                for nu in 0..n {
                    inner += tml * t[(nu, sig)] * tables.eri.get(mu, nu, lam, sig);
                }
            }
            total += inner;
        }
    }
    0.5 * total
}

/// The three evaluations of `⟨W, (𝓡 - 𝓠) W⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RqIdentity {
    /// Operator matrices.
    pub operator: f64,
    /// `Σ_i Σ_{j≠i} [ĩĩ|jj] - [ĩj̃|ji]`.
    pub bracket: f64,
    /// `½ Σ_i Σ_{j≠i} ∬|x-y|⁻¹ |w_i(x)φ_j(y) - w_j(x)φ_i(y)|²`.
    pub pair_integral: f64,
}

impl RqIdentity {
    pub fn max_discrepancy(&self) -> f64 {
        (self.operator - self.bracket).abs().max((self.operator - self.pair_integral).abs())
    }
}

pub fn rq_identity_check(orbitals: &OrbitalSet, w: &PerturbationW, tables: &IntegralTables) -> RqIdentity {
    let c = &orbitals.coeffs;
    let n_orb = c.ncols();
    let ops = PairOperators::new(c, tables);
    let mut operator = 0.0;
    for i in 0..n_orb {
        let wi = w.w.column(i);
        operator += (wi.transpose() * ops.r_i(i) * wi)[0];
        for j in 0..n_orb {
            if j != i {
                operator -= (wi.transpose() * &ops.q[i][j] * w.w.column(j))[0];
            }
        }
    }
    let mut bracket = 0.0;
    let mut pair = 0.0;
    let col = |m: &DMatrix<f64>, k: usize| m.column(k).into_owned();
    for i in 0..n_orb {
        for j in 0..n_orb {
            if j == i {
                continue;
            }
            let (wi, wj, ci, cj) = (col(&w.w, i), col(&w.w, j), col(c, i), col(c, j));
            bracket += tables.eri.contract4(&wi, &wi, &cj, &cj) - tables.eri.contract4(&wi, &wj, &cj, &ci);
            let t = &wi * cj.transpose() - &wj * ci.transpose();
            pair += pair_self_energy(&t, tables);
        }
    }
    RqIdentity { operator, bracket, pair_integral: pair }
}

/// `h = hE(-ε/2) + h(1 - E(-ε/2))` with the orbital-indexed diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    pub epsilon: f64,
    /// `E(-ε/2)`, orthonormal basis.
    pub projector: DMatrix<f64>,
    pub projector_rank: usize,
    /// `diag(h(1 - E) - ε_i)`.
    pub h1: DMatrix<f64>,
    /// `diag(hE)`.
    pub h2: DMatrix<f64>,
}

pub fn spectral_split(tables: &IntegralTables, epsilon: f64, energies: &DVector<f64>) -> Result<SpectralSplit> {
    if !(epsilon > 0.0) {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let h = symmetrize(&ortho.to_orthonormal(&tables.hcore()));
    let (vals, vecs) = sym_eigen_sorted(&h)?;
    let n = h.nrows();
    let mut projector = DMatrix::zeros(n, n);
    let mut rank = 0;
    for k in 0..n {
        if vals[k] <= -epsilon / 2.0 {
            let v = vecs.column(k);
            projector += &v * v.transpose();
            rank += 1;
        }
    }
    // h commutes with its own spectral projector; build hE from the eigenpairs
    let mut he = DMatrix::zeros(n, n);
    for k in 0..rank {
        let v = vecs.column(k);
        he += &v * v.transpose() * vals[k];
    }
    let rest = &h - &he;
    let n_orb = energies.len();
    let mut h1 = DMatrix::zeros(n * n_orb, n * n_orb);
    let mut h2 = DMatrix::zeros(n * n_orb, n * n_orb);
    let id = DMatrix::<f64>::identity(n, n);
    for i in 0..n_orb {
        set_block(&mut h1, i, i, &(&rest - &id * energies[i]));
        set_block(&mut h2, i, i, &he);
    }
    Ok(SpectralSplit { epsilon, projector, projector_rank: rank, h1, h2 })
}

/// `ε* = min_i(-ε_i)`; requires every orbital energy negative.
pub fn default_epsilon(energies: &DVector<f64>) -> Result<f64> {
    let max = energies.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if !(max < 0.0) {
        return Err(Error::UnboundOrbital(max));
    }
    Ok(-max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianBlocks {
    pub n_basis: usize,
    pub n_orbitals: usize,
    pub epsilon: f64,
    pub projector_rank: usize,
    /// Canonical orbitals, orthonormal coordinates (columns).
    pub phi: DMatrix<f64>,
    pub energies: DVector<f64>,
    pub hcal: DMatrix<f64>,
    pub rcal: DMatrix<f64>,
    pub qcal: DMatrix<f64>,
    pub scal: DMatrix<f64>,
    pub sbar: DMatrix<f64>,
    /// Block transpose of `sbar`: block `(i, j)` is `S̄_ji`.
    pub sbar_t: DMatrix<f64>,
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    /// `𝓛 = H1 + 𝓡 - 𝓠`.
    pub lcal: DMatrix<f64>,
    /// `𝓜 = H2 + 𝓢 + 𝓢̄ - ᵗ𝓢̄`.
    pub mcal: DMatrix<f64>,
    /// `L = diag(𝓛, I)` on the `(Φ, e)` space.
    pub l_full: DMatrix<f64>,
    /// `M` on the `(Φ, e)` space.
    pub m_full: DMatrix<f64>,
    /// `F′` assembled directly from the derivative formulas.
    pub jacobian: DMatrix<f64>,
}

impl HessianBlocks {
    pub fn dim(&self) -> usize {
        self.n_basis * self.n_orbitals + self.n_orbitals
    }
}

pub fn assemble_hessian(cp: &CriticalPoint, tables: &IntegralTables, epsilon: f64) -> Result<HessianBlocks> {
    let orbitals = &cp.orbitals;
    let fresh = build_fock(&orbitals.density(), tables);
    let residual = orbital_residual(orbitals, &fresh.fock, &tables.overlap);
    if !(residual <= CERTIFY_TOL) {
        return Err(Error::NotCertified(residual));
    }
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let n = tables.n();
    let n_orb = orbitals.n_orbitals();
    let e = &orbitals.energies;
    let ops = PairOperators::new(&orbitals.coeffs, tables);
    let to = |a: &DMatrix<f64>| symmetrize(&ortho.to_orthonormal(a));
    let h = to(&tables.hcore());
    let id = DMatrix::<f64>::identity(n, n);

    let dim = n * n_orb;
    let mut hcal = DMatrix::zeros(dim, dim);
    let mut rcal = DMatrix::zeros(dim, dim);
    let mut qcal = DMatrix::zeros(dim, dim);
    let mut scal = DMatrix::zeros(dim, dim);
    let mut sbar = DMatrix::zeros(dim, dim);
    let mut sbar_t = DMatrix::zeros(dim, dim);
    let s_orth: Vec<Vec<DMatrix<f64>>> =
        ops.s.iter().map(|row| row.iter().map(|m| ortho.to_orthonormal(m)).collect()).collect();
    for i in 0..n_orb {
        set_block(&mut hcal, i, i, &(&h - &id * e[i]));
        set_block(&mut rcal, i, i, &to(&ops.r_i(i)));
        set_block(&mut scal, i, i, &(-to(&ops.s_i(i))));
        for j in 0..n_orb {
            if j == i {
                continue;
            }
            set_block(&mut qcal, i, j, &to(&ops.q[i][j]));
            set_block(&mut scal, i, j, &s_orth[i][j]);
            set_block(&mut sbar, i, j, &s_orth[i][j]);
            set_block(&mut sbar_t, i, j, &s_orth[j][i]);
        }
    }
    let split = spectral_split(tables, epsilon, e)?;
    let lcal = &split.h1 + &rcal - &qcal;
    let mcal = &split.h2 + &scal + &sbar - &sbar_t;

    let phi = &ortho.sqrt * &orbitals.coeffs;
    let full = dim + n_orb;
    let mut l_full = DMatrix::zeros(full, full);
    l_full.view_mut((0, 0), (dim, dim)).copy_from(&lcal);
    let mut m_full = DMatrix::zeros(full, full);
    m_full.view_mut((0, 0), (dim, dim)).copy_from(&mcal);
    for i in 0..n_orb {
        l_full[(dim + i, dim + i)] = 1.0;
        m_full[(dim + i, dim + i)] = -1.0;
        for a in 0..n {
            m_full[(i * n + a, dim + i)] = -phi[(a, i)];
            m_full[(dim + i, i * n + a)] = -2.0 * phi[(a, i)];
        }
    }

    // direct block formulas: (i,i) h - ε_i + R_i - S_i; (i,j) 2S_ij - Q_ij - S_ji
    let mut jacobian = DMatrix::zeros(full, full);
    for i in 0..n_orb {
        let diag = &h - &id * e[i] + to(&ops.r_i(i)) - to(&ops.s_i(i));
        set_block(&mut jacobian, i, i, &diag);
        for j in 0..n_orb {
            if j != i {
                let off = &s_orth[i][j] * 2.0 - to(&ops.q[i][j]) - &s_orth[j][i];
                set_block(&mut jacobian, i, j, &off);
            }
        }
        for a in 0..n {
            jacobian[(i * n + a, dim + i)] = -phi[(a, i)];
            jacobian[(dim + i, i * n + a)] = -2.0 * phi[(a, i)];
        }
    }

    Ok(HessianBlocks {
        n_basis: n,
        n_orbitals: n_orb,
        epsilon,
        projector_rank: split.projector_rank,
        phi,
        energies: e.clone(),
        hcal,
        rcal,
        qcal,
        scal,
        sbar,
        sbar_t,
        h1: split.h1,
        h2: split.h2,
        lcal,
        mcal,
        l_full,
        m_full,
        jacobian,
    })
}

/// `F(Φ, e)` in orthonormal coordinates, stacked as `[F_1, …, F_N, 1 - ‖φ_i‖²]`.
pub fn gradient_map(
    phi: &DMatrix<f64>,
    energies: &DVector<f64>,
    tables: &IntegralTables,
    ortho: &Orthogonalizer,
) -> DVector<f64> {
    let n = phi.nrows();
    let n_orb = phi.ncols();
    let c = &ortho.inv_sqrt * phi;
    let d = &c * c.transpose();
    let f = ortho.to_orthonormal(&build_fock(&d, tables).fock);
    let mut out = DVector::zeros(n * n_orb + n_orb);
    for i in 0..n_orb {
        let p = phi.column(i);
        let fi = &f * p - p * energies[i];
        out.rows_mut(i * n, n).copy_from(&fi);
        out[n * n_orb + i] = 1.0 - p.norm_squared();
    }
    out
}

fn stack(w: &DMatrix<f64>, de: &DVector<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(w.len() + de.len());
    v.rows_mut(0, w.len()).copy_from(&DVector::from_column_slice(w.as_slice()));
    v.rows_mut(w.len(), de.len()).copy_from(de);
    v
}

/// Result of comparing `F′[W, ẽ]` against differences of `F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalCheck {
    pub relative_error: f64,
    /// Step of the difference that was kept.
    pub step: f64,
    pub richardson: bool,
}

/// Central difference at `1e-5`, falling back to Richardson extrapolation of
/// the `1e-4` pair and to a `1e-6` step when the first misses `target`.
/// `dir` is in orthonormal coordinates.
pub fn directional_check(
    blocks: &HessianBlocks,
    tables: &IntegralTables,
    dir: &PerturbationW,
    target: f64,
) -> Result<DirectionalCheck> {
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let analytic = (&blocks.l_full + &blocks.m_full) * stack(&dir.w, &dir.de);
    let scale = analytic.norm().max(1e-300);
    let central = |t: f64| {
        let plus = gradient_map(&(&blocks.phi + &dir.w * t), &(&blocks.energies + &dir.de * t), tables, &ortho);
        let minus = gradient_map(&(&blocks.phi - &dir.w * t), &(&blocks.energies - &dir.de * t), tables, &ortho);
        (plus - minus) / (2.0 * t)
    };
    let base = central(1e-5);
    let err = (&base - &analytic).norm() / scale;
    if err <= target {
        return Ok(DirectionalCheck { relative_error: err, step: 1e-5, richardson: false });
    }
    let coarse = central(1e-4);
    let half = central(5e-5);
    let rich = (&half * 4.0 - &coarse) / 3.0;
    let rich_err = (&rich - &analytic).norm() / scale;
    let fine_err = (&central(1e-6) - &analytic).norm() / scale;
    let mut best = DirectionalCheck { relative_error: err, step: 1e-5, richardson: false };
    if rich_err < best.relative_error {
        best = DirectionalCheck { relative_error: rich_err, step: 1e-4, richardson: true };
    }
    if fine_err < best.relative_error {
        best = DirectionalCheck { relative_error: fine_err, step: 1e-6, richardson: false };
    }
    Ok(best)
}

/// Full finite-difference Jacobian of `F`, column by column (central, `1e-5`).
pub fn finite_difference_jacobian(blocks: &HessianBlocks, tables: &IntegralTables) -> Result<DMatrix<f64>> {
    let ortho = Orthogonalizer::new(&tables.overlap)?;
    let dim = blocks.dim();
    let (n, n_orb) = (blocks.n_basis, blocks.n_orbitals);
    let t = 1e-5;
    let mut jac = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let mut dw = DMatrix::zeros(n, n_orb);
        let mut de = DVector::zeros(n_orb);
        if k < n * n_orb {
            dw[(k % n, k / n)] = 1.0;
        } else {
            de[k - n * n_orb] = 1.0;
        }
        let plus = gradient_map(&(&blocks.phi + &dw * t), &(&blocks.energies + &de * t), tables, &ortho);
        let minus = gradient_map(&(&blocks.phi - &dw * t), &(&blocks.energies - &de * t), tables, &ortho);
        jac.set_column(k, &((plus - minus) / (2.0 * t)));
    }
    Ok(jac)
}

/// `P F′` with `P = diag(2I, I)`: the second derivative of `f` under the
/// pairing, which must be symmetric.
pub fn paired_hessian(blocks: &HessianBlocks) -> DMatrix<f64> {
    let mut m = &blocks.l_full + &blocks.m_full;
    let dim = blocks.n_basis * blocks.n_orbitals;
    for r in 0..dim {
        for c in 0..m.ncols() {
            m[(r, c)] *= 2.0;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub scal: usize,
    pub sbar: usize,
    pub sbar_t: usize,
    pub h2: usize,
    pub projector: usize,
    pub m_full: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmCertificate {
    pub epsilon: f64,
    /// `min eig 𝓛`.
    pub min_eig_lcal: f64,
    /// `min(min eig 𝓛, 1)`, the margin of `L` on the full space.
    pub min_eig_l: f64,
    /// `|eig M|`, descending.
    pub m_spectrum: Vec<f64>,
    pub ranks: RankTable,
    /// `rank(H2) + rank(𝓢) + rank(𝓢̄) + rank(ᵗ𝓢̄) + 2N`, a subadditive bound on
    /// the number of nonzero eigenvalues of `M`.
    pub m_rank_bound: usize,
    /// `max |L + M - F′|` against the direct block formulas.
    pub reassembly_error: f64,
    pub hcal_split_error: f64,
}

impl LmCertificate {
    pub fn l_bound_holds(&self) -> bool {
        self.min_eig_l >= (self.epsilon / 2.0).min(1.0) - 1e-8
    }

    pub fn h2_rank_holds(&self, n_orbitals: usize) -> bool {
        self.ranks.h2 == n_orbitals * self.ranks.projector
    }

    pub fn m_count_holds(&self) -> bool {
        self.ranks.m_full <= self.m_rank_bound
    }
}

pub fn lm_certificate(blocks: &HessianBlocks) -> Result<LmCertificate> {
    let min_eig_lcal = sym_eigen_sorted(&blocks.lcal)?.0[0];
    let m = &blocks.m_full;
    let mut m_spectrum: Vec<f64> = m.clone().complex_eigenvalues().iter().map(|z| (z.re * z.re + z.im * z.im).sqrt()).collect();
    m_spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let ranks = RankTable {
        scal: numerical_rank(&blocks.scal, RANK_TOL),
        sbar: numerical_rank(&blocks.sbar, RANK_TOL),
        sbar_t: numerical_rank(&blocks.sbar_t, RANK_TOL),
        h2: numerical_rank(&blocks.h2, RANK_TOL),
        projector: blocks.projector_rank,
        m_full: numerical_rank(m, RANK_TOL),
    };
    let m_rank_bound = ranks.h2 + ranks.scal + ranks.sbar + ranks.sbar_t + 2 * blocks.n_orbitals;
    let reassembly_error = (&blocks.l_full + &blocks.m_full - &blocks.jacobian).abs().max();
    let hcal_split_error = (&blocks.h1 + &blocks.h2 - &blocks.hcal).abs().max();
    Ok(LmCertificate {
        epsilon: blocks.epsilon,
        min_eig_lcal,
        min_eig_l: min_eig_lcal.min(1.0),
        m_spectrum,
        ranks,
        m_rank_bound,
        reassembly_error,
        hcal_split_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::s_orthonormalize;
    use crate::molbasis::{normalize_shells, Atom, BasisName, BasisSet, Convention, Molecule};
    use crate::scf::{scf_solve, Guess, ScfOptions};
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use std::vec;

    fn system(z: u32, n: usize, basis: BasisName) -> (IntegralTables, CriticalPoint) {
        let mol = Molecule::new(vec![Atom { z, position: [0.0; 3] }], n).unwrap();
        let b = normalize_shells(&BasisSet::named(&basis, &mol).unwrap()).unwrap();
        let t = IntegralTables::compute(&mol, &b, Convention::Paper);
        let cp = scf_solve(&t, n, &ScfOptions::default(), Guess::Core).unwrap().critical_point.unwrap();
        (t, cp)
    }

    fn helium() -> (IntegralTables, CriticalPoint) {
        system(2, 2, BasisName::EvenTempered { alpha0: 0.02, beta: 2.6, k: 8 })
    }

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn positivity_for_arbitrary_orbitals() {
        let (t, _) = helium();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = s_orthonormalize(&random(&mut rng, t.n(), 2), &t.overlap).unwrap();
        let rep = rs_positivity_check(&OrbitalSet::from_coeffs(c), &t).unwrap();
        assert!(rep.min_overall >= -1e-10);
    }

    #[test]
    fn q_minus_s_quadratic_form_is_pair_energy() {
        let (t, cp) = helium();
        let ops = PairOperators::new(&cp.orbitals.coeffs, &t);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = random(&mut rng, t.n(), 1).column(0).into_owned();
        let c = cp.orbitals.orbital(0);
        let form = (w.transpose() * (&ops.q[0][0] - &ops.s[0][0]) * &w)[0];
        let tm = &w * c.transpose() - &c * w.transpose();
        assert!((form - pair_self_energy(&tm, &t)).abs() < 1e-11);
        assert!(((&ops.q[0][0] - &ops.s[0][0]) * &c).norm() < 1e-10);
    }

    #[test]
    fn three_routes_agree() {
        let (t, cp) = helium();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let w = PerturbationW { w: random(&mut rng, t.n(), 2), de: DVector::zeros(2) };
            let r = rq_identity_check(&cp.orbitals, &w, &t);
            assert!(r.max_discrepancy() < 1e-10, "{r:?}");
            assert!(r.operator >= -1e-10);
        }
        let zero = rq_identity_check(&cp.orbitals, &PerturbationW::zeros(t.n(), 2), &t);
        assert_eq!((zero.operator, zero.bracket), (0.0, 0.0));
    }

    #[test]
    fn split_with_large_epsilon_is_empty() {
        let (t, cp) = helium();
        let s = spectral_split(&t, 1e3, &cp.orbitals.energies).unwrap();
        assert_eq!(s.projector_rank, 0);
        assert_eq!(s.h2.abs().max(), 0.0);
        assert!(spectral_split(&t, 0.0, &cp.orbitals.energies).is_err());
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let (t, cp) = helium();
        let eps = default_epsilon(&cp.orbitals.energies).unwrap();
        let blocks = assemble_hessian(&cp, &t, eps).unwrap();
        let fd = finite_difference_jacobian(&blocks, &t).unwrap();
        let an = &blocks.l_full + &blocks.m_full;
        assert!((&fd - &an).abs().max() <= 1e-6 * an.abs().max(), "{}", (&fd - &an).abs().max());
        let cert = lm_certificate(&blocks).unwrap();
        assert!(cert.reassembly_error < 1e-12);
        assert!(cert.hcal_split_error < 1e-12);
        assert!(cert.l_bound_holds(), "{cert:?}");
        assert!(cert.h2_rank_holds(2));
        assert!(cert.m_count_holds());
        let p = paired_hessian(&blocks);
        assert!((&p - p.transpose()).abs().max() < 1e-9);
    }

    #[test]
    fn single_orbital_blocks_vanish() {
        let (t, cp) = system(1, 1, BasisName::EvenTempered { alpha0: 0.1, beta: 3.0, k: 4 });
        let eps = default_epsilon(&cp.orbitals.energies).unwrap();
        let b = assemble_hessian(&cp, &t, eps).unwrap();
        assert_eq!(b.qcal.abs().max(), 0.0);
        assert_eq!(b.rcal.abs().max(), 0.0);
        assert!(b.scal.abs().max() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dir = PerturbationW { w: random(&mut rng, t.n(), 1), de: random(&mut rng, 1, 1).column(0).into_owned() };
        assert!(directional_check(&b, &t, &dir, 1e-6).unwrap().relative_error <= 1e-6);
    }
}
