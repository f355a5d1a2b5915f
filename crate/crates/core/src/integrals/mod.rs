//! One- and two-electron Gaussian integrals over a contracted Cartesian basis.
//!
//! Everything goes through McMurchie–Davidson Hermite expansions. The kinetic
//! matrix is for `-Δ`; the core Hamiltonian applies the convention's kinetic
//! factor.

mod boys;
mod hermite;

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::molbasis::{BasisSet, Convention, Molecule};

pub use boys::{boys, boys_array, MAX_ORDER as MAX_BOYS_ORDER};
use hermite::{CoulombTable, Hermite1d};

/// A contracted Cartesian function with its center resolved.
#[derive(Debug, Clone)]
struct Function {
    center: [f64; 3],
    powers: [usize; 3],
    /// `(exponent, coefficient)` on the unnormalized primitive.
    prims: Vec<(f64, f64)>,
}

impl Function {
    fn l(&self) -> usize {
        self.powers.iter().sum()
    }
}

fn expand(mol: &Molecule, basis: &BasisSet) -> Vec<Function> {
    basis
        .functions()
        .into_iter()
        .map(|f| {
            let shell = &basis.shells()[f.shell];
            Function {
                center: mol.atoms()[shell.center].position,
                powers: [f.cartesian[0] as usize, f.cartesian[1] as usize, f.cartesian[2] as usize],
                prims: shell.primitives.iter().map(|p| (p.exponent, p.coeff)).collect(),
            }
        })
        .collect()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Expansion data of one primitive product `χ_a χ_b`.
#[derive(Debug, Clone)]
struct PrimPair {
    p: f64,
    center: [f64; 3],
    coeff: f64,
    /// Hermite coefficients per axis, `t ≤ 2`.
    e: [[f64; 3]; 3],
}

fn prim_pairs(fa: &Function, fb: &Function) -> Vec<PrimPair> {
    let ab = sub(fa.center, fb.center);
    let mut out = Vec::with_capacity(fa.prims.len() * fb.prims.len());
    for &(a, ca) in &fa.prims {
        for &(b, cb) in &fb.prims {
            let p = a + b;
            let mut e = [[0.0; 3]; 3];
            let mut center = [0.0; 3];
            for d in 0..3 {
                let h = Hermite1d::new(fa.powers[d], fb.powers[d], a, b, ab[d]);
                let (i, j) = (fa.powers[d], fb.powers[d]);
                for t in 0..=(i + j) {
                    e[d][t] = h.e[i][j][t];
                }
                center[d] = (a * fa.center[d] + b * fb.center[d]) / p;
            }
            out.push(PrimPair { p, center, coeff: ca * cb, e });
        }
    }
    out
}

fn one_electron<F>(fns: &[Function], mut element: F) -> DMatrix<f64>
where
    F: FnMut(&Function, &Function) -> f64,
{
    let n = fns.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = element(&fns[i], &fns[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn overlap_element(fa: &Function, fb: &Function) -> f64 {
    let ab = sub(fa.center, fb.center);
    let mut s = 0.0;
    for &(a, ca) in &fa.prims {
        for &(b, cb) in &fb.prims {
            let p = a + b;
            let mut v = ca * cb * (PI / p).powf(1.5);
            for d in 0..3 {
                let (i, j) = (fa.powers[d], fb.powers[d]);
                v *= Hermite1d::new(i, j, a, b, ab[d]).e[i][j][0];
            }
            s += v;
        }
    }
    s
}

fn kinetic_element(fa: &Function, fb: &Function) -> f64 {
    let ab = sub(fa.center, fb.center);
    let mut total = 0.0;
    for &(a, ca) in &fa.prims {
        for &(b, cb) in &fb.prims {
            let p = a + b;
            let root = (PI / p).sqrt();
            let mut s1 = [0.0; 3];
            let mut d1 = [0.0; 3];
            for d in 0..3 {
                let (i, j) = (fa.powers[d], fb.powers[d]);
                let h = Hermite1d::new(i, j + 2, a, b, ab[d]);
                let s = |jj: usize| h.e[i][jj][0] * root;
                s1[d] = s(j);
                // <i| -d²/dx² |j> using the second derivative of x^j e^{-b x²}
                let lower = if j >= 2 { (j * (j - 1)) as f64 * s(j - 2) } else { 0.0 };
                d1[d] = -lower + 2.0 * b * (2 * j + 1) as f64 * s(j) - 4.0 * b * b * s(j + 2);
            }
            let t = d1[0] * s1[1] * s1[2] + s1[0] * d1[1] * s1[2] + s1[0] * s1[1] * d1[2];
            total += ca * cb * t;
        }
    }
    total
}

fn nuclear_element(fa: &Function, fb: &Function, mol: &Molecule) -> f64 {
    let l = fa.l() + fb.l();
    let mut total = 0.0;
    for pair in prim_pairs(fa, fb) {
        let pref = 2.0 * PI / pair.p * pair.coeff;
        for atom in mol.atoms() {
            let r = CoulombTable::new(l, pair.p, sub(pair.center, atom.position));
            let mut acc = 0.0;
            for t in 0..=(fa.powers[0] + fb.powers[0]) {
                for u in 0..=(fa.powers[1] + fb.powers[1]) {
                    for v in 0..=(fa.powers[2] + fb.powers[2]) {
                        acc += pair.e[0][t] * pair.e[1][u] * pair.e[2][v] * r.get(t, u, v);
                    }
                }
            }
            total -= atom.z as f64 * pref * acc;
        }
    }
    total
}

pub fn overlap_matrix(mol: &Molecule, basis: &BasisSet) -> DMatrix<f64> {
    one_electron(&expand(mol, basis), overlap_element)
}

/// Kinetic matrix for `-Δ`.
pub fn kinetic_matrix(mol: &Molecule, basis: &BasisSet) -> DMatrix<f64> {
    one_electron(&expand(mol, basis), kinetic_element)
}

pub fn nuclear_matrix(mol: &Molecule, basis: &BasisSet) -> DMatrix<f64> {
    one_electron(&expand(mol, basis), |a, b| nuclear_element(a, b, mol))
}

/// Position of `(i, j)` with `i ≥ j` in a packed lower triangle.
#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i >= j { (i, j) } else { (j, i) };
    a * (a + 1) / 2 + b
}

/// Electron repulsion integrals `(μν|λσ)` held as a full `n⁴` array filled
/// from the unique list, so all eight permutations agree bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct EriTensor {
    n: usize,
    data: Vec<f64>,
}

impl EriTensor {
    /// Builds the tensor from unique values in canonical order (see
    /// [`EriTensor::unique`]).
    pub fn from_unique(n: usize, unique: &[f64]) -> Option<Self> {
        let npair = n * (n + 1) / 2;
        if unique.len() != npair * (npair + 1) / 2 {
            return None;
        }
        let mut data = vec![0.0; n * n * n * n];
        let mut k = 0;
        for_each_unique(n, |i, j, l, m| {
            let v = unique[k];
            k += 1;
            for &(a, b, c, d) in &[
                (i, j, l, m),
                (j, i, l, m),
                (i, j, m, l),
                (j, i, m, l),
                (l, m, i, j),
                (m, l, i, j),
                (l, m, j, i),
                (m, l, j, i),
            ] {
                data[((a * n + b) * n + c) * n + d] = v;
            }
        });
        Some(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.data[((i * n + j) * n + k) * n + l]
    }

    /// Unique integrals with `i ≥ j`, `k ≥ l`, `ij ≥ kl` in loop order.
    pub fn unique(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for_each_unique(self.n, |i, j, k, l| out.push(self.get(i, j, k, l)));
        out
    }

    /// `J[P]_{μν} = Σ (μν|λσ) P_{λσ}`.
    pub fn coulomb(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let flat = row_major(p);
        let nn = n * n;
        DMatrix::from_fn(n, n, |mu, nu| {
            let base = (mu * n + nu) * nn;
            self.data[base..base + nn].iter().zip(&flat).map(|(a, b)| a * b).sum()
        })
    }

    /// `K[P]_{μν} = Σ (μλ|σν) P_{λσ}`.
    pub fn exchange(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut k = DMatrix::zeros(n, n);
        for mu in 0..n {
            for lam in 0..n {
                let base = (mu * n + lam) * n * n;
                for sig in 0..n {
                    let pls = p[(lam, sig)];
                    if pls == 0.0 {
                        continue;
                    }
                    let row = &self.data[base + sig * n..base + sig * n + n];
                    for nu in 0..n {
                        k[(mu, nu)] += row[nu] * pls;
                    }
                }
            }
        }
        k
    }

    /// `Σ a_μ b_ν c_λ d_σ (μν|λσ)`.
    pub fn contract4(&self, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>) -> f64 {
        let cd = c * d.transpose();
        let j = self.coulomb(&cd);
        (a.transpose() * j * b)[0]
    }
}

fn row_major(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    let mut out = Vec::with_capacity(n * p.ncols());
    for i in 0..n {
        for j in 0..p.ncols() {
            out.push(p[(i, j)]);
        }
    }
    out
}

fn for_each_unique(n: usize, mut f: impl FnMut(usize, usize, usize, usize)) {
    for i in 0..n {
        for j in 0..=i {
            let ij = pair_index(i, j);
            for k in 0..n {
                for l in 0..=k {
                    if pair_index(k, l) > ij {
                        continue;
                    }
                    f(i, j, k, l);
                }
            }
        }
    }
}

fn eri_element(bra: &[PrimPair], ket: &[PrimPair], fa: &Function, fb: &Function, fc: &Function, fd: &Function) -> f64 {
    let tb = [fa.powers[0] + fb.powers[0], fa.powers[1] + fb.powers[1], fa.powers[2] + fb.powers[2]];
    let tk = [fc.powers[0] + fd.powers[0], fc.powers[1] + fd.powers[1], fc.powers[2] + fd.powers[2]];
    let l = tb.iter().sum::<usize>() + tk.iter().sum::<usize>();
    let mut total = 0.0;
    for x in bra {
        for y in ket {
            let (p, q) = (x.p, y.p);
            let alpha = p * q / (p + q);
            let pref = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt()) * x.coeff * y.coeff;
            let r = CoulombTable::new(l, alpha, sub(x.center, y.center));
            let mut acc = 0.0;
            for t in 0..=tb[0] {
                for u in 0..=tb[1] {
                    for v in 0..=tb[2] {
                        let eb = x.e[0][t] * x.e[1][u] * x.e[2][v];
                        if eb == 0.0 {
                            continue;
                        }
                        let mut inner = 0.0;
                        for tau in 0..=tk[0] {
                            for nu in 0..=tk[1] {
                                for phi in 0..=tk[2] {
                                    let sign = if (tau + nu + phi) % 2 == 0 { 1.0 } else { -1.0 };
                                    inner += sign
                                        * y.e[0][tau]
                                        * y.e[1][nu]
                                        * y.e[2][phi]
                                        * r.get(t + tau, u + nu, v + phi);
                                }
                            }
                        }
                        acc += eb * inner;
                    }
                }
            }
            total += pref * acc;
        }
    }
    total
}

pub fn eri_tensor(mol: &Molecule, basis: &BasisSet) -> EriTensor {
    let fns = expand(mol, basis);
    let n = fns.len();
    let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            pairs.push(prim_pairs(&fns[i], &fns[j]));
        }
    }
    let mut unique = Vec::new();
    for_each_unique(n, |i, j, k, l| {
        let v = eri_element(&pairs[pair_index(i, j)], &pairs[pair_index(k, l)], &fns[i], &fns[j], &fns[k], &fns[l]);
        unique.push(v);
    });
    EriTensor::from_unique(n, &unique).expect("unique list length")
}

/// Integral matrices of one molecule/basis pair, tagged with the unit
/// convention that fixes the core Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTables {
    pub convention: Convention,
    pub l_max: u32,
    pub overlap: DMatrix<f64>,
    /// Kinetic matrix for `-Δ`.
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub eri: EriTensor,
}

impl IntegralTables {
    /// Expects a normalized basis (see [`crate::molbasis::normalize_shells`]).
    pub fn compute(mol: &Molecule, basis: &BasisSet, convention: Convention) -> Self {
        Self {
            convention,
            l_max: basis.l_max(),
            overlap: overlap_matrix(mol, basis),
            kinetic: kinetic_matrix(mol, basis),
            nuclear: nuclear_matrix(mol, basis),
            eri: eri_tensor(mol, basis),
        }
    }

    pub fn n(&self) -> usize {
        self.overlap.nrows()
    }

    /// `h = T + V` (paper) or `h = ½T + V` (standard).
    pub fn hcore(&self) -> DMatrix<f64> {
        &self.kinetic * self.convention.kinetic_factor() + &self.nuclear
    }

    /// Ratio of largest to smallest overlap eigenvalue.
    pub fn overlap_condition(&self) -> f64 {
        let ev = self.overlap.clone().symmetric_eigenvalues();
        let max = ev.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let min = ev.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests;
