//! Molecules, contracted Cartesian Gaussian shells and the named basis sets.
//!
//! Energies and exponents default to the convention in which the one-body
//! operator is `-Δ + V` (no factor ½ on the kinetic term). Under the dilation
//! `x -> x/2` an eigenpair `(E, φ(x))` of `-½Δ - Z/r` maps to the eigenpair
//! `(E/2, φ(x/2))` of `-Δ - Z/r`, so Gaussian exponents quoted in the usual
//! Hartree convention are divided by 4.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // inherent methods shadow it when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Positions closer than this are treated as coincident.
const COINCIDENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub z: u32,
    pub position: [f64; 3],
}

/// Nuclear framework plus the electron count.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    atoms: Vec<Atom>,
    n_electrons: usize,
}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, n_electrons: usize) -> Result<Self> {
        if n_electrons == 0 {
            return Err(Error::NoElectrons);
        }
        if atoms.is_empty() {
            return Err(Error::NoAtoms);
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.z == 0 {
                return Err(Error::InvalidCharge(i));
            }
            if atom.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinitePosition(i));
            }
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if distance(&atoms[i].position, &atoms[j].position) < COINCIDENT {
                    return Err(Error::DuplicatePosition(j, i));
                }
            }
        }
        Ok(Self { atoms, n_electrons })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    /// Same nuclei, different electron count.
    pub fn with_electrons(&self, n_electrons: usize) -> Result<Self> {
        Self::new(self.atoms.clone(), n_electrons)
    }

    pub fn total_charge(&self) -> u32 {
        self.atoms.iter().map(|a| a.z).sum()
    }

    /// Rigid translation of every nucleus.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                z: a.z,
                position: [
                    a.position[0] + shift[0],
                    a.position[1] + shift[1],
                    a.position[2] + shift[2],
                ],
            })
            .collect();
        Self { atoms, n_electrons: self.n_electrons }
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Unit convention for the one-body operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Convention {
    /// `h = -Δ + V`.
    #[default]
    Paper,
    /// `h = -½Δ + V` (Hartree atomic units).
    Standard,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Paper => "paper",
            Convention::Standard => "standard",
        }
    }

    /// Multiplier applied to the `-Δ` matrix when forming the core Hamiltonian.
    pub fn kinetic_factor(self) -> f64 {
        match self {
            Convention::Paper => 1.0,
            Convention::Standard => 0.5,
        }
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Convention::Paper),
            "standard" => Ok(Convention::Standard),
            other => Err(Error::UnknownConvention(other.to_string())),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub exponent: f64,
    /// Coefficient of the unnormalized primitive `(x-A)^l exp(-α|x-A|²)`.
    pub coeff: f64,
}

/// A contracted shell of Cartesian Gaussians on one atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub center: usize,
    pub l: u32,
    pub primitives: Vec<Primitive>,
}

impl Shell {
    pub fn n_functions(&self) -> usize {
        if self.l == 0 {
            1
        } else {
            3
        }
    }

    /// Cartesian exponent triples in storage order.
    pub fn cartesians(&self) -> &'static [[u32; 3]] {
        if self.l == 0 {
            &[[0, 0, 0]]
        } else {
            &[[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        }
    }

    /// Self-overlap of one Cartesian component of the contraction.
    pub fn self_overlap(&self) -> f64 {
        let mut s = 0.0;
        for a in &self.primitives {
            for b in &self.primitives {
                let p = a.exponent + b.exponent;
                let base = (PI / p).powf(1.5);
                let ang = if self.l == 0 { 1.0 } else { 0.5 / p };
                s += a.coeff * b.coeff * base * ang;
            }
        }
        s
    }
}

/// Ordered list of shells. Basis functions are numbered shell by shell, with
/// p components in x, y, z order.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    shells: Vec<Shell>,
}

/// One Cartesian basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub shell: usize,
    pub cartesian: [u32; 3],
}

impl BasisSet {
    /// Validates shells against the molecule they live on.
    pub fn new(shells: Vec<Shell>, molecule: &Molecule) -> Result<Self> {
        for (i, shell) in shells.iter().enumerate() {
            if shell.center >= molecule.atoms().len() {
                return Err(Error::BadCenter { shell: i, center: shell.center });
            }
            if shell.l > 1 {
                return Err(Error::UnsupportedAngularMomentum { shell: i, l: shell.l });
            }
            if shell.primitives.is_empty() {
                return Err(Error::EmptyShell(i));
            }
            for p in &shell.primitives {
                if !(p.exponent > 0.0) || !p.exponent.is_finite() {
                    return Err(Error::NonPositiveExponent { shell: i, exponent: p.exponent });
                }
            }
            if shell.primitives.windows(2).any(|w| !(w[0].exponent > w[1].exponent)) {
                return Err(Error::UnsortedExponents(i));
            }
        }
        let basis = Self { shells };
        if basis.n_functions() < molecule.n_electrons() {
            return Err(Error::BasisTooSmall {
                functions: basis.n_functions(),
                electrons: molecule.n_electrons(),
            });
        }
        Ok(basis)
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn n_functions(&self) -> usize {
        self.shells.iter().map(Shell::n_functions).sum()
    }

    pub fn l_max(&self) -> u32 {
        self.shells.iter().map(|s| s.l).max().unwrap_or(0)
    }

    pub fn functions(&self) -> Vec<BasisFunction> {
        self.shells
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                s.cartesians().iter().map(move |&c| BasisFunction { shell: i, cartesian: c })
            })
            .collect()
    }

    /// Expands a named basis on every atom of `molecule`.
    pub fn named(name: &BasisName, molecule: &Molecule) -> Result<Self> {
        let mut shells = Vec::new();
        for (center, atom) in molecule.atoms().iter().enumerate() {
            match *name {
                BasisName::Sto3gPaper => shells.extend(sto3g_paper_shells(atom.z, center)?),
                BasisName::EvenTempered { alpha0, beta, k } => {
                    // one uncontracted s shell per exponent, tightest first
                    for m in (0..k).rev() {
                        let exponent = alpha0 * beta.powi(m as i32);
                        shells.push(Shell {
                            center,
                            l: 0,
                            primitives: alloc::vec![Primitive {
                                exponent,
                                coeff: primitive_norm(exponent, 0),
                            }],
                        });
                    }
                }
            }
        }
        let basis = Self::new(shells, molecule)?;
        normalize_shells(&basis)
    }
}

/// `(2α/π)^{3/4} (4α)^{l/2}`, the norm of one Cartesian primitive with
/// `l ≤ 1`.
pub fn primitive_norm(exponent: f64, l: u32) -> f64 {
    let s = (2.0 * exponent / PI).powf(0.75);
    if l == 0 {
        s
    } else {
        s * (4.0 * exponent).sqrt()
    }
}

/// Built-in basis generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisName {
    /// STO-3G with every exponent divided by 4.
    Sto3gPaper,
    /// `k` uncontracted s functions with exponents `alpha0 * beta^m`.
    EvenTempered { alpha0: f64, beta: f64, k: usize },
}

impl FromStr for BasisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "sto3g-paper" {
            return Ok(BasisName::Sto3gPaper);
        }
        let unknown = || Error::UnknownBasis(s.to_string());
        let args = t
            .strip_prefix("even-tempered(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(unknown)?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(unknown());
        }
        let alpha0: f64 = parts[0].parse().map_err(|_| unknown())?;
        let beta: f64 = parts[1].parse().map_err(|_| unknown())?;
        let k: usize = parts[2].parse().map_err(|_| unknown())?;
        if !(alpha0 > 0.0) || !(beta > 1.0) || k == 0 || !alpha0.is_finite() || !beta.is_finite() {
            return Err(unknown());
        }
        Ok(BasisName::EvenTempered { alpha0, beta, k })
    }
}

impl fmt::Display for BasisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisName::Sto3gPaper => f.write_str("sto3g-paper"),
            BasisName::EvenTempered { alpha0, beta, k } => {
                write!(f, "even-tempered({alpha0}, {beta}, {k})")
            }
        }
    }
}

/// Rescales every exponent between conventions: standard → paper divides by
/// 4, paper → standard multiplies by 4. Coefficients are left untouched, so
/// the result should be renormalized before integrals are taken.
pub fn rescale_convention(basis: &BasisSet, from: Convention, to: Convention) -> BasisSet {
    let factor = match (from, to) {
        (Convention::Standard, Convention::Paper) => 0.25,
        (Convention::Paper, Convention::Standard) => 4.0,
        _ => return basis.clone(),
    };
    let shells = basis
        .shells
        .iter()
        .map(|s| Shell {
            center: s.center,
            l: s.l,
            primitives: s
                .primitives
                .iter()
                .map(|p| Primitive { exponent: p.exponent * factor, coeff: p.coeff })
                .collect(),
        })
        .collect();
    BasisSet { shells }
}

/// Scales each contraction to unit self-overlap.
pub fn normalize_shells(basis: &BasisSet) -> Result<BasisSet> {
    let mut shells = Vec::with_capacity(basis.shells.len());
    for (i, s) in basis.shells.iter().enumerate() {
        if let Some(p) = s.primitives.iter().find(|p| !(p.exponent > 0.0)) {
            return Err(Error::NonPositiveExponent { shell: i, exponent: p.exponent });
        }
        let norm2 = s.self_overlap();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::ZeroNorm(i));
        }
        // already unit up to rounding: keep the coefficients bit for bit
        let scale = if (norm2 - 1.0).abs() <= 4.0 * f64::EPSILON { 1.0 } else { 1.0 / norm2.sqrt() };
        shells.push(Shell {
            center: s.center,
            l: s.l,
            primitives: s
                .primitives
                .iter()
                .map(|p| Primitive { exponent: p.exponent, coeff: p.coeff * scale })
                .collect(),
        });
    }
    Ok(BasisSet { shells })
}

// STO-3G in Hartree convention: exponents, s contraction and p contraction
// (coefficients refer to normalized primitives).
struct Sto3gRow {
    core: [f64; 3],
    valence: Option<[f64; 3]>,
}

const STO3G_CORE_S: [f64; 3] = [0.15432897, 0.53532814, 0.44463454];
const STO3G_VAL_S: [f64; 3] = [-0.09996723, 0.39951283, 0.70011547];
const STO3G_VAL_P: [f64; 3] = [0.15591627, 0.60768372, 0.39195739];

const STO3G: [Sto3gRow; 10] = [
    Sto3gRow { core: [3.42525091, 0.62391373, 0.1688554], valence: None },
    Sto3gRow { core: [6.36242139, 1.158923, 0.31364979], valence: None },
    Sto3gRow {
        core: [16.119575, 2.9362007, 0.7946505],
        valence: Some([0.6362897, 0.1478601, 0.0480887]),
    },
    Sto3gRow {
        core: [30.167871, 5.4951153, 1.4871927],
        valence: Some([1.3148331, 0.3055389, 0.0993707]),
    },
    Sto3gRow {
        core: [48.791113, 8.8873622, 2.405267],
        valence: Some([2.2369561, 0.5198205, 0.1690618]),
    },
    Sto3gRow {
        core: [71.616837, 13.045096, 3.5305122],
        valence: Some([2.9412494, 0.6834831, 0.2222899]),
    },
    Sto3gRow {
        core: [99.106169, 18.052312, 4.8856602],
        valence: Some([3.7804559, 0.8784966, 0.2857144]),
    },
    Sto3gRow {
        core: [130.70932, 23.808861, 6.4436083],
        valence: Some([5.0331513, 1.1695961, 0.380389]),
    },
    Sto3gRow {
        core: [166.67913, 30.360812, 8.2168207],
        valence: Some([6.4648032, 1.5022812, 0.4885885]),
    },
    Sto3gRow {
        core: [207.01561, 37.708151, 10.205297],
        valence: Some([8.2463151, 1.9162662, 0.6232293]),
    },
];

fn contracted(center: usize, l: u32, exps: &[f64; 3], coeffs: &[f64; 3]) -> Shell {
    let primitives = exps
        .iter()
        .zip(coeffs)
        .map(|(&e, &d)| {
            let exponent = e * 0.25;
            Primitive { exponent, coeff: d * primitive_norm(exponent, l) }
        })
        .collect();
    Shell { center, l, primitives }
}

fn sto3g_paper_shells(z: u32, center: usize) -> Result<Vec<Shell>> {
    let row = STO3G.get((z as usize).wrapping_sub(1)).ok_or(Error::MissingElement(z))?;
    let mut shells = alloc::vec![contracted(center, 0, &row.core, &STO3G_CORE_S)];
    if let Some(v) = &row.valence {
        shells.push(contracted(center, 0, v, &STO3G_VAL_S));
        shells.push(contracted(center, 1, v, &STO3G_VAL_P));
    }
    Ok(shells)
}

/// Human-readable label for reports.
pub fn describe(name: Option<&BasisName>) -> String {
    match name {
        Some(n) => n.to_string(),
        None => "explicit".to_string(),
    }
}
