//! JSON input documents: atoms, electron count, basis (named or explicit)
//! and optional run options.

use hflab_core::molbasis::{normalize_shells, rescale_convention, Primitive, Shell};
use hflab_core::{Atom, BasisName, BasisSet, Convention, Molecule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::report::canonical_json;
use crate::InputError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    #[serde(rename = "Z")]
    z: u32,
    position: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimitiveDoc {
    exp: f64,
    coeff: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShellDoc {
    center: usize,
    l: u32,
    primitives: Vec<PrimitiveDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitDoc {
    shells: Vec<ShellDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum BasisDoc {
    Name(String),
    Explicit(ExplicitDoc),
}

/// Run options that may ride along in the input; command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputOptions {
    pub max_iter: Option<usize>,
    pub tol_energy: Option<f64>,
    pub tol_commutator: Option<f64>,
    pub damping: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc {
    atoms: Vec<AtomDoc>,
    n_electrons: usize,
    basis: BasisDoc,
    #[serde(default)]
    convention: Option<String>,
    #[serde(default)]
    options: Option<InputOptions>,
}

/// A validated input. The basis is always normalized and in paper units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInput {
    pub molecule: Molecule,
    pub basis: BasisSet,
    pub basis_name: Option<BasisName>,
    /// Units the document's exponents were written in.
    pub convention: Convention,
    pub options: InputOptions,
}

impl RunInput {
    /// `basis_name` as written, or `"explicit"`.
    pub fn basis_label(&self) -> String {
        self.basis_name.map_or_else(|| "explicit".to_string(), |b| b.to_string())
    }
}

/// Parses and validates an input document.
///
/// Explicit `coeff` values multiply the unnormalized primitive
/// `(x-A)^l exp(-α|x-A|²)`; each contraction is then scaled to unit norm.
/// With `"convention": "standard"`, explicit and even-tempered exponents are
/// divided by 4. `sto3g-paper` is defined in paper units and never rescaled.
pub fn parse_input(text: &str) -> Result<RunInput, InputError> {
    let doc: InputDoc = serde_json::from_str(text)?;
    let convention: Convention = match &doc.convention {
        Some(c) => c.parse()?,
        None => Convention::Paper,
    };
    let atoms = doc.atoms.iter().map(|a| Atom { z: a.z, position: a.position }).collect();
    let molecule = Molecule::new(atoms, doc.n_electrons)?;
    let (raw, basis_name) = match &doc.basis {
        BasisDoc::Name(name) => {
            let parsed: BasisName = name.parse()?;
            (BasisSet::named(&parsed, &molecule)?, Some(parsed))
        }
        BasisDoc::Explicit(e) => {
            let shells = e
                .shells
                .iter()
                .map(|s| Shell {
                    center: s.center,
                    l: s.l,
                    primitives: s.primitives.iter().map(|p| Primitive { exponent: p.exp, coeff: p.coeff }).collect(),
                })
                .collect();
            (BasisSet::new(shells, &molecule)?, None)
        }
    };
    let raw = match (convention, basis_name) {
        (Convention::Standard, Some(BasisName::Sto3gPaper)) => raw,
        (c, _) => rescale_convention(&raw, c, Convention::Paper),
    };
    let basis = normalize_shells(&raw)?;
    Ok(RunInput { molecule, basis, basis_name, convention, options: doc.options.unwrap_or_default() })
}

/// Writes `(molecule, basis)` as an explicit paper-convention document that
/// parses back to the same objects.
pub fn serialize_input(molecule: &Molecule, basis: &BasisSet) -> String {
    let doc = InputDoc {
        atoms: molecule.atoms().iter().map(|a| AtomDoc { z: a.z, position: a.position }).collect(),
        n_electrons: molecule.n_electrons(),
        basis: BasisDoc::Explicit(explicit(basis)),
        convention: Some(Convention::Paper.as_str().to_string()),
        options: None,
    };
    canonical_json(&serde_json::to_value(doc).expect("input document is plain data"))
}

fn explicit(basis: &BasisSet) -> ExplicitDoc {
    ExplicitDoc {
        shells: basis
            .shells()
            .iter()
            .map(|s| ShellDoc {
                center: s.center,
                l: s.l,
                primitives: s.primitives.iter().map(|p| PrimitiveDoc { exp: p.exponent, coeff: p.coeff }).collect(),
            })
            .collect(),
    }
}

/// SHA-256 of the canonical explicit shell list, lowercase hex.
pub fn basis_hash(basis: &BasisSet) -> String {
    let text = canonical_json(&serde_json::to_value(explicit(basis)).expect("basis is plain data"));
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Input echo for reports.
pub fn echo(input: &RunInput) -> serde_json::Value {
    let atoms: Vec<serde_json::Value> = input
        .molecule
        .atoms()
        .iter()
        .map(|a| serde_json::json!({ "Z": a.z, "position": a.position }))
        .collect();
    serde_json::json!({
        "molecule": { "atoms": atoms, "n_electrons": input.molecule.n_electrons() },
        "basis": {
            "name": input.basis_label(),
            "hash": basis_hash(&input.basis),
            "n_functions": input.basis.n_functions(),
        },
        "convention": input.convention.as_str(),
    })
}
