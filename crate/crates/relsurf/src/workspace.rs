//! A loaded workspace: the circuit assignment, named surfaces, the atom
//! table, and named deductions — either built in (the canonical scenario) or
//! read from a circuit file plus optional atom and deduction files.

use crate::assignment::CircuitAssignment;
use crate::causal::Surface;
use crate::formats::atoms::{atoms_to_file, AtomsFile};
use crate::formats::circuit::{circuit_to_file, CircuitFile};
use crate::formats::deduction_text::{
    parse_scripts, resolve_scripts, scripts_to_text, DeductionLoadError,
};
use crate::formats::ParseError;
use crate::fr;
use crate::qlogic::{AtomDef, Deduction};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug)]
pub enum LoadError {
    /// Unreadable file (exit code 1).
    Io(String),
    /// Malformed input (exit code 2).
    Parse(ParseError),
    /// Well-formed input that violates a structural requirement (exit 3).
    Validation(String),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(m) => write!(f, "io error: {m}"),
            LoadError::Parse(e) => write!(f, "parse error: {e}"),
            LoadError::Validation(m) => write!(f, "validation error: {m}"),
        }
    }
}

impl std::error::Error for LoadError {}

impl LoadError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LoadError::Io(_) => 1,
            LoadError::Parse(_) => 2,
            LoadError::Validation(_) => 3,
        }
    }
}

#[derive(Debug)]
pub struct Workspace {
    pub circuit: CircuitAssignment,
    pub surface_names: BTreeMap<String, Surface>,
    pub atoms: BTreeMap<String, Arc<AtomDef>>,
    pub deductions: BTreeMap<String, Deduction>,
}

/// The built-in scenario workspace, equal to what the bundled example files
/// describe.
pub fn builtin_fr() -> Workspace {
    from_scenario(fr::build_fr())
}

pub fn from_scenario(sc: fr::FrScenario) -> Workspace {
    Workspace {
        circuit: sc.circuit,
        surface_names: sc.surfaces,
        atoms: sc.atoms,
        deductions: [("fr".to_string(), sc.deduction)].into(),
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))
}

pub fn load_workspace(
    circuit_path: &Path,
    atoms_path: Option<&Path>,
    deductions_path: Option<&Path>,
) -> Result<Workspace, LoadError> {
    let circuit_src = read(circuit_path)?;
    let circuit_file = CircuitFile::from_json(&circuit_src)
        .map_err(|e| LoadError::Parse(e.with_path(circuit_path)))?;
    let (circuit, surface_names) =
        circuit_file.build().map_err(LoadError::Validation)?;

    let atoms = match atoms_path {
        None => BTreeMap::new(),
        Some(path) => {
            let src = read(path)?;
            let file =
                AtomsFile::from_json(&src).map_err(|e| LoadError::Parse(e.with_path(path)))?;
            file.build(&circuit).map_err(LoadError::Validation)?
        }
    };

    let deductions = match deductions_path {
        None => BTreeMap::new(),
        Some(path) => {
            let src = read(path)?;
            let scripts =
                parse_scripts(&src).map_err(|e| LoadError::Parse(e.with_path(path)))?;
            resolve_scripts(&scripts, &atoms, circuit.structure()).map_err(|e| match e {
                DeductionLoadError::Parse(p) => LoadError::Parse(p.with_path(path)),
                DeductionLoadError::Validation(m) => LoadError::Validation(m),
            })?
        }
    };

    Ok(Workspace { circuit, surface_names, atoms, deductions })
}

impl Workspace {
    /// Serializes the workspace back into its three file forms (circuit JSON
    /// with explicit matrix gates, atom JSON, deduction text).
    pub fn to_files(&self) -> (CircuitFile, AtomsFile, String) {
        (
            circuit_to_file(&self.circuit, &self.surface_names),
            atoms_to_file(&self.atoms),
            scripts_to_text(&self.deductions),
        )
    }

    /// The display name of a surface, if one was assigned.
    pub fn surface_name(&self, s: &Surface) -> Option<&str> {
        self.surface_names
            .iter()
            .find(|(_, known)| *known == s)
            .map(|(name, _)| name.as_str())
    }
}
