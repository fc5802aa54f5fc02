//! The atom table file: each atom declares a name, a support (edge list),
//! and a denotation, given either as an orthonormal basis-vector list or as
//! a projector matrix. Vectors and matrices are row-major over the support
//! edges in the order listed.

use super::{from_serde_json, ParseError};
use crate::assignment::CircuitAssignment;
use crate::causal::EdgeId;
use crate::linalg::{self, CMat};
use crate::qlogic::{AtomDef, Subspace};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use super::circuit::{cx, un_cx, Cx};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub name: String,
    pub support: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<Cx>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projector: Option<Vec<Vec<Cx>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomsFile {
    pub atoms: Vec<AtomEntry>,
}

impl AtomsFile {
    pub fn from_json(src: &str) -> Result<Self, ParseError> {
        serde_json::from_str(src).map_err(|e| from_serde_json(&e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("atoms file serializes")
    }

    /// Resolves every atom against the circuit: supports must name existing
    /// edges and lie on some surface; denotations must be valid subspaces.
    pub fn build(
        &self,
        circuit: &CircuitAssignment,
    ) -> Result<BTreeMap<String, Arc<AtomDef>>, String> {
        let mut out = BTreeMap::new();
        for entry in &self.atoms {
            let factors: Vec<(EdgeId, usize)> = entry
                .support
                .iter()
                .map(|name| {
                    let id = EdgeId::new(name);
                    circuit
                        .dim(&id)
                        .map(|d| (id, d))
                        .ok_or_else(|| format!("atom {}: unknown edge {name}", entry.name))
                })
                .collect::<Result<_, _>>()?;
            let vectors = match (&entry.basis, &entry.projector) {
                (Some(basis), None) => {
                    basis.iter().map(|v| v.iter().map(|p| un_cx(*p)).collect()).collect()
                }
                (None, Some(projector)) => projector_range(projector)
                    .map_err(|msg| format!("atom {}: {msg}", entry.name))?,
                _ => {
                    return Err(format!(
                        "atom {}: exactly one of \"basis\" or \"projector\" required",
                        entry.name
                    ))
                }
            };
            let denotation = Subspace::new(factors, vectors)
                .map_err(|e| format!("atom {}: {e}", entry.name))?;
            let def = Arc::new(AtomDef::new(&entry.name, denotation));
            def.validate(circuit.structure()).map_err(|e| format!("{e}"))?;
            if out.insert(entry.name.clone(), def).is_some() {
                return Err(format!("duplicate atom {}", entry.name));
            }
        }
        Ok(out)
    }
}

/// Range basis of a projector: eigenvectors with eigenvalue near one.
fn projector_range(rows: &[Vec<Cx>]) -> Result<Vec<Vec<Complex64>>, String> {
    let n = rows.len();
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err("projector matrix is not square".into());
        }
        for (j, p) in row.iter().enumerate() {
            m[(i, j)] = un_cx(*p);
        }
    }
    if m.hermitian_defect() > 1e-8 {
        return Err("projector is not Hermitian".into());
    }
    // P² = P
    if m.mul(&m).sub(&m).max_abs() > 1e-8 {
        return Err("matrix is not idempotent".into());
    }
    let (vals, vecs) = linalg::eigh(&m);
    let mut out = Vec::new();
    for (k, v) in vals.iter().enumerate() {
        if *v > 0.5 {
            out.push(vecs.column(k));
        }
    }
    Ok(out)
}

/// Serializes an atom table with basis-vector denotations.
pub fn atoms_to_file(atoms: &BTreeMap<String, Arc<AtomDef>>) -> AtomsFile {
    let entries = atoms
        .values()
        .map(|def| AtomEntry {
            name: def.name.clone(),
            support: def.denotation.factors().iter().map(|(l, _)| l.as_str().to_string()).collect(),
            basis: Some(
                def.denotation
                    .basis()
                    .iter()
                    .map(|v| v.iter().map(|z| cx(*z)).collect())
                    .collect(),
            ),
            projector: None,
        })
        .collect();
    AtomsFile { atoms: entries }
}
