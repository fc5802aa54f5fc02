//! Proposition syntax over a causal structure. Atoms carry a support (a set
//! of edges contained in some spacelike surface) and a subspace denotation;
//! negation keeps the support, conjunction unions it and is only well-formed
//! when some surface contains the union. Implication is sugar:
//! `a -> b` stands for `!(a & !b)`.

use super::subspace::Subspace;
use super::LogicError;
use crate::causal::{CausalStructure, EdgeId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// A declared atomic proposition.
#[derive(Clone, Debug)]
pub struct AtomDef {
    pub name: String,
    pub denotation: Subspace,
}

impl AtomDef {
    pub fn new(name: impl Into<String>, denotation: Subspace) -> Self {
        AtomDef { name: name.into(), denotation }
    }

    pub fn support(&self) -> BTreeSet<EdgeId> {
        self.denotation.support().cloned().collect()
    }

    /// Checks the declaration against a structure: support edges must exist
    /// and lie on some common spacelike surface.
    pub fn validate(&self, g: &CausalStructure) -> Result<(), LogicError> {
        let support = self.support();
        if support.is_empty() {
            return Err(LogicError::EmptySupport(self.name.clone()));
        }
        match g.surface_containing(&support) {
            Ok(Some(_)) => Ok(()),
            Ok(None) => Err(LogicError::NoCommonSurface { expr: self.name.clone() }),
            Err(e) => Err(LogicError::Causal(e.to_string())),
        }
    }
}

/// An unchecked proposition tree, as produced by the expression parser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawProp {
    Atom(String),
    Not(Box<RawProp>),
    And(Box<RawProp>, Box<RawProp>),
}

impl RawProp {
    pub fn implication(a: RawProp, b: RawProp) -> RawProp {
        RawProp::Not(Box::new(RawProp::And(Box::new(a), Box::new(RawProp::Not(Box::new(b))))))
    }
}

/// A well-formed proposition: every conjunction's joint support is contained
/// in some spacelike surface.
#[derive(Clone, Debug)]
pub enum Prop {
    Atom(Arc<AtomDef>),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
}

impl PartialEq for Prop {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Prop::Atom(a), Prop::Atom(b)) => a.name == b.name,
            (Prop::Not(a), Prop::Not(b)) => a == b,
            (Prop::And(a1, a2), Prop::And(b1, b2)) => a1 == b1 && a2 == b2,
            _ => false,
        }
    }
}
impl Eq for Prop {}

impl Prop {
    pub fn not(p: Prop) -> Prop {
        Prop::Not(Box::new(p))
    }

    /// `a -> b` as `!(a & !b)`. The conjunction inside still needs a common
    /// surface, so build implications through [`wellformed`] when in doubt.
    pub fn implication(a: Prop, b: Prop) -> Prop {
        Prop::not(Prop::And(Box::new(a), Box::new(Prop::not(b))))
    }

    pub fn support(&self) -> BTreeSet<EdgeId> {
        match self {
            Prop::Atom(def) => def.support(),
            Prop::Not(p) => p.support(),
            Prop::And(a, b) => {
                let mut s = a.support();
                s.extend(b.support());
                s
            }
        }
    }

    /// Destructures the implication sugar pattern `!(a & !b)`.
    pub fn as_implication(&self) -> Option<(&Prop, &Prop)> {
        if let Prop::Not(inner) = self {
            if let Prop::And(a, negb) = inner.as_ref() {
                if let Prop::Not(b) = negb.as_ref() {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// The subspace denoted by this proposition: atoms carry theirs, `!` is
    /// the orthocomplement, `&` intersects after embedding into the union
    /// support. `dims` supplies dimensions for edges a child support lacks.
    pub fn denotation(&self, dims: &BTreeMap<EdgeId, usize>) -> Result<Subspace, LogicError> {
        match self {
            Prop::Atom(def) => Ok(def.denotation.clone()),
            Prop::Not(p) => Ok(p.denotation(dims)?.complement()),
            Prop::And(a, b) => {
                let da = a.denotation(dims)?;
                let db = b.denotation(dims)?;
                let mut joint: BTreeMap<EdgeId, usize> = BTreeMap::new();
                for (l, d) in da.factors().iter().chain(db.factors()) {
                    joint.insert(l.clone(), *d);
                }
                debug_assert!(
                    joint.iter().all(|(l, d)| dims.get(l).is_none_or(|x| x == d)),
                    "support dimension conflicts with the assignment"
                );
                let joint: Vec<(EdgeId, usize)> = joint.into_iter().collect();
                da.meet(&db, &joint)
            }
        }
    }
}

/// Checks a raw tree against the atom table and the structure, computing
/// supports and rejecting conjunctions whose supports share no surface.
pub fn wellformed(
    raw: &RawProp,
    atoms: &BTreeMap<String, Arc<AtomDef>>,
    g: &CausalStructure,
) -> Result<Prop, LogicError> {
    match raw {
        RawProp::Atom(name) => {
            let def = atoms.get(name).ok_or_else(|| LogicError::UnknownAtom(name.clone()))?;
            Ok(Prop::Atom(Arc::clone(def)))
        }
        RawProp::Not(p) => Ok(Prop::not(wellformed(p, atoms, g)?)),
        RawProp::And(a, b) => {
            let pa = wellformed(a, atoms, g)?;
            let pb = wellformed(b, atoms, g)?;
            let prop = Prop::And(Box::new(pa), Box::new(pb));
            let support = prop.support();
            match g.surface_containing(&support) {
                Ok(Some(_)) => Ok(prop),
                Ok(None) => Err(LogicError::NoCommonSurface { expr: prop.to_string() }),
                Err(e) => Err(LogicError::Causal(e.to_string())),
            }
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(p: &Prop, parent: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
            if let Some((a, b)) = p.as_implication() {
                let parens = parent > 1;
                if parens {
                    out.write_str("(")?;
                }
                go(a, 2, out)?;
                out.write_str(" -> ")?;
                go(b, 1, out)?;
                if parens {
                    out.write_str(")")?;
                }
                return Ok(());
            }
            match p {
                Prop::Atom(def) => out.write_str(&def.name),
                Prop::Not(x) => {
                    out.write_str("!")?;
                    go(x, 3, out)
                }
                Prop::And(a, b) => {
                    let parens = parent > 2;
                    if parens {
                        out.write_str("(")?;
                    }
                    go(a, 2, out)?;
                    out.write_str(" & ")?;
                    go(b, 3, out)?;
                    if parens {
                        out.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}
