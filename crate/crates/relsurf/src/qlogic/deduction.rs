//! Rule-checked deductions: a premise list followed by steps, each appending
//! one proposition derived from one or two earlier ones by the four rules
//! (left/right projection of a conjunction, conjunction introduction with a
//! common-surface side condition, and modus ponens over the implication
//! sugar). Checking is purely syntactic: propositions match by structural
//! equality of their trees.

use super::prop::Prop;
use crate::causal::CausalStructure;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    ProjectLeft,
    ProjectRight,
    Conjoin,
    ModusPonens,
}

impl Rule {
    pub fn number(self) -> u8 {
        match self {
            Rule::ProjectLeft => 1,
            Rule::ProjectRight => 2,
            Rule::Conjoin => 3,
            Rule::ModusPonens => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Rule> {
        match n {
            1 => Some(Rule::ProjectLeft),
            2 => Some(Rule::ProjectRight),
            3 => Some(Rule::Conjoin),
            4 => Some(Rule::ModusPonens),
            _ => None,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Rule::ProjectLeft | Rule::ProjectRight => 1,
            Rule::Conjoin | Rule::ModusPonens => 2,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// One derivation step: `derived` follows from the propositions at the
/// 1-based positions `from` in the running list (premises first).
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub rule: Rule,
    pub from: Vec<usize>,
    pub derived: Prop,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Deduction {
    pub premises: Vec<Prop>,
    pub steps: Vec<Step>,
}

impl Deduction {
    /// The conclusion: the final proposition of the running list (the last
    /// premise if there are no steps).
    pub fn conclusion(&self) -> &Prop {
        self.steps.last().map(|s| &s.derived).unwrap_or_else(|| {
            self.premises.last().expect("deduction must have at least one premise")
        })
    }

    /// All propositions ever on the list: premises then derived, in order.
    pub fn running_list(&self) -> Vec<&Prop> {
        self.premises.iter().chain(self.steps.iter().map(|s| &s.derived)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct StepVerdict {
    pub index: usize,
    pub rule: Rule,
    pub ok: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug)]
pub struct DeductionReport {
    pub step_verdicts: Vec<StepVerdict>,
    pub conclusion: Prop,
    pub valid: bool,
}

/// Verifies every step against its rule schema. Invalid steps are reported,
/// not thrown; the derived proposition still joins the running list so later
/// steps can be checked too.
pub fn check_deduction(d: &Deduction, g: &CausalStructure) -> DeductionReport {
    let mut list: Vec<&Prop> = d.premises.iter().collect();
    let mut verdicts = Vec::with_capacity(d.steps.len());
    for (i, step) in d.steps.iter().enumerate() {
        let verdict = check_step(step, &list, g);
        verdicts.push(StepVerdict {
            index: i + 1,
            rule: step.rule,
            ok: verdict.is_ok(),
            reason: verdict.err(),
        });
        list.push(&step.derived);
    }
    let valid = verdicts.iter().all(|v| v.ok);
    DeductionReport { step_verdicts: verdicts, conclusion: d.conclusion().clone(), valid }
}

fn check_step(step: &Step, list: &[&Prop], g: &CausalStructure) -> Result<(), String> {
    if step.from.len() != step.rule.arity() {
        return Err(format!(
            "rule {} takes {} antecedent(s), got {}",
            step.rule,
            step.rule.arity(),
            step.from.len()
        ));
    }
    let mut ants = Vec::with_capacity(step.from.len());
    for &ix in &step.from {
        if ix == 0 || ix > list.len() {
            return Err(format!("antecedent index {ix} out of range (list has {})", list.len()));
        }
        ants.push(list[ix - 1]);
    }
    match step.rule {
        Rule::ProjectLeft => match ants[0] {
            Prop::And(a, _) if a.as_ref() == &step.derived => Ok(()),
            Prop::And(_, _) => Err("derived proposition is not the left conjunct".into()),
            _ => Err("antecedent is not a conjunction".into()),
        },
        Rule::ProjectRight => match ants[0] {
            Prop::And(_, b) if b.as_ref() == &step.derived => Ok(()),
            Prop::And(_, _) => Err("derived proposition is not the right conjunct".into()),
            _ => Err("antecedent is not a conjunction".into()),
        },
        Rule::Conjoin => {
            let expected =
                Prop::And(Box::new(ants[0].clone()), Box::new(ants[1].clone()));
            if expected != step.derived {
                return Err("derived proposition is not the conjunction of the antecedents".into());
            }
            let support = step.derived.support();
            match g.surface_containing(&support) {
                Ok(Some(_)) => Ok(()),
                Ok(None) => Err("no spacelike surface contains both supports".into()),
                Err(e) => Err(e.to_string()),
            }
        }
        Rule::ModusPonens => {
            let expected =
                Prop::implication(ants[0].clone(), step.derived.clone());
            if *ants[1] == expected {
                Ok(())
            } else {
                Err("second antecedent is not the implication of the first to the derived".into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{EdgeId, VertexDecl, VertexId};
    use crate::qlogic::subspace::Subspace;
    use crate::qlogic::AtomDef;
    use std::sync::Arc;

    fn e(s: &str) -> EdgeId {
        EdgeId::new(s)
    }

    fn atom(name: &str, edge: &str) -> Prop {
        Prop::Atom(Arc::new(AtomDef::new(name, Subspace::basis_state(e(edge), 2, 0))))
    }

    fn and(a: &Prop, b: &Prop) -> Prop {
        Prop::And(Box::new(a.clone()), Box::new(b.clone()))
    }

    /// x and y coexist on the initial surface; v consumes x into z.
    fn g() -> CausalStructure {
        CausalStructure::from_vertex_lists(
            vec![e("x"), e("y"), e("z")],
            vec![VertexDecl { id: VertexId::new("v"), inputs: vec![e("x")], outputs: vec![e("z")] }],
        )
    }

    #[test]
    fn zero_step_deduction_is_valid_with_last_premise_as_conclusion() {
        let p = atom("p", "x");
        let d = Deduction { premises: vec![p.clone()], steps: vec![] };
        let report = check_deduction(&d, &g());
        assert!(report.valid);
        assert_eq!(report.conclusion, p);
    }

    #[test]
    fn projection_and_conjunction_steps() {
        let p = atom("p", "x");
        let q = atom("q", "y");
        let d = Deduction {
            premises: vec![and(&p, &q)],
            steps: vec![
                Step { rule: Rule::ProjectLeft, from: vec![1], derived: p.clone() },
                Step { rule: Rule::ProjectRight, from: vec![1], derived: q.clone() },
                Step { rule: Rule::Conjoin, from: vec![3, 2], derived: and(&q, &p) },
            ],
        };
        let report = check_deduction(&d, &g());
        assert!(report.valid, "{:?}", report.step_verdicts);
        assert_eq!(report.conclusion, and(&q, &p));
    }

    #[test]
    fn modus_ponens_requires_matching_implication() {
        let p = atom("p", "x");
        let q = atom("q", "y");
        let imp = Prop::implication(p.clone(), q.clone());
        let good = Deduction {
            premises: vec![p.clone(), imp.clone()],
            steps: vec![Step { rule: Rule::ModusPonens, from: vec![1, 2], derived: q.clone() }],
        };
        assert!(check_deduction(&good, &g()).valid);

        let bad = Deduction {
            premises: vec![q.clone(), imp],
            steps: vec![Step { rule: Rule::ModusPonens, from: vec![1, 2], derived: q.clone() }],
        };
        let report = check_deduction(&bad, &g());
        assert!(!report.valid);
        assert!(report.step_verdicts[0].reason.is_some());
    }

    #[test]
    fn conjunction_step_fails_without_common_surface() {
        // x (initial) and z (after v) never share a surface.
        let p = atom("p", "x");
        let r = atom("r", "z");
        let d = Deduction {
            premises: vec![p.clone(), r.clone()],
            steps: vec![Step { rule: Rule::Conjoin, from: vec![1, 2], derived: and(&p, &r) }],
        };
        let report = check_deduction(&d, &g());
        assert!(!report.valid);
        let reason = report.step_verdicts[0].reason.as_deref().unwrap();
        assert!(reason.contains("surface"), "{reason}");
    }

    #[test]
    fn out_of_range_antecedent_is_reported() {
        let p = atom("p", "x");
        let d = Deduction {
            premises: vec![p.clone()],
            steps: vec![Step { rule: Rule::ProjectLeft, from: vec![5], derived: p }],
        };
        let report = check_deduction(&d, &g());
        assert!(!report.valid);
        assert!(report.step_verdicts[0].reason.as_deref().unwrap().contains("out of range"));
    }

    #[test]
    fn conjunction_order_is_strict() {
        let p = atom("p", "x");
        let q = atom("q", "y");
        let d = Deduction {
            premises: vec![p.clone(), q.clone()],
            steps: vec![Step { rule: Rule::Conjoin, from: vec![1, 2], derived: and(&q, &p) }],
        };
        assert!(!check_deduction(&d, &g()).valid);
    }
}
