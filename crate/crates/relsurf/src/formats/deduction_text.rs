//! The deduction script format. One file holds named deduction blocks:
//!
//! ```text
//! # comment
//! deduction fr
//! premises:
//!   U_minus & W_minus
//!   U_minus -> B_1
//! step 1 from 1: U_minus
//! step 4 from 5, 2: B_1
//! ```
//!
//! Step indices are 1-based positions in the running list (premises first,
//! then derived propositions in order).

use super::prop_expr;
use super::ParseError;
use crate::causal::CausalStructure;
use crate::qlogic::{wellformed, AtomDef, Deduction, LogicError, Prop, RawProp, Rule, Step};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub struct DeductionScript {
    pub name: String,
    pub premises: Vec<(RawProp, usize)>,
    pub steps: Vec<(u8, Vec<usize>, RawProp, usize)>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses the textual format into raw scripts (no atom resolution yet).
pub fn parse_scripts(src: &str) -> Result<Vec<DeductionScript>, ParseError> {
    let mut scripts: Vec<DeductionScript> = Vec::new();
    let mut in_premises = false;
    for (ix, raw_line) in src.lines().enumerate() {
        let line_no = ix + 1;
        let line = strip_comment(raw_line);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix("deduction ") {
            let name = rest.trim().trim_end_matches(':').trim();
            if name.is_empty() {
                return Err(ParseError::new(line_no, 1, "deduction needs a name"));
            }
            scripts.push(DeductionScript {
                name: name.to_string(),
                premises: Vec::new(),
                steps: Vec::new(),
            });
            in_premises = false;
        } else if trimmed == "premises:" {
            if scripts.is_empty() {
                return Err(ParseError::new(line_no, 1, "premises before any deduction header"));
            }
            in_premises = true;
        } else if let Some(rest) = trimmed.strip_prefix("step ") {
            let Some(script) = scripts.last_mut() else {
                return Err(ParseError::new(line_no, 1, "step before any deduction header"));
            };
            in_premises = false;
            let (rule, from, expr, expr_col) =
                parse_step_line(rest, line_no, indent + 1 + "step ".len())?;
            let prop = prop_expr::parse_at(expr, line_no, expr_col)?;
            script.steps.push((rule, from, prop, line_no));
        } else if in_premises {
            let col = indent + 1;
            let prop = prop_expr::parse_at(trimmed, line_no, col)?;
            let script = scripts.last_mut().expect("premises flag implies a script");
            script.premises.push((prop, line_no));
        } else {
            return Err(ParseError::new(
                line_no,
                indent + 1,
                format!("unexpected line {trimmed:?} (expected \"deduction\", \"premises:\", or \"step\")"),
            ));
        }
    }
    for s in &scripts {
        if s.premises.is_empty() {
            return Err(ParseError::new(1, 1, format!("deduction {} has no premises", s.name)));
        }
    }
    Ok(scripts)
}

/// Parses `"<rule> from <i>[, <j>]: <expr>"`, returning the rule number, the
/// antecedent indices, the expression slice, and its column.
fn parse_step_line(
    rest: &str,
    line: usize,
    col0: usize,
) -> Result<(u8, Vec<usize>, &str, usize), ParseError> {
    let colon = rest
        .find(':')
        .ok_or_else(|| ParseError::new(line, col0, "step line needs ': <proposition>'"))?;
    let head = &rest[..colon];
    let expr = &rest[colon + 1..];
    let expr_col = col0 + colon + 1 + (expr.len() - expr.trim_start().len());
    let mut parts = head.splitn(2, " from ");
    let rule_str = parts.next().unwrap_or("").trim();
    let rule: u8 = rule_str
        .parse()
        .map_err(|_| ParseError::new(line, col0, format!("bad rule number {rule_str:?}")))?;
    let from_str = parts
        .next()
        .ok_or_else(|| ParseError::new(line, col0, "step line needs 'from <indices>'"))?;
    let from: Vec<usize> = from_str
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| ParseError::new(line, col0, format!("bad antecedent index {:?}", s.trim())))
        })
        .collect::<Result<_, _>>()?;
    Ok((rule, from, expr.trim(), expr_col))
}

/// Resolves scripts against an atom table and causal structure. Unknown
/// atoms are parse errors (with the offending line); ill-formed conjunctions
/// are validation errors.
pub fn resolve_scripts(
    scripts: &[DeductionScript],
    atoms: &BTreeMap<String, Arc<AtomDef>>,
    g: &CausalStructure,
) -> Result<BTreeMap<String, Deduction>, DeductionLoadError> {
    let mut out = BTreeMap::new();
    for script in scripts {
        let mut premises: Vec<Prop> = Vec::new();
        for (raw, line) in &script.premises {
            premises.push(resolve_prop(raw, atoms, g, *line)?);
        }
        let mut steps = Vec::new();
        for (rule_no, from, raw, line) in &script.steps {
            let rule = Rule::from_number(*rule_no).ok_or_else(|| {
                DeductionLoadError::Parse(ParseError::new(
                    *line,
                    1,
                    format!("rule number {rule_no} out of range 1-4"),
                ))
            })?;
            let derived = resolve_prop(raw, atoms, g, *line)?;
            steps.push(Step { rule, from: from.clone(), derived });
        }
        if out.insert(script.name.clone(), Deduction { premises, steps }).is_some() {
            return Err(DeductionLoadError::Validation(format!(
                "duplicate deduction name {}",
                script.name
            )));
        }
    }
    Ok(out)
}

fn resolve_prop(
    raw: &RawProp,
    atoms: &BTreeMap<String, Arc<AtomDef>>,
    g: &CausalStructure,
    line: usize,
) -> Result<Prop, DeductionLoadError> {
    wellformed(raw, atoms, g).map_err(|e| match e {
        LogicError::UnknownAtom(name) => DeductionLoadError::Parse(ParseError::new(
            line,
            1,
            format!("undeclared atom {name}"),
        )),
        other => DeductionLoadError::Validation(other.to_string()),
    })
}

#[derive(Debug)]
pub enum DeductionLoadError {
    Parse(ParseError),
    Validation(String),
}

/// Serializes deductions back to the script format.
pub fn scripts_to_text(deductions: &BTreeMap<String, Deduction>) -> String {
    let mut out = String::new();
    for (name, d) in deductions {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("deduction {name}\n"));
        out.push_str("premises:\n");
        for p in &d.premises {
            out.push_str(&format!("  {p}\n"));
        }
        for s in &d.steps {
            let from: Vec<String> = s.from.iter().map(|i| i.to_string()).collect();
            out.push_str(&format!("step {} from {}: {}\n", s.rule, from.join(", "), s.derived));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fr;

    const SCRIPT: &str = "\
# the chained-inference deduction
deduction fr
premises:
  U_minus & W_minus
  U_minus -> B_1
  B_1 -> A_1
  A_1 -> W_plus
step 1 from 1: U_minus
step 4 from 5, 2: B_1
step 4 from 6, 3: A_1
step 4 from 7, 4: W_plus
step 2 from 1: W_minus
step 3 from 8, 9: W_plus & W_minus
";

    #[test]
    fn parses_and_resolves_the_reference_script() {
        let sc = fr::build_fr();
        let scripts = parse_scripts(SCRIPT).unwrap();
        assert_eq!(scripts.len(), 1);
        let all = resolve_scripts(&scripts, &sc.atoms, sc.circuit.structure()).unwrap();
        let d = &all["fr"];
        assert_eq!(d.premises.len(), 4);
        assert_eq!(d.steps.len(), 6);
        assert_eq!(*d, sc.deduction);
    }

    #[test]
    fn roundtrips_through_serialization() {
        let sc = fr::build_fr();
        let mut map = BTreeMap::new();
        map.insert("fr".to_string(), sc.deduction.clone());
        let text = scripts_to_text(&map);
        let scripts = parse_scripts(&text).unwrap();
        let resolved = resolve_scripts(&scripts, &sc.atoms, sc.circuit.structure()).unwrap();
        assert_eq!(resolved["fr"], sc.deduction);
    }

    #[test]
    fn unknown_atom_is_a_parse_error_with_line() {
        let sc = fr::build_fr();
        let src = "deduction d\npremises:\n  U_minus & GHOST\n";
        let scripts = parse_scripts(src).unwrap();
        match resolve_scripts(&scripts, &sc.atoms, sc.circuit.structure()) {
            Err(DeductionLoadError::Parse(e)) => {
                assert_eq!(e.line, 3);
                assert!(e.message.contains("GHOST"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_position_is_inside_the_file() {
        let src = "deduction d\npremises:\n  U_minus &&& B_1\n";
        let err = parse_scripts(src).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.col > 10, "col {}", err.col);
    }

    #[test]
    fn bad_step_lines_are_rejected() {
        for (src, needle) in [
            ("deduction d\npremises:\n  U_minus\nstep 9 from 1: U_minus\n", "rule number"),
            ("deduction d\npremises:\n  U_minus\nstep 1: U_minus\n", "from"),
            ("deduction d\npremises:\n  U_minus\nstep 1 from x: U_minus\n", "index"),
            ("deduction d\npremises:\n  U_minus\nstep 1 from 1 U_minus\n", ":"),
        ] {
            let res = parse_scripts(src).map(|s| {
                let sc = fr::build_fr();
                resolve_scripts(&s, &sc.atoms, sc.circuit.structure()).map(|_| ())
            });
            let msg = match res {
                Err(e) => e.message,
                Ok(Err(DeductionLoadError::Parse(e))) => e.message,
                other => panic!("expected failure for {src:?}, got {other:?}"),
            };
            assert!(msg.contains(needle), "{msg:?} lacks {needle:?}");
        }
    }

    #[test]
    fn stray_lines_are_rejected() {
        let err = parse_scripts("hello world\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
