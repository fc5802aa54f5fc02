//! Command dispatch over a workspace. Commands arrive either from the CLI or
//! as JSON requests (the FFI path); both produce the same typed reports and
//! the same exit-code contract:
//!
//! 0 success · 1 runtime error (unknown name, undefined query) · 2 parse
//! error · 3 validation error · 4 invalid deduction step · 5 unsound
//! deduction.

use crate::causal::{EdgeId, Surface, VertexId};
use crate::formats::{prop_expr, ParseError};
use crate::fr::FrScenario;
use crate::qlogic::{self, LogicError, Verdict};
use crate::relstate::{chain, RelStateError, PURE_TOL};
use crate::report::*;
use crate::tensor::StateVector;
use crate::workspace::Workspace;
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_INVALID_STEP: i32 = 4;
pub const EXIT_UNSOUND: i32 = 5;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "cmd", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Request {
    Surfaces,
    State { surface: String },
    Consistency { s1: String, s2: String },
    Relstate { chain: Vec<String>, input: String },
    Eval { expr: String },
    Deduce { name: String },
    FrDemo,
}

#[derive(Debug)]
pub enum CommandError {
    UnknownName(String),
    Parse(ParseError),
    Validation(String),
    Runtime(String),
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::UnknownName(m) => write!(f, "unknown name: {m}"),
            CommandError::Parse(e) => write!(f, "parse error: {e}"),
            CommandError::Validation(m) => write!(f, "validation error: {m}"),
            CommandError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::UnknownName(_) | CommandError::Runtime(_) => EXIT_RUNTIME,
            CommandError::Parse(_) => EXIT_PARSE,
            CommandError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

/// Resolves a surface by assigned name or by downset literal
/// (comma-separated vertex ids, optionally braced; empty or "{}" is the
/// initial surface).
fn resolve_surface(ws: &Workspace, spec: &str) -> Result<Surface, CommandError> {
    if let Some(s) = ws.surface_names.get(spec) {
        return Ok(s.clone());
    }
    let trimmed = spec.trim().trim_start_matches('{').trim_end_matches('}');
    let fired: BTreeSet<VertexId> = trimmed
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(VertexId::new)
        .collect();
    ws.circuit
        .structure()
        .surface_for_downset(&fired)
        .map_err(|e| CommandError::UnknownName(format!("surface {spec:?}: {e}")))
}

/// Parses an input-state literal for an edge: either a basis index or a JSON
/// array of [re, im] pairs.
fn parse_state_literal(
    ws: &Workspace,
    edge: &EdgeId,
    literal: &str,
) -> Result<StateVector, CommandError> {
    let dim = ws
        .circuit
        .dim(edge)
        .ok_or_else(|| CommandError::UnknownName(format!("edge {edge}")))?;
    if let Ok(index) = literal.trim().parse::<usize>() {
        if index >= dim {
            return Err(CommandError::Runtime(format!(
                "basis index {index} out of range for {edge} (dimension {dim})"
            )));
        }
        return Ok(StateVector::basis(edge.clone(), dim, index));
    }
    let pairs: Vec<[f64; 2]> = serde_json::from_str(literal).map_err(|e| {
        CommandError::Parse(ParseError::new(
            e.line(),
            e.column(),
            format!("input state literal: {e}"),
        ))
    })?;
    let amps: Vec<Complex64> = pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    StateVector::single(edge.clone(), amps)
        .map_err(|e| CommandError::Validation(format!("input state: {e}")))
}

pub fn run(ws: &Workspace, req: &Request) -> Result<Outcome, CommandError> {
    match req {
        Request::Surfaces => {
            let surfaces = ws
                .circuit
                .structure()
                .enumerate_surfaces()
                .iter()
                .map(|s| SurfaceOut::new(ws, s))
                .collect();
            Ok(Outcome { report: Report::Surfaces { surfaces }, exit_code: EXIT_OK })
        }
        Request::State { surface } => {
            let s = resolve_surface(ws, surface)?;
            let psi = ws
                .circuit
                .state_on_surface(&s)
                .map_err(|e| CommandError::Runtime(e.to_string()))?;
            Ok(Outcome {
                report: Report::State(Box::new(StateOut {
                    surface: SurfaceOut::new(ws, &s),
                    state: PureOut::new(&psi),
                })),
                exit_code: EXIT_OK,
            })
        }
        Request::Consistency { s1, s2 } => {
            let a = resolve_surface(ws, s1)?;
            let b = resolve_surface(ws, s2)?;
            let check = ws
                .circuit
                .check_consistency(&a, &b)
                .map_err(|e| CommandError::Runtime(e.to_string()))?;
            Ok(Outcome {
                report: Report::Consistency(Box::new(ConsistencyOut {
                    s1: SurfaceOut::new(ws, &a),
                    s2: SurfaceOut::new(ws, &b),
                    shared_edges: check
                        .shared_edges
                        .iter()
                        .map(|e| e.as_str().to_string())
                        .collect(),
                    max_abs_diff: sig12(check.max_abs_diff),
                    consistent: check.consistent,
                })),
                exit_code: EXIT_OK,
            })
        }
        Request::Relstate { chain: edges, input } => {
            if edges.len() < 2 {
                return Err(CommandError::Runtime("chain needs at least two edges".into()));
            }
            let ids: Vec<EdgeId> = edges.iter().map(EdgeId::new).collect();
            for id in &ids {
                if ws.circuit.dim(id).is_none() {
                    return Err(CommandError::UnknownName(format!("edge {id}")));
                }
            }
            let input_state = parse_state_literal(ws, &ids[0], input)?;
            let result = chain(&ws.circuit, &ids, &input_state, PURE_TOL).map_err(|e| match e {
                RelStateError::NoCommonSurface { .. } => CommandError::Runtime(e.to_string()),
                other => CommandError::Runtime(other.to_string()),
            })?;
            Ok(Outcome {
                report: Report::Relstate(Box::new(ChainOut::new(ws, edges, &result))),
                exit_code: EXIT_OK,
            })
        }
        Request::Eval { expr } => {
            let raw = prop_expr::parse(expr).map_err(CommandError::Parse)?;
            let prop = qlogic::wellformed(&raw, &ws.atoms, ws.circuit.structure()).map_err(
                |e| match e {
                    LogicError::UnknownAtom(name) => {
                        CommandError::Parse(ParseError::new(1, 1, format!("undeclared atom {name}")))
                    }
                    other => CommandError::Validation(other.to_string()),
                },
            )?;
            let outcome = qlogic::valuate(&prop, &ws.circuit)
                .map_err(|e| CommandError::Runtime(e.to_string()))?;
            Ok(Outcome {
                report: Report::Eval(Box::new(ValuationOut::new(&prop.to_string(), &outcome))),
                exit_code: EXIT_OK,
            })
        }
        Request::Deduce { name } => {
            let deduction = ws
                .deductions
                .get(name)
                .ok_or_else(|| CommandError::UnknownName(format!("deduction {name:?}")))?;
            let out = deduce_report(ws, name, deduction)?;
            let exit_code = deduce_exit_code(&out);
            Ok(Outcome { report: Report::Deduce(Box::new(out)), exit_code })
        }
        Request::FrDemo => {
            let sc = scenario_from_workspace(ws)?;
            let table1 = sc
                .verify_table1()
                .into_iter()
                .map(|(surface, fidelity)| Table1Out { surface, fidelity: sig12(fidelity) })
                .collect();
            let [pp, pm, mp, mm] = sc.born_weights();
            let born_weights = BornOut {
                plus_plus: sig12(pp),
                plus_minus: sig12(pm),
                minus_plus: sig12(mp),
                minus_minus: sig12(mm),
            };
            let chain_edges: Vec<String> =
                ["U'", "B'", "A''", "W'"].iter().map(|s| s.to_string()).collect();
            let argument1 = ChainOut::new(ws, &chain_edges, &sc.run_argument1());
            let argument2 = DensityOut::new(&sc.run_argument2());
            let deduction = deduce_report(ws, "fr", &sc.deduction)?;
            let exit_code = deduce_exit_code(&deduction);
            Ok(Outcome {
                report: Report::FrDemo(Box::new(FrDemoOut {
                    table1,
                    born_weights,
                    argument1,
                    argument2,
                    deduction,
                })),
                exit_code,
            })
        }
    }
}

/// Parses a JSON request and runs it (the FFI entry path).
pub fn run_json(ws: &Workspace, request_json: &str) -> Result<Outcome, CommandError> {
    let req: Request = serde_json::from_str(request_json).map_err(|e| {
        CommandError::Parse(ParseError::new(e.line(), e.column(), format!("request: {e}")))
    })?;
    run(ws, &req)
}

fn deduce_exit_code(out: &DeduceOut) -> i32 {
    if !out.valid {
        EXIT_INVALID_STEP
    } else if out.soundness.as_ref().map(|s| s.verdict == Verdict::Unsound.to_string())
        == Some(true)
    {
        EXIT_UNSOUND
    } else {
        EXIT_OK
    }
}

fn deduce_report(
    ws: &Workspace,
    name: &str,
    deduction: &qlogic::Deduction,
) -> Result<DeduceOut, CommandError> {
    let report = qlogic::check_deduction(deduction, ws.circuit.structure());
    let steps = report
        .step_verdicts
        .iter()
        .zip(&deduction.steps)
        .map(|(v, s)| StepOut {
            index: v.index,
            rule: v.rule.number(),
            from: s.from.clone(),
            derived: s.derived.to_string(),
            ok: v.ok,
            reason: v.reason.clone(),
        })
        .collect();
    let premises: Vec<String> = deduction.premises.iter().map(|p| p.to_string()).collect();
    let soundness = if report.valid {
        let assessment = qlogic::assess_soundness(deduction, &ws.circuit)
            .map_err(|e| CommandError::Runtime(e.to_string()))?;
        Some(SoundnessOut::new(&premises, &report.conclusion.to_string(), &assessment))
    } else {
        None
    };
    Ok(DeduceOut {
        name: name.to_string(),
        premises,
        steps,
        valid: report.valid,
        conclusion: report.conclusion.to_string(),
        soundness,
    })
}

/// Reassembles the demo scenario from any workspace that carries the needed
/// names (surfaces S0..S4, the five atoms, and the deduction "fr").
fn scenario_from_workspace(ws: &Workspace) -> Result<FrScenario, CommandError> {
    let mut surfaces = std::collections::BTreeMap::new();
    for name in ["S0", "S1", "S2", "S3", "S4"] {
        let s = ws
            .surface_names
            .get(name)
            .ok_or_else(|| CommandError::UnknownName(format!("surface {name:?}")))?;
        surfaces.insert(name.to_string(), s.clone());
    }
    for atom in ["U_minus", "B_1", "A_1", "W_minus", "W_plus"] {
        if !ws.atoms.contains_key(atom) {
            return Err(CommandError::UnknownName(format!("atom {atom:?}")));
        }
    }
    let deduction = ws
        .deductions
        .get("fr")
        .ok_or_else(|| CommandError::UnknownName("deduction \"fr\"".into()))?
        .clone();
    Ok(FrScenario { circuit: ws.circuit.clone(), surfaces, atoms: ws.atoms.clone(), deduction })
}
