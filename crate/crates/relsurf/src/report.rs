//! Typed command reports with deterministic serialization: struct field
//! order fixes JSON key order, every float is rounded to 12 significant
//! digits, and magnitudes below 1e-12 collapse to zero, so byte-identical
//! inputs produce byte-identical reports.

use crate::causal::Surface;
use crate::qlogic::{SoundnessAssessment, ValuationOutcome};
use crate::relstate::{ChainOutcome, ChainResult};
use crate::tensor::{DensityOperator, StateVector};
use crate::workspace::Workspace;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;

/// Rounds to 12 significant digits; values below 1e-12 in magnitude snap to
/// zero (also normalizing the sign of zero).
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < 1e-12 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("rounded float reparses")
}

pub fn cx12(z: Complex64) -> [f64; 2] {
    [sig12(z.re), sig12(z.im)]
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub downset: Vec<String>,
    pub edges: Vec<String>,
}

impl SurfaceOut {
    pub fn new(ws: &Workspace, s: &Surface) -> Self {
        SurfaceOut {
            name: ws.surface_name(s).map(|n| n.to_string()),
            downset: s.fired().iter().map(|v| v.as_str().to_string()).collect(),
            edges: s.edges().iter().map(|e| e.as_str().to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorOut {
    pub edge: String,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PureOut {
    pub factors: Vec<FactorOut>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl PureOut {
    pub fn new(psi: &StateVector) -> Self {
        let psi = psi.phase_normalized();
        PureOut {
            factors: psi
                .factors()
                .into_iter()
                .map(|(l, d)| FactorOut { edge: l.as_str().to_string(), dim: d })
                .collect(),
            amplitudes: psi.amplitudes().iter().map(|z| cx12(*z)).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityOut {
    pub factors: Vec<FactorOut>,
    pub eigenvalues: Vec<f64>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl DensityOut {
    pub fn new(rho: &DensityOperator) -> Self {
        let m = rho.matrix();
        DensityOut {
            factors: rho
                .factors()
                .into_iter()
                .map(|(l, d)| FactorOut { edge: l.as_str().to_string(), dim: d })
                .collect(),
            eigenvalues: rho.eigenvalues().into_iter().map(sig12).collect(),
            matrix: (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| cx12(m[(i, j)])).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkOut {
    pub from: String,
    pub to: String,
    pub surface: SurfaceOut,
    pub input: PureOut,
    /// Largest eigenvalue of the link output, when the link was defined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<DensityOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_pure: Option<PureOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainOutcomeOut {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<PureOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainOut {
    pub edges: Vec<String>,
    pub links: Vec<LinkOut>,
    pub outcome: ChainOutcomeOut,
}

impl ChainOut {
    pub fn new(ws: &Workspace, edges: &[String], result: &ChainResult) -> Self {
        let links = result
            .links
            .iter()
            .map(|link| LinkOut {
                from: link.from.as_str().to_string(),
                to: link.to.as_str().to_string(),
                surface: SurfaceOut::new(ws, &link.surface),
                input: PureOut::new(&link.input),
                purity: link.purity.map(sig12),
                output: link.density.as_ref().map(DensityOut::new),
                output_pure: link.pure.as_ref().map(PureOut::new),
            })
            .collect();
        let outcome = match &result.outcome {
            ChainOutcome::Pure(s) => ChainOutcomeOut {
                kind: "pure".into(),
                at: None,
                state: Some(PureOut::new(s)),
                density: None,
            },
            ChainOutcome::MixedAt { at, density } => ChainOutcomeOut {
                kind: "mixed".into(),
                at: Some(*at),
                state: None,
                density: Some(DensityOut::new(density)),
            },
            ChainOutcome::UndefinedAt { at } => ChainOutcomeOut {
                kind: "undefined".into(),
                at: Some(*at),
                state: None,
                density: None,
            },
        };
        ChainOut { edges: edges.to_vec(), links, outcome }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValuationOut {
    pub prop: String,
    pub valuation: String,
    pub norm: f64,
    pub norm_squared: f64,
    pub surface: Vec<String>,
}

impl ValuationOut {
    pub fn new(prop: &str, v: &ValuationOutcome) -> Self {
        ValuationOut {
            prop: prop.to_string(),
            valuation: v.value.to_string(),
            norm: sig12(v.norm),
            norm_squared: sig12(v.norm_squared()),
            surface: v.surface.fired().iter().map(|x| x.as_str().to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepOut {
    pub index: usize,
    pub rule: u8,
    pub from: Vec<usize>,
    pub derived: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessOut {
    pub premises: Vec<ValuationOut>,
    pub conclusion: ValuationOut,
    pub verdict: String,
    pub single_surface: bool,
}

impl SoundnessOut {
    pub fn new(premises: &[String], conclusion: &str, a: &SoundnessAssessment) -> Self {
        SoundnessOut {
            premises: premises
                .iter()
                .zip(&a.premise_valuations)
                .map(|(p, v)| ValuationOut::new(p, v))
                .collect(),
            conclusion: ValuationOut::new(conclusion, &a.conclusion_valuation),
            verdict: a.verdict.to_string(),
            single_surface: a.single_surface,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeduceOut {
    pub name: String,
    pub premises: Vec<String>,
    pub steps: Vec<StepOut>,
    pub valid: bool,
    pub conclusion: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soundness: Option<SoundnessOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Out {
    pub surface: String,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BornOut {
    pub plus_plus: f64,
    pub plus_minus: f64,
    pub minus_plus: f64,
    pub minus_minus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrDemoOut {
    pub table1: Vec<Table1Out>,
    pub born_weights: BornOut,
    pub argument1: ChainOut,
    pub argument2: DensityOut,
    pub deduction: DeduceOut,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyOut {
    pub s1: SurfaceOut,
    pub s2: SurfaceOut,
    pub shared_edges: Vec<String>,
    pub max_abs_diff: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateOut {
    pub surface: SurfaceOut,
    pub state: PureOut,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Surfaces { surfaces: Vec<SurfaceOut> },
    State(Box<StateOut>),
    Consistency(Box<ConsistencyOut>),
    Relstate(Box<ChainOut>),
    Eval(Box<ValuationOut>),
    Deduce(Box<DeduceOut>),
    FrDemo(Box<FrDemoOut>),
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Compact human-readable rendering.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        match self {
            Report::Surfaces { surfaces } => {
                let _ = writeln!(out, "{} spacelike surfaces:", surfaces.len());
                for s in surfaces {
                    let name = s.name.as_deref().unwrap_or("-");
                    let _ = writeln!(
                        out,
                        "  {:>4}  fired {{{}}}  edges ({})",
                        name,
                        s.downset.join(","),
                        s.edges.join(",")
                    );
                }
            }
            Report::State(s) => {
                let name = s.surface.name.as_deref().unwrap_or("-");
                let _ = writeln!(out, "state on {} {{{}}}:", name, s.surface.downset.join(","));
                let _ = writeln!(
                    out,
                    "  factors: {}",
                    s.state
                        .factors
                        .iter()
                        .map(|f| format!("{}({})", f.edge, f.dim))
                        .collect::<Vec<_>>()
                        .join(" ")
                );
                for (i, a) in s.state.amplitudes.iter().enumerate() {
                    if a[0] != 0.0 || a[1] != 0.0 {
                        let _ = writeln!(out, "  [{i:>4}] {:+.9} {:+.9}i", a[0], a[1]);
                    }
                }
            }
            Report::Consistency(c) => {
                let _ = writeln!(
                    out,
                    "shared edges ({}): max |Δρ| = {:.3e} -> {}",
                    c.shared_edges.join(","),
                    c.max_abs_diff,
                    if c.consistent { "consistent" } else { "INCONSISTENT" }
                );
            }
            Report::Relstate(r) => {
                for (i, link) in r.links.iter().enumerate() {
                    let name = link.surface.name.as_deref().unwrap_or("-");
                    let purity = link
                        .purity
                        .map(|p| format!("{p:.9}"))
                        .unwrap_or_else(|| "-".to_string());
                    let _ = writeln!(
                        out,
                        "link {}: {} -> {} on {} (purity {})",
                        i + 1,
                        link.from,
                        link.to,
                        name,
                        purity
                    );
                }
                let _ = writeln!(out, "outcome: {}", r.outcome.kind);
                if let Some(state) = &r.outcome.state {
                    for (i, a) in state.amplitudes.iter().enumerate() {
                        if a[0] != 0.0 || a[1] != 0.0 {
                            let _ = writeln!(out, "  [{i}] {:+.9} {:+.9}i", a[0], a[1]);
                        }
                    }
                }
                if let Some(d) = &r.outcome.density {
                    let _ = writeln!(out, "  eigenvalues {:?}", d.eigenvalues);
                }
            }
            Report::Eval(v) => {
                let _ = writeln!(
                    out,
                    "{} : {} (norm {:.9}, norm² {:.9}) on {{{}}}",
                    v.prop,
                    v.valuation,
                    v.norm,
                    v.norm_squared,
                    v.surface.join(",")
                );
            }
            Report::Deduce(d) => {
                let _ = writeln!(out, "deduction {}: {}", d.name, if d.valid { "valid" } else { "INVALID" });
                for s in &d.steps {
                    let mark = if s.ok { "ok " } else { "BAD" };
                    let reason =
                        s.reason.as_ref().map(|r| format!("  ({r})")).unwrap_or_default();
                    let _ = writeln!(
                        out,
                        "  [{mark}] step {} rule {} from {:?}: {}{}",
                        s.index, s.rule, s.from, s.derived, reason
                    );
                }
                let _ = writeln!(out, "conclusion: {}", d.conclusion);
                if let Some(sound) = &d.soundness {
                    for p in &sound.premises {
                        let _ = writeln!(out, "  premise {} : {}", p.prop, p.valuation);
                    }
                    let _ = writeln!(
                        out,
                        "  conclusion {} : {}",
                        sound.conclusion.prop, sound.conclusion.valuation
                    );
                    let _ = writeln!(
                        out,
                        "  verdict: {} (single surface: {})",
                        sound.verdict, sound.single_surface
                    );
                }
            }
            Report::FrDemo(f) => {
                let _ = writeln!(out, "reference-state fidelities:");
                for t in &f.table1 {
                    let _ = writeln!(out, "  {}: {:.12}", t.surface, t.fidelity);
                }
                let _ = writeln!(
                    out,
                    "outcome weights (±,±): {:.9} {:.9} {:.9} {:.9}",
                    f.born_weights.plus_plus,
                    f.born_weights.plus_minus,
                    f.born_weights.minus_plus,
                    f.born_weights.minus_minus
                );
                let _ = write!(out, "{}", Report::Relstate(Box::new(f.argument1.clone())).pretty());
                let _ = writeln!(out, "direct map eigenvalues: {:?}", f.argument2.eigenvalues);
                let _ = write!(out, "{}", Report::Deduce(Box::new(f.deduction.clone())).pretty());
            }
        }
        out
    }
}
