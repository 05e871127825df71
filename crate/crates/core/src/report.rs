//! JSON documents emitted by the command-line tool.

use serde::{Deserialize, Serialize};

use crate::algebra::SolutionSpace;
use crate::bounds::{chain_bound, thm_s_bound, BoundError, ChainSpec, HeightRule};
use crate::deriv_index::DerivIndex;
use crate::forms::{FirstOrderSystem, FormsError};
use crate::prolongation::{ConflictStep, Saturation};
use crate::render::render_triangle;
use crate::tower::{Diagnostic, LeaderKind, Tower};
use crate::verdict::{Certificate, Decision, IndexDoc, RoundOutcome, SystemDoc, SystemSpec, Verdict};

pub const SCHEMA: &str = include_str!("../schema/report.schema.json");
pub const SCHEMA_ID: &str = "prolong-report/1";

fn index(spec: &SystemSpec, v: &DerivIndex) -> IndexDoc {
    IndexDoc { unknown: spec.names[v.unknown].clone(), index: v.index.entries().to_vec() }
}

fn system(spec: &SystemSpec) -> SystemDoc {
    SystemDoc {
        characteristic: spec.pres.field.characteristic(),
        derivations: spec.pres.m,
        unknowns: spec.names.clone(),
        equations: spec.equations(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassDoc {
    pub minimal_leaders: Vec<IndexDoc>,
    pub slot: Option<IndexDoc>,
    pub added: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundDoc {
    pub r: u32,
    pub height: u32,
    pub passes: Vec<PassDoc>,
    pub outcome: String,
    pub grow_to: Option<u32>,
    pub forced_by: Option<IndexDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderDoc {
    pub slot: IndexDoc,
    pub kind: String,
    pub minimal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarningDoc {
    pub slot: IndexDoc,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleDoc {
    pub unknown: String,
    pub height: u32,
    pub rows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub variant: String,
    pub r: Option<u32>,
    pub mu: Option<Vec<u32>>,
    pub height: u32,
    pub bound_unknowns: Vec<String>,
}

/// Output of `check`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub report: String,
    pub verdict: String,
    pub system: SystemDoc,
    pub rounds: Vec<RoundDoc>,
    pub leaders: Vec<LeaderDoc>,
    pub added_relations: Vec<String>,
    pub trace: Vec<String>,
    pub witness: Option<WitnessDoc>,
    pub warnings: Vec<WarningDoc>,
    pub triangles: Vec<TriangleDoc>,
    pub certificate: Option<Certificate>,
}

fn kind_name(k: LeaderKind) -> &'static str {
    match k {
        LeaderKind::Free => "free",
        LeaderKind::Separable => "separable",
        LeaderKind::Inseparable => "inseparable",
    }
}

fn leaders(spec: &SystemSpec, tower: &Tower) -> Vec<LeaderDoc> {
    let report = tower.classify_leaders();
    report
        .kinds
        .iter()
        .filter(|(_, k)| **k != LeaderKind::Free)
        .map(|(v, k)| LeaderDoc { slot: index(spec, v), kind: kind_name(*k).into(), minimal: report.minimal.contains(v) })
        .collect()
}

fn warnings(spec: &SystemSpec, tower: &Tower) -> Vec<WarningDoc> {
    tower
        .irreducibility_warnings()
        .into_iter()
        .map(|w| WarningDoc {
            slot: index(spec, &w.leader),
            status: serde_json::to_value(w.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        })
        .collect()
}

/// One picture per unknown when there are two derivations.
pub fn triangles(spec: &SystemSpec, tower: &Tower, height: u32) -> Vec<TriangleDoc> {
    (0..spec.pres.n)
        .filter_map(|k| {
            let text = render_triangle(tower, k, height).ok()?;
            Some(TriangleDoc { unknown: spec.names[k].clone(), height, rows: text.lines().map(String::from).collect() })
        })
        .collect()
}

fn relations(spec: &SystemSpec, steps: &[ConflictStep]) -> Vec<String> {
    let naming = spec.naming();
    steps.iter().filter(|s| !s.is_contradiction()).map(|s| s.relation.display_with(&naming)).collect()
}

impl Report {
    pub fn from_decision(d: &Decision, with_triangles: bool) -> Report {
        let spec = &d.system;
        let naming = spec.naming();
        let rounds = d
            .rounds
            .iter()
            .map(|round| {
                let (outcome, grow_to, forced_by) = match &round.outcome {
                    RoundOutcome::Contradiction => ("contradiction", None, None),
                    RoundOutcome::Accepted => ("accepted", None, None),
                    RoundOutcome::Grow { to, forced_by } => ("grow", Some(*to), Some(index(spec, forced_by))),
                    RoundOutcome::Capped => ("capped", None, None),
                };
                RoundDoc {
                    r: round.r,
                    height: round.height,
                    passes: round
                        .passes
                        .iter()
                        .map(|p| PassDoc {
                            minimal_leaders: p.minimal_leaders.iter().map(|v| index(spec, v)).collect(),
                            slot: p.slot.as_ref().map(|v| index(spec, v)),
                            added: p.added.as_ref().map(|q| q.display_with(&naming)),
                        })
                        .collect(),
                    outcome: outcome.into(),
                    grow_to,
                    forced_by,
                }
            })
            .collect();
        let trace = crate::verdict::explain(d).lines().map(String::from).collect();
        let mut report = Report {
            schema: SCHEMA_ID.into(),
            report: "check".into(),
            verdict: d.verdict.tag().into(),
            system: system(spec),
            rounds,
            leaders: Vec::new(),
            added_relations: Vec::new(),
            trace,
            witness: None,
            warnings: Vec::new(),
            triangles: Vec::new(),
            certificate: d.certificate(),
        };
        match &d.verdict {
            Verdict::Soluble(w) => {
                let tower = &w.saturation.tower;
                report.leaders = leaders(spec, tower);
                report.added_relations = relations(spec, &w.saturation.steps);
                report.warnings = warnings(spec, tower);
                report.witness = Some(WitnessDoc {
                    variant: serde_json::to_value(w.variant).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
                    r: w.r,
                    mu: w.mu.as_ref().map(|m| m.entries().to_vec()),
                    height: w.height(),
                    bound_unknowns: w.bound_unknowns.iter().map(|k| spec.names[*k].clone()).collect(),
                });
                if with_triangles {
                    report.triangles = triangles(spec, tower, w.height());
                }
            }
            Verdict::Insoluble(v) => report.added_relations = relations(spec, &v.steps),
            Verdict::Undecided(_) => {}
        }
        report
    }
}

/// Output of `saturate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub schema: String,
    pub report: String,
    pub system: SystemDoc,
    pub height: u32,
    pub status: String,
    pub added_relations: Vec<String>,
    pub leaders: Vec<LeaderDoc>,
    pub triangles: Vec<TriangleDoc>,
}

impl SaturationReport {
    pub fn ok(spec: &SystemSpec, s: &Saturation) -> Self {
        SaturationReport {
            schema: SCHEMA_ID.into(),
            report: "saturate".into(),
            system: system(spec),
            height: s.height(),
            status: "ok".into(),
            added_relations: relations(spec, &s.steps),
            leaders: leaders(spec, &s.tower),
            triangles: triangles(spec, &s.tower, s.height()),
        }
    }

    pub fn violation(spec: &SystemSpec, height: u32, steps: &[ConflictStep]) -> Self {
        SaturationReport {
            schema: SCHEMA_ID.into(),
            report: "saturate".into(),
            system: system(spec),
            height,
            status: "violation".into(),
            added_relations: relations(spec, steps),
            leaders: Vec::new(),
            triangles: Vec::new(),
        }
    }
}

/// Output of `leaders`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadersReport {
    pub schema: String,
    pub report: String,
    pub system: SystemDoc,
    pub height: u32,
    pub leaders: Vec<LeaderDoc>,
    pub diagnostics: Vec<serde_json::Value>,
    pub warnings: Vec<WarningDoc>,
}

impl LeadersReport {
    pub fn new(spec: &SystemSpec, tower: &Tower, diagnostics: &[Diagnostic]) -> Self {
        LeadersReport {
            schema: SCHEMA_ID.into(),
            report: "leaders".into(),
            system: system(spec),
            height: tower.height(),
            leaders: leaders(spec, tower),
            diagnostics: diagnostics.iter().filter_map(|d| serde_json::to_value(d).ok()).collect(),
            warnings: warnings(spec, tower),
        }
    }
}

/// Output of `bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema: String,
    pub report: String,
    pub m: usize,
    pub n: usize,
    pub r: u64,
    pub chain_bound: String,
    pub s: String,
    pub s_bits: u64,
}

impl BoundReport {
    pub fn compute(m: usize, n: usize, r: u64) -> Result<Self, BoundError> {
        let t = thm_s_bound(m, n, r)?;
        let direct = chain_bound(&ChainSpec::new(m, n, HeightRule::Doubling { r })?)?;
        debug_assert_eq!(direct, t.t);
        Ok(BoundReport {
            schema: SCHEMA_ID.into(),
            report: "bound".into(),
            m,
            n,
            r,
            chain_bound: t.t.to_string(),
            s: t.s.to_string(),
            s_bits: t.s.bits(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentDoc {
    pub direction: usize,
    pub slot: IndexDoc,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownDoc {
    pub direction: usize,
    pub slot: IndexDoc,
}

/// Output of `forms commutation`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub schema: String,
    pub report: String,
    pub system: SystemDoc,
    pub tuple: Vec<IndexDoc>,
    pub equations: Vec<String>,
    pub assignments: Vec<AssignmentDoc>,
    pub unknowns: Vec<UnknownDoc>,
    pub rows: Vec<String>,
    pub soluble: bool,
    pub solution: Option<Vec<String>>,
    pub kernel_dimension: Option<usize>,
}

/// `d0(D1 x)` for the derivative `∂̃_0` of the new unknown standing for `∂_1 x`.
pub fn unknown_label(spec: &SystemSpec, h: usize, z: &DerivIndex) -> String {
    let naming = spec.naming();
    format!("d{h}({})", naming.var_name(z))
}

impl CommutationReport {
    pub fn compute(spec: &SystemSpec, fo: &FirstOrderSystem) -> Result<Self, FormsError> {
        let naming = spec.naming();
        let tower = &fo.tower;
        let sys = fo.commutation_system()?;
        let labels: Vec<String> = sys.unknowns.iter().map(|(h, z)| unknown_label(spec, *h, z)).collect();
        let rows = sys
            .coeffs
            .iter()
            .zip(&sys.rhs)
            .map(|(row, rhs)| {
                let mut lhs = String::new();
                for (c, l) in row.iter().zip(&labels).filter(|(c, _)| !c.is_zero()) {
                    let (negative, body) = match c.as_constant() {
                        Some(s) if s.is_one() => (false, l.clone()),
                        Some(s) if s.neg().is_one() => (true, l.clone()),
                        _ => (false, format!("({})*{l}", c.display_with(&naming))),
                    };
                    lhs.push_str(match (lhs.is_empty(), negative) {
                        (true, true) => "-",
                        (true, false) => "",
                        (false, true) => " - ",
                        (false, false) => " + ",
                    });
                    lhs.push_str(&body);
                }
                if lhs.is_empty() {
                    lhs.push('0');
                }
                format!("{lhs} = {}", rhs.display_with(&naming))
            })
            .collect();
        let (soluble, solution, kernel_dimension) = match sys.solve(tower) {
            SolutionSpace::Solved { particular, kernel, .. } => (
                true,
                Some(particular.iter().zip(&labels).map(|(v, l)| format!("{l} = {}", v.display_with(&naming))).collect()),
                Some(kernel.len()),
            ),
            SolutionSpace::Inconsistent { .. } => (false, None, None),
        };
        Ok(CommutationReport {
            schema: SCHEMA_ID.into(),
            report: "commutation".into(),
            system: system(spec),
            tuple: fo.tuple.iter().map(|v| index(spec, v)).collect(),
            equations: fo.equations.iter().map(|p| format!("{} = 0", p.display_with(&naming))).collect(),
            assignments: fo
                .assignments
                .iter()
                .map(|((i, x), v)| AssignmentDoc { direction: *i, slot: index(spec, x), value: v.display_with(&naming) })
                .collect(),
            unknowns: sys.unknowns.iter().map(|(h, z)| UnknownDoc { direction: *h, slot: index(spec, z) }).collect(),
            rows,
            soluble,
            solution,
            kernel_dimension,
        })
    }
}
