//! End-to-end solubility decisions with replayable certificates.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{Naming, Poly};
use crate::deriv_index::{DerivIndex, MultiIndex};
use crate::dsl::parse_system;
use crate::prolongation::{
    build, commutator_check, saturate, Conflict, ConflictStep, ProlongError, Route, RouteKind, SaturateError,
    SaturateOptions, Saturation, Violation,
};
use crate::tower::{normalize_relation, Presentation, Tower, TowerElem};

/// A system in solved form: relations with leaders, plus unknown names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    pub pres: Presentation,
    pub names: Vec<String>,
}

impl SystemSpec {
    pub fn naming(&self) -> Naming {
        Naming::new(self.names.clone())
    }

    pub fn equations(&self) -> Vec<String> {
        let naming = self.naming();
        self.pres.relations.iter().map(|r| format!("{} = 0", r.poly.display_with(&naming))).collect()
    }

    pub fn index_label(&self, v: &DerivIndex) -> String {
        if self.names.len() == 1 {
            v.index.to_string()
        } else {
            format!("{}{}", self.names[v.unknown], v.index)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Thm1,
    Thm2,
    Thm3,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "thm1" => Ok(Variant::Thm1),
            "thm2" => Ok(Variant::Thm2),
            "thm3" => Ok(Variant::Thm3),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecideOptions {
    pub max_height: u32,
    pub variant: Variant,
    pub saturate: SaturateOptions,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { max_height: 32, variant: Variant::Thm1, saturate: SaturateOptions::default() }
    }
}

/// One sweep of saturation: the leaders of the relations known so far, and what it added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pass {
    pub minimal_leaders: Vec<DerivIndex>,
    pub slot: Option<DerivIndex>,
    pub added: Option<Poly>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundOutcome {
    Contradiction,
    Accepted,
    Grow { to: u32, forced_by: DerivIndex },
    Capped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub r: u32,
    pub height: u32,
    pub passes: Vec<Pass>,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub variant: Variant,
    pub r: Option<u32>,
    pub mu: Option<MultiIndex>,
    pub bound_unknowns: Vec<usize>,
    pub saturation: Saturation,
}

impl Witness {
    pub fn height(&self) -> u32 {
        self.saturation.height()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stalled {
    pub height: u32,
    pub r: u32,
    pub forced_by: Option<DerivIndex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Soluble(Witness),
    Insoluble(Violation),
    Undecided(Stalled),
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Soluble(_) => "soluble",
            Verdict::Insoluble(_) => "insoluble",
            Verdict::Undecided(_) => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub system: SystemSpec,
    pub options: DecideOptions,
    pub verdict: Verdict,
    pub rounds: Vec<Round>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecideError {
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Prolong(#[from] ProlongError),
}

fn minimal_of(leaders: impl IntoIterator<Item = DerivIndex>) -> Vec<DerivIndex> {
    let all: BTreeSet<DerivIndex> = leaders.into_iter().collect();
    all.iter().filter(|v| !all.iter().any(|w| w.strictly_below(v).unwrap_or(false))).cloned().collect()
}

fn passes(pres: &Presentation, steps: &[ConflictStep], clean: bool) -> Vec<Pass> {
    let mut leaders: Vec<DerivIndex> = pres.relations.iter().map(|r| r.leader.clone()).collect();
    let mut out = Vec::new();
    for s in steps {
        out.push(Pass {
            minimal_leaders: minimal_of(leaders.clone()),
            slot: Some(s.conflict.slot.clone()),
            added: Some(s.relation.clone()),
        });
        if let Some(v) = s.relation.greatest_var() {
            leaders.push(v);
        }
    }
    if clean {
        out.push(Pass { minimal_leaders: minimal_of(leaders), slot: None, added: None });
    }
    out
}

/// Saturate to growing heights until the chosen hypothesis holds or a contradiction appears.
pub fn decide(system: &SystemSpec, options: &DecideOptions) -> Result<Decision, DecideError> {
    let pres = &system.pres;
    pres.check().map_err(|e| DecideError::Invalid(e.to_string()))?;
    let opts = &options.saturate;
    let initial = match Tower::from_presentation(pres) {
        Ok(t) => t.classify_leaders().minimal,
        Err(_) => minimal_of(pres.relations.iter().map(|r| r.leader.clone())),
    };
    let mut r = initial.iter().map(|v| v.height()).chain([1, pres.height()]).max().unwrap_or(1);
    let mut rounds = Vec::new();
    let mut forced_by = None;
    let mut last_height = 0;
    let done = |verdict, rounds| Ok(Decision { system: system.clone(), options: *options, verdict, rounds });
    loop {
        let height = 2 * r;
        if height > options.max_height {
            rounds.push(Round { r, height, passes: Vec::new(), outcome: RoundOutcome::Capped });
            return done(Verdict::Undecided(Stalled { height: last_height, r, forced_by }), rounds);
        }
        last_height = height;
        let sat = match saturate(pres, height, opts) {
            Ok(s) => s,
            Err(SaturateError::Violation(v)) => {
                rounds.push(Round { r, height, passes: passes(pres, &v.steps, false), outcome: RoundOutcome::Contradiction });
                return done(Verdict::Insoluble(v), rounds);
            }
            Err(SaturateError::Failed(e)) => return Err(e.into()),
        };
        let log = passes(pres, &sat.steps, true);
        let mins = sat.leaders().minimal;
        let tallest = mins.iter().filter(|v| v.height() > r).max_by_key(|v| (v.height(), std::cmp::Reverse((*v).clone()))).cloned();
        let accepted: Option<Witness> = match options.variant {
            Variant::Thm1 if tallest.is_none() => {
                let best = mins.iter().map(|v| v.height()).max().unwrap_or(0).max(1);
                let mut w = Witness { variant: Variant::Thm1, r: Some(r), mu: None, bound_unknowns: vec![], saturation: sat.clone() };
                if best < r {
                    if let Ok(s2) = saturate(pres, 2 * best, opts) {
                        if s2.satisfies_thm1(best) {
                            w = Witness { r: Some(best), saturation: s2, ..w };
                        }
                    }
                }
                Some(w)
            }
            Variant::Thm3 => {
                let c = sat.thm3(r);
                c.holds.then(|| Witness {
                    variant: Variant::Thm3,
                    r: Some(r),
                    mu: None,
                    bound_unknowns: c.decided_by_bound,
                    saturation: sat.clone(),
                })
            }
            Variant::Thm2 => {
                let mu = mins.iter().fold(MultiIndex::zero(pres.m), |acc, v| acc.join(&v.index).expect("same m"));
                if mu.height() <= height {
                    saturate(pres, mu.height(), opts).ok().filter(|s| s.satisfies_thm2(&mu)).map(|s| Witness {
                        variant: Variant::Thm2,
                        r: None,
                        mu: Some(mu.clone()),
                        bound_unknowns: vec![],
                        saturation: s,
                    })
                } else {
                    None
                }
            }
            Variant::Thm1 => None,
        };
        if let Some(w) = accepted {
            rounds.push(Round { r, height, passes: log, outcome: RoundOutcome::Accepted });
            return done(Verdict::Soluble(w), rounds);
        }
        let forced = tallest.clone().or_else(|| mins.iter().max_by_key(|v| v.height()).cloned()).unwrap_or_else(|| DerivIndex::from_entries(&vec![0; pres.m], 0));
        let next = match options.variant {
            Variant::Thm2 => {
                let mu = mins.iter().fold(MultiIndex::zero(pres.m), |acc, v| acc.join(&v.index).expect("same m"));
                (r + 1).max(mu.height().div_ceil(2))
            }
            _ => (r + 1).max(tallest.as_ref().map(|v| v.height()).unwrap_or(0)),
        };
        rounds.push(Round { r, height, passes: log, outcome: RoundOutcome::Grow { to: next, forced_by: forced.clone() } });
        forced_by = Some(forced);
        r = next;
    }
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexDoc {
    pub unknown: String,
    pub index: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub characteristic: u64,
    pub derivations: usize,
    pub unknowns: Vec<String>,
    pub equations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteDoc {
    pub kind: String,
    #[serde(deserialize_with = "Option::deserialize")]
    pub relation: Option<usize>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub direction: Option<usize>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub source: Option<IndexDoc>,
    pub equation: String,
    pub reduced: String,
    #[serde(deserialize_with = "Option::deserialize")]
    pub source_value: Option<String>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub implied: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDoc {
    pub slot: IndexDoc,
    #[serde(deserialize_with = "Option::deserialize")]
    pub defining: Option<RouteDoc>,
    pub conflicting: RouteDoc,
    pub residual: String,
    pub relation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Soluble,
    Insoluble,
}

/// Everything needed to re-check a verdict without search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub system: SystemDoc,
    /// SHA-256 of the compact JSON of `system`.
    pub digest: String,
    pub height: u32,
    #[serde(deserialize_with = "Option::deserialize")]
    pub variant: Option<Variant>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub r: Option<u32>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub mu: Option<Vec<u32>>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub bound_unknowns: Option<Vec<String>>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub minimal_leaders: Option<Vec<IndexDoc>>,
    pub steps: Vec<StepDoc>,
}

struct Docs<'a> {
    spec: &'a SystemSpec,
    naming: Naming,
}

impl<'a> Docs<'a> {
    fn new(spec: &'a SystemSpec) -> Self {
        Docs { spec, naming: spec.naming() }
    }

    fn index(&self, v: &DerivIndex) -> IndexDoc {
        IndexDoc { unknown: self.spec.names[v.unknown].clone(), index: v.index.entries().to_vec() }
    }

    fn poly(&self, p: &Poly) -> String {
        p.display_with(&self.naming)
    }

    fn elem(&self, e: &TowerElem) -> String {
        e.display_with(&self.naming)
    }

    fn route(&self, r: &Route) -> RouteDoc {
        let (kind, relation, direction, source) = match &r.kind {
            RouteKind::Pinned { relation } => ("pinned", Some(*relation), None, None),
            RouteKind::Derivative { direction, source } => ("derivative", None, Some(*direction), Some(self.index(source))),
        };
        RouteDoc {
            kind: kind.to_string(),
            relation,
            direction,
            source,
            equation: self.poly(&r.raw),
            reduced: self.poly(&r.reduced),
            source_value: r.source_value.as_ref().map(|e| self.elem(e)),
            implied: r.implied.as_ref().map(|e| self.elem(e)),
        }
    }

    fn step(&self, s: &ConflictStep) -> StepDoc {
        StepDoc {
            slot: self.index(&s.conflict.slot),
            defining: s.conflict.defining.as_ref().map(|r| self.route(r)),
            conflicting: self.route(&s.conflict.conflicting),
            residual: self.poly(&s.conflict.residual),
            relation: self.poly(&s.relation),
        }
    }

    fn system(&self) -> SystemDoc {
        SystemDoc {
            characteristic: self.spec.pres.field.characteristic(),
            derivations: self.spec.pres.m,
            unknowns: self.spec.names.clone(),
            equations: self.spec.equations(),
        }
    }
}

impl Decision {
    /// `None` for undecided verdicts.
    pub fn certificate(&self) -> Option<Certificate> {
        let docs = Docs::new(&self.system);
        match &self.verdict {
            Verdict::Undecided(_) => None,
            Verdict::Insoluble(v) => Some(Certificate {
                kind: CertificateKind::Insoluble,
                system: docs.system(),
                digest: system_digest(&docs.system()),
                height: v.steps.iter().map(|s| s.conflict.slot.height()).max().unwrap_or(0),
                variant: None,
                r: None,
                mu: None,
                bound_unknowns: None,
                minimal_leaders: None,
                steps: v.steps.iter().map(|s| docs.step(s)).collect(),
            }),
            Verdict::Soluble(w) => Some(Certificate {
                kind: CertificateKind::Soluble,
                system: docs.system(),
                digest: system_digest(&docs.system()),
                height: w.height(),
                variant: Some(w.variant),
                r: w.r,
                mu: w.mu.as_ref().map(|m| m.entries().to_vec()),
                bound_unknowns: (w.variant == Variant::Thm3)
                    .then(|| w.bound_unknowns.iter().map(|&k| self.system.names[k].clone()).collect()),
                minimal_leaders: Some(w.saturation.leaders().minimal.iter().map(|v| docs.index(v)).collect()),
                steps: w.saturation.steps.iter().map(|s| docs.step(s)).collect(),
            }),
        }
    }
}

fn system_from_doc(doc: &SystemDoc) -> Option<SystemSpec> {
    let mut text = format!("char: {}\nderivations: {}\nunknowns: {}\n", doc.characteristic, doc.derivations, doc.unknowns.join(" "));
    for e in &doc.equations {
        if e.contains('\n') || e.contains(':') || e.contains('#') {
            return None;
        }
        text.push_str(e);
        text.push('\n');
    }
    let spec = parse_system(&text).ok()?;
    (spec.names == doc.unknowns && spec.equations() == doc.equations).then_some(spec)
}

/// Re-derive every recorded step and re-check the final claim.
pub fn replay_certificate(cert: &Certificate) -> bool {
    replay(cert).unwrap_or(false)
}

/// Parse and replay a certificate given as JSON.
pub fn replay_json(text: &str) -> bool {
    serde_json::from_str::<Certificate>(text).map(|c| replay_certificate(&c)).unwrap_or(false)
}

/// Hex SHA-256 of the compact JSON of a system.
pub fn system_digest(doc: &SystemDoc) -> String {
    let bytes = serde_json::to_vec(doc).expect("systems serialize");
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn replay(cert: &Certificate) -> Option<bool> {
    if cert.digest != system_digest(&cert.system) {
        return Some(false);
    }
    let spec = system_from_doc(&cert.system)?;
    let docs = Docs::new(&spec);
    let opts = SaturateOptions::default();
    let mut extra: Vec<Poly> = Vec::new();
    for (j, step) in cert.steps.iter().enumerate() {
        let out = build(&spec.pres, &extra, cert.height, &opts).ok()?;
        let conflict: Conflict = out.conflict?;
        let relation = normalize_relation(&conflict.residual);
        let recomputed = docs.step(&ConflictStep { conflict, relation: relation.clone() });
        if &recomputed != step {
            return Some(false);
        }
        let last = j + 1 == cert.steps.len();
        if relation.is_constant() != (last && cert.kind == CertificateKind::Insoluble) {
            return Some(false);
        }
        extra.push(relation);
    }
    match cert.kind {
        CertificateKind::Insoluble => Some(
            !cert.steps.is_empty()
                && cert.variant.is_none()
                && cert.r.is_none()
                && cert.mu.is_none()
                && cert.bound_unknowns.is_none()
                && cert.minimal_leaders.is_none()
                && cert.height == cert.steps.iter().map(|s| s.slot.index.iter().sum::<u32>()).max().unwrap_or(0),
        ),
        CertificateKind::Soluble => {
            let out = build(&spec.pres, &extra, cert.height, &opts).ok()?;
            if out.conflict.is_some() {
                return Some(false);
            }
            let sat = Saturation { tower: out.tower, steps: Vec::new(), equations: out.equations };
            let leaders: Vec<IndexDoc> = sat.leaders().minimal.iter().map(|v| docs.index(v)).collect();
            if cert.minimal_leaders.as_ref() != Some(&leaders) {
                return Some(false);
            }
            let ok = match cert.variant? {
                Variant::Thm1 => {
                    let r = cert.r?;
                    cert.mu.is_none() && cert.bound_unknowns.is_none() && r >= 1 && cert.height == 2 * r && sat.satisfies_thm1(r)
                }
                Variant::Thm2 => {
                    let mu = MultiIndex::new(cert.mu.clone()?);
                    cert.r.is_none()
                        && cert.bound_unknowns.is_none()
                        && mu.m() == spec.pres.m
                        && cert.height == mu.height()
                        && sat.satisfies_thm2(&mu)
                }
                Variant::Thm3 => {
                    let r = cert.r?;
                    let c = sat.thm3(r);
                    let names: Vec<String> = c.decided_by_bound.iter().map(|&k| spec.names[k].clone()).collect();
                    cert.mu.is_none() && r >= 1 && cert.height == 2 * r && c.holds && cert.bound_unknowns.as_ref() == Some(&names)
                }
            };
            if !ok {
                return Some(false);
            }
            let table = sat.table().ok()?;
            Some(commutator_check(&table, &sat.tower).ok()?.is_empty())
        }
    }
}

// ---------------------------------------------------------------------------
// Narrative

fn operator(spec: &SystemSpec, v: &DerivIndex) -> String {
    let mut s = String::new();
    for (i, &e) in v.index.entries().iter().enumerate() {
        match e {
            0 => {}
            1 => write!(s, "∂_{i}").unwrap(),
            e => write!(s, "∂_{i}^{e}").unwrap(),
        }
    }
    s + &spec.names[v.unknown]
}

fn route_label(spec: &SystemSpec, slot: &DerivIndex, r: &Route) -> String {
    match &r.kind {
        RouteKind::Pinned { relation } => format!("{} (by equation {})", operator(spec, slot), relation + 1),
        RouteKind::Derivative { direction, source } => format!("∂_{direction}{}", operator(spec, source)),
    }
}

fn route_claim(spec: &SystemSpec, slot: &DerivIndex, r: &Route) -> String {
    let naming = spec.naming();
    match &r.implied {
        Some(v) => format!("{} = {}", route_label(spec, slot, r), v.display_with(&naming)),
        None => format!("{} requires {} = 0", route_label(spec, slot, r), r.reduced.display_with(&naming)),
    }
}

fn leader_set(spec: &SystemSpec, leaders: &[DerivIndex]) -> String {
    let parts: Vec<String> = leaders.iter().map(|v| spec.index_label(v)).collect();
    format!("{{{}}}", parts.join(","))
}

/// Human-readable account of a decision.
pub fn explain(d: &Decision) -> String {
    let spec = &d.system;
    let naming = spec.naming();
    let mut out = String::new();
    for (k, round) in d.rounds.iter().enumerate() {
        writeln!(out, "round {}: r = {}, saturating to height {}", k + 1, round.r, round.height).unwrap();
        for p in &round.passes {
            match (&p.slot, &p.added) {
                (Some(slot), Some(rel)) => writeln!(
                    out,
                    "  pass with minimal leaders {}: conflict at {} gives {} = 0",
                    leader_set(spec, &p.minimal_leaders),
                    operator(spec, slot),
                    rel.display_with(&naming)
                )
                .unwrap(),
                _ => writeln!(out, "  pass with minimal leaders {}: no conflict", leader_set(spec, &p.minimal_leaders)).unwrap(),
            }
        }
        match &round.outcome {
            RoundOutcome::Grow { to, forced_by } => {
                writeln!(out, "  leader {} has height {} > r; growing r to {}", spec.index_label(forced_by), forced_by.height(), to).unwrap()
            }
            RoundOutcome::Capped => writeln!(out, "  height {} exceeds the cap {}", round.height, d.options.max_height).unwrap(),
            _ => {}
        }
    }
    match &d.verdict {
        Verdict::Insoluble(v) => {
            writeln!(out, "insoluble").unwrap();
            for s in &v.steps {
                let c = &s.conflict;
                let mut line = route_claim(spec, &c.slot, &c.conflicting);
                if let Some(def) = &c.defining {
                    line = format!("{line} but {}", route_claim(spec, &c.slot, def));
                }
                if s.is_contradiction() {
                    writeln!(out, "  contradiction: {line}").unwrap();
                } else {
                    writeln!(out, "  {line}, so {} = 0", s.relation.display_with(&naming)).unwrap();
                }
            }
        }
        Verdict::Soluble(w) => {
            let leaders = w.saturation.leaders();
            writeln!(out, "soluble").unwrap();
            match (w.r, &w.mu) {
                (Some(r), _) => writeln!(out, "  r = {r}, witness to height {}", w.height()).unwrap(),
                (None, Some(mu)) => writeln!(out, "  bound {mu}, witness to height {}", w.height()).unwrap(),
                _ => {}
            }
            writeln!(out, "  minimal separable leaders: {}", leader_set(spec, &leaders.minimal)).unwrap();
            for s in &w.saturation.steps {
                writeln!(out, "  added relation {} = 0", s.relation.display_with(&naming)).unwrap();
            }
            for k in &w.bound_unknowns {
                writeln!(out, "  leaders of {} accepted through a common bound", spec.names[*k]).unwrap();
            }
        }
        Verdict::Undecided(s) => {
            writeln!(out, "undecided: stopped after height {} with r = {}", s.height, s.r).unwrap();
            if let Some(f) = &s.forced_by {
                writeln!(out, "  last growth forced by leader {} of height {}", spec.index_label(f), f.height()).unwrap();
            }
        }
    }
    out
}
