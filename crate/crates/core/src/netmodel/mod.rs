//! Grid data model, validation, and case-file ingestion.
//!
//! [`GridCase`] is the single source of truth for a scenario: buses, lines,
//! generators, and the MVA base. It is immutable after construction; topology
//! edits go through [`GridCase::with_line_status`], which returns a modified
//! copy. Case text is accepted in MATPOWER `.m` format ([`matpower`]) or the
//! native JSON schema ([`json`]).

mod json;
mod matpower;

pub use json::{from_json, to_json};

use std::collections::HashMap;
use std::fmt;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bus label as it appears in case files. Not necessarily contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

/// Line label, unique within a case (parallel circuits get distinct ids).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineId(pub u32);

/// Generator label, unique within a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for GenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    /// Real power demand in MW.
    pub load: f64,
    /// Angle reference (slack). Exactly one per normalized case.
    #[serde(default, rename = "reference")]
    pub is_reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: LineId,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Series susceptance in per-unit (1/x for a reactance-only branch).
    pub susceptance: f64,
    /// Thermal limit in MW; `None` means unbounded.
    #[serde(default)]
    pub limit: Option<f64>,
    #[serde(default = "default_true")]
    pub in_service: bool,
}

fn default_true() -> bool {
    true
}

/// One breakpoint of a piecewise-linear cost curve: total cost in $/h at a
/// given output in MW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    pub mw: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: GenId,
    pub at_bus: BusId,
    /// Minimum output in MW.
    pub p_min: f64,
    /// Maximum output in MW.
    pub p_max: f64,
    /// Marginal cost in $/MWh when no piecewise curve is given.
    pub cost: f64,
    /// Optional convex piecewise-linear cost curve (nondecreasing marginal
    /// cost). When present it overrides the linear coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_points: Option<Vec<CostPoint>>,
}

impl Generator {
    /// Total cost in $/h at output `p` MW. Constant cost terms are not
    /// modeled; they shift every objective by the same amount and cancel in
    /// all cost differences.
    pub fn cost_at(&self, p: f64) -> f64 {
        match &self.cost_points {
            None => self.cost * p,
            Some(points) => {
                if points.len() < 2 {
                    return points.first().map_or(0.0, |pt| pt.cost);
                }
                let first = points.first().unwrap();
                let last = points.last().unwrap();
                if p <= first.mw {
                    let s = segment_slope(points[0], points[1]);
                    return first.cost + s * (p - first.mw);
                }
                if p >= last.mw {
                    let n = points.len();
                    let s = segment_slope(points[n - 2], points[n - 1]);
                    return last.cost + s * (p - last.mw);
                }
                for w in points.windows(2) {
                    if p <= w[1].mw {
                        return w[0].cost + segment_slope(w[0], w[1]) * (p - w[0].mw);
                    }
                }
                unreachable!()
            }
        }
    }
}

fn segment_slope(a: CostPoint, b: CostPoint) -> f64 {
    (b.cost - a.cost) / (b.mw - a.mw)
}

/// A validated, index-ready grid scenario. Construction normalizes the
/// reference-bus flag; all other problems are reported by [`GridCase::validate`]
/// rather than rejected, so that diagnostic tooling can look at broken cases.
#[derive(Debug, Clone)]
pub struct GridCase {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    bus_index: HashMap<BusId, usize>,
    line_index: HashMap<LineId, usize>,
}

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid case: {0}")]
    Invalid(String),
    #[error("unknown line id {0}")]
    UnknownLine(LineId),
}

/// Severity of a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    /// Screening concern; downstream analyses may still run.
    Warning,
    /// Invariant violation; downstream analyses will misbehave.
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn error(code: &'static str, message: String) -> Self {
        Diagnostic { severity: Severity::Error, code, message }
    }

    fn warning(code: &'static str, message: String) -> Self {
        Diagnostic { severity: Severity::Warning, code, message }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev} [{}]: {}", self.code, self.message)
    }
}

impl GridCase {
    /// Assembles a case and normalizes the reference-bus flag: if no bus is
    /// flagged, the lowest-id generator bus (or lowest-id bus) becomes the
    /// reference; if several are flagged, all but the lowest-id one are
    /// cleared. Duplicate ids are rejected here because the index maps cannot
    /// represent them; everything else is left to [`validate`](Self::validate).
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        lines: Vec<Line>,
        generators: Vec<Generator>,
    ) -> Result<Self, CaseError> {
        let mut case = GridCase {
            name: name.into(),
            base_mva,
            buses,
            lines,
            generators,
            bus_index: HashMap::new(),
            line_index: HashMap::new(),
        };
        case.rebuild_index()?;
        case.normalize_reference();
        Ok(case)
    }

    fn rebuild_index(&mut self) -> Result<(), CaseError> {
        self.bus_index.clear();
        self.line_index.clear();
        for (i, bus) in self.buses.iter().enumerate() {
            if self.bus_index.insert(bus.id, i).is_some() {
                return Err(CaseError::Invalid(format!("duplicate bus id {}", bus.id)));
            }
        }
        for (i, line) in self.lines.iter().enumerate() {
            if self.line_index.insert(line.id, i).is_some() {
                return Err(CaseError::Invalid(format!("duplicate line id {}", line.id)));
            }
        }
        let mut gen_ids = HashMap::new();
        for g in &self.generators {
            if gen_ids.insert(g.id, ()).is_some() {
                return Err(CaseError::Invalid(format!("duplicate generator id {}", g.id)));
            }
        }
        Ok(())
    }

    fn normalize_reference(&mut self) {
        let mut refs: Vec<usize> = (0..self.buses.len())
            .filter(|&i| self.buses[i].is_reference)
            .collect();
        if refs.is_empty() && !self.buses.is_empty() {
            let pick = self
                .generators
                .iter()
                .map(|g| g.at_bus)
                .min()
                .and_then(|b| self.bus_index.get(&b).copied())
                .unwrap_or_else(|| {
                    (0..self.buses.len()).min_by_key(|&i| self.buses[i].id).unwrap()
                });
            log::warn!("case {:?}: no reference bus flagged, using bus {}", self.name, self.buses[pick].id);
            self.buses[pick].is_reference = true;
            return;
        }
        if refs.len() > 1 {
            refs.sort_by_key(|&i| self.buses[i].id);
            for &i in &refs[1..] {
                self.buses[i].is_reference = false;
            }
            log::warn!(
                "case {:?}: multiple reference buses flagged, keeping bus {}",
                self.name,
                self.buses[refs[0]].id
            );
        }
    }

    /// Parses MATPOWER `.m` case text or the native JSON schema, sniffing the
    /// format from the first non-blank character.
    pub fn load_case(source: &str) -> Result<GridCase, CaseError> {
        let case = match source.trim_start().chars().next() {
            Some('{') => json::from_json(source)?,
            _ => matpower::parse(source)?,
        };
        let errors: Vec<_> = case
            .validate()
            .into_iter()
            .filter(|d| d.severity == Severity::Error)
            .collect();
        if let Some(first) = errors.first() {
            return Err(CaseError::Invalid(format!(
                "{} ({} error diagnostic(s) total)",
                first.message,
                errors.len()
            )));
        }
        Ok(case)
    }

    /// Serializes to the native JSON schema. `load_case` on the output
    /// reconstructs an equal case.
    pub fn to_json(&self) -> String {
        json::to_json(self)
    }

    pub fn bus_pos(&self, id: BusId) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    pub fn line_pos(&self, id: LineId) -> Option<usize> {
        self.line_index.get(&id).copied()
    }

    pub fn line(&self, id: LineId) -> Option<&Line> {
        self.line_pos(id).map(|i| &self.lines[i])
    }

    pub fn reference_bus(&self) -> BusId {
        self.buses
            .iter()
            .find(|b| b.is_reference)
            .map(|b| b.id)
            .expect("normalized case has a reference bus")
    }

    pub fn total_load(&self) -> f64 {
        self.buses.iter().map(|b| b.load).sum()
    }

    pub fn in_service_lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| l.in_service)
    }

    /// Checks every type invariant plus in-service connectivity and capacity
    /// screening. Returns an empty list iff the case is clean.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.base_mva <= 0.0 || !self.base_mva.is_finite() {
            out.push(Diagnostic::error("base-mva", format!("base_mva must be > 0, got {}", self.base_mva)));
        }
        for bus in &self.buses {
            if !bus.load.is_finite() {
                out.push(Diagnostic::error("bus-load", format!("bus {} has non-finite load", bus.id)));
            }
        }
        for line in &self.lines {
            if self.bus_pos(line.from_bus).is_none() {
                out.push(Diagnostic::error(
                    "dangling-bus",
                    format!("line {} references absent bus {}", line.id, line.from_bus),
                ));
            }
            if self.bus_pos(line.to_bus).is_none() {
                out.push(Diagnostic::error(
                    "dangling-bus",
                    format!("line {} references absent bus {}", line.id, line.to_bus),
                ));
            }
            if line.from_bus == line.to_bus {
                out.push(Diagnostic::error("self-loop", format!("line {} connects bus {} to itself", line.id, line.from_bus)));
            }
            if !(line.susceptance > 0.0 && line.susceptance.is_finite()) {
                out.push(Diagnostic::error(
                    "nonpositive-susceptance",
                    format!("line {} has susceptance {}", line.id, line.susceptance),
                ));
            }
            if let Some(limit) = line.limit {
                if !(limit >= 0.0) {
                    out.push(Diagnostic::error("negative-limit", format!("line {} has limit {limit}", line.id)));
                }
            }
        }
        for g in &self.generators {
            if self.bus_pos(g.at_bus).is_none() {
                out.push(Diagnostic::error(
                    "dangling-bus",
                    format!("generator {} references absent bus {}", g.id, g.at_bus),
                ));
            }
            if !(g.p_min <= g.p_max) {
                out.push(Diagnostic::error(
                    "gen-bounds",
                    format!("generator {} has p_min {} > p_max {}", g.id, g.p_min, g.p_max),
                ));
            }
            if let Some(points) = &g.cost_points {
                if points.len() < 2 {
                    out.push(Diagnostic::error(
                        "cost-curve",
                        format!("generator {} piecewise cost needs >= 2 points", g.id),
                    ));
                } else {
                    let mut prev_slope = f64::NEG_INFINITY;
                    for w in points.windows(2) {
                        if w[1].mw <= w[0].mw {
                            out.push(Diagnostic::error(
                                "cost-curve",
                                format!("generator {} cost breakpoints not increasing", g.id),
                            ));
                            break;
                        }
                        let s = segment_slope(w[0], w[1]);
                        if s < prev_slope - 1e-9 {
                            out.push(Diagnostic::error(
                                "cost-convexity",
                                format!("generator {} has decreasing marginal cost", g.id),
                            ));
                            break;
                        }
                        prev_slope = s;
                    }
                    if points.first().unwrap().mw > g.p_min + 1e-9
                        || points.last().unwrap().mw < g.p_max - 1e-9
                    {
                        out.push(Diagnostic::warning(
                            "cost-coverage",
                            format!("generator {} cost curve does not cover [p_min, p_max]; extrapolating end segments", g.id),
                        ));
                    }
                }
            }
        }
        if !self.is_connected() {
            out.push(Diagnostic::warning(
                "disconnected",
                "in-service grid is not connected".to_string(),
            ));
        }
        let cap: f64 = self.generators.iter().map(|g| g.p_max).sum();
        let load = self.total_load();
        if cap < load {
            out.push(Diagnostic::warning(
                "capacity",
                format!("total p_max {cap:.1} MW below total load {load:.1} MW"),
            ));
        }
        out
    }

    /// True when every bus is reachable over in-service lines.
    pub fn is_connected(&self) -> bool {
        let n = self.buses.len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for line in self.in_service_lines() {
            if let (Some(a), Some(b)) = (self.bus_pos(line.from_bus), self.bus_pos(line.to_bus)) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Value-semantics copy with one line's service status changed.
    pub fn with_line_status(&self, line_id: LineId, in_service: bool) -> Result<GridCase, CaseError> {
        let pos = self.line_pos(line_id).ok_or(CaseError::UnknownLine(line_id))?;
        let mut out = self.clone();
        out.lines[pos].in_service = in_service;
        Ok(out)
    }

    /// Multiplies every generator's cost coefficients by an independent
    /// uniform draw from `[1 - spread, 1 + spread]`. One draw per generator,
    /// in generator order, so the output is a pure function of `(seed, spread)`.
    /// Loads and topology are untouched.
    pub fn perturb_gencosts(&self, seed: u64, spread: f64) -> GridCase {
        assert!((0.0..1.0).contains(&spread), "spread must be in [0,1)");
        let mut out = self.clone();
        if spread == 0.0 {
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(1.0 - spread, 1.0 + spread);
        for g in &mut out.generators {
            let factor = dist.sample(&mut rng);
            g.cost *= factor;
            if let Some(points) = &mut g.cost_points {
                for p in points.iter_mut() {
                    p.cost *= factor;
                }
            }
        }
        out
    }
}
