//! Catalog entries, the classification pipeline with replayable
//! certificates, and batch reports.
//!
//! Every decision is taken by a [`Step`]: a criterion id, its JSON inputs
//! and its JSON outcome. `execute` is a pure function of the criterion and
//! inputs, so replaying a certificate re-runs each step and compares
//! outcomes. A step whose outcome carries a non-null `"status"` ends the
//! pipeline with that status.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynkin::{count_fibrations, DualGraph};
use crate::error::{Error, Result};
use crate::fibration::{
    exists_isotropic_vector, find_isotropic, prop43_decide, prop44_obstruction, rank2_classify, rank2_normal_form,
    reduce_by_divisibility, stabilizer_data, u_w_split, Hypotheses, IsotropicSearch, Options, Status, Step, Tri,
    UwSplit, Verdict,
};
use crate::genus::SINGLE_CLASS_RANK_BOUND;
use crate::lattice::{Lattice, LatticeVector};

/// Largest Picard rank of a K3 surface.
pub const MAX_PICARD_RANK: usize = 20;

/// One line of a catalog file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    pub gram: Vec<Vec<i64>>,
    #[serde(default)]
    pub flags: Hypotheses,
    /// name of a dual graph, resolved as `<graphs dir>/<name>.json`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<String>,
}

impl CatalogEntry {
    pub fn lattice(&self) -> Result<Lattice> {
        Ok(Lattice::new(self.gram.clone())?.with_label(self.label.clone()))
    }
}

fn field<T: for<'de> Deserialize<'de>>(inputs: &Value, name: &str) -> Result<T> {
    let v = inputs
        .get(name)
        .ok_or_else(|| Error::InvalidParams(format!("step input `{name}` missing")))?;
    serde_json::from_value(v.clone()).map_err(|e| Error::InvalidParams(format!("step input `{name}`: {e}")))
}

fn lattice_input(inputs: &Value, name: &str) -> Result<Lattice> {
    Lattice::new(field(inputs, name)?)
}

fn to_json<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn status_json(s: Option<Status>) -> Value {
    s.map_or(Value::Null, |s| to_json(&s))
}

/// Runs one criterion on recorded inputs.
pub fn execute(criterion: &str, inputs: &Value) -> Result<Value> {
    match criterion {
        "rank1" => {
            let l = lattice_input(inputs, "gram")?;
            if l.rank() != 1 {
                return Err(Error::InvalidParams("rank1 step on a lattice of rank != 1".into()));
            }
            // a single positive generator has no isotropic multiple
            Ok(json!({ "isotropic": false, "status": Status::NoFibration }))
        }
        "meyer" => {
            let rank: usize = field(inputs, "rank")?;
            let ok = rank >= crate::fibration::MEYER_RANK;
            Ok(json!({ "isotropic": ok, "status": Value::Null }))
        }
        "isotropic" => {
            let l = lattice_input(inputs, "gram")?;
            let bound: i64 = field(inputs, "bound")?;
            let search = exists_isotropic_vector(&l, bound)?;
            let status = match (&search, l.rank()) {
                (IsotropicSearch::NotFoundWithinBound, 2) => Some(Status::NoFibration),
                (IsotropicSearch::NotFoundWithinBound, _) => Some(Status::Inconclusive),
                _ => None,
            };
            Ok(json!({ "search": search, "status": status_json(status) }))
        }
        "rank2" => {
            let l = lattice_input(inputs, "gram")?;
            match rank2_normal_form(&l)? {
                None => Ok(json!({ "normal_form": Value::Null, "status": Status::NoFibration })),
                Some((n, k)) => {
                    let out = rank2_classify(n, k)?;
                    Ok(json!({ "normal_form": [n, k], "result": out, "status": out.status }))
                }
            }
        }
        "uw-split" => {
            let l = lattice_input(inputs, "gram")?;
            let opts: Options = field(inputs, "options")?;
            let split = u_w_split(&l, &opts)?;
            Ok(json!({ "split": split, "status": Value::Null }))
        }
        "prop43" | "rank11-genus" => {
            let w = lattice_input(inputs, "w")?;
            let hyp: Hypotheses = field(inputs, "hypotheses")?;
            let opts: Options = field(inputs, "options")?;
            let out = prop43_decide(&w, &hyp, &opts)?;
            let status = (out.status != Status::Inconclusive).then_some(out.status);
            Ok(json!({ "result": out, "status": status_json(status) }))
        }
        "prop21" => {
            let l = lattice_input(inputs, "gram")?;
            let f: LatticeVector = field(inputs, "f")?;
            let data = stabilizer_data(&l, &f)?;
            Ok(json!({ "result": data, "status": Value::Null }))
        }
        "prop44" => {
            let l = lattice_input(inputs, "gram")?;
            let bound: u64 = field(inputs, "group_bound")?;
            let out = prop44_obstruction(&l, bound)?;
            let status = (!out.second_fibration_possible).then_some(Status::Unique);
            Ok(json!({ "result": out, "status": status_json(status) }))
        }
        "prop41" => {
            let l = lattice_input(inputs, "gram")?;
            let f: LatticeVector = field(inputs, "f")?;
            let opts: Options = field(inputs, "options")?;
            let reduced = reduce_by_divisibility(&l, &f)?;
            let sub = classify_lattice(&reduced, Hypotheses::default(), None, &opts)?;
            let status = (sub.status == Status::Multiple).then_some(Status::Multiple);
            Ok(json!({
                "divisibility": l.divisibility(&f)?,
                "reduced": reduced.gram(),
                "reduced_status": sub.status,
                "reduced_reason": sub.reason,
                "status": status_json(status),
            }))
        }
        "graph" => {
            let g: DualGraph = field(inputs, "graph")?;
            let infinite_aut: Tri = field(inputs, "infinite_aut")?;
            let c = count_fibrations(&g)?;
            let status = match (c.count, infinite_aut) {
                (0, _) => None,
                (1, Tri::No) => Some(Status::Unique),
                (1, _) => None,
                _ => Some(Status::Multiple),
            };
            Ok(json!({
                "count": c.count,
                "diagrams": c.diagrams.iter().map(|d| d.kind.to_string()).collect::<Vec<_>>(),
                "groups": c.groups,
                "status": status_json(status),
            }))
        }
        other => Err(Error::InvalidParams(format!("unknown criterion `{other}`"))),
    }
}

fn step_status(outcome: &Value) -> Option<Status> {
    outcome
        .get("status")
        .filter(|s| !s.is_null())
        .and_then(|s| serde_json::from_value(s.clone()).ok())
}

struct Pipeline {
    steps: Vec<Step>,
}

impl Pipeline {
    fn run(&mut self, criterion: &str, inputs: Value) -> Result<(Value, Option<Status>)> {
        let outcome = execute(criterion, &inputs)?;
        let status = step_status(&outcome);
        self.steps.push(Step {
            criterion: criterion.to_string(),
            inputs,
            outcome: outcome.clone(),
        });
        Ok((outcome, status))
    }

    fn done(self, status: Status, reason: impl Into<String>) -> Verdict {
        Verdict {
            status,
            reason: reason.into(),
            certificate: self.steps,
        }
    }
}

fn reason_for(criterion: &str, status: Status) -> String {
    let what = match criterion {
        "rank1" => "rank 1 lattices represent no isotropic class",
        "isotropic" => "isotropic vector search",
        "rank2" => "orbits of isotropic rays under reflections",
        "rank11-genus" => "W has rank >= 11 and is not unique in its genus",
        "prop43" => "genus and overlattice conditions on W",
        "prop44" => "no root overlattice with matching discriminant and isotropic element",
        "prop41" => "the divisibility-reduced overlattice has two fibrations",
        "graph" => "extended Dynkin diagrams of the dual graph",
        _ => "criterion",
    };
    format!("{status} by {criterion}: {what}")
}

/// Classifies a catalog entry. Errors only for malformed input.
pub fn classify(entry: &CatalogEntry, graph: Option<&DualGraph>, opts: &Options) -> Result<Verdict> {
    let l = entry.lattice()?;
    classify_lattice(&l, entry.flags, graph, opts)
}

pub fn classify_lattice(l: &Lattice, flags: Hypotheses, graph: Option<&DualGraph>, opts: &Options) -> Result<Verdict> {
    l.require_nondegenerate()?;
    let sig = l.signature();
    if !sig.is_hyperbolic() {
        return Err(Error::InvalidParams(format!("Picard lattices have signature (1, ρ−1); got {sig}")));
    }
    if l.rank() > MAX_PICARD_RANK {
        return Err(Error::InvalidParams(format!("Picard rank {} exceeds {MAX_PICARD_RANK}", l.rank())));
    }
    let gram = to_json(&l.gram());
    let mut p = Pipeline { steps: Vec::new() };
    let rho = l.rank();

    if rho == 1 {
        p.run("rank1", json!({ "gram": gram }))?;
        return Ok(p.done(Status::NoFibration, reason_for("rank1", Status::NoFibration)));
    }
    if rho >= crate::fibration::MEYER_RANK {
        p.run("meyer", json!({ "rank": rho }))?;
    } else {
        let (_, st) = p.run("isotropic", json!({ "gram": gram, "bound": opts.height_bound }))?;
        if let Some(st) = st {
            let reason = if st == Status::Inconclusive {
                format!("no isotropic vector up to height {}", opts.height_bound)
            } else {
                reason_for("isotropic", st)
            };
            return Ok(p.done(st, reason));
        }
    }
    if rho == 2 {
        let (_, st) = p.run("rank2", json!({ "gram": gram }))?;
        let st = st.expect("rank2 always decides");
        return Ok(p.done(st, reason_for("rank2", st)));
    }

    let mut hyp = flags;
    let (out, _) = p.run("uw-split", json!({ "gram": gram, "options": opts }))?;
    let split: Option<UwSplit> = serde_json::from_value(out["split"].clone()).map_err(|e| Error::InvalidParams(e.to_string()))?;

    // Aut(X) is infinite as soon as one fibration has infinite stabilizer
    if hyp.infinite_aut == Tri::Unknown && hyp.zero_entropy == Tri::Yes {
        let f = match &split {
            Some(s) => Some(s.e.clone()),
            None => find_isotropic(l, opts)?,
        };
        if let Some(f) = f {
            let (out, _) = p.run("prop21", json!({ "gram": gram, "f": f }))?;
            if out["result"]["infinite_stabilizer"] == json!(true) {
                hyp.infinite_aut = Tri::Yes;
            }
        }
    }

    if let Some(s) = &split {
        let criterion = if s.w.rank() >= SINGLE_CLASS_RANK_BOUND { "rank11-genus" } else { "prop43" };
        let (_, st) = p.run(
            criterion,
            json!({ "w": s.w.gram(), "hypotheses": hyp, "options": opts }),
        )?;
        if let Some(st) = st {
            return Ok(p.done(st, reason_for(criterion, st)));
        }
    }

    if hyp.zero_entropy == Tri::Yes && hyp.infinite_aut == Tri::Yes {
        match p.run("prop44", json!({ "gram": gram, "group_bound": opts.group_bound })) {
            Ok((_, Some(st))) => return Ok(p.done(st, reason_for("prop44", st))),
            Ok(_) => {}
            Err(Error::GroupTooLarge { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    // an isotropic class of divisibility m ≥ 2 can be divided by m
    let search = crate::fibration::find_isotropic_with(l, opts, &mut |v| l.divisibility(v).is_ok_and(|m| m >= 2))?;
    if let Some(f) = search {
        let (_, st) = p.run("prop41", json!({ "gram": gram, "f": f, "options": opts }))?;
        if let Some(st) = st {
            return Ok(p.done(st, reason_for("prop41", st)));
        }
    }

    if let Some(g) = graph {
        let (_, st) = p.run("graph", json!({ "graph": g, "infinite_aut": hyp.infinite_aut }))?;
        if let Some(st) = st {
            return Ok(p.done(st, reason_for("graph", st)));
        }
    }

    let reason = if hyp.zero_entropy != Tri::Yes || hyp.infinite_aut != Tri::Yes {
        "no criterion applies without zero entropy and infinite Aut(X)".to_string()
    } else {
        "no criterion decides".to_string()
    };
    Ok(p.done(Status::Inconclusive, reason))
}

/// Outcome of replaying a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayResult {
    pub ok: bool,
    pub steps: usize,
    pub mismatches: Vec<String>,
}

/// Re-executes every step and checks that the verdict status is the one
/// the last step concluded.
pub fn replay(v: &Verdict) -> ReplayResult {
    let mut mismatches = Vec::new();
    for (i, s) in v.certificate.iter().enumerate() {
        match execute(&s.criterion, &s.inputs) {
            Ok(out) if out == s.outcome => {}
            Ok(_) => mismatches.push(format!("step {i} ({}): outcome differs", s.criterion)),
            Err(e) => mismatches.push(format!("step {i} ({}): {e}", s.criterion)),
        }
        let concluded = step_status(&s.outcome);
        let last = i + 1 == v.certificate.len();
        if concluded.is_some() && !last {
            mismatches.push(format!("step {i} ({}) concludes but is not last", s.criterion));
        }
    }
    let concluded = v.certificate.last().and_then(|s| step_status(&s.outcome));
    if concluded.unwrap_or(Status::Inconclusive) != v.status {
        mismatches.push(format!("status {} does not follow from the certificate", v.status));
    }
    ReplayResult {
        ok: mismatches.is_empty(),
        steps: v.certificate.len(),
        mismatches,
    }
}

// ---------------------------------------------------------------------------
// batch

/// One parsed catalog line, or the error that prevented parsing it.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedLine {
    pub line: usize,
    pub label: String,
    pub entry: std::result::Result<CatalogEntry, String>,
}

/// Parses a JSON-lines catalog. Blank lines and lines starting with `#`
/// are skipped; malformed lines are kept with an error naming the line and
/// label.
pub fn parse_catalog(text: &str) -> Vec<ParsedLine> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let value: Value = match serde_json::from_str(t) {
            Ok(v) => v,
            Err(e) => {
                out.push(ParsedLine {
                    line,
                    label: format!("line {line}"),
                    entry: Err(format!("line {line}: {e}")),
                });
                continue;
            }
        };
        let label = value
            .get("label")
            .and_then(Value::as_str)
            .map_or_else(|| format!("line {line}"), str::to_string);
        let entry = serde_json::from_value::<CatalogEntry>(value)
            .map_err(|e| e.to_string())
            .and_then(|e| e.lattice().map(|_| e).map_err(|e| e.to_string()))
            .map_err(|e| format!("line {line} ({label}): {e}"));
        out.push(ParsedLine { line, label, entry });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(flatten)]
    pub result: EntryResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryResult {
    Verdict(Verdict),
    Error { error: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn errors(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.result, EntryResult::Error { .. }))
            .count()
    }

    pub fn count(&self, status: Status) -> usize {
        self.verdicts().filter(|(_, v)| v.status == status).count()
    }

    pub fn verdicts(&self) -> impl Iterator<Item = (&ReportEntry, &Verdict)> {
        self.entries.iter().filter_map(|e| match &e.result {
            EntryResult::Verdict(v) => Some((e, v)),
            EntryResult::Error { .. } => None,
        })
    }

    /// Counts by rank and status.
    pub fn summary(&self) -> BTreeMap<usize, BTreeMap<Status, usize>> {
        let mut m: BTreeMap<usize, BTreeMap<Status, usize>> = BTreeMap::new();
        for (e, v) in self.verdicts() {
            *m.entry(e.rank.unwrap_or(0)).or_default().entry(v.status).or_default() += 1;
        }
        m
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("serializable"));
            s.push('\n');
        }
        s
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: ReportEntry = serde_json::from_str(line)
                .map_err(|e| Error::InvalidParams(format!("report line {}: {e}", i + 1)))?;
            entries.push(e);
        }
        Ok(Self { entries })
    }

    pub fn to_table(&self) -> String {
        let w = self.entries.iter().map(|e| e.label.len()).max().unwrap_or(5).max(5);
        let mut s = String::new();
        let _ = writeln!(s, "{:<w$}  {:>4}  {:<12}  {}", "label", "rank", "status", "decided by");
        for e in &self.entries {
            let rank = e.rank.map_or("-".to_string(), |r| r.to_string());
            match &e.result {
                EntryResult::Verdict(v) => {
                    let by = match v.status {
                        Status::Inconclusive => "-".to_string(),
                        _ => v.certificate.last().map_or("-".into(), |s| s.criterion.clone()),
                    };
                    let _ = writeln!(s, "{:<w$}  {:>4}  {:<12}  {}", e.label, rank, v.status.to_string(), by);
                }
                EntryResult::Error { error } => {
                    let _ = writeln!(s, "{:<w$}  {:>4}  {:<12}  {}", e.label, rank, "error", error);
                }
            }
        }
        s.push('\n');
        for (rank, by_status) in self.summary() {
            let parts: Vec<String> = by_status.iter().map(|(st, n)| format!("{st} {n}")).collect();
            let _ = writeln!(s, "rank {rank}: {}", parts.join(", "));
        }
        let _ = writeln!(
            s,
            "total {}: unique {}, multiple {}, no_fibration {}, inconclusive {}, errors {}",
            self.entries.len(),
            self.count(Status::Unique),
            self.count(Status::Multiple),
            self.count(Status::NoFibration),
            self.count(Status::Inconclusive),
            self.errors()
        );
        s
    }
}

/// Classifies every line of a catalog. `graphs` resolves graph names;
/// entries are reported in label order.
pub fn run_catalog(
    text: &str,
    graphs: &dyn Fn(&str) -> std::result::Result<DualGraph, String>,
    opts: &Options,
) -> Report {
    let mut entries: Vec<ReportEntry> = parse_catalog(text)
        .into_iter()
        .map(|p| {
            let rank = p.entry.as_ref().ok().map(|e| e.gram.len());
            let result = match p.entry {
                Err(error) => EntryResult::Error { error },
                Ok(entry) => {
                    let graph = entry.graph.as_deref().map(graphs).transpose();
                    match graph {
                        Err(error) => EntryResult::Error {
                            error: format!("line {} ({}): {error}", p.line, p.label),
                        },
                        Ok(g) => match classify(&entry, g.as_ref(), opts) {
                            Ok(v) => EntryResult::Verdict(v),
                            Err(e) => EntryResult::Error {
                                error: format!("line {} ({}): {e}", p.line, p.label),
                            },
                        },
                    }
                }
            };
            ReportEntry {
                label: p.label,
                rank,
                result,
            }
        })
        .collect();
    entries.sort_by(|a, b| a.label.cmp(&b.label));
    Report { entries }
}

/// The named example lattices shipped as a fixture catalog.
pub fn example_catalog() -> Vec<CatalogEntry> {
    use crate::named::{binary, l1, l2, u_plus};
    let yes_zero = Hypotheses {
        infinite_aut: Tri::Unknown,
        zero_entropy: Tri::Yes,
    };
    let finite = Hypotheses {
        infinite_aut: Tri::No,
        zero_entropy: Tri::Yes,
    };
    let a1 = Lattice::a(1);
    let entry = |label: &str, l: Lattice, flags: Hypotheses, graph: Option<&str>| CatalogEntry {
        label: label.to_string(),
        gram: l.gram().to_vec(),
        flags,
        graph: graph.map(str::to_string),
    };
    vec![
        entry("L1", l1(), yes_zero, None),
        entry("L2", l2(), yes_zero, None),
        entry(
            "U+E8+E8",
            u_plus(&Lattice::e(8).direct_sum(&Lattice::e(8))),
            Hypotheses::default(),
            None,
        ),
        entry("<2>", Lattice::diagonal(&[2]).unwrap(), Hypotheses::default(), None),
        entry("B(3,1)", binary(3, 1), Hypotheses::default(), None),
        entry("B(5,4)", binary(5, 4), Hypotheses::default(), None),
        entry("U+4A1", u_plus(&Lattice::direct_sum_all(&vec![a1.clone(); 4])), Hypotheses::default(), None),
        entry("U+<-4>", u_plus(&Lattice::diagonal(&[-4]).unwrap()), yes_zero, None),
        entry("U+3A1", u_plus(&Lattice::direct_sum_all(&vec![a1; 3])), finite, Some("three-A1")),
        entry(
            "U+2A2",
            u_plus(&Lattice::a(2).direct_sum(&Lattice::a(2))),
            finite,
            Some("two-A2-one-A3"),
        ),
    ]
}
