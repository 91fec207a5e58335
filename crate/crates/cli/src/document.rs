//! JSON documents: the input spec and the completion result.
//!
//! Every number is carried as an exact `"p/q"` string next to a decimal
//! rendering. Spec values may be written as decimals or fractions, either
//! as JSON strings or numbers; decimals are read exactly.

use std::collections::BTreeSet;
use std::fmt;

use belief_forge_core::value::{render, to_f64};
use belief_forge_core::{
    parse_rational, CompletionResult, ConditionKind, ExistenceReport, Frame, KnownBeliefs,
    Rational, Subset, Symmetry, Verdict,
};
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("unknown label `{label}` in {context}")]
    UnknownLabel { label: String, context: String },

    #[error("belief {value} for {set} is outside [0, 1]")]
    ValueOutOfRange { set: String, value: String },

    #[error("constraint {0} is given more than once")]
    DuplicateSet(String),

    #[error("invalid document: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] belief_forge_core::Error),
}

impl DocError {
    fn from_json(e: serde_json::Error) -> Self {
        DocError::Parse {
            line: e.line(),
            column: e.column(),
            reason: strip_position(&e.to_string()),
        }
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(pos) => msg[..pos].to_string(),
        None => msg.to_string(),
    }
}

/// Completion method named in a spec or on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    MinSpec,
    Focusing,
    Closed,
    Stepwise,
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodName::MinSpec => "min-spec",
            MethodName::Focusing => "focusing",
            MethodName::Closed => "closed",
            MethodName::Stepwise => "stepwise",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecOptions {
    /// Largest variable count for optimal-face enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    /// Fall back to stepwise weak focusing when focusing does not apply.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepwise: Option<bool>,
}

impl SpecOptions {
    fn is_empty(&self) -> bool {
        self.cap.is_none() && self.stepwise.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraint {
    pub set: Vec<String>,
    /// Belief as written: a decimal or `"p/q"`.
    #[serde(deserialize_with = "number_text")]
    pub belief: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub frame: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodName>,
    #[serde(default, skip_serializing_if = "SpecOptions::is_empty")]
    pub options: SpecOptions,
    /// Sets whose belief and plausibility are reported with the result.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub queries: Vec<Vec<String>>,
}

fn number_text<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(serde_json::Number),
    }
    match Raw::deserialize(d) {
        Ok(Raw::Text(s)) => Ok(s),
        Ok(Raw::Number(n)) => Ok(n.to_string()),
        Err(_) => Err(de::Error::custom(
            "belief must be a number or a string such as \"0.3\" or \"3/10\"",
        )),
    }
}

/// Strict parse of a spec: JSON syntax and shape, labels, values and
/// duplicate sets are all checked.
pub fn parse_spec(text: &str) -> Result<SpecDocument, DocError> {
    let doc: SpecDocument = serde_json::from_str(text).map_err(DocError::from_json)?;
    doc.known_beliefs()?;
    Ok(doc)
}

impl SpecDocument {
    pub fn frame(&self) -> Result<Frame, DocError> {
        Ok(Frame::new(self.frame.iter().cloned())?)
    }

    pub fn known_beliefs(&self) -> Result<KnownBeliefs, DocError> {
        let frame = self.frame()?;
        let mut seen = BTreeSet::new();
        let mut values = Vec::with_capacity(self.constraints.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let set = resolve(&frame, &c.set, &format!("constraint {}", i + 1))?;
            if !seen.insert(set) {
                return Err(DocError::DuplicateSet(frame.render(set)));
            }
            let v = parse_rational(&c.belief)?;
            if v.is_negative() || v > Rational::one() {
                return Err(DocError::ValueOutOfRange {
                    set: frame.render(set),
                    value: c.belief.clone(),
                });
            }
            values.push((set, v));
        }
        Ok(KnownBeliefs::new(frame, values)?)
    }

    pub fn query_sets(&self) -> Result<Vec<Subset>, DocError> {
        let frame = self.frame()?;
        self.queries
            .iter()
            .enumerate()
            .map(|(i, q)| resolve(&frame, q, &format!("query {}", i + 1)))
            .collect()
    }

    /// Spec for the given known values, in canonical form.
    pub fn from_known(known: &KnownBeliefs) -> Self {
        let frame = known.frame();
        SpecDocument {
            frame: frame.labels().to_vec(),
            constraints: known
                .constraints()
                .map(|(s, v)| Constraint {
                    set: frame.labels_of(s),
                    belief: render(v),
                })
                .collect(),
            method: None,
            options: SpecOptions::default(),
            queries: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical(self)
    }
}

pub fn resolve(frame: &Frame, labels: &[String], context: &str) -> Result<Subset, DocError> {
    frame.subset(labels).map_err(|e| match e {
        belief_forge_core::Error::UnknownLabel(label) => DocError::UnknownLabel {
            label,
            context: context.to_string(),
        },
        other => DocError::Core(other),
    })
}

/// Parses a set written as labels separated by commas, optionally braced:
/// `u1,u2` or `{u1,u2}`. `{}` is the empty set.
pub fn parse_set_text(frame: &Frame, text: &str) -> Result<Subset, DocError> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    let labels: Vec<String> = inner
        .split(',')
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect();
    resolve(frame, &labels, &format!("set `{text}`"))
}

/// Pretty JSON with a trailing newline; field order follows the types.
pub fn to_canonical<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

/// An exact rational with its decimal rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Exact", 2)?;
        st.serialize_field("exact", &render(&self.0))?;
        st.serialize_field("decimal", &to_f64(&self.0))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            exact: String,
            decimal: f64,
        }
        let raw = Raw::deserialize(d)?;
        let v = parse_rational(&raw.exact).map_err(de::Error::custom)?;
        if to_f64(&v) != raw.decimal {
            return Err(de::Error::custom(format!(
                "decimal {} does not match exact value {}",
                raw.decimal, raw.exact
            )));
        }
        Ok(Exact(v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassEntry {
    pub set: Vec<String>,
    pub mass: Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryEntry {
    pub set: Vec<String>,
    pub belief: Exact,
    pub plausibility: Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionEntry {
    pub set: Vec<String>,
    /// Maximal known sets strictly inside `set`.
    pub lower_family: Vec<Vec<String>>,
    pub bound: Exact,
    pub residual: Exact,
    pub passed: bool,
    pub provably_impossible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    /// `closed` or `focusing`.
    pub kind: String,
    /// `consistent`, `focusing-inapplicable` or `provably-impossible`.
    pub verdict: String,
    pub conditions: Vec<ConditionEntry>,
}

impl ReportDocument {
    pub fn new(frame: &Frame, report: &ExistenceReport) -> Self {
        ReportDocument {
            kind: match report.kind {
                ConditionKind::Closed => "closed",
                ConditionKind::Focusing => "focusing",
            }
            .into(),
            verdict: verdict_tag(report.verdict).into(),
            conditions: report
                .records
                .iter()
                .map(|r| ConditionEntry {
                    set: frame.labels_of(r.set),
                    lower_family: r.lower_family.iter().map(|s| frame.labels_of(s)).collect(),
                    bound: Exact(r.bound.clone()),
                    residual: Exact(r.residual.clone()),
                    passed: r.passed,
                    provably_impossible: r.provably_impossible,
                })
                .collect(),
        }
    }
}

pub fn verdict_tag(v: Verdict) -> &'static str {
    match v {
        Verdict::Consistent => "consistent",
        Verdict::FocusingInapplicable => "focusing-inapplicable",
        Verdict::ProvablyImpossible => "provably-impossible",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymmetryDocument {
    Direct,
    Unique,
    Averaged { vertices: usize },
    NotEnumerated { variables: usize, cap: usize },
}

impl From<Symmetry> for SymmetryDocument {
    fn from(s: Symmetry) -> Self {
        match s {
            Symmetry::Direct => SymmetryDocument::Direct,
            Symmetry::Unique => SymmetryDocument::Unique,
            Symmetry::Averaged { vertices } => SymmetryDocument::Averaged { vertices },
            Symmetry::NotEnumerated { variables, cap } => {
                SymmetryDocument::NotEnumerated { variables, cap }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub method: String,
    pub frame: Vec<String>,
    /// Focal elements in canonical order (cardinality, then bitmask).
    pub masses: Vec<MassEntry>,
    pub specificity: Exact,
    pub queries: Vec<QueryEntry>,
    pub report: ReportDocument,
    pub symmetry: SymmetryDocument,
}

impl ResultDocument {
    pub fn new(result: &CompletionResult, queries: &[Subset]) -> Self {
        let m = &result.mass;
        let frame = m.frame();
        ResultDocument {
            method: result.method.tag(),
            frame: frame.labels().to_vec(),
            masses: m
                .entries()
                .map(|(s, v)| MassEntry {
                    set: frame.labels_of(s),
                    mass: Exact(v.clone()),
                })
                .collect(),
            specificity: Exact(m.specificity()),
            queries: queries
                .iter()
                .map(|q| QueryEntry {
                    set: frame.labels_of(*q),
                    belief: Exact(m.belief(*q)),
                    plausibility: Exact(m.plausibility(*q)),
                })
                .collect(),
            report: ReportDocument::new(frame, &result.diagnostics),
            symmetry: result.symmetry.into(),
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical(self)
    }

    pub fn mass_of(&self, labels: &[&str]) -> Option<&Rational> {
        let mut want: Vec<&str> = labels.to_vec();
        want.sort_unstable();
        self.masses
            .iter()
            .find(|e| {
                let mut have: Vec<&str> = e.set.iter().map(String::as_str).collect();
                have.sort_unstable();
                have == want
            })
            .map(|e| &e.mass.0)
    }
}

/// Parses a result document and checks that its masses are positive, on
/// distinct nonempty sets, and sum to exactly 1.
pub fn parse_result(text: &str) -> Result<ResultDocument, DocError> {
    let doc: ResultDocument = serde_json::from_str(text).map_err(DocError::from_json)?;
    let frame = Frame::new(doc.frame.iter().cloned())?;
    let mut total = Rational::zero();
    let mut seen = BTreeSet::new();
    for (i, e) in doc.masses.iter().enumerate() {
        let set = resolve(&frame, &e.set, &format!("mass entry {}", i + 1))?;
        if set.is_empty() {
            return Err(DocError::Invalid("mass on the empty set".into()));
        }
        if !seen.insert(set) {
            return Err(DocError::DuplicateSet(frame.render(set)));
        }
        if !e.mass.0.is_positive() {
            return Err(DocError::Invalid(format!(
                "mass of {} is not positive",
                frame.render(set)
            )));
        }
        total += &e.mass.0;
    }
    if !total.is_one() {
        return Err(DocError::Invalid(format!(
            "masses sum to {}, not 1",
            render(&total)
        )));
    }
    Ok(doc)
}
