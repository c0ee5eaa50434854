//! Probabilistic relations, dependencies and pattern tableaux.
//!
//! A [`ProbRelation`] is the compact tuple-disjoint encoding of a set of
//! possible worlds: every keyed tuple independently picks exactly one of its
//! options. Values are opaque strings compared by equality.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the per-tuple probability sum of tuple-disjoint relations.
pub const PROBABILITY_TOLERANCE: f64 = 1e-6;

/// Ordered attribute names plus an optional key attribute that never takes
/// part in dependency analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<String>,
    key_attribute: Option<String>,
    value_attributes: Vec<String>,
}

impl AttributeSchema {
    pub fn new<I, S>(attributes: I, key_attribute: Option<String>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let attributes: Vec<String> = attributes.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for a in &attributes {
            if a.is_empty() {
                return Err(Error::InvalidSchema("empty attribute name".into()));
            }
            if !seen.insert(a.as_str()) {
                return Err(Error::InvalidSchema(format!("duplicate attribute `{a}`")));
            }
        }
        if let Some(k) = &key_attribute {
            if !seen.contains(k.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "key attribute `{k}` is not among the attributes"
                )));
            }
        }
        let value_attributes = attributes
            .iter()
            .filter(|a| Some(*a) != key_attribute.as_ref())
            .cloned()
            .collect();
        Ok(Self {
            attributes,
            key_attribute,
            value_attributes,
        })
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn key_attribute(&self) -> Option<&str> {
        self.key_attribute.as_deref()
    }

    /// Attributes carried by options, in schema order (everything but the key).
    pub fn value_attributes(&self) -> &[String] {
        &self.value_attributes
    }

    pub fn value_index(&self, name: &str) -> Option<usize> {
        self.value_attributes.iter().position(|a| a == name)
    }

    /// Positions of `attrs` within option value vectors.
    pub fn resolve(&self, attrs: &AttrSet) -> Result<Vec<usize>> {
        attrs
            .iter()
            .map(|a| {
                self.value_index(a)
                    .ok_or_else(|| Error::UnknownAttribute(a.to_string()))
            })
            .collect()
    }
}

/// The two special option markers introduced by tableau rewriting and by
/// tuple-independent conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Marker {
    /// The option is treated as if its tuple did not exist.
    Ignored,
    /// The option contradicts the tableau; it is never compatible.
    Violates,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptionContent {
    /// One value per value attribute, in schema order.
    Values(Vec<String>),
    Marker(Marker),
}

/// One alternative of a tuple, with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct OptionAssignment {
    pub p: f64,
    pub content: OptionContent,
}

impl OptionAssignment {
    pub fn with_values<I, S>(p: f64, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            p,
            content: OptionContent::Values(values.into_iter().map(Into::into).collect()),
        }
    }

    pub fn with_marker(p: f64, marker: Marker) -> Self {
        Self {
            p,
            content: OptionContent::Marker(marker),
        }
    }

    pub fn values(&self) -> Option<&[String]> {
        match &self.content {
            OptionContent::Values(v) => Some(v),
            OptionContent::Marker(_) => None,
        }
    }

    pub fn marker(&self) -> Option<Marker> {
        match self.content {
            OptionContent::Marker(m) => Some(m),
            OptionContent::Values(_) => None,
        }
    }

    /// Composite value of the attributes at `idx`, or `None` for markers.
    pub fn project(&self, idx: &[usize]) -> Option<Vec<&str>> {
        self.values()
            .map(|v| idx.iter().map(|&i| v[i].as_str()).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbTuple {
    pub key: String,
    pub options: Vec<OptionAssignment>,
}

impl ProbTuple {
    pub fn new(key: impl Into<String>, options: Vec<OptionAssignment>) -> Self {
        Self {
            key: key.into(),
            options,
        }
    }

    pub fn total_probability(&self) -> f64 {
        self.options.iter().map(|o| o.p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    /// Tuple-disjoint independent: options of a tuple are mutually exclusive.
    Tdi,
    /// Tuple-independent: one option per tuple, present with its probability.
    Ti,
    Deterministic,
}

/// One validation finding; `tuple` is `None` for relation-wide problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub tuple: Option<String>,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tuple {
            Some(k) => write!(f, "tuple `{k}`: {}", self.rule),
            None => f.write_str(&self.rule),
        }
    }
}

/// Immutable probabilistic relation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbRelation {
    schema: AttributeSchema,
    tuples: Vec<ProbTuple>,
    kind: RelationKind,
}

impl ProbRelation {
    /// Builds a relation with an explicit kind. Nothing is checked; call
    /// [`ProbRelation::validate`] before trusting foreign input.
    pub fn new(schema: AttributeSchema, tuples: Vec<ProbTuple>, kind: RelationKind) -> Self {
        Self {
            schema,
            tuples,
            kind,
        }
    }

    /// Builds a relation and infers its kind from the option layout.
    pub fn from_tuples(schema: AttributeSchema, tuples: Vec<ProbTuple>) -> Self {
        let kind = infer_kind(&tuples);
        Self::new(schema, tuples, kind)
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn tuples(&self) -> &[ProbTuple] {
        &self.tuples
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn into_parts(self) -> (AttributeSchema, Vec<ProbTuple>, RelationKind) {
        (self.schema, self.tuples, self.kind)
    }

    /// Checks every structural invariant; never fails, returns findings.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let width = self.schema.value_attributes().len();
        let mut keys = HashSet::new();
        for t in &self.tuples {
            let at = |rule: String| Violation {
                tuple: Some(t.key.clone()),
                rule,
            };
            if !keys.insert(t.key.as_str()) {
                out.push(at("duplicate key".into()));
            }
            if t.options.is_empty() {
                out.push(at("tuple has no options".into()));
                continue;
            }
            for (i, o) in t.options.iter().enumerate() {
                if !(o.p > 0.0 && o.p <= 1.0) {
                    out.push(at(format!("option {i} has probability {} outside (0, 1]", o.p)));
                }
                match &o.content {
                    OptionContent::Values(v) if v.len() != width => out.push(at(format!(
                        "option {i} has {} values, schema has {width} value attributes",
                        v.len()
                    ))),
                    OptionContent::Marker(Marker::Violates) => {
                        out.push(at(format!("option {i} carries a violation marker")))
                    }
                    _ => {}
                }
            }
            let total = t.total_probability();
            match self.kind {
                RelationKind::Tdi => {
                    if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                        out.push(at(format!("option probabilities sum to {total}, expected 1")));
                    }
                }
                RelationKind::Ti => {
                    if t.options.len() != 1 {
                        out.push(at(format!(
                            "tuple-independent tuple has {} options",
                            t.options.len()
                        )));
                    }
                }
                RelationKind::Deterministic => {
                    if t.options.len() != 1 || t.options[0].p != 1.0 {
                        out.push(at("deterministic tuple must have one option with p = 1".into()));
                    }
                }
            }
        }
        if self.kind != RelationKind::Deterministic && !self.tuples.is_empty() {
            let all_certain = self
                .tuples
                .iter()
                .all(|t| t.options.len() == 1 && t.options[0].p == 1.0);
            if all_certain {
                out.push(Violation {
                    tuple: None,
                    rule: "every tuple is certain but the relation is not marked deterministic"
                        .into(),
                });
            }
        }
        out
    }

    /// Number of possible worlds, saturating at `u128::MAX`.
    pub fn world_count(&self) -> u128 {
        self.tuples.iter().fold(1u128, |acc, t| {
            let mut choices = t.options.len() as u128;
            if self.kind == RelationKind::Ti && t.total_probability() < 1.0 {
                choices += 1;
            }
            acc.saturating_mul(choices)
        })
    }
}

fn infer_kind(tuples: &[ProbTuple]) -> RelationKind {
    if tuples.iter().any(|t| t.options.len() > 1) {
        RelationKind::Tdi
    } else if tuples.iter().any(|t| t.options.iter().any(|o| o.p < 1.0)) {
        RelationKind::Ti
    } else {
        RelationKind::Deterministic
    }
}

/// Number of distinct composite values of `attrs` across all value options.
pub fn domain_cardinality(relation: &ProbRelation, attrs: &AttrSet) -> Result<usize> {
    let idx = relation.schema().resolve(attrs)?;
    let distinct: HashSet<Vec<&str>> = relation
        .tuples()
        .iter()
        .flat_map(|t| t.options.iter())
        .filter_map(|o| o.project(&idx))
        .collect();
    Ok(distinct.len())
}

/// An ordered set of attribute names. Order fixes the layout of composite
/// values; equality as a set is available through [`AttrSet::same_members`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AttrSet(Vec<String>);

impl AttrSet {
    pub fn new<I, S>(attrs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for a in attrs {
            let a = a.into();
            if !out.contains(&a) {
                out.push(a);
            }
        }
        Self(out)
    }

    /// Parses a comma-separated list, trimming whitespace.
    pub fn parse(list: &str) -> Self {
        Self::new(list.split(',').map(str::trim).filter(|s| !s.is_empty()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, attr: &str) -> bool {
        self.0.iter().any(|a| a == attr)
    }

    pub fn is_subset(&self, other: &AttrSet) -> bool {
        self.iter().all(|a| other.contains(a))
    }

    pub fn is_disjoint(&self, other: &AttrSet) -> bool {
        !self.iter().any(|a| other.contains(a))
    }

    pub fn same_members(&self, other: &AttrSet) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }

    pub fn with(&self, attr: &str) -> AttrSet {
        let mut v = self.0.clone();
        if !self.contains(attr) {
            v.push(attr.to_string());
        }
        AttrSet(v)
    }
}

impl fmt::Display for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(","))
    }
}

impl<S: Into<String>> FromIterator<S> for AttrSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        AttrSet::new(iter)
    }
}

/// A tableau cell: a constant, or `_` matching anything.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Const(String),
    Wildcard,
}

impl Pattern {
    pub fn matches(&self, value: &str) -> bool {
        match self {
            Pattern::Wildcard => true,
            Pattern::Const(c) => c == value,
        }
    }

    /// Parses `_` as the wildcard and anything else as a constant.
    pub fn parse(cell: &str) -> Self {
        if cell == "_" {
            Pattern::Wildcard
        } else {
            Pattern::Const(cell.to_string())
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Wildcard => f.write_str("_"),
            Pattern::Const(c) => f.write_str(c),
        }
    }
}

/// Pattern rows over X ∪ Y; each row lists the X patterns then the Y patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTableau {
    x: AttrSet,
    y: AttrSet,
    rows: Vec<Vec<Pattern>>,
}

impl PatternTableau {
    pub fn new(x: AttrSet, y: AttrSet, rows: Vec<Vec<Pattern>>) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidTableau("X and Y must be non-empty".into()));
        }
        if !x.is_disjoint(&y) {
            return Err(Error::InvalidTableau("X and Y overlap".into()));
        }
        if rows.is_empty() {
            return Err(Error::InvalidTableau("tableau has no rows".into()));
        }
        let width = x.len() + y.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::InvalidTableau(format!(
                "row {i} has {} cells, expected {width}",
                r.len()
            )));
        }
        Ok(Self { x, y, rows })
    }

    /// A single all-wildcard row.
    pub fn wildcard(x: AttrSet, y: AttrSet) -> Result<Self> {
        let width = x.len() + y.len();
        Self::new(x, y, vec![vec![Pattern::Wildcard; width]])
    }

    pub fn x(&self) -> &AttrSet {
        &self.x
    }

    pub fn y(&self) -> &AttrSet {
        &self.y
    }

    pub fn rows(&self) -> &[Vec<Pattern>] {
        &self.rows
    }

    pub fn x_patterns(&self, row: usize) -> &[Pattern] {
        &self.rows[row][..self.x.len()]
    }

    pub fn y_patterns(&self, row: usize) -> &[Pattern] {
        &self.rows[row][self.x.len()..]
    }

    /// Re-orders the columns so that they follow `x` and `y` as given.
    /// Fails unless both are the same attribute sets as the tableau's own.
    pub fn aligned_to(&self, x: &AttrSet, y: &AttrSet) -> Result<PatternTableau> {
        if !self.x.same_members(x) || !self.y.same_members(y) {
            return Err(Error::InvalidTableau(format!(
                "tableau is over ({} | {}), dependency is over ({x} | {y})",
                self.x, self.y
            )));
        }
        let cols: Vec<usize> = x
            .iter()
            .map(|a| self.x.iter().position(|b| b == a).unwrap())
            .chain(
                y.iter()
                    .map(|a| self.x.len() + self.y.iter().position(|b| b == a).unwrap()),
            )
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect();
        Ok(PatternTableau {
            x: x.clone(),
            y: y.clone(),
            rows,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DependencyKind {
    Pfd,
    Pafd,
    Cpfd,
    Cpafd,
}

impl DependencyKind {
    pub fn is_conditional(self) -> bool {
        matches!(self, DependencyKind::Cpfd | DependencyKind::Cpafd)
    }

    pub fn is_approximate(self) -> bool {
        matches!(self, DependencyKind::Pafd | DependencyKind::Cpafd)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DependencyKind::Pfd => "pfd",
            DependencyKind::Pafd => "pafd",
            DependencyKind::Cpfd => "cpfd",
            DependencyKind::Cpafd => "cpafd",
        }
    }
}

impl fmt::Display for DependencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DependencyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pfd" => Ok(DependencyKind::Pfd),
            "pafd" => Ok(DependencyKind::Pafd),
            "cpfd" => Ok(DependencyKind::Cpfd),
            "cpafd" => Ok(DependencyKind::Cpafd),
            other => Err(Error::InvalidDependency(format!("unknown kind `{other}`"))),
        }
    }
}

/// A dependency to assess: kind, determining set X, determined set Y and,
/// for conditional kinds, a tableau.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencySpec {
    pub kind: DependencyKind,
    pub x: AttrSet,
    pub y: AttrSet,
    pub tableau: Option<PatternTableau>,
}

impl DependencySpec {
    pub fn new(
        kind: DependencyKind,
        x: AttrSet,
        y: AttrSet,
        tableau: Option<PatternTableau>,
    ) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidDependency("X and Y must be non-empty".into()));
        }
        if !x.is_disjoint(&y) {
            return Err(Error::InvalidDependency(format!("{x} and {y} overlap")));
        }
        let tableau = match (kind.is_conditional(), tableau) {
            (true, None) => {
                return Err(Error::InvalidDependency(format!("{kind} needs a tableau")))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidDependency(format!("{kind} takes no tableau")))
            }
            (true, Some(t)) => Some(t.aligned_to(&x, &y)?),
            (false, None) => None,
        };
        Ok(Self { kind, x, y, tableau })
    }

    pub fn pfd(x: AttrSet, y: AttrSet) -> Result<Self> {
        Self::new(DependencyKind::Pfd, x, y, None)
    }

    pub fn pafd(x: AttrSet, y: AttrSet) -> Result<Self> {
        Self::new(DependencyKind::Pafd, x, y, None)
    }

    /// Checks that every attribute exists among the schema's value attributes.
    pub fn check_schema(&self, schema: &AttributeSchema) -> Result<()> {
        schema.resolve(&self.x)?;
        schema.resolve(&self.y)?;
        Ok(())
    }
}

impl fmt::Display for DependencySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.kind.is_approximate() { "~>" } else { "->" };
        write!(f, "{}{arrow}{}", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Oracle,
    ExactPruned,
    #[serde(rename = "mc")]
    MonteCarlo,
    Unioned,
    DeterministicApprox,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::ExactPruned => "exact_pruned",
            Method::MonteCarlo => "mc",
            Method::Unioned => "unioned",
            Method::DeterministicApprox => "deterministic_approx",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A confidence value with the metadata of how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceReport {
    value: f64,
    method: Method,
    samples_used: Option<u64>,
    std_error: Option<f64>,
}

impl ConfidenceReport {
    /// A report from a non-sampling method; the value is clamped to [0, 1].
    pub fn exact(method: Method, value: f64) -> Self {
        debug_assert!(method != Method::MonteCarlo);
        Self {
            value: value.clamp(0.0, 1.0),
            method,
            samples_used: None,
            std_error: None,
        }
    }

    pub fn monte_carlo(value: f64, samples_used: u64, std_error: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            method: Method::MonteCarlo,
            samples_used: Some(samples_used),
            std_error: Some(std_error),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn samples_used(&self) -> Option<u64> {
        self.samples_used
    }

    pub fn std_error(&self) -> Option<f64> {
        self.std_error
    }
}

/// Interned view of a relation restricted to one (X, Y) pair: every option
/// becomes either a pair of dense ids or a marker.
#[derive(Debug, Clone)]
pub struct Projection {
    keys: Vec<String>,
    tuples: Vec<Vec<ProjectedOption>>,
    x_values: Vec<Vec<String>>,
    y_values: Vec<Vec<String>>,
    x_lookup: HashMap<Vec<String>, u32>,
    y_lookup: HashMap<Vec<String>, u32>,
    kind: RelationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Row { x: u32, y: u32 },
    Ignored,
    Violates,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedOption {
    pub p: f64,
    pub cell: Cell,
}

impl Projection {
    pub fn new(relation: &ProbRelation, x: &AttrSet, y: &AttrSet) -> Result<Self> {
        let schema = relation.schema();
        let xi = schema.resolve(x)?;
        let yi = schema.resolve(y)?;
        let mut p = Projection {
            keys: Vec::with_capacity(relation.len()),
            tuples: Vec::with_capacity(relation.len()),
            x_values: Vec::new(),
            y_values: Vec::new(),
            x_lookup: HashMap::new(),
            y_lookup: HashMap::new(),
            kind: relation.kind(),
        };
        for t in relation.tuples() {
            let options = t
                .options
                .iter()
                .map(|o| {
                    let cell = match &o.content {
                        OptionContent::Marker(Marker::Ignored) => Cell::Ignored,
                        OptionContent::Marker(Marker::Violates) => Cell::Violates,
                        OptionContent::Values(v) => {
                            let xv: Vec<String> = xi.iter().map(|&i| v[i].clone()).collect();
                            let yv: Vec<String> = yi.iter().map(|&i| v[i].clone()).collect();
                            Cell::Row {
                                x: intern(&mut p.x_lookup, &mut p.x_values, xv),
                                y: intern(&mut p.y_lookup, &mut p.y_values, yv),
                            }
                        }
                    };
                    ProjectedOption { p: o.p, cell }
                })
                .collect();
            p.keys.push(t.key.clone());
            p.tuples.push(options);
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn key(&self, tuple: usize) -> &str {
        &self.keys[tuple]
    }

    pub fn options(&self, tuple: usize) -> &[ProjectedOption] {
        &self.tuples[tuple]
    }

    pub fn tuples(&self) -> &[Vec<ProjectedOption>] {
        &self.tuples
    }

    pub fn x_cardinality(&self) -> usize {
        self.x_values.len()
    }

    pub fn y_cardinality(&self) -> usize {
        self.y_values.len()
    }

    pub fn x_id<S: AsRef<str>>(&self, value: &[S]) -> Option<u32> {
        let key: Vec<String> = value.iter().map(|s| s.as_ref().to_string()).collect();
        self.x_lookup.get(&key).copied()
    }

    pub fn y_id<S: AsRef<str>>(&self, value: &[S]) -> Option<u32> {
        let key: Vec<String> = value.iter().map(|s| s.as_ref().to_string()).collect();
        self.y_lookup.get(&key).copied()
    }

    pub fn x_value(&self, id: u32) -> &[String] {
        &self.x_values[id as usize]
    }

    pub fn y_value(&self, id: u32) -> &[String] {
        &self.y_values[id as usize]
    }
}

fn intern(
    lookup: &mut HashMap<Vec<String>, u32>,
    values: &mut Vec<Vec<String>>,
    v: Vec<String>,
) -> u32 {
    if let Some(&id) = lookup.get(&v) {
        return id;
    }
    let id = values.len() as u32;
    values.push(v.clone());
    lookup.insert(v, id);
    id
}
