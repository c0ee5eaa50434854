//! Relation and tableau files, tuple-independent conversion and the
//! synthetic data generator.
//!
//! Relations are stored one JSON record per line. The first record declares
//! the schema, each following record is a tuple:
//!
//! ```text
//! {"schema": {"attributes": ["Color", "Type"], "key": null}}
//! {"key": "t1", "options": [{"p": 0.5, "v": {"Color": "Red", "Type": "Star"}}, {"p": 0.5, "marker": "ignored"}]}
//! ```
//!
//! Tableaux are tab-separated: a header naming the X attributes, a `|`
//! field, then the Y attributes; one row of patterns per line, `_` being the
//! wildcard. Lines starting with `#` are comments.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{
    AttrSet, AttributeSchema, Marker, OptionAssignment, OptionContent, Pattern, PatternTableau,
    ProbRelation, ProbTuple, RelationKind, PROBABILITY_TOLERANCE,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Repair probability sums instead of rejecting them: missing mass
    /// becomes an IGNORED option, excess mass is scaled away.
    pub normalize: bool,
}

#[derive(Serialize, Deserialize)]
struct SchemaRecord {
    schema: SchemaBody,
}

#[derive(Serialize, Deserialize)]
struct SchemaBody {
    attributes: Vec<String>,
    #[serde(default)]
    key: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleRecord {
    key: String,
    options: Vec<OptionRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionRecord {
    p: f64,
    #[serde(default)]
    v: Option<Map<String, Value>>,
    #[serde(default)]
    marker: Option<String>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_option(rec: OptionRecord, schema: &AttributeSchema, line: usize) -> Result<OptionAssignment> {
    match (rec.v, rec.marker) {
        (Some(_), Some(_)) => Err(parse_error(line, "option has both `v` and `marker`")),
        (None, None) => Err(parse_error(line, "option needs `v` or `marker`")),
        (None, Some(m)) => match m.as_str() {
            "ignored" => Ok(OptionAssignment::with_marker(rec.p, Marker::Ignored)),
            other => Err(parse_error(line, format!("unsupported marker `{other}`"))),
        },
        (Some(mut v), None) => {
            let mut values = Vec::with_capacity(schema.value_attributes().len());
            for a in schema.value_attributes() {
                match v.remove(a) {
                    Some(Value::String(s)) => values.push(s),
                    Some(Value::Number(n)) => values.push(n.to_string()),
                    Some(Value::Bool(b)) => values.push(b.to_string()),
                    Some(other) => {
                        return Err(parse_error(line, format!("attribute `{a}` has non-scalar value {other}")))
                    }
                    None => return Err(parse_error(line, format!("option is missing attribute `{a}`"))),
                }
            }
            if let Some(extra) = v.keys().next() {
                return Err(parse_error(line, format!("unknown attribute `{extra}`")));
            }
            Ok(OptionAssignment::with_values(rec.p, values))
        }
    }
}

/// Pads tuples whose options sum below one with an IGNORED option holding
/// the missing mass.
fn pad_missing_mass(tuples: &mut [ProbTuple]) {
    for t in tuples {
        let total = t.total_probability();
        if total < 1.0 - PROBABILITY_TOLERANCE {
            t.options.push(OptionAssignment::with_marker(1.0 - total, Marker::Ignored));
        }
    }
}

fn normalize_tuples(tuples: &mut [ProbTuple]) {
    for t in tuples.iter_mut() {
        let total = t.total_probability();
        if total > 1.0 + PROBABILITY_TOLERANCE {
            t.options.iter_mut().for_each(|o| o.p /= total);
        }
    }
    pad_missing_mass(tuples);
}

/// Parses the line-delimited relation format and validates the result.
pub fn read_relation<R: Read>(reader: R, opts: LoadOptions) -> Result<ProbRelation> {
    let mut schema: Option<AttributeSchema> = None;
    let mut tuples = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some(s) = &schema else {
            let rec: SchemaRecord = serde_json::from_str(&line)
                .map_err(|e| parse_error(line_no, format!("expected schema record: {e}")))?;
            schema = Some(
                AttributeSchema::new(rec.schema.attributes, rec.schema.key)
                    .map_err(|e| parse_error(line_no, e.to_string()))?,
            );
            continue;
        };
        let rec: TupleRecord =
            serde_json::from_str(&line).map_err(|e| parse_error(line_no, e.to_string()))?;
        let mut options = Vec::with_capacity(rec.options.len());
        for o in rec.options {
            if !o.p.is_finite() {
                return Err(parse_error(line_no, "probability is not finite"));
            }
            let o = parse_option(o, s, line_no)?;
            // Zero-probability options never appear in a world.
            if o.p != 0.0 {
                options.push(o);
            }
        }
        tuples.push(ProbTuple::new(rec.key, options));
    }
    let schema = schema.ok_or_else(|| parse_error(1, "missing schema record"))?;
    let inferred = ProbRelation::from_tuples(schema.clone(), tuples.clone()).kind();
    if opts.normalize && inferred == RelationKind::Tdi {
        normalize_tuples(&mut tuples);
    }
    let relation = ProbRelation::from_tuples(schema, tuples);
    let violations = relation.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(relation)
}

pub fn load(path: impl AsRef<Path>, opts: LoadOptions) -> Result<ProbRelation> {
    read_relation(File::open(path)?, opts)
}

/// Writes the line-delimited format. Probabilities use the shortest decimal
/// form that reads back to the same float.
pub fn write_relation<W: Write>(relation: &ProbRelation, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let schema = relation.schema();
    let head = SchemaRecord {
        schema: SchemaBody {
            attributes: schema.attributes().to_vec(),
            key: schema.key_attribute().map(str::to_string),
        },
    };
    serde_json::to_writer(&mut w, &head).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    for t in relation.tuples() {
        let options: Vec<Value> = t
            .options
            .iter()
            .map(|o| {
                let mut rec = Map::new();
                rec.insert("p".into(), Value::from(o.p));
                match &o.content {
                    OptionContent::Values(vals) => {
                        let v: Map<String, Value> = schema
                            .value_attributes()
                            .iter()
                            .zip(vals)
                            .map(|(a, x)| (a.clone(), Value::String(x.clone())))
                            .collect();
                        rec.insert("v".into(), Value::Object(v));
                    }
                    OptionContent::Marker(Marker::Ignored) => {
                        rec.insert("marker".into(), Value::from("ignored"));
                    }
                    OptionContent::Marker(Marker::Violates) => {
                        rec.insert("marker".into(), Value::from("violates"));
                    }
                }
                Value::Object(rec)
            })
            .collect();
        let mut rec = Map::new();
        rec.insert("key".into(), Value::String(t.key.clone()));
        rec.insert("options".into(), Value::Array(options));
        serde_json::to_writer(&mut w, &Value::Object(rec)).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save(relation: &ProbRelation, path: impl AsRef<Path>) -> Result<()> {
    write_relation(relation, File::create(path)?)
}

/// Reads a deterministic relation from CSV with a header row. The `key`
/// column, if named, supplies tuple keys; otherwise rows are keyed `r0`,
/// `r1`, ...
pub fn read_csv<R: Read>(reader: R, key: Option<&str>) -> Result<ProbRelation> {
    let mut rdr = csv::Reader::from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        parse_error(line, e.to_string())
    };
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let schema = AttributeSchema::new(header.clone(), key.map(str::to_string))?;
    let key_col = key.and_then(|k| header.iter().position(|h| h == k));
    let mut tuples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let key = match key_col {
            Some(c) => rec[c].to_string(),
            None => format!("r{i}"),
        };
        let values: Vec<&str> = rec
            .iter()
            .enumerate()
            .filter(|(c, _)| Some(*c) != key_col)
            .map(|(_, v)| v)
            .collect();
        tuples.push(ProbTuple::new(key, vec![OptionAssignment::with_values(1.0, values)]));
    }
    let relation = ProbRelation::from_tuples(schema, tuples);
    let violations = relation.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(relation)
}

pub fn load_csv(path: impl AsRef<Path>, key: Option<&str>) -> Result<ProbRelation> {
    read_csv(File::open(path)?, key)
}

/// Parses the tab-separated tableau format.
pub fn read_tableau<R: Read>(reader: R) -> Result<PatternTableau> {
    let mut header: Option<(AttrSet, AttrSet)> = None;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        let Some((x, y)) = &header else {
            let bar = cells
                .iter()
                .position(|c| *c == "|")
                .ok_or_else(|| parse_error(line_no, "header needs a `|` field between X and Y"))?;
            header = Some((
                AttrSet::new(cells[..bar].iter().copied()),
                AttrSet::new(cells[bar + 1..].iter().copied()),
            ));
            continue;
        };
        let mut cells = cells;
        if cells.len() == x.len() + y.len() + 1 && cells[x.len()] == "|" {
            cells.remove(x.len());
        }
        if cells.len() != x.len() + y.len() {
            return Err(parse_error(
                line_no,
                format!("expected {} cells, found {}", x.len() + y.len(), cells.len()),
            ));
        }
        rows.push(cells.into_iter().map(Pattern::parse).collect());
    }
    let (x, y) = header.ok_or_else(|| parse_error(1, "missing tableau header"))?;
    PatternTableau::new(x, y, rows)
}

pub fn load_tableau(path: impl AsRef<Path>) -> Result<PatternTableau> {
    read_tableau(File::open(path)?)
}

pub fn write_tableau<W: Write>(tableau: &PatternTableau, mut writer: W) -> Result<()> {
    let header: Vec<&str> = tableau
        .x()
        .iter()
        .chain(std::iter::once("|"))
        .chain(tableau.y().iter())
        .collect();
    writeln!(writer, "{}", header.join("\t"))?;
    for i in 0..tableau.rows().len() {
        let cells: Vec<String> = tableau
            .x_patterns(i)
            .iter()
            .map(ToString::to_string)
            .chain(std::iter::once("|".to_string()))
            .chain(tableau.y_patterns(i).iter().map(ToString::to_string))
            .collect();
        writeln!(writer, "{}", cells.join("\t"))?;
    }
    Ok(())
}

/// Gives every tuple whose options sum below one an IGNORED option with the
/// missing mass, turning tuple-independent data into tuple-disjoint data.
pub fn ti_to_tdi(relation: &ProbRelation) -> ProbRelation {
    let mut tuples = relation.tuples().to_vec();
    pad_missing_mass(&mut tuples);
    ProbRelation::from_tuples(relation.schema().clone(), tuples)
}

/// Parameters of a synthetic relation with one planted dependency.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n_tuples: usize,
    pub options_per_tuple: usize,
    pub domain_cardinality: usize,
    pub noise: f64,
    pub seed: u64,
    pub x_attr: String,
    pub y_attr: String,
    /// Further attributes with values drawn independently of everything.
    pub extra_attrs: Vec<String>,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            n_tuples: 100,
            options_per_tuple: 2,
            domain_cardinality: 4,
            noise: 0.0,
            seed: 0,
            x_attr: "A".into(),
            y_attr: "B".into(),
            extra_attrs: Vec::new(),
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_tuples == 0 || self.options_per_tuple == 0 || self.domain_cardinality == 0 {
            return Err(Error::InvalidConfig(
                "tuples, options per tuple and domain cardinality must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidConfig(format!("noise must be in [0, 1], got {}", self.noise)));
        }
        if self.x_attr == self.y_attr {
            return Err(Error::InvalidConfig("planted X and Y must differ".into()));
        }
        Ok(())
    }
}

/// The planted mapping and how many options break it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    /// `mapping[x]` is the index of f(x).
    pub mapping: Vec<usize>,
    pub violating_options: usize,
    pub total_options: usize,
}

fn value(attr: &str, i: usize) -> String {
    format!("{}{i}", attr.to_lowercase())
}

pub fn generate(spec: &GeneratorSpec) -> Result<ProbRelation> {
    Ok(generate_with_truth(spec)?.0)
}

/// Draws f uniformly, then for every option a uniform x, y = f(x) with
/// probability 1 − noise and a uniformly chosen other y otherwise. Options
/// of a tuple are equally likely.
pub fn generate_with_truth(spec: &GeneratorSpec) -> Result<(ProbRelation, GroundTruth)> {
    spec.validate()?;
    let m = spec.domain_cardinality;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mapping: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
    let attrs: Vec<String> = [spec.x_attr.clone(), spec.y_attr.clone()]
        .into_iter()
        .chain(spec.extra_attrs.iter().cloned())
        .collect();
    let schema = AttributeSchema::new(attrs, None)?;
    let p = 1.0 / spec.options_per_tuple as f64;
    let mut violating = 0;
    let tuples = (0..spec.n_tuples)
        .map(|i| {
            let options = (0..spec.options_per_tuple)
                .map(|_| {
                    let x = rng.random_range(0..m);
                    let mut y = mapping[x];
                    if m > 1 && rng.random::<f64>() < spec.noise {
                        let shift = rng.random_range(1..m);
                        y = (y + shift) % m;
                        violating += 1;
                    }
                    let mut values = vec![value(&spec.x_attr, x), value(&spec.y_attr, y)];
                    values.extend(spec.extra_attrs.iter().map(|a| value(a, rng.random_range(0..m))));
                    OptionAssignment::with_values(p, values)
                })
                .collect();
            ProbTuple::new(format!("t{i}"), options)
        })
        .collect();
    let relation = ProbRelation::from_tuples(schema, tuples);
    Ok((
        relation,
        GroundTruth {
            mapping,
            violating_options: violating,
            total_options: spec.n_tuples * spec.options_per_tuple,
        },
    ))
}
