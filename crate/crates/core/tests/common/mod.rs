#![allow(dead_code)]

use probdep::conditional::check_consistency;
use probdep::{
    AttrSet, AttributeSchema, Marker, OptionAssignment, Pattern, PatternTableau, ProbRelation,
    ProbTuple,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const ATTRS: [&str; 4] = ["A", "B", "C", "D"];

/// Size limits of a random instance.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_tuples: usize,
    pub max_options: usize,
    pub max_attrs: usize,
    pub max_domain: usize,
    /// Chance that an option is an IGNORED marker.
    pub ignored: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_tuples: 12,
            max_options: 3,
            max_attrs: 4,
            max_domain: 4,
            ignored: 0.1,
        }
    }
}

/// A random tuple-disjoint relation with attributes named from `ATTRS`.
pub fn random_relation<R: Rng>(rng: &mut R, lim: Limits) -> ProbRelation {
    let n_attrs = rng.random_range(2..=lim.max_attrs);
    let domain = rng.random_range(1..=lim.max_domain);
    let schema = AttributeSchema::new(ATTRS[..n_attrs].iter().copied(), None).unwrap();
    let n_tuples = rng.random_range(1..=lim.max_tuples);
    let tuples = (0..n_tuples)
        .map(|i| {
            let k = rng.random_range(1..=lim.max_options);
            let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let options = weights
                .iter()
                .map(|w| {
                    let p = w / total;
                    if k > 1 && rng.random::<f64>() < lim.ignored {
                        OptionAssignment::with_marker(p, Marker::Ignored)
                    } else {
                        let values: Vec<String> = (0..n_attrs)
                            .map(|_| format!("v{}", rng.random_range(0..domain)))
                            .collect();
                        OptionAssignment::with_values(p, values)
                    }
                })
                .collect();
            ProbTuple::new(format!("t{i:02}"), options)
        })
        .collect();
    ProbRelation::from_tuples(schema, tuples)
}

/// Random disjoint, non-empty X and Y over the relation's attributes.
pub fn random_xy<R: Rng>(rng: &mut R, relation: &ProbRelation) -> (AttrSet, AttrSet) {
    let mut attrs: Vec<String> = relation.schema().value_attributes().to_vec();
    attrs.shuffle(rng);
    let nx = rng.random_range(1..attrs.len());
    let ny = rng.random_range(1..=attrs.len() - nx);
    (
        AttrSet::new(attrs[..nx].iter().cloned()),
        AttrSet::new(attrs[nx..nx + ny].iter().cloned()),
    )
}

fn random_pattern<R: Rng>(rng: &mut R, domain: usize) -> Pattern {
    if rng.random::<f64>() < 0.5 {
        Pattern::Wildcard
    } else {
        Pattern::Const(format!("v{}", rng.random_range(0..domain)))
    }
}

/// A random tableau that passes the consistency check. With
/// `wildcard_y` every Y cell is `_`.
pub fn random_tableau<R: Rng>(rng: &mut R, x: &AttrSet, y: &AttrSet, domain: usize, wildcard_y: bool) -> PatternTableau {
    loop {
        let rows = rng.random_range(1..=3);
        let mut cells: Vec<Vec<Pattern>> = Vec::with_capacity(rows);
        for _ in 0..rows {
            let mut row = Vec::with_capacity(x.len() + y.len());
            for _ in 0..x.len() {
                row.push(random_pattern(rng, domain));
            }
            for _ in 0..y.len() {
                row.push(if wildcard_y {
                    Pattern::Wildcard
                } else {
                    random_pattern(rng, domain)
                });
            }
            cells.push(row);
        }
        let t = PatternTableau::new(x.clone(), y.clone(), cells).unwrap();
        if check_consistency(&t).is_ok() {
            return t;
        }
    }
}

/// Largest value index used, plus one.
pub fn domain_of(relation: &ProbRelation) -> usize {
    relation
        .tuples()
        .iter()
        .flat_map(|t| t.options.iter())
        .filter_map(|o| o.values())
        .flatten()
        .map(|v| v[1..].parse::<usize>().unwrap() + 1)
        .max()
        .unwrap_or(1)
}

/// A deterministic relation from string rows, keyed `r0`, `r1`, ...
pub fn deterministic(attrs: &[&str], rows: &[Vec<String>]) -> ProbRelation {
    let schema = AttributeSchema::new(attrs.iter().copied(), None).unwrap();
    let tuples = rows
        .iter()
        .enumerate()
        .map(|(i, r)| ProbTuple::new(format!("r{i}"), vec![OptionAssignment::with_values(1.0, r.clone())]))
        .collect();
    ProbRelation::from_tuples(schema, tuples)
}

/// The two-tuple Color/Type relation with four equally likely worlds.
pub fn d1() -> ProbRelation {
    let schema = AttributeSchema::new(["Color", "Type"], None).unwrap();
    let opt = |c: &str, t: &str| OptionAssignment::with_values(0.5, [c, t]);
    ProbRelation::from_tuples(
        schema,
        vec![
            ProbTuple::new("t1", vec![opt("Red", "Star"), opt("Red", "Nebula")]),
            ProbTuple::new("t2", vec![opt("Red", "Star"), opt("Blue", "Nebula")]),
        ],
    )
}

/// 50 rows (a1, b1, c1) and 50 rows (a1, b2, c_i) with distinct c_i.
pub fn counterexample() -> ProbRelation {
    let mut rows: Vec<Vec<String>> = (0..50)
        .map(|_| vec!["a1".into(), "b1".into(), "c1".into()])
        .collect();
    rows.extend((2..52).map(|i| vec!["a1".into(), "b2".into(), format!("c{i}")]));
    deterministic(&["A", "B", "C"], &rows)
}

pub fn tableau(x: &str, y: &str, rows: &[&[&str]]) -> PatternTableau {
    PatternTableau::new(
        AttrSet::parse(x),
        AttrSet::parse(y),
        rows.iter()
            .map(|r| r.iter().map(|c| Pattern::parse(c)).collect())
            .collect(),
    )
    .unwrap()
}
