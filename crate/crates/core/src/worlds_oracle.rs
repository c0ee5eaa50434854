//! Brute-force ground truth: enumerate every possible world of a small
//! relation and evaluate the deterministic dependency in each one.
//!
//! Nothing here shares code with the pruned or sampling evaluators; the
//! oracle works directly on attribute names and string values.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{
    AttrSet, AttributeSchema, ConfidenceReport, DependencyKind, DependencySpec, Marker, Method,
    OptionContent, PatternTableau, ProbRelation, RelationKind,
};
use crate::numeric::CompensatedSum;
use crate::par;

/// Default ceiling on the number of enumerated worlds.
pub const DEFAULT_WORLD_CAP: u128 = 1 << 24;

const CHUNK: u128 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldRow<'a> {
    pub key: &'a str,
    pub values: &'a [String],
}

/// One deterministic instance of a relation and its probability. Tuples
/// whose chosen option is a marker (or that are absent) contribute no row.
#[derive(Debug, Clone)]
pub struct DeterministicWorld<'a> {
    schema: &'a AttributeSchema,
    pub rows: Vec<WorldRow<'a>>,
    pub prob: f64,
}

impl<'a> DeterministicWorld<'a> {
    pub fn new(schema: &'a AttributeSchema, rows: Vec<WorldRow<'a>>, prob: f64) -> Self {
        Self { schema, rows, prob }
    }

    pub fn schema(&self) -> &'a AttributeSchema {
        self.schema
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn value_of(&self, row: &WorldRow<'a>, attr: &str) -> Option<&'a str> {
        self.schema
            .value_index(attr)
            .and_then(|i| row.values.get(i))
            .map(String::as_str)
    }

    fn project(&self, row: &WorldRow<'a>, attrs: &AttrSet) -> Vec<Option<&'a str>> {
        attrs.iter().map(|a| self.value_of(row, a)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Choice<'a> {
    p: f64,
    row: Option<&'a [String]>,
}

fn choice_table(relation: &ProbRelation) -> Vec<Vec<Choice<'_>>> {
    relation
        .tuples()
        .iter()
        .map(|t| {
            let mut choices: Vec<Choice<'_>> = t
                .options
                .iter()
                .map(|o| Choice {
                    p: o.p,
                    row: match &o.content {
                        OptionContent::Values(v) => Some(v.as_slice()),
                        OptionContent::Marker(Marker::Ignored | Marker::Violates) => None,
                    },
                })
                .collect();
            let total = t.total_probability();
            if relation.kind() == RelationKind::Ti && total < 1.0 {
                choices.push(Choice {
                    p: 1.0 - total,
                    row: None,
                });
            }
            choices
        })
        .collect()
}

/// Iterator over all possible worlds, first tuple varying fastest.
pub struct Worlds<'a> {
    relation: &'a ProbRelation,
    table: Vec<Vec<Choice<'a>>>,
    digits: Vec<usize>,
    next: u128,
    end: u128,
}

impl<'a> Worlds<'a> {
    fn starting_at(relation: &'a ProbRelation, start: u128, end: u128) -> Self {
        let table = choice_table(relation);
        let mut digits = vec![0; table.len()];
        let mut rest = start;
        for (d, choices) in digits.iter_mut().zip(&table) {
            let radix = choices.len() as u128;
            *d = (rest % radix) as usize;
            rest /= radix;
        }
        Self {
            relation,
            table,
            digits,
            next: start,
            end,
        }
    }

    fn current(&self) -> DeterministicWorld<'a> {
        let mut prob = 1.0;
        let mut rows = Vec::with_capacity(self.table.len());
        for ((t, choices), &d) in self.relation.tuples().iter().zip(&self.table).zip(&self.digits) {
            let c = choices[d];
            prob *= c.p;
            if let Some(values) = c.row {
                rows.push(WorldRow {
                    key: &t.key,
                    values,
                });
            }
        }
        DeterministicWorld::new(self.relation.schema(), rows, prob)
    }

    fn advance(&mut self) {
        for (d, choices) in self.digits.iter_mut().zip(&self.table) {
            *d += 1;
            if *d < choices.len() {
                return;
            }
            *d = 0;
        }
    }
}

impl<'a> Iterator for Worlds<'a> {
    type Item = DeterministicWorld<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let w = self.current();
        self.next += 1;
        self.advance();
        Some(w)
    }
}

/// Enumerates the possible worlds of `relation`, refusing when there are
/// more than `cap` of them. Tuple-independent relations get an explicit
/// absence choice for each tuple with p < 1.
pub fn enumerate_worlds(relation: &ProbRelation, cap: u128) -> Result<Worlds<'_>> {
    let count = relation.world_count();
    if count > cap {
        return Err(Error::TooManyWorlds { count, cap });
    }
    if relation.tuples().iter().any(|t| t.options.is_empty()) {
        return Err(Error::Validation(relation.validate()));
    }
    Ok(Worlds::starting_at(relation, 0, count))
}

/// Whether no two rows agree on `x` and differ on `y`.
pub fn fd_holds(world: &DeterministicWorld<'_>, x: &AttrSet, y: &AttrSet) -> bool {
    let mut seen: HashMap<Vec<Option<&str>>, Vec<Option<&str>>> = HashMap::new();
    for row in &world.rows {
        let yv = world.project(row, y);
        match seen.entry(world.project(row, x)) {
            std::collections::hash_map::Entry::Occupied(e) => {
                if *e.get() != yv {
                    return false;
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(yv);
            }
        }
    }
    true
}

/// One minus the smallest fraction of rows whose removal makes `x -> y`
/// hold; 1 for an empty world.
pub fn afd_confidence(world: &DeterministicWorld<'_>, x: &AttrSet, y: &AttrSet) -> f64 {
    if world.rows.is_empty() {
        return 1.0;
    }
    let mut counts: HashMap<Vec<Option<&str>>, HashMap<Vec<Option<&str>>, usize>> = HashMap::new();
    for row in &world.rows {
        *counts
            .entry(world.project(row, x))
            .or_default()
            .entry(world.project(row, y))
            .or_default() += 1;
    }
    let kept: usize = counts
        .values()
        .map(|ys| ys.values().copied().max().unwrap_or(0))
        .sum();
    kept as f64 / world.rows.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowStatus {
    Unselected,
    Matching,
    Violating,
}

fn row_status(
    world: &DeterministicWorld<'_>,
    row: &WorldRow<'_>,
    tableau: &PatternTableau,
) -> RowStatus {
    let x: Vec<Option<&str>> = tableau.x().iter().map(|a| world.value_of(row, a)).collect();
    let y: Vec<Option<&str>> = tableau.y().iter().map(|a| world.value_of(row, a)).collect();
    let fits = |pats: &[crate::model::Pattern], vals: &[Option<&str>]| {
        pats.iter()
            .zip(vals)
            .all(|(p, v)| v.is_some_and(|v| p.matches(v)))
    };
    let mut selected = false;
    for i in 0..tableau.rows().len() {
        if fits(tableau.x_patterns(i), &x) {
            selected = true;
            if !fits(tableau.y_patterns(i), &y) {
                return RowStatus::Violating;
            }
        }
    }
    if selected {
        RowStatus::Matching
    } else {
        RowStatus::Unselected
    }
}

/// Conditional FD check: no row matching a pattern on X may contradict that
/// pattern's Y constants, and the FD must hold among the matching rows.
pub fn cfd_holds(
    world: &DeterministicWorld<'_>,
    x: &AttrSet,
    y: &AttrSet,
    tableau: &PatternTableau,
) -> bool {
    let mut matching = Vec::new();
    for row in &world.rows {
        match row_status(world, row, tableau) {
            RowStatus::Violating => return false,
            RowStatus::Matching => matching.push(*row),
            RowStatus::Unselected => {}
        }
    }
    let sub = DeterministicWorld::new(world.schema, matching, world.prob);
    fd_holds(&sub, x, y)
}

/// AFD confidence over the rows that match the tableau on X ∪ Y. Rows that
/// match on X but contradict a Y constant are dropped with the unselected
/// ones; an empty selection scores 1.
pub fn cafd_confidence(
    world: &DeterministicWorld<'_>,
    x: &AttrSet,
    y: &AttrSet,
    tableau: &PatternTableau,
) -> f64 {
    let matching: Vec<WorldRow<'_>> = world
        .rows
        .iter()
        .filter(|r| row_status(world, r, tableau) == RowStatus::Matching)
        .copied()
        .collect();
    let sub = DeterministicWorld::new(world.schema, matching, world.prob);
    afd_confidence(&sub, x, y)
}

/// Exact confidence of any dependency kind by summing over all worlds.
pub fn oracle_confidence(
    relation: &ProbRelation,
    dep: &DependencySpec,
    cap: u128,
) -> Result<ConfidenceReport> {
    dep.check_schema(relation.schema())?;
    let total = enumerate_worlds(relation, cap)?.end;
    let score = |w: &DeterministicWorld<'_>| -> f64 {
        match (dep.kind, &dep.tableau) {
            (DependencyKind::Pfd, _) => f64::from(u8::from(fd_holds(w, &dep.x, &dep.y))),
            (DependencyKind::Pafd, _) => afd_confidence(w, &dep.x, &dep.y),
            (DependencyKind::Cpfd, Some(t)) => f64::from(u8::from(cfd_holds(w, &dep.x, &dep.y, t))),
            (DependencyKind::Cpafd, Some(t)) => cafd_confidence(w, &dep.x, &dep.y, t),
            (_, None) => unreachable!("conditional dependency without tableau"),
        }
    };
    let chunks = total.div_ceil(CHUNK) as usize;
    let partial = par::map_range(0..chunks, |c| {
        let start = c as u128 * CHUNK;
        let end = (start + CHUNK).min(total);
        Worlds::starting_at(relation, start, end)
            .map(|w| w.prob * score(&w))
            .collect::<CompensatedSum>()
    });
    let mut acc = CompensatedSum::new();
    partial.iter().for_each(|p| acc.merge(p));
    Ok(ConfidenceReport::exact(Method::Oracle, acc.value()))
}

/// Total probability of all enumerated worlds.
pub fn total_world_probability(relation: &ProbRelation, cap: u128) -> Result<f64> {
    Ok(enumerate_worlds(relation, cap)?
        .map(|w| w.prob)
        .collect::<CompensatedSum>()
        .value())
}
