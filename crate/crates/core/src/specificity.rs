//! Support and specificity (normalized entropy) of attribute sets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{AttrSet, ProbRelation};
use crate::numeric::CompensatedSum;
use crate::worlds_oracle::{enumerate_worlds, DeterministicWorld};

/// Normalized support of each composite value of an attribute set.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportTable {
    pub supports: BTreeMap<Vec<String>, f64>,
    /// Mass before normalization.
    pub total: f64,
    /// Count used to normalize the entropy.
    pub n_effective: f64,
}

impl SupportTable {
    fn from_masses(masses: BTreeMap<Vec<String>, CompensatedSum>, n_effective: f64) -> Result<Self> {
        let total: f64 = masses.values().map(CompensatedSum::value).collect::<CompensatedSum>().value();
        if total <= 0.0 {
            return Err(Error::UndefinedSupport("no probability mass"));
        }
        let supports = masses
            .into_iter()
            .map(|(k, m)| (k, m.value() / total))
            .collect();
        Ok(Self {
            supports,
            total,
            n_effective,
        })
    }

    pub fn get(&self, value: &[&str]) -> Option<f64> {
        let key: Vec<String> = value.iter().map(|s| s.to_string()).collect();
        self.supports.get(&key).copied()
    }
}

/// count / N for each composite value of `attrs` in one world.
pub fn support_deterministic(world: &DeterministicWorld<'_>, attrs: &AttrSet) -> Result<SupportTable> {
    if world.is_empty() {
        return Err(Error::UndefinedSupport("empty world"));
    }
    let idx = world.schema().resolve(attrs)?;
    let mut masses: BTreeMap<Vec<String>, CompensatedSum> = BTreeMap::new();
    for row in &world.rows {
        let key = idx.iter().map(|&i| row.values[i].clone()).collect();
        masses.entry(key).or_default().add(1.0);
    }
    SupportTable::from_masses(masses, world.len() as f64)
}

/// Supports over the union of all options, each weighted by its
/// probability. Markers carry no mass. N is the number of tuples.
pub fn support_ti_union(relation: &ProbRelation, attrs: &AttrSet) -> Result<SupportTable> {
    let idx = relation.schema().resolve(attrs)?;
    let mut masses: BTreeMap<Vec<String>, CompensatedSum> = BTreeMap::new();
    for t in relation.tuples() {
        for o in &t.options {
            if let Some(v) = o.project(&idx) {
                masses
                    .entry(v.into_iter().map(str::to_string).collect())
                    .or_default()
                    .add(o.p);
            }
        }
    }
    SupportTable::from_masses(masses, relation.len() as f64)
}

/// −Σ s·log2 s / log2 N, clamped to [0, 1]; 0 when N ≤ 1.
pub fn specificity(table: &SupportTable) -> f64 {
    if table.n_effective <= 1.0 {
        return 0.0;
    }
    let entropy: CompensatedSum = table
        .supports
        .values()
        .filter(|&&s| s > 0.0)
        .map(|&s| -s * s.log2())
        .collect();
    (entropy.value() / table.n_effective.log2()).clamp(0.0, 1.0)
}

/// Expected specificity over all worlds. Exponential; for tests on small
/// relations. Empty worlds score 0.
pub fn expected_specificity_oracle(relation: &ProbRelation, attrs: &AttrSet, cap: u128) -> Result<f64> {
    relation.schema().resolve(attrs)?;
    let mut acc = CompensatedSum::new();
    for w in enumerate_worlds(relation, cap)? {
        if !w.is_empty() {
            acc.add(w.prob * specificity(&support_deterministic(&w, attrs)?));
        }
    }
    Ok(acc.value())
}
