//! pAFD discovery by a breadth-first walk over the attribute-set lattice.
//!
//! Each edge `X -> X ∪ {A}` tests `X ~> A`. Nodes whose specificity exceeds
//! the threshold lose their outgoing edges, and candidates already implied
//! by a very-high-confidence dependency on a subset of `X` are skipped.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AttrSet, ConfidenceReport, DependencySpec, Method, ProbRelation};
use crate::numeric::{fnv1a, mix64};
use crate::pafd_estimators::{assess_pafd_mc, assess_pafd_unioned, McConfig};
use crate::par;
use crate::specificity::{specificity, support_ti_union};

/// How candidate confidences are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MiningMethod {
    MonteCarlo,
    Unioned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinerConfig {
    pub confidence_threshold: f64,
    pub specificity_threshold: f64,
    pub high_confidence_threshold: f64,
    pub mc: McConfig,
    pub method: MiningMethod,
    /// Restricts the lattice to these attributes.
    pub target_attrs: Option<AttrSet>,
    pub top_k: Option<usize>,
    /// Keep singleton attributes with specificity 1 as determiners.
    pub include_key_like: bool,
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.8,
            specificity_threshold: 0.6,
            high_confidence_threshold: 0.99,
            mc: McConfig::default(),
            method: MiningMethod::MonteCarlo,
            target_attrs: None,
            top_k: None,
            include_key_like: false,
        }
    }
}

impl MinerConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be in (0, 1], got {v}")))
            }
        };
        unit("confidence_threshold", self.confidence_threshold)?;
        unit("specificity_threshold", self.specificity_threshold)?;
        unit("high_confidence_threshold", self.high_confidence_threshold)?;
        if self.high_confidence_threshold < self.confidence_threshold {
            return Err(Error::InvalidConfig(
                "high_confidence_threshold is below confidence_threshold".into(),
            ));
        }
        self.mc.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeNode {
    pub attrs: AttrSet,
    pub pruned: bool,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedDependency {
    pub x: AttrSet,
    pub head: String,
    pub report: ConfidenceReport,
    /// Specificity of `x`.
    pub specificity: f64,
}

impl MinedDependency {
    pub fn dependency(&self) -> DependencySpec {
        DependencySpec::pafd(self.x.clone(), AttrSet::new([self.head.clone()]))
            .expect("head is never part of the determining set")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MiningStats {
    pub levels: usize,
    pub nodes: usize,
    pub tested: usize,
    pub pruned_specificity: usize,
    pub pruned_key_like: usize,
    pub pruned_redundant: usize,
}

#[derive(Debug, Clone)]
pub struct MiningOutcome {
    pub dependencies: Vec<MinedDependency>,
    pub stats: MiningStats,
}

/// True when the node's outgoing edges are removed.
pub fn prune_specificity(node: &LatticeNode, cfg: &MinerConfig) -> bool {
    node.specificity > cfg.specificity_threshold
}

/// True when some discovered `X' ~> a` with `X' ⊆ x` already implies `x ~> a`.
pub fn prune_redundant(x: &AttrSet, a: &str, discovered: &[(AttrSet, String)]) -> bool {
    discovered.iter().any(|(d, h)| h == a && d.is_subset(x))
}

fn candidate_seed(seed: u64, x: &AttrSet, head: &str) -> u64 {
    let mut bytes = Vec::new();
    for a in x.iter() {
        bytes.extend_from_slice(a.as_bytes());
        bytes.push(0x1f);
    }
    bytes.push(0x1e);
    bytes.extend_from_slice(head.as_bytes());
    mix64(seed ^ fnv1a(bytes))
}

fn assess(relation: &ProbRelation, x: &AttrSet, head: &str, cfg: &MinerConfig) -> Result<ConfidenceReport> {
    let y = AttrSet::new([head]);
    match cfg.method {
        MiningMethod::Unioned => assess_pafd_unioned(relation, x, &y),
        MiningMethod::MonteCarlo => {
            let mc = McConfig {
                seed: candidate_seed(cfg.mc.seed, x, head),
                ..cfg.mc
            };
            assess_pafd_mc(relation, x, &y, &mc)
        }
    }
}

fn node(relation: &ProbRelation, attrs: AttrSet, cfg: &MinerConfig) -> Result<LatticeNode> {
    let s = specificity(&support_ti_union(relation, &attrs)?);
    let mut n = LatticeNode {
        attrs,
        pruned: false,
        specificity: s,
    };
    n.pruned = prune_specificity(&n, cfg);
    Ok(n)
}

/// Mines pAFDs `X ~> A` with confidence at least the threshold, sorted by
/// confidence descending, then by determining set and head.
pub fn mine(relation: &ProbRelation, cfg: &MinerConfig) -> Result<Vec<MinedDependency>> {
    Ok(mine_with_stats(relation, cfg)?.dependencies)
}

pub fn mine_with_stats(relation: &ProbRelation, cfg: &MinerConfig) -> Result<MiningOutcome> {
    cfg.validate()?;
    let schema = relation.schema();
    let universe: Vec<String> = match &cfg.target_attrs {
        Some(t) => {
            schema.resolve(t)?;
            schema
                .value_attributes()
                .iter()
                .filter(|a| t.contains(a))
                .cloned()
                .collect()
        }
        None => schema.value_attributes().to_vec(),
    };
    let mut stats = MiningStats::default();
    let mut found = Vec::new();
    if universe.len() < 2 || relation.is_empty() {
        return Ok(MiningOutcome {
            dependencies: found,
            stats,
        });
    }

    let mut level: Vec<LatticeNode> = Vec::new();
    for a in &universe {
        let mut n = node(relation, AttrSet::new([a.clone()]), cfg)?;
        if !cfg.include_key_like && n.specificity >= 1.0 - 1e-12 && !n.pruned {
            n.pruned = true;
            stats.pruned_key_like += 1;
        }
        level.push(n);
    }
    let mut discovered: Vec<(AttrSet, String)> = Vec::new();

    while !level.is_empty() {
        stats.levels += 1;
        stats.nodes += level.len();
        stats.pruned_specificity += level.iter().filter(|n| prune_specificity(n, cfg)).count();
        let mut candidates: Vec<(&LatticeNode, &String)> = Vec::new();
        for n in level.iter().filter(|n| !n.pruned) {
            for a in universe.iter().filter(|a| !n.attrs.contains(a)) {
                if prune_redundant(&n.attrs, a, &discovered) {
                    stats.pruned_redundant += 1;
                } else {
                    candidates.push((n, a));
                }
            }
        }
        stats.tested += candidates.len();
        log::debug!("level {}: {} nodes, {} candidates", stats.levels, level.len(), candidates.len());
        let reports = par::map_slice(&candidates, |(n, a)| assess(relation, &n.attrs, a, cfg));
        // Barrier: discoveries of this level only prune the next ones.
        for ((n, a), report) in candidates.iter().zip(reports) {
            let report = report?;
            if report.value() >= cfg.high_confidence_threshold {
                discovered.push((n.attrs.clone(), (*a).clone()));
            }
            if report.value() >= cfg.confidence_threshold {
                found.push(MinedDependency {
                    x: n.attrs.clone(),
                    head: (*a).clone(),
                    report,
                    specificity: n.specificity,
                });
            }
        }

        let mut next: BTreeSet<Vec<String>> = BTreeSet::new();
        for n in level.iter().filter(|n| !n.pruned) {
            for a in universe.iter().filter(|a| !n.attrs.contains(a)) {
                // Schema order keeps each set's representation unique.
                let grown = n.attrs.with(a);
                let ordered: Vec<String> = universe
                    .iter()
                    .filter(|u| grown.contains(u))
                    .cloned()
                    .collect();
                if ordered.len() < universe.len() {
                    next.insert(ordered);
                }
            }
        }
        level = next
            .into_iter()
            .map(|attrs| node(relation, AttrSet::new(attrs), cfg))
            .collect::<Result<_>>()?;
    }

    found.sort_by(|a, b| {
        b.report
            .value()
            .total_cmp(&a.report.value())
            .then_with(|| a.x.as_slice().cmp(b.x.as_slice()))
            .then_with(|| a.head.cmp(&b.head))
    });
    if let Some(k) = cfg.top_k {
        found.truncate(k);
    }
    Ok(MiningOutcome {
        dependencies: found,
        stats,
    })
}

/// Method recorded on reports produced under `method`.
pub fn report_method(method: MiningMethod) -> Method {
    match method {
        MiningMethod::MonteCarlo => Method::MonteCarlo,
        MiningMethod::Unioned => Method::Unioned,
    }
}
