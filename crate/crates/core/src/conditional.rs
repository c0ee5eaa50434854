//! Conditional dependencies: options are rewritten against a pattern tableau
//! and the result is handed to the pFD search or the Monte Carlo estimator.

use crate::error::{Error, Result};
use crate::model::{
    AttrSet, ConfidenceReport, Marker, OptionAssignment, OptionContent, Pattern, PatternTableau,
    ProbRelation, ProbTuple,
};
use crate::pafd_estimators::{assess_pafd_mc, McConfig};
use crate::pfd_exact::assess_pfd;

/// An option replaced by a marker during tableau matching.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkRecord {
    pub tuple: usize,
    pub option: usize,
    pub marker: Marker,
    pub original: OptionAssignment,
}

/// A relation whose options were rewritten against a tableau.
#[derive(Debug, Clone)]
pub struct MarkedRelation {
    pub relation: ProbRelation,
    pub marks: Vec<MarkRecord>,
}

impl MarkedRelation {
    pub fn count(&self, marker: Marker) -> usize {
        self.marks.iter().filter(|m| m.marker == marker).count()
    }
}

fn fits(patterns: &[Pattern], values: &[&str]) -> bool {
    patterns.iter().zip(values).all(|(p, v)| p.matches(v))
}

/// Replaces each option that matches no tableau row on X with IGNORED, and
/// each option that matches a row on X but breaks one of its Y constants
/// with VIOLATES. Probabilities are left untouched.
pub fn mark_tableau(
    relation: &ProbRelation,
    x: &AttrSet,
    y: &AttrSet,
    tableau: &PatternTableau,
) -> Result<MarkedRelation> {
    let tableau = tableau.aligned_to(x, y)?;
    let schema = relation.schema();
    let x_idx = schema.resolve(x)?;
    let y_idx = schema.resolve(y)?;
    let mut marks = Vec::new();
    let tuples = relation
        .tuples()
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let options = t
                .options
                .iter()
                .enumerate()
                .map(|(oi, o)| {
                    let (Some(xv), Some(yv)) = (o.project(&x_idx), o.project(&y_idx)) else {
                        return o.clone();
                    };
                    let mut selected = false;
                    let mut violates = false;
                    for r in 0..tableau.rows().len() {
                        if fits(tableau.x_patterns(r), &xv) {
                            selected = true;
                            if !fits(tableau.y_patterns(r), &yv) {
                                violates = true;
                                break;
                            }
                        }
                    }
                    let marker = match (selected, violates) {
                        (false, _) => Marker::Ignored,
                        (true, true) => Marker::Violates,
                        (true, false) => return o.clone(),
                    };
                    marks.push(MarkRecord {
                        tuple: ti,
                        option: oi,
                        marker,
                        original: o.clone(),
                    });
                    OptionAssignment {
                        p: o.p,
                        content: OptionContent::Marker(marker),
                    }
                })
                .collect();
            ProbTuple::new(t.key.clone(), options)
        })
        .collect();
    Ok(MarkedRelation {
        relation: ProbRelation::new(schema.clone(), tuples, relation.kind()),
        marks,
    })
}

fn unify(a: &[Pattern], b: &[Pattern]) -> bool {
    a.iter().zip(b).all(|pair| match pair {
        (Pattern::Const(p), Pattern::Const(q)) => p == q,
        _ => true,
    })
}

fn clash(a: &[Pattern], b: &[Pattern]) -> bool {
    a.iter().zip(b).any(|pair| match pair {
        (Pattern::Const(p), Pattern::Const(q)) => p != q,
        _ => false,
    })
}

/// Syntactic consistency: no two rows may accept a common X value while
/// demanding different constants for the same Y attribute.
pub fn check_consistency(tableau: &PatternTableau) -> Result<()> {
    let n = tableau.rows().len();
    for i in 0..n {
        for j in i + 1..n {
            if unify(tableau.x_patterns(i), tableau.x_patterns(j))
                && clash(tableau.y_patterns(i), tableau.y_patterns(j))
            {
                return Err(Error::InconsistentTableau { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// Exact confidence of the CpFD `(x -> y, tableau)`.
pub fn assess_cpfd(
    relation: &ProbRelation,
    x: &AttrSet,
    y: &AttrSet,
    tableau: &PatternTableau,
) -> Result<ConfidenceReport> {
    check_consistency(tableau)?;
    let marked = mark_tableau(relation, x, y, tableau)?;
    assess_pfd(&marked.relation, x, y)
}

/// Monte Carlo estimate of the CpAFD `(x ~> y, tableau)`. Marked options
/// contribute no row to a sampled world.
pub fn assess_cpafd(
    relation: &ProbRelation,
    x: &AttrSet,
    y: &AttrSet,
    tableau: &PatternTableau,
    cfg: &McConfig,
) -> Result<ConfidenceReport> {
    let marked = mark_tableau(relation, x, y, tableau)?;
    assess_pafd_mc(&marked.relation, x, y, cfg)
}
