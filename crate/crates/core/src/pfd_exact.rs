//! Exact pFD confidence by branch-and-prune over tuple options.
//!
//! The search keeps a map of association rules (X value -> Y value) that the
//! options chosen so far imply. An option that contradicts the map kills its
//! branch; a tuple whose compatible options cannot change what later tuples
//! see is folded in without branching. The tree therefore grows with the
//! number of distinct X values, not with the number of tuples.

use crate::error::{Error, Result};
use crate::model::{
    AttrSet, Cell, ConfidenceReport, Method, ProbRelation, Projection, RelationKind,
};
use crate::numeric::CompensatedSum;
use crate::par;

/// Branch weights below this are dropped (counted in [`SearchStats::underflow`]).
pub const UNDERFLOW_THRESHOLD: f64 = 1e-300;

/// Nodes this close to the root fan their children out to the thread pool.
const PARALLEL_DEPTH: usize = 3;

const UNBOUND: u32 = u32::MAX;

/// Association rules implied by the current branch; at most one Y per X.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMap {
    bindings: Vec<u32>,
    len: usize,
}

impl RuleMap {
    pub fn new(x_cardinality: usize) -> Self {
        Self {
            bindings: vec![UNBOUND; x_cardinality],
            len: 0,
        }
    }

    pub fn get(&self, x: u32) -> Option<u32> {
        match self.bindings[x as usize] {
            UNBOUND => None,
            y => Some(y),
        }
    }

    /// Adds `x -> y`. Returns false, leaving the map unchanged, if `x` is
    /// already bound to a different value.
    pub fn bind(&mut self, x: u32, y: u32) -> bool {
        match self.get(x) {
            Some(existing) => existing == y,
            None => {
                self.bindings[x as usize] = y;
                self.len += 1;
                true
            }
        }
    }

    pub fn unbind(&mut self, x: u32) {
        if self.get(x).is_some() {
            self.bindings[x as usize] = UNBOUND;
            self.len -= 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Whether choosing an option with `cell` is consistent with `rules`.
pub fn option_compatible(cell: Cell, rules: &RuleMap) -> bool {
    match cell {
        Cell::Ignored => true,
        Cell::Violates => false,
        Cell::Row { x, y } => rules.get(x).is_none_or(|bound| bound == y),
    }
}

/// Snapshot of one node of the search tree.
#[derive(Debug, Clone)]
pub struct SearchState {
    /// Unprocessed tuple indices, kept in key order.
    pub remaining: Vec<usize>,
    pub rules: RuleMap,
    pub acc_prob: f64,
}

impl SearchState {
    pub fn initial(proj: &Projection) -> Self {
        let mut remaining: Vec<usize> = (0..proj.len()).collect();
        remaining.sort_by(|&a, &b| proj.key(a).cmp(proj.key(b)));
        Self {
            remaining,
            rules: RuleMap::new(proj.x_cardinality()),
            acc_prob: 1.0,
        }
    }
}

/// Why a tuple was picked next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TupleClass {
    /// Every option is compatible and none can constrain a later tuple.
    Skippable,
    /// No option is compatible: the branch contributes nothing.
    NoCompatible,
    /// Exactly one compatible option: no branching.
    SingleCompatible,
    /// The tuple with the fewest compatible options.
    Branching { compatible: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleChoice {
    pub tuple: usize,
    pub class: TupleClass,
}

const MIXED: u32 = u32::MAX - 1;

/// Per X value: how many remaining tuples mention it, and its Y value if
/// all remaining options with that X agree on one.
struct XUsage {
    tuples: Vec<u32>,
    y: Vec<u32>,
}

fn x_usage(remaining: &[usize], proj: &Projection) -> XUsage {
    let n = proj.x_cardinality();
    let mut usage = XUsage {
        tuples: vec![0; n],
        y: vec![UNBOUND; n],
    };
    let mut last_seen = vec![usize::MAX; n];
    for &t in remaining {
        for o in proj.options(t) {
            if let Cell::Row { x, y } = o.cell {
                let xi = x as usize;
                if last_seen[xi] != t {
                    last_seen[xi] = t;
                    usage.tuples[xi] += 1;
                }
                usage.y[xi] = match usage.y[xi] {
                    UNBOUND => y,
                    same if same == y => y,
                    _ => MIXED,
                };
            }
        }
    }
    usage
}

/// An option is neutral when taking it leaves every other remaining tuple's
/// compatibility unchanged: it is ignored, repeats a rule, or binds an X
/// value that no other remaining tuple mentions or that every remaining
/// option maps to the same Y.
fn is_neutral(cell: Cell, rules: &RuleMap, usage: &XUsage) -> bool {
    match cell {
        Cell::Ignored => true,
        Cell::Violates => false,
        Cell::Row { x, y } => match rules.get(x) {
            Some(bound) => bound == y,
            None => usage.tuples[x as usize] <= 1 || usage.y[x as usize] == y,
        },
    }
}

#[derive(Debug, Clone, Copy)]
struct TupleSummary {
    options: usize,
    compatible: usize,
    compatible_p: f64,
    neutral: usize,
}

fn summarize(tuple: usize, proj: &Projection, rules: &RuleMap, occ: &XUsage) -> TupleSummary {
    let mut s = TupleSummary {
        options: 0,
        compatible: 0,
        compatible_p: 0.0,
        neutral: 0,
    };
    for o in proj.options(tuple) {
        s.options += 1;
        if option_compatible(o.cell, rules) {
            s.compatible += 1;
            s.compatible_p += o.p;
            if is_neutral(o.cell, rules, occ) {
                s.neutral += 1;
            }
        }
    }
    s
}

/// Picks the next tuple to expand, in priority order: skippable, no
/// compatible option, a single compatible option, else fewest compatible
/// options. Ties go to the smallest key.
pub fn choose_best_remaining_tuple(state: &SearchState, proj: &Projection) -> Option<TupleChoice> {
    let occ = x_usage(&state.remaining, proj);
    let summaries: Vec<(usize, TupleSummary)> = state
        .remaining
        .iter()
        .map(|&t| (t, summarize(t, proj, &state.rules, &occ)))
        .collect();
    let first = |pred: &dyn Fn(&TupleSummary) -> bool| {
        summaries.iter().find(|(_, s)| pred(s)).map(|(t, _)| *t)
    };
    if let Some(tuple) = first(&|s| s.compatible == s.options && s.neutral == s.options) {
        return Some(TupleChoice {
            tuple,
            class: TupleClass::Skippable,
        });
    }
    if let Some(tuple) = first(&|s| s.compatible == 0) {
        return Some(TupleChoice {
            tuple,
            class: TupleClass::NoCompatible,
        });
    }
    if let Some(tuple) = first(&|s| s.compatible == 1) {
        return Some(TupleChoice {
            tuple,
            class: TupleClass::SingleCompatible,
        });
    }
    summaries
        .iter()
        .min_by_key(|(_, s)| s.compatible)
        .map(|&(tuple, s)| TupleChoice {
            tuple,
            class: TupleClass::Branching {
                compatible: s.compatible,
            },
        })
}

/// Search knobs; the defaults give the fully pruned search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PfdOptions {
    /// Fold in tuples whose compatible options are all neutral without
    /// branching. Turning this off leaves only dead-branch pruning.
    pub skip_neutral: bool,
}

impl Default for PfdOptions {
    fn default() -> Self {
        Self { skip_neutral: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub leaves: u64,
    pub dead_branches: u64,
    pub underflow: u64,
}

impl SearchStats {
    fn merge(&mut self, other: &SearchStats) {
        self.nodes += other.nodes;
        self.leaves += other.leaves;
        self.dead_branches += other.dead_branches;
        self.underflow += other.underflow;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PfdOutcome {
    pub report: ConfidenceReport,
    pub stats: SearchStats,
}

struct Frame {
    remaining: Vec<usize>,
    rules: RuleMap,
    weight: f64,
}

enum Expansion {
    Leaf(f64),
    Dead,
    Underflow,
    Children(Vec<Frame>),
}

/// Processes every non-branching tuple of a node at once, then splits on
/// the best remaining tuple.
fn expand(frame: Frame, proj: &Projection, opts: PfdOptions) -> Expansion {
    let Frame {
        remaining,
        rules,
        mut weight,
    } = frame;
    let occ = if opts.skip_neutral {
        x_usage(&remaining, proj)
    } else {
        XUsage {
            tuples: Vec::new(),
            y: Vec::new(),
        }
    };
    let mut survivors = Vec::with_capacity(remaining.len());
    let mut pick: Option<(usize, usize)> = None;
    for &t in &remaining {
        let s = if opts.skip_neutral {
            summarize(t, proj, &rules, &occ)
        } else {
            let mut s = TupleSummary {
                options: 0,
                compatible: 0,
                compatible_p: 0.0,
                neutral: 0,
            };
            for o in proj.options(t) {
                s.options += 1;
                if option_compatible(o.cell, &rules) {
                    s.compatible += 1;
                    s.compatible_p += o.p;
                }
            }
            s
        };
        if s.compatible == 0 {
            return Expansion::Dead;
        }
        if opts.skip_neutral && s.neutral == s.compatible {
            weight *= s.compatible_p;
            continue;
        }
        if pick.is_none_or(|(_, best)| s.compatible < best) {
            pick = Some((survivors.len(), s.compatible));
        }
        survivors.push(t);
    }
    if weight < UNDERFLOW_THRESHOLD {
        return Expansion::Underflow;
    }
    let Some((pos, _)) = pick else {
        return Expansion::Leaf(weight);
    };
    let tuple = survivors.remove(pos);

    // Options with the same effect on the rule map share one child.
    let mut groups: Vec<(Option<(u32, u32)>, f64)> = Vec::new();
    for o in proj.options(tuple) {
        if !option_compatible(o.cell, &rules) {
            continue;
        }
        let binding = match o.cell {
            Cell::Row { x, y } if rules.get(x).is_none() => {
                if opts.skip_neutral && is_neutral(o.cell, &rules, &occ) {
                    None
                } else {
                    Some((x, y))
                }
            }
            _ => None,
        };
        match groups.iter_mut().find(|(b, _)| *b == binding) {
            Some((_, p)) => *p += o.p,
            None => groups.push((binding, o.p)),
        }
    }
    let last = groups.len() - 1;
    let mut survivors = Some(survivors);
    let mut rules = Some(rules);
    let children = groups
        .into_iter()
        .enumerate()
        .map(|(i, (binding, p))| {
            let (remaining, mut rules) = if i == last {
                (survivors.take().unwrap(), rules.take().unwrap())
            } else {
                (
                    survivors.as_ref().unwrap().clone(),
                    rules.as_ref().unwrap().clone(),
                )
            };
            if let Some((x, y)) = binding {
                rules.bind(x, y);
            }
            Frame {
                remaining,
                rules,
                weight: weight * p,
            }
        })
        .collect();
    Expansion::Children(children)
}

fn solve_sequential(root: Frame, proj: &Projection, opts: PfdOptions) -> (CompensatedSum, SearchStats) {
    let mut acc = CompensatedSum::new();
    let mut stats = SearchStats::default();
    let mut stack = vec![root];
    while let Some(frame) = stack.pop() {
        stats.nodes += 1;
        match expand(frame, proj, opts) {
            Expansion::Leaf(w) => {
                stats.leaves += 1;
                acc.add(w);
            }
            Expansion::Dead => stats.dead_branches += 1,
            Expansion::Underflow => stats.underflow += 1,
            Expansion::Children(children) => stack.extend(children.into_iter().rev()),
        }
    }
    (acc, stats)
}

fn solve(frame: Frame, depth: usize, proj: &Projection, opts: PfdOptions) -> (CompensatedSum, SearchStats) {
    if depth >= PARALLEL_DEPTH {
        return solve_sequential(frame, proj, opts);
    }
    let mut stats = SearchStats {
        nodes: 1,
        ..SearchStats::default()
    };
    let mut acc = CompensatedSum::new();
    let mut frame = frame;
    loop {
        match expand(frame, proj, opts) {
            Expansion::Leaf(w) => {
                stats.leaves += 1;
                acc.add(w);
                return (acc, stats);
            }
            Expansion::Dead => {
                stats.dead_branches += 1;
                return (acc, stats);
            }
            Expansion::Underflow => {
                stats.underflow += 1;
                return (acc, stats);
            }
            Expansion::Children(mut children) if children.len() == 1 => {
                stats.nodes += 1;
                frame = children.pop().unwrap();
            }
            Expansion::Children(children) => {
                // Children combine in their original order, so the sum is
                // the same however the pool schedules them.
                let parts = par::into_map(children, |c| solve(c, depth + 1, proj, opts));
                for (s, st) in &parts {
                    acc.merge(s);
                    stats.merge(st);
                }
                return (acc, stats);
            }
        }
    }
}

/// Runs the search on an already projected relation.
pub fn assess_projection(proj: &Projection, opts: PfdOptions) -> PfdOutcome {
    let state = SearchState::initial(proj);
    let root = Frame {
        remaining: state.remaining,
        rules: state.rules,
        weight: state.acc_prob,
    };
    let (acc, stats) = solve(root, 0, proj, opts);
    PfdOutcome {
        report: ConfidenceReport::exact(Method::ExactPruned, acc.value()),
        stats,
    }
}

/// Exact confidence of the pFD `x -> y`.
pub fn assess_pfd(relation: &ProbRelation, x: &AttrSet, y: &AttrSet) -> Result<ConfidenceReport> {
    Ok(assess_pfd_with(relation, x, y, PfdOptions::default())?.report)
}

pub fn assess_pfd_with(
    relation: &ProbRelation,
    x: &AttrSet,
    y: &AttrSet,
    opts: PfdOptions,
) -> Result<PfdOutcome> {
    if relation.kind() == RelationKind::Ti {
        return Err(Error::NotTupleDisjoint);
    }
    let proj = Projection::new(relation, x, y)?;
    Ok(assess_projection(&proj, opts))
}
