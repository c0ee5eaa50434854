//! pAFD confidence estimators: the deterministic (flattened) approximation,
//! the unioned approximation, and Monte Carlo sampling of worlds.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    AttrSet, Cell, ConfidenceReport, Method, ProbRelation, Projection, RelationKind,
};
use crate::numeric::{CompensatedSum, RunningMoments};
use crate::par;
use crate::worlds_oracle::{DeterministicWorld, WorldRow};

/// z-score of a two-sided 95% interval.
const Z95: f64 = 1.96;

const DENSE_LIMIT: usize = 1 << 22;

/// Stopping rule and seeding for the Monte Carlo estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub seed: u64,
    pub min_samples: u64,
    pub max_samples: u64,
    /// Target half-width of the 95% interval, also the stability bound.
    pub epsilon: f64,
    /// The running mean must stay within `epsilon` over this many samples.
    pub window: u64,
    /// Samples drawn between stopping checks. Affects speed only.
    pub batch_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            min_samples: 100,
            max_samples: 100_000,
            epsilon: 0.005,
            window: 50,
            batch_size: 64,
        }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Exactly `samples` samples, no early stop.
    pub fn fixed(seed: u64, samples: u64) -> Self {
        Self {
            seed,
            min_samples: samples,
            max_samples: samples,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_samples == 0 || self.min_samples > self.max_samples {
            return Err(Error::InvalidConfig(format!(
                "need 0 < min_samples ({}) <= max_samples ({})",
                self.min_samples, self.max_samples
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Per-world AFD counter over interned (x, y) ids. Reusable across worlds.
pub(crate) struct AfdCounter {
    y_card: usize,
    dense: Vec<u32>,
    sparse: std::collections::HashMap<(u32, u32), u32>,
    best: Vec<u32>,
    touched: Vec<usize>,
    touched_x: Vec<u32>,
    rows: u64,
    kept: u64,
}

impl AfdCounter {
    pub(crate) fn new(proj: &Projection) -> Self {
        let x_card = proj.x_cardinality();
        let y_card = proj.y_cardinality().max(1);
        let use_dense = x_card.saturating_mul(y_card) <= DENSE_LIMIT;
        Self {
            y_card,
            dense: if use_dense { vec![0; x_card * y_card] } else { Vec::new() },
            sparse: Default::default(),
            best: vec![0; x_card],
            touched: Vec::new(),
            touched_x: Vec::new(),
            rows: 0,
            kept: 0,
        }
    }

    pub(crate) fn push(&mut self, x: u32, y: u32) {
        self.rows += 1;
        let count = if self.dense.is_empty() {
            let c = self.sparse.entry((x, y)).or_insert(0);
            *c += 1;
            *c
        } else {
            let i = x as usize * self.y_card + y as usize;
            if self.dense[i] == 0 {
                self.touched.push(i);
            }
            self.dense[i] += 1;
            self.dense[i]
        };
        let b = &mut self.best[x as usize];
        if *b == 0 {
            self.touched_x.push(x);
        }
        if count > *b {
            *b = count;
            self.kept += 1;
        }
    }

    /// Confidence of the rows pushed since the last reset; 1 when empty.
    pub(crate) fn confidence(&self) -> f64 {
        if self.rows == 0 {
            1.0
        } else {
            self.kept as f64 / self.rows as f64
        }
    }

    pub(crate) fn reset(&mut self) {
        for &i in &self.touched {
            self.dense[i] = 0;
        }
        self.touched.clear();
        self.sparse.clear();
        for &x in &self.touched_x {
            self.best[x as usize] = 0;
        }
        self.touched_x.clear();
        self.rows = 0;
        self.kept = 0;
    }
}

/// Σ_x max_y w(x, y) / Σ w over weighted rows; 1 when there is no mass.
fn weighted_afd(proj: &Projection, weight: impl Fn(f64) -> f64) -> f64 {
    let mut by_pair: std::collections::HashMap<(u32, u32), CompensatedSum> = Default::default();
    let mut total = CompensatedSum::new();
    for t in proj.tuples() {
        for o in t {
            if let Cell::Row { x, y } = o.cell {
                let w = weight(o.p);
                by_pair.entry((x, y)).or_default().add(w);
                total.add(w);
            }
        }
    }
    if total.value() <= 0.0 {
        return 1.0;
    }
    let mut best = vec![0.0f64; proj.x_cardinality()];
    for ((x, _), w) in &by_pair {
        let b = &mut best[*x as usize];
        *b = b.max(w.value());
    }
    best.into_iter().collect::<CompensatedSum>().value() / total.value()
}

/// AFD confidence of the relation flattened to one row per option,
/// ignoring probabilities.
pub fn assess_pafd_deterministic(relation: &ProbRelation, x: &AttrSet, y: &AttrSet) -> Result<ConfidenceReport> {
    let proj = Projection::new(relation, x, y)?;
    Ok(ConfidenceReport::exact(
        Method::DeterministicApprox,
        weighted_afd(&proj, |_| 1.0),
    ))
}

/// Treats every option as an independent tuple weighted by its probability:
/// for each X value, the support of its best Y value over the support of
/// the X value, summed.
pub fn assess_pafd_unioned(relation: &ProbRelation, x: &AttrSet, y: &AttrSet) -> Result<ConfidenceReport> {
    let proj = Projection::new(relation, x, y)?;
    Ok(ConfidenceReport::exact(Method::Unioned, weighted_afd(&proj, |p| p)))
}

/// The RNG for sample `index` of a run seeded with `seed`. Each sample has
/// its own stream, so schedules and thread counts never change the draws.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Index of the option drawn with uniform `u` in [0, 1), or `None` when the
/// tuple is absent from the world.
fn pick_option(options: &[f64], u: f64, kind: RelationKind) -> Option<usize> {
    let total: f64 = options.iter().sum();
    let target = if kind == RelationKind::Ti { u } else { u * total };
    let mut acc = 0.0;
    for (i, p) in options.iter().enumerate() {
        acc += p;
        if target < acc {
            return Some(i);
        }
    }
    if kind == RelationKind::Ti {
        None
    } else {
        // Rounding can leave target == total.
        options.len().checked_sub(1)
    }
}

/// Draws one world: each tuple independently picks an option with
/// probability proportional to its p. Marker picks contribute no row.
pub fn sample_world<'a, R: Rng + ?Sized>(relation: &'a ProbRelation, rng: &mut R) -> DeterministicWorld<'a> {
    let mut rows = Vec::with_capacity(relation.len());
    let mut prob = 1.0;
    for t in relation.tuples() {
        let ps: Vec<f64> = t.options.iter().map(|o| o.p).collect();
        match pick_option(&ps, rng.random::<f64>(), relation.kind()) {
            Some(i) => {
                let o = &t.options[i];
                prob *= o.p;
                if let Some(values) = o.values() {
                    rows.push(WorldRow { key: &t.key, values });
                }
            }
            None => prob *= 1.0 - t.total_probability(),
        }
    }
    DeterministicWorld::new(relation.schema(), rows, prob)
}

fn sample_confidence(proj: &Projection, counter: &mut AfdCounter, rng: &mut ChaCha8Rng, probs: &[Vec<f64>]) -> f64 {
    counter.reset();
    for (options, ps) in proj.tuples().iter().zip(probs) {
        let u = rng.random::<f64>();
        if let Some(i) = pick_option(ps, u, proj.kind()) {
            // Ignored and violating picks are dropped from the world.
            if let Cell::Row { x, y } = options[i].cell {
                counter.push(x, y);
            }
        }
    }
    counter.confidence()
}

/// Monte Carlo result with the per-sample trace of running means.
#[derive(Debug, Clone)]
pub struct McOutcome {
    pub report: ConfidenceReport,
    pub running_means: Vec<f64>,
}

/// Samples worlds of a projected relation until the stopping rule fires.
pub fn estimate_projection(proj: &Projection, cfg: &McConfig) -> Result<McOutcome> {
    cfg.validate()?;
    let probs: Vec<Vec<f64>> = proj
        .tuples()
        .iter()
        .map(|t| t.iter().map(|o| o.p).collect())
        .collect();
    let mut moments = RunningMoments::default();
    let mut means: Vec<f64> = Vec::new();
    let mut next: u64 = 0;
    loop {
        let end = (next + cfg.batch_size).min(cfg.max_samples);
        let values = par::map_range_init(
            next as usize..end as usize,
            || AfdCounter::new(proj),
            |counter, i| {
                let mut rng = sample_rng(cfg.seed, i as u64);
                sample_confidence(proj, counter, &mut rng, &probs)
            },
        );
        for v in values {
            moments.push(v);
            means.push(moments.mean());
            let k = moments.count();
            let done = k >= cfg.min_samples && converged(&moments, &means, cfg);
            if done || k >= cfg.max_samples {
                if !done {
                    log::debug!("sampling stopped at the cap of {k} without converging");
                }
                return Ok(McOutcome {
                    report: ConfidenceReport::monte_carlo(moments.mean(), k, moments.std_error()),
                    running_means: means,
                });
            }
        }
        next = end;
    }
}

fn converged(moments: &RunningMoments, means: &[f64], cfg: &McConfig) -> bool {
    let half_width = Z95 * moments.std_error();
    if half_width >= cfg.epsilon {
        return false;
    }
    let w = cfg.window as usize;
    if means.len() <= w {
        return false;
    }
    let recent = &means[means.len() - 1 - w..];
    let (lo, hi) = recent
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| (lo.min(m), hi.max(m)));
    hi - lo < cfg.epsilon
}

/// Monte Carlo estimate of the pAFD `x ~> y`: the plain mean of per-world
/// AFD confidences over sampled worlds.
pub fn assess_pafd_mc(relation: &ProbRelation, x: &AttrSet, y: &AttrSet, cfg: &McConfig) -> Result<ConfidenceReport> {
    let proj = Projection::new(relation, x, y)?;
    Ok(estimate_projection(&proj, cfg)?.report)
}
