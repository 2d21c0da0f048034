//! Generative simulation of publication streams from known coefficients,
//! and parameter-recovery experiments built on it.
//!
//! Each event draws an author-set size, picks the author set with
//! probability proportional to `exp(θᵀ s)` over all sets of that size, then
//! draws a reference-list size and picks the cited works from the current
//! corpus with probability proportional to `exp(γᵀ h)` given the authors.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{build_designs_from_events, DesignConfig, DesignMatrix};
use crate::error::{Error, Result};
use crate::estimation::{fit, ChoiceData, FitOptions};
use crate::history::HistoryIndex;
use crate::sampling::{derived_rng, risk_set_size, ControlConfig};
use crate::statistics::{
    AuthorEvaluator, AuthorKind, CitationEvaluator, CitationKind, ColumnTransform, StatKind, TransformSpec,
};
use crate::stream::{Actor, ActorId, ActorRegistry, Event, EventStream, Publication};

/// How statistics enter the linear predictor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TransformMode {
    #[default]
    Raw,
    /// Pre-fitted constants; kinds missing from the spec enter raw.
    Fixed { spec: TransformSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SamplerMode {
    /// Enumerates the full risk set; fails when it exceeds `bound` sets.
    Exact { bound: u64 },
    /// Swap-one-member Metropolis chain; approximate.
    Chain { burn_in: usize },
}

impl Default for SamplerMode {
    fn default() -> Self {
        SamplerMode::Exact { bound: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub n_actors: usize,
    pub chilean_fraction: f64,
    /// Total events, including the seed works.
    pub n_events: usize,
    /// Probabilities of author-set sizes 1, 2, ... (at most 4 entries).
    pub author_size_probs: Vec<f64>,
    /// Probabilities of reference-list sizes 1, 2, ...; truncated to the corpus.
    pub citation_size_probs: Vec<f64>,
    /// Leading events published without references.
    pub seed_works: usize,
    pub theta: BTreeMap<AuthorKind, f64>,
    pub gamma: BTreeMap<CitationKind, f64>,
    pub transform: TransformMode,
    pub sampler: SamplerMode,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_actors: 30,
            chilean_fraction: 0.3,
            n_events: 200,
            author_size_probs: vec![0.35, 0.35, 0.2, 0.1],
            citation_size_probs: vec![0.3, 0.3, 0.2, 0.1, 0.1],
            seed_works: 5,
            theta: BTreeMap::new(),
            gamma: BTreeMap::new(),
            transform: TransformMode::Raw,
            sampler: SamplerMode::default(),
            seed: 0,
        }
    }
}

fn check_probs(name: &str, p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::Config(format!("{name}: probabilities must be finite and non-negative")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("{name}: probabilities sum to {s}, not 1")));
    }
    Ok(())
}

fn max_size(p: &[f64]) -> usize {
    p.iter().rposition(|&x| x > 0.0).map_or(0, |i| i + 1)
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_actors == 0 || self.n_events == 0 {
            return Err(Error::Config("actor and event counts must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.chilean_fraction) {
            return Err(Error::Config("chilean fraction must lie in [0, 1]".into()));
        }
        if self.author_size_probs.len() > 4 {
            return Err(Error::Config("author sizes are limited to 1..4".into()));
        }
        check_probs("author_size_probs", &self.author_size_probs)?;
        check_probs("citation_size_probs", &self.citation_size_probs)?;
        if self.seed_works > self.n_events {
            return Err(Error::Config("seed works exceed the event count".into()));
        }
        if self.theta.values().chain(self.gamma.values()).any(|v| !v.is_finite()) {
            return Err(Error::Config("coefficients must be finite".into()));
        }
        if let SamplerMode::Exact { bound } = self.sampler {
            if self.theta.values().any(|&v| v != 0.0) {
                let k = max_size(&self.author_size_probs).min(self.n_actors);
                check_bound(self.n_actors, k, bound)?;
            }
            if self.gamma.values().any(|&v| v != 0.0) && self.n_events > 1 {
                let k = max_size(&self.citation_size_probs).min(self.n_events - 1);
                check_bound(self.n_events - 1, k, bound)?;
            }
        }
        Ok(())
    }

    pub fn registry(&self) -> ActorRegistry {
        let chilean = (self.chilean_fraction * self.n_actors as f64).round() as usize;
        ActorRegistry::new_unchecked(
            (0..self.n_actors)
                .map(|i| Actor { id: ActorId(format!("a{i}")), chilean: i < chilean })
                .collect(),
        )
    }

    fn active_theta(&self) -> Vec<(AuthorKind, f64)> {
        self.theta.iter().filter(|(_, &v)| v != 0.0).map(|(&k, &v)| (k, v)).collect()
    }

    fn active_gamma(&self) -> Vec<(CitationKind, f64)> {
        self.gamma.iter().filter(|(_, &v)| v != 0.0).map(|(&k, &v)| (k, v)).collect()
    }

    fn column_transform(&self, kind: StatKind) -> ColumnTransform {
        match &self.transform {
            TransformMode::Raw => ColumnTransform::identity(kind),
            TransformMode::Fixed { spec } => {
                spec.column(kind).cloned().unwrap_or_else(|| ColumnTransform::identity(kind))
            }
        }
    }
}

fn check_bound(n: usize, k: usize, bound: u64) -> Result<()> {
    let count = risk_set_size(n, k)?;
    if count.to_u64().is_none_or(|c| c > bound) {
        return Err(Error::EnumerationBound { count: count.to_string(), bound });
    }
    Ok(())
}

/// Draws a size-`k` subset of `0..n` with probability proportional to
/// `exp(log_weight(set))`. `None` weights mean uniform selection.
///
/// Returns the sorted subset and, for exact draws, its selection probability.
pub fn draw_subset<R, F>(
    n: usize,
    k: usize,
    log_weight: Option<F>,
    sampler: &SamplerMode,
    rng: &mut R,
) -> Result<(Vec<u32>, Option<f64>)>
where
    R: Rng + ?Sized,
    F: Fn(&[u32]) -> f64 + Sync,
{
    if k > n {
        return Err(Error::InvalidQuery(format!("cannot draw {k} of {n}")));
    }
    let Some(log_weight) = log_weight else {
        let mut s: Vec<u32> = index::sample(rng, n, k).into_iter().map(|i| i as u32).collect();
        s.sort_unstable();
        let total = risk_set_size(n, k)?.to_f64().unwrap_or(f64::INFINITY);
        return Ok((s, Some(1.0 / total)));
    };
    match *sampler {
        SamplerMode::Exact { bound } => {
            check_bound(n, k, bound)?;
            let mut flat = Vec::new();
            for set in itertools::Itertools::combinations(0..n as u32, k) {
                flat.extend_from_slice(&set);
            }
            let chunk = k.max(1);
            let eta: Vec<f64> = if k == 0 {
                vec![log_weight(&[])]
            } else {
                flat.par_chunks(chunk).map(&log_weight).collect()
            };
            let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = eta.iter().map(|e| (e - m).exp()).collect();
            let total: f64 = w.iter().sum();
            let pick = WeightedIndex::new(&w)
                .map_err(|e| Error::InvalidQuery(format!("selection weights: {e}")))?
                .sample(rng);
            let set = if k == 0 { Vec::new() } else { flat[pick * k..(pick + 1) * k].to_vec() };
            Ok((set, Some(w[pick] / total)))
        }
        SamplerMode::Chain { burn_in } => {
            let mut cur: Vec<u32> = index::sample(rng, n, k).into_iter().map(|i| i as u32).collect();
            cur.sort_unstable();
            if k == 0 || k == n {
                return Ok((cur, None));
            }
            let mut cur_eta = log_weight(&cur);
            let mut inside = vec![false; n];
            for &m in &cur {
                inside[m as usize] = true;
            }
            for _ in 0..burn_in {
                let out_pos = rng.random_range(0..k);
                let mut incoming = rng.random_range(0..n - k);
                // Map the draw onto the non-members in index order.
                let mut chosen = 0u32;
                for (i, &is_in) in inside.iter().enumerate() {
                    if !is_in {
                        if incoming == 0 {
                            chosen = i as u32;
                            break;
                        }
                        incoming -= 1;
                    }
                }
                let mut prop = cur.clone();
                prop[out_pos] = chosen;
                prop.sort_unstable();
                let eta = log_weight(&prop);
                if (eta - cur_eta) >= 0.0 || rng.random::<f64>() < (eta - cur_eta).exp() {
                    inside[cur[out_pos] as usize] = false;
                    inside[chosen as usize] = true;
                    cur = prop;
                    cur_eta = eta;
                }
            }
            Ok((cur, None))
        }
    }
}

fn draw_size<R: Rng + ?Sized>(probs: &[f64], cap: usize, rng: &mut R) -> Result<usize> {
    let dist = WeightedIndex::new(probs).map_err(|e| Error::Config(format!("size distribution: {e}")))?;
    Ok((dist.sample(rng) + 1).min(cap))
}

#[derive(Debug, Clone)]
pub struct SimulatedStream {
    pub stream: EventStream,
    /// Resolved events, in stream order.
    pub events: Vec<Event>,
    /// Probability with which each event's author set was selected (exact mode).
    pub author_probs: Vec<Option<f64>>,
    /// Same for the reference list; `None` for seed works and chain draws.
    pub citation_probs: Vec<Option<f64>>,
}

/// Generates a stream from `cfg` (the config's own seed is ignored; the
/// caller's generator drives every draw).
pub fn simulate_stream<R: Rng + ?Sized>(cfg: &SimulationConfig, rng: &mut R) -> Result<SimulatedStream> {
    cfg.validate()?;
    let registry = cfg.registry();
    let chilean = registry.chilean_flags();
    let theta = cfg.active_theta();
    let gamma = cfg.active_gamma();
    let a_kinds: Vec<AuthorKind> = theta.iter().map(|t| t.0).collect();
    let a_tf: Vec<ColumnTransform> = a_kinds.iter().map(|&k| cfg.column_transform(StatKind::Author(k))).collect();
    let c_kinds: Vec<CitationKind> = gamma.iter().map(|t| t.0).collect();
    let c_tf: Vec<ColumnTransform> =
        c_kinds.iter().map(|&k| cfg.column_transform(StatKind::Citation(k))).collect();

    let mut index = HistoryIndex::new(cfg.n_actors);
    let mut events = Vec::with_capacity(cfg.n_events);
    let mut author_probs = Vec::with_capacity(cfg.n_events);
    let mut citation_probs = Vec::with_capacity(cfg.n_events);

    for t in 0..cfg.n_events {
        let k = draw_size(&cfg.author_size_probs, cfg.n_actors, rng)?;
        let (authors, pa) = {
            let eval = AuthorEvaluator::new(&index, &chilean);
            let weight = |set: &[u32]| {
                let mut eta = 0.0;
                for ((&kind, &coef), tf) in a_kinds.iter().zip(theta.iter().map(|t| &t.1)).zip(&a_tf) {
                    let raw = eval.eval_one(set, kind);
                    eta += coef * tf.apply(raw).unwrap_or(f64::NAN);
                }
                eta
            };
            let w = (!theta.is_empty()).then_some(weight);
            draw_subset(cfg.n_actors, k, w, &cfg.sampler, rng)?
        };
        let (citations, pc) = if t < cfg.seed_works {
            (Vec::new(), None)
        } else {
            if t == 0 {
                return Err(Error::Config("empty corpus but a reference list was requested".into()));
            }
            let kc = draw_size(&cfg.citation_size_probs, t, rng)?;
            let eval = CitationEvaluator::new(&index);
            let weight = |set: &[u32]| {
                let mut eta = 0.0;
                for ((&kind, &coef), tf) in c_kinds.iter().zip(gamma.iter().map(|g| &g.1)).zip(&c_tf) {
                    let raw = eval.eval_one(set, &authors, kind);
                    eta += coef * tf.apply(raw).unwrap_or(f64::NAN);
                }
                eta
            };
            let w = (!gamma.is_empty()).then_some(weight);
            draw_subset(t, kc, w, &cfg.sampler, rng)?
        };
        let ev = Event { seq: t as i64 + 1, authors, citations };
        index.apply(&ev)?;
        events.push(ev);
        author_probs.push(pa);
        citation_probs.push(pc);
    }

    let pubs = events
        .iter()
        .enumerate()
        .map(|(t, ev)| {
            Publication::new(
                &format!("w{t}"),
                ev.authors.iter().map(|&i| registry.id(i).0.clone()),
                ev.citations.iter().map(|&l| format!("w{l}")),
                ev.seq,
            )
        })
        .collect();
    Ok(SimulatedStream { stream: EventStream::new(registry, pubs), events, author_probs, citation_probs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryConfig {
    pub simulation: SimulationConfig,
    pub controls: ControlConfig,
    pub fit: FitOptions,
    pub replicates: usize,
    /// Author kinds fitted; empty means the kinds with nonzero θ.
    pub author_kinds: Vec<AuthorKind>,
    /// Citation kinds fitted; empty means the kinds with nonzero γ.
    pub citation_kinds: Vec<CitationKind>,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            simulation: SimulationConfig::default(),
            controls: ControlConfig::default(),
            fit: FitOptions::default(),
            replicates: 20,
            author_kinds: Vec::new(),
            citation_kinds: Vec::new(),
        }
    }
}

impl RecoveryConfig {
    fn kinds(&self) -> (Vec<AuthorKind>, Vec<CitationKind>) {
        let a = if self.author_kinds.is_empty() {
            self.simulation.active_theta().into_iter().map(|t| t.0).collect()
        } else {
            self.author_kinds.clone()
        };
        let c = if self.citation_kinds.is_empty() {
            self.simulation.active_gamma().into_iter().map(|t| t.0).collect()
        } else {
            self.citation_kinds.clone()
        };
        (a, c)
    }

    fn truth(&self, kind: StatKind) -> f64 {
        match kind {
            StatKind::Author(k) => self.simulation.theta.get(&k).copied().unwrap_or(0.0),
            StatKind::Citation(k) => self.simulation.gamma.get(&k).copied().unwrap_or(0.0),
        }
    }
}

/// Estimate for one kind in one replicate, on the simulation's scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindEstimate {
    pub kind: StatKind,
    pub estimate: f64,
    pub se: f64,
    /// Truth on the fitted (standardized) scale.
    pub truth_transformed: f64,
    /// Estimate on the fitted scale.
    pub estimate_transformed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    /// `None` when the kind's fit failed, diverged or was degenerate.
    pub estimates: Vec<(StatKind, Option<KindEstimate>)>,
}

/// Simulated stream for replicate `r`.
pub fn replicate_stream(cfg: &RecoveryConfig, r: usize) -> Result<SimulatedStream> {
    let mut rng = derived_rng(cfg.simulation.seed, 0x5EED, r as u64);
    simulate_stream(&cfg.simulation, &mut rng)
}

fn fit_design(
    cfg: &RecoveryConfig,
    design: DesignMatrix,
    out: &mut Vec<(StatKind, Option<KindEstimate>)>,
) -> Result<()> {
    let kinds = design.columns.clone();
    let mut spec = TransformSpec::sqrt_standardize(&kinds);
    for c in &mut spec.columns {
        let sim = cfg.simulation.column_transform(c.kind);
        c.sqrt = sim.sqrt;
    }
    let spec = spec.fit(&design)?;
    let mut design = design;
    spec.apply_in_place(&mut design)?;
    let data = ChoiceData::from_design_owned(design)?;
    let result = fit(&data, &cfg.fit);
    for (j, &kind) in kinds.iter().enumerate() {
        let est = match &result {
            Ok(f) if f.converged && !f.separation => f.estimate(kind).map(|e| {
                let fitted = &spec.columns[j];
                let sim = cfg.simulation.column_transform(kind);
                let s0 = if sim.standardize { sim.sd } else { 1.0 };
                let s1 = if fitted.standardize { fitted.sd } else { 1.0 };
                let scale = s0 / s1;
                KindEstimate {
                    kind,
                    estimate: e.coefficient * scale,
                    se: e.robust_se * scale,
                    truth_transformed: cfg.truth(kind) / scale,
                    estimate_transformed: e.coefficient,
                }
            }),
            _ => None,
        };
        out.push((kind, est));
    }
    Ok(())
}

/// Builds the designs for `sim` with the given controls and fits them.
pub fn fit_replicate(
    cfg: &RecoveryConfig,
    sim: &SimulatedStream,
    controls: &ControlConfig,
    replicate: usize,
) -> Result<ReplicateOutcome> {
    let (a_kinds, c_kinds) = cfg.kinds();
    let design_cfg = DesignConfig { controls: controls.clone(), keep_candidates: false };
    let chilean = sim.stream.registry().chilean_flags();
    let (a, c) = build_designs_from_events(
        chilean,
        &sim.events,
        (!a_kinds.is_empty()).then_some(&a_kinds[..]),
        (!c_kinds.is_empty()).then_some(&c_kinds[..]),
        &design_cfg,
    )?;
    let mut estimates = Vec::new();
    if let Some(a) = a {
        fit_design(cfg, a, &mut estimates)?;
    }
    if let Some(c) = c {
        fit_design(cfg, c, &mut estimates)?;
    }
    Ok(ReplicateOutcome { replicate, estimates })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub kind: StatKind,
    pub truth: f64,
    /// Mean over included replicates of the truth on the fitted scale.
    pub truth_transformed: f64,
    pub mean_estimate: f64,
    pub empirical_sd: f64,
    pub mean_se: f64,
    pub bias: f64,
    /// Monte-Carlo standard error of the mean estimate.
    pub mc_se: f64,
    /// Replicates whose 95% interval covers the truth.
    pub covered: usize,
    pub included: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub replicates: usize,
    pub rows: Vec<RecoveryRow>,
    pub outcomes: Vec<ReplicateOutcome>,
}

impl RecoveryReport {
    pub fn row(&self, kind: StatKind) -> Option<&RecoveryRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }

    pub fn table(&self) -> String {
        use crate::estimation::format_sig as f;
        let mut out = String::from(
            "statistic\ttruth\ttruth_transformed\tmean\temp_sd\tmean_se\tbias\tmc_se\tcoverage\tincluded\texcluded\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}/{}\t{}\t{}\n",
                r.kind.display_name(),
                f(r.truth),
                f(r.truth_transformed),
                f(r.mean_estimate),
                f(r.empirical_sd),
                f(r.mean_se),
                f(r.bias),
                f(r.mc_se),
                r.covered,
                r.included,
                r.included,
                r.excluded
            ));
        }
        out
    }
}

pub fn summarize(cfg: &RecoveryConfig, outcomes: Vec<ReplicateOutcome>) -> RecoveryReport {
    let mut kinds: Vec<StatKind> = Vec::new();
    for o in &outcomes {
        for (k, _) in &o.estimates {
            if !kinds.contains(k) {
                kinds.push(*k);
            }
        }
    }
    let rows = kinds
        .into_iter()
        .map(|kind| {
            let truth = cfg.truth(kind);
            let ests: Vec<KindEstimate> = outcomes
                .iter()
                .flat_map(|o| o.estimates.iter().filter(|(k, _)| *k == kind).filter_map(|(_, e)| *e))
                .collect();
            let n = ests.len();
            let nf = n as f64;
            let mean = ests.iter().map(|e| e.estimate).sum::<f64>() / nf;
            let var = if n > 1 {
                ests.iter().map(|e| (e.estimate - mean).powi(2)).sum::<f64>() / (nf - 1.0)
            } else {
                f64::NAN
            };
            let sd = var.sqrt();
            RecoveryRow {
                kind,
                truth,
                truth_transformed: ests.iter().map(|e| e.truth_transformed).sum::<f64>() / nf,
                mean_estimate: mean,
                empirical_sd: sd,
                mean_se: ests.iter().map(|e| e.se).sum::<f64>() / nf,
                bias: mean - truth,
                mc_se: sd / nf.sqrt(),
                covered: ests.iter().filter(|e| (e.estimate - truth).abs() <= 1.96 * e.se).count(),
                included: n,
                excluded: outcomes.len() - n,
            }
        })
        .collect();
    RecoveryReport { replicates: outcomes.len(), rows, outcomes }
}

/// Simulates, samples, transforms and fits `cfg.replicates` independent
/// streams. Replicates run in parallel; each has its own derived seed.
pub fn recovery_experiment(cfg: &RecoveryConfig) -> Result<RecoveryReport> {
    cfg.simulation.validate()?;
    if cfg.replicates == 0 {
        return Err(Error::Config("at least one replicate is required".into()));
    }
    let outcomes: Vec<ReplicateOutcome> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let sim = replicate_stream(cfg, r)?;
            let controls = ControlConfig { seed: cfg.controls.seed ^ (r as u64).wrapping_mul(0x9E37_79B9), ..cfg.controls.clone() };
            fit_replicate(cfg, &sim, &controls, r)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(cfg, outcomes))
}
