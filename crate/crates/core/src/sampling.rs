//! Size-matched case-control sampling of non-event candidate sets.
//!
//! For an observed set of size k drawn from a universe of n entities, the
//! risk set is every size-k subset. When the risk set minus the observed set
//! fits within the control budget it is enumerated in full; otherwise the
//! budget is filled with uniform draws, rejecting the observed set and (by
//! default) repeats.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statistics::ModelTag;
use crate::stream::{ActorRegistry, Event};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlConfig {
    /// Control budget per author-model stratum.
    pub author_controls: usize,
    /// Control budget per citation-model stratum.
    pub citation_controls: usize,
    pub seed: u64,
    /// Reject repeated control sets within a stratum.
    pub distinct: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig { author_controls: 30_000, citation_controls: 10_000, seed: 0, distinct: true }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        if self.author_controls == 0 || self.citation_controls == 0 {
            return Err(Error::Config("control counts must be at least 1".into()));
        }
        Ok(())
    }
}

/// One event with its sampled controls for one model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub event: usize,
    pub model: ModelTag,
    /// Sorted member indices of the observed set.
    pub observed: Vec<u32>,
    /// Sorted member indices of each control set.
    pub controls: Vec<Vec<u32>>,
    pub risk_set_size: BigUint,
    pub full_enumeration: bool,
}

impl Stratum {
    /// A stratum without controls carries no information.
    pub fn is_informative(&self) -> bool {
        !self.controls.is_empty()
    }
}

/// Exact binomial coefficient C(n, k).
pub fn risk_set_size(n: usize, k: usize) -> Result<BigUint> {
    if k > n {
        return Err(Error::InvalidQuery(format!("set size {k} exceeds universe size {n}")));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    Ok(acc)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one (seed, stream, event) triple, so strata can
/// be drawn in any order or in parallel with identical results.
pub fn derived_rng(seed: u64, stream: u64, event: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(seed ^ splitmix(stream)) ^ event))
}

pub(crate) fn model_stream(model: ModelTag) -> u64 {
    match model {
        ModelTag::Author => 0xA,
        ModelTag::Citation => 0xC,
    }
}

/// Draws controls of size `observed.len()` from `0..n`.
///
/// Returns the controls and whether the full risk set was enumerated.
pub fn sample_subsets<R: rand::Rng + ?Sized>(
    n: usize,
    observed: &[u32],
    budget: usize,
    distinct: bool,
    rng: &mut R,
) -> Result<(Vec<Vec<u32>>, BigUint, bool)> {
    let k = observed.len();
    let total = risk_set_size(n, k)?;
    let alternatives = &total - BigUint::one();
    if alternatives <= BigUint::from(budget) {
        let controls: Vec<Vec<u32>> = (0..n as u32)
            .combinations(k)
            .filter(|s| s.as_slice() != observed)
            .collect();
        return Ok((controls, total, true));
    }
    let mut controls = Vec::with_capacity(budget);
    let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(if distinct { budget } else { 0 });
    while controls.len() < budget {
        let mut draw: Vec<u32> = index::sample(rng, n, k).into_iter().map(|i| i as u32).collect();
        draw.sort_unstable();
        if draw.as_slice() == observed {
            continue;
        }
        if distinct && !seen.insert(draw.clone()) {
            continue;
        }
        controls.push(draw);
    }
    Ok((controls, total, false))
}

/// Author-model stratum: controls are size-matched subsets of the whole
/// (fixed) actor registry.
pub fn sample_author_controls<R: rand::Rng + ?Sized>(
    registry: &ActorRegistry,
    position: usize,
    event: &Event,
    cfg: &ControlConfig,
    rng: &mut R,
) -> Result<Stratum> {
    cfg.validate()?;
    let mut observed = event.authors.clone();
    observed.sort_unstable();
    observed.dedup();
    if observed.len() > registry.len() {
        return Err(Error::InvalidQuery(format!(
            "author set of size {} exceeds {} registered actors",
            observed.len(),
            registry.len()
        )));
    }
    let (controls, risk, full) =
        sample_subsets(registry.len(), &observed, cfg.author_controls, cfg.distinct, rng)?;
    Ok(Stratum {
        event: position,
        model: ModelTag::Author,
        observed,
        controls,
        risk_set_size: risk,
        full_enumeration: full,
    })
}

/// Citation-model stratum: controls are size-matched subsets of the works
/// published before the event (stream positions `0..position`).
pub fn sample_citation_controls<R: rand::Rng + ?Sized>(
    position: usize,
    event: &Event,
    cfg: &ControlConfig,
    rng: &mut R,
) -> Result<Stratum> {
    cfg.validate()?;
    let mut observed = event.citations.clone();
    observed.sort_unstable();
    observed.dedup();
    if observed.len() > position {
        return Err(Error::InvalidQuery(format!(
            "citation list of size {} exceeds the {position} available works",
            observed.len()
        )));
    }
    if let Some(&bad) = observed.iter().find(|&&w| w as usize >= position) {
        return Err(Error::UnknownWork(bad as usize));
    }
    let (controls, risk, full) =
        sample_subsets(position, &observed, cfg.citation_controls, cfg.distinct, rng)?;
    Ok(Stratum {
        event: position,
        model: ModelTag::Citation,
        observed,
        controls,
        risk_set_size: risk,
        full_enumeration: full,
    })
}

/// Converts a risk-set size to f64, saturating at infinity.
pub fn risk_set_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{Actor, ActorId};

    fn registry(n: usize) -> ActorRegistry {
        ActorRegistry::new(
            (0..n).map(|i| Actor { id: ActorId(format!("a{i}")), chilean: false }).collect(),
        )
        .unwrap()
    }

    fn event(authors: &[u32], citations: &[u32]) -> Event {
        Event { seq: 1, authors: authors.to_vec(), citations: citations.to_vec() }
    }

    #[test]
    fn binomials() {
        assert_eq!(risk_set_size(3, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(risk_set_size(87, 3).unwrap(), BigUint::from(105_995u32));
        assert_eq!(risk_set_size(9, 0).unwrap(), BigUint::one());
        assert!(risk_set_size(2, 3).is_err());
        // C(100, 50) exceeds u64.
        assert_eq!(
            risk_set_size(100, 50).unwrap().to_string(),
            "100891344545564193334812497256"
        );
    }

    #[test]
    fn full_enumeration_small_universe() {
        let mut rng = derived_rng(1, 0, 0);
        let cfg = ControlConfig::default();
        let s = sample_author_controls(&registry(3), 0, &event(&[0, 1], &[]), &cfg, &mut rng).unwrap();
        assert!(s.full_enumeration);
        assert_eq!(s.controls, vec![vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn citation_singleton_risk_set() {
        let mut rng = derived_rng(1, 0, 0);
        let cfg = ControlConfig::default();
        let s = sample_citation_controls(3, &event(&[0], &[0, 1, 2]), &cfg, &mut rng).unwrap();
        assert!(s.controls.is_empty());
        assert!(!s.is_informative());
    }

    #[test]
    fn citation_enumerates_nine_alternatives() {
        let mut rng = derived_rng(1, 0, 0);
        let cfg = ControlConfig { citation_controls: 100, ..Default::default() };
        let s = sample_citation_controls(5, &event(&[0], &[1, 3]), &cfg, &mut rng).unwrap();
        assert!(s.full_enumeration);
        assert_eq!(s.controls.len(), 9);
        assert!(s.controls.iter().all(|c| c.len() == 2 && c != &vec![1, 3]));
    }

    #[test]
    fn budget_boundary_switches_branch() {
        // C(6,2) = 15, so 14 alternatives.
        for (budget, full) in [(13, false), (14, true), (15, true)] {
            let mut rng = derived_rng(3, 0, 0);
            let (c, _, f) = sample_subsets(6, &[0, 1], budget, true, &mut rng).unwrap();
            assert_eq!(f, full, "budget {budget}");
            assert_eq!(c.len(), budget.min(14));
        }
    }

    #[test]
    fn citation_rejects_oversized_and_future() {
        let mut rng = derived_rng(1, 0, 0);
        let cfg = ControlConfig::default();
        assert!(sample_citation_controls(2, &event(&[0], &[0, 1, 2]), &cfg, &mut rng).is_err());
        assert!(sample_citation_controls(3, &event(&[0], &[5]), &cfg, &mut rng).is_err());
        assert!(ControlConfig { author_controls: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn reproducible_under_seed() {
        let reg = registry(40);
        let cfg = ControlConfig { author_controls: 50, ..Default::default() };
        let ev = event(&[3, 7, 9], &[]);
        let a = sample_author_controls(&reg, 4, &ev, &cfg, &mut derived_rng(9, 0xA, 4)).unwrap();
        let b = sample_author_controls(&reg, 4, &ev, &cfg, &mut derived_rng(9, 0xA, 4)).unwrap();
        assert_eq!(a, b);
        let c = sample_author_controls(&reg, 4, &ev, &cfg, &mut derived_rng(9, 0xA, 5)).unwrap();
        assert_ne!(a.controls, c.controls);
    }
}
