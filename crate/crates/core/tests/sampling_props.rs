mod common;

use std::collections::HashMap;

use hyperevent::sampling::{
    derived_rng, risk_set_size, sample_author_controls, sample_citation_controls, sample_subsets, ControlConfig,
};
use hyperevent::stream::{Actor, ActorId, ActorRegistry, Event};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn registry(n: usize) -> ActorRegistry {
    ActorRegistry::new_unchecked((0..n).map(|i| Actor { id: ActorId(format!("a{i}")), chilean: false }).collect())
}

#[test]
fn risk_set_is_exact_beyond_u64() {
    assert_eq!(risk_set_size(6, 2).unwrap(), BigUint::from(15u32));
    let big = risk_set_size(300, 40).unwrap();
    assert!(big > BigUint::from(u64::MAX));
    assert!(risk_set_size(3, 5).is_err());
}

#[test]
fn enumeration_switches_at_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 2..9usize {
        for k in 1..=n {
            let total = risk_set_size(n, k).unwrap();
            let alt: usize = (total - 1u32).try_into().unwrap();
            let observed: Vec<u32> = (0..k as u32).collect();
            for m in [alt.saturating_sub(1).max(1), alt.max(1), alt + 1] {
                let (controls, _, full) = sample_subsets(n, &observed, m, true, &mut rng).unwrap();
                if alt <= m {
                    assert!(full, "n={n} k={k} m={m}");
                    assert_eq!(controls.len(), alt);
                } else {
                    assert!(!full, "n={n} k={k} m={m}");
                    assert_eq!(controls.len(), m);
                }
            }
        }
    }
}

#[test]
fn controls_are_valid_over_many_strata() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let events = common::random_events(&mut rng, 15, 40);
    let reg = registry(15);
    let cfg = ControlConfig { author_controls: 20, citation_controls: 20, seed: 1, distinct: true };
    let mut strata = 0;
    while strata < 10_000 {
        for (pos, ev) in events.iter().enumerate() {
            let s = sample_author_controls(&reg, pos, ev, &cfg, &mut rng).unwrap();
            assert!(s.controls.iter().all(|c| c.len() == s.observed.len() && *c != s.observed));
            assert!(s.controls.iter().all(|c| c.windows(2).all(|w| w[0] < w[1]) && c.iter().all(|&m| m < 15)));
            let mut seen = s.controls.clone();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), s.controls.len());
            strata += 1;
            if ev.citations.is_empty() {
                continue;
            }
            let s = sample_citation_controls(pos, ev, &cfg, &mut rng).unwrap();
            assert!(s.controls.iter().all(|c| c.len() == s.observed.len() && *c != s.observed));
            assert!(s.controls.iter().all(|c| c.iter().all(|&w| (w as usize) < pos)));
            strata += 1;
        }
    }
}

#[test]
fn citation_controls_reject_future_works() {
    let ev = Event { seq: 3, authors: vec![0], citations: vec![2] };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(sample_citation_controls(2, &ev, &ControlConfig::default(), &mut rng).is_err());
}

#[test]
fn sampled_controls_are_uniform() {
    // N = 6, pairs: 14 alternatives, one control per stratum.
    let observed = [1u32, 4];
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    let draws = 14_000;
    for e in 0..draws {
        let mut rng = derived_rng(77, 0xA, e);
        let (c, _, full) = sample_subsets(6, &observed, 1, true, &mut rng).unwrap();
        assert!(!full);
        *counts.entry(c[0].clone()).or_default() += 1;
    }
    assert_eq!(counts.len(), 14);
    let expected = draws as f64 / 14.0;
    let chi2: f64 = counts.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(13.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi2 = {chi2}, p = {p}");
}

#[test]
fn derived_streams_are_reproducible_and_distinct() {
    use rand::Rng;
    let a: u64 = derived_rng(5, 0xA, 3).random();
    let b: u64 = derived_rng(5, 0xA, 3).random();
    let c: u64 = derived_rng(5, 0xC, 3).random();
    let d: u64 = derived_rng(5, 0xA, 4).random();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, d);
}

proptest! {
    #[test]
    fn subsets_are_size_matched(n in 1usize..30, seed in any::<u64>(), m in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = 1 + (seed as usize % n.min(4));
        let observed = common::sorted_sample(&mut rng, n, k);
        let (controls, total, full) = sample_subsets(n, &observed, m, true, &mut rng).unwrap();
        prop_assert_eq!(total, risk_set_size(n, k).unwrap());
        prop_assert!(controls.len() <= m || full);
        for c in &controls {
            prop_assert_eq!(c.len(), k);
            prop_assert!(c != &observed);
        }
    }
}
