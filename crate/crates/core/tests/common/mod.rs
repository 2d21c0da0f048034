#![allow(dead_code)]

//! Brute-force reference implementations. Everything here rescans the raw
//! prefix of events and expands each formula literally, sharing no code with
//! the incremental index.

use hyperevent::history::HistoryIndex;
use hyperevent::statistics::{AuthorEvaluator, AuthorKind, CitationEvaluator, CitationKind};
use hyperevent::stream::Event;
use itertools::Itertools;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Naive<'a> {
    pub works: &'a [Event],
    pub n_actors: usize,
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subset_of(small: &[u32], big: &[u32]) -> bool {
    small.iter().all(|x| big.contains(x))
}

impl<'a> Naive<'a> {
    pub fn new(events: &'a [Event], upto: usize, n_actors: usize) -> Self {
        Naive { works: &events[..upto], n_actors }
    }

    pub fn actors(&self) -> std::ops::Range<u32> {
        0..self.n_actors as u32
    }

    pub fn cite_aw(&self, a: &[u32], c: &[u32]) -> u64 {
        self.works.iter().filter(|w| subset_of(a, &w.authors) && subset_of(c, &w.citations)).count() as u64
    }

    pub fn auth(&self, i: u32, l: u32) -> u64 {
        self.works[l as usize].authors.contains(&i) as u64
    }

    pub fn subrep(&self, a: &[u32], c: &[u32], k: usize, ks: usize) -> f64 {
        if a.len() < k || c.len() < ks {
            return 0.0;
        }
        let mut s = 0.0;
        for sa in a.iter().copied().combinations(k) {
            for sc in c.iter().copied().combinations(ks) {
                s += self.cite_aw(&sa, &sc) as f64 / (binom(a.len(), k) * binom(c.len(), ks));
            }
        }
        s
    }

    pub fn cite_aa(&self, i: u32, j: u32) -> u64 {
        self.works
            .iter()
            .filter(|w| w.authors.contains(&i) && w.citations.iter().any(|&m| self.auth(j, m) == 1))
            .count() as u64
    }

    pub fn p(&self, i: u32) -> u64 {
        self.works.iter().filter(|w| w.citations.iter().map(|&m| self.auth(i, m)).sum::<u64>() >= 1).count() as u64
    }

    pub fn coauth(&self, i: u32, j: u32) -> u64 {
        let mut set = vec![i, j];
        set.dedup();
        self.cite_aw(&set, &[])
    }

    pub fn cite_ww(&self, k: u32, h: u32) -> u64 {
        self.works[k as usize].citations.contains(&h) as u64
    }

    pub fn outdegree(&self, l: u32) -> u64 {
        self.works[l as usize].citations.len() as u64
    }

    pub fn cocite(&self, i: u32, j: u32) -> u64 {
        self.works
            .iter()
            .filter(|w| {
                w.citations.iter().any(|&m| self.auth(i, m) == 1) && w.citations.iter().any(|&m| self.auth(j, m) == 1)
            })
            .count() as u64
    }

    pub fn author_stat(&self, a: &[u32], chilean: &[bool], kind: AuthorKind) -> f64 {
        let n = a.len() as f64;
        let pairs: Vec<(u32, u32)> = a.iter().copied().tuple_combinations().collect();
        let np = binom(a.len(), 2);
        let ch = |i: u32| chilean[i as usize] as u8 as f64;
        match kind {
            AuthorKind::RatioChilean => a.iter().map(|&i| ch(i) / n).sum(),
            AuthorKind::HeterogeneityChilean => pairs.iter().map(|&(i, j)| (ch(i) - ch(j)).abs() / np).sum(),
            AuthorKind::CitationPopAuthor => a.iter().map(|&i| self.p(i) as f64 / n).sum(),
            AuthorKind::PublicationActivity => self.subrep(a, &[], 1, 0),
            AuthorKind::CoauthorPairRep => self.subrep(a, &[], 2, 0),
            AuthorKind::CoauthorTripleRep => self.subrep(a, &[], 3, 0),
            AuthorKind::CoauthorQuartetRep => self.subrep(a, &[], 4, 0),
            AuthorKind::CollabWithCitingAuthor => pairs
                .iter()
                .map(|&(i, j)| (self.cite_aa(i, j) + self.cite_aa(j, i)) as f64 / (2.0 * np))
                .sum(),
            AuthorKind::ClosureByCoauthor => {
                let mut s = 0.0;
                for &(i, j) in &pairs {
                    for k in self.actors().filter(|&k| k != i && k != j) {
                        s += self.coauth(i, k).min(self.coauth(j, k)) as f64 / np;
                    }
                }
                s
            }
            AuthorKind::ClosureByCitingSameWork => {
                let mut s = 0.0;
                for &(i, j) in &pairs {
                    for l in 0..self.works.len() as u32 {
                        s += self.cite_aw(&[i], &[l]).min(self.cite_aw(&[j], &[l])) as f64 / np;
                    }
                }
                s
            }
        }
    }

    fn triple_sum(&self, a: &[u32], c: &[u32], term: impl Fn(u32, u32, u32) -> u64) -> f64 {
        let d = (a.len() * c.len()) as f64;
        let mut s = 0.0;
        for &i in a {
            for j in self.actors().filter(|&j| j != i) {
                for &l in c {
                    s += term(i, j, l) as f64 / d;
                }
            }
        }
        s
    }

    fn pair_fraction(&self, c: &[u32], linked: impl Fn(u32, u32) -> bool) -> f64 {
        let np = binom(c.len(), 2);
        let mut s = 0.0;
        for (k, l) in c.iter().copied().tuple_combinations() {
            let hit = self
                .actors()
                .cartesian_product(self.actors())
                .any(|(i, j)| self.auth(i, k) == 1 && self.auth(j, l) == 1 && linked(i, j));
            if hit {
                s += 1.0 / np;
            }
        }
        s
    }

    pub fn citation_stat(&self, c: &[u32], a: &[u32], kind: CitationKind) -> f64 {
        let nc = c.len() as f64;
        let np = binom(c.len(), 2);
        let d = (a.len() * c.len()) as f64;
        match kind {
            CitationKind::CitationPopWork => self.subrep(&[], c, 0, 1),
            CitationKind::CocitationPopPair => self.subrep(&[], c, 0, 2),
            CitationKind::CocitationPopTriple => self.subrep(&[], c, 0, 3),
            CitationKind::CitationRepetition => self.subrep(a, c, 1, 1),
            CitationKind::OutdegreePop => c.iter().map(|&l| self.outdegree(l) as f64).sum::<f64>() / nc,
            CitationKind::CiteWorkAndItsCitations => c
                .iter()
                .copied()
                .tuple_combinations()
                .map(|(h, k)| (self.cite_ww(h, k) + self.cite_ww(k, h)) as f64 / np)
                .sum(),
            CitationKind::SelfCitation => {
                let mut s = 0.0;
                for &i in a {
                    for &k in c {
                        s += self.auth(i, k) as f64 / d;
                    }
                }
                s
            }
            CitationKind::AdoptCitationOfCoauthor => {
                self.triple_sum(a, c, |i, j, l| self.coauth(i, j).min(self.cite_aw(&[j], &[l])))
            }
            CitationKind::CiteWorkOfCoauthor => self.triple_sum(a, c, |i, j, l| self.coauth(i, j).min(self.auth(j, l))),
            CitationKind::AuthorCitesAuthorRep => {
                self.triple_sum(a, c, |i, j, l| self.cite_aa(i, j).min(self.auth(j, l)))
            }
            CitationKind::AuthorCitesAuthorRec => {
                self.triple_sum(a, c, |i, j, l| self.cite_aa(j, i).min(self.auth(j, l)))
            }
            CitationKind::CiteMuchCitedAuthors => c
                .iter()
                .map(|&l| {
                    self.works[l as usize].authors.iter().map(|&i| self.p(i)).max().unwrap_or(0) as f64 / nc
                })
                .sum(),
            CitationKind::CociteCoauthorPairs => self.pair_fraction(c, |i, j| self.coauth(i, j) > 0),
            CitationKind::AuthorCocitation => self.pair_fraction(c, |i, j| i != j && self.cocite(i, j) > 0),
        }
    }
}

pub fn sorted_sample<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<u32> {
    let mut v: Vec<u32> = index::sample(rng, n, k).into_iter().map(|i| i as u32).collect();
    v.sort_unstable();
    v
}

/// Random valid stream: author sets of size 1..=4, references to earlier
/// works only.
pub fn random_events<R: Rng>(rng: &mut R, n_actors: usize, n_works: usize) -> Vec<Event> {
    (0..n_works)
        .map(|t| {
            let ka = rng.random_range(1..=4.min(n_actors));
            let kc = rng.random_range(0..=5.min(t));
            Event { seq: t as i64 + 1, authors: sorted_sample(rng, n_actors, ka), citations: sorted_sample(rng, t, kc) }
        })
        .collect()
}

pub fn random_flags<R: Rng>(rng: &mut R, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(0.4)).collect()
}

/// Absolute closeness for averaged densities.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

fn mismatch(what: String, got: f64, want: f64) -> String {
    format!("{what}: incremental {got} != oracle {want}")
}

/// Replays one random stream and compares every attribute and statistic
/// against the oracle. Returns the number of comparisons made.
pub fn check_random_stream(seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=15);
    let w = rng.random_range(1..=40);
    let events = random_events(&mut rng, n, w);
    let chilean = random_flags(&mut rng, n);
    let stat_points: Vec<usize> = (0..4).map(|_| rng.random_range(0..=w)).collect();
    let mut index = HistoryIndex::new(n);
    let checks = std::cell::Cell::new(0usize);
    for t in 0..=w {
        let o = Naive::new(&events, t, n);
        let exact = |what: String, got: u64, want: u64| -> Result<(), String> {
            checks.set(checks.get() + 1);
            if got == want { Ok(()) } else { Err(format!("stream {seed} t={t} {what}: incremental {got} != oracle {want}")) }
        };
        for _ in 0..6 {
            let i = rng.random_range(0..n as u32);
            let j = rng.random_range(0..n as u32);
            exact(format!("coauth({i},{j})"), index.coauth(i, j).unwrap() as u64, o.coauth(i, j))?;
            exact(format!("p({i})"), index.citation_popularity(i).unwrap() as u64, o.p(i))?;
            if i != j {
                exact(format!("cite_aa({i},{j})"), index.cite_aa(i, j).unwrap() as u64, o.cite_aa(i, j))?;
                exact(format!("cocite({i},{j})"), index.cocite_aa(i, j).unwrap() as u64, o.cocite(i, j))?;
            }
            if t > 0 {
                let k = rng.random_range(0..t as u32);
                let h = rng.random_range(0..t as u32);
                exact(format!("cite_ww({k},{h})"), index.cite_ww(k, h).unwrap() as u64, o.cite_ww(k, h))?;
                exact(format!("auth({i},{k})"), index.auth(i, k).unwrap() as u64, o.auth(i, k))?;
                exact(format!("outdegree({k})"), index.outdegree(k).unwrap() as u64, o.outdegree(k))?;
            }
            let ka = rng.random_range(0..=4.min(n));
            let kc = rng.random_range(0..=3.min(t));
            let a = sorted_sample(&mut rng, n, ka);
            let c = sorted_sample(&mut rng, t, kc);
            exact(format!("cite_aw({a:?},{c:?})"), index.cite_aw(&a, &c), o.cite_aw(&a, &c))?;
            let k = rng.random_range(0..=ka);
            let ks = rng.random_range(0..=kc);
            if k + ks > 0 {
                checks.set(checks.get() + 1);
                let got = index.subrep(&a, &c, k, ks).unwrap();
                let want = o.subrep(&a, &c, k, ks);
                if !close(got, want) {
                    return Err(mismatch(format!("stream {seed} t={t} subrep({a:?},{c:?},{k},{ks})"), got, want));
                }
            }
        }
        if stat_points.contains(&t) {
            let ae = AuthorEvaluator::new(&index, &chilean);
            let ce = CitationEvaluator::new(&index);
            for _ in 0..2 {
                let ka = rng.random_range(1..=4.min(n));
                let a = sorted_sample(&mut rng, n, ka);
                for kind in AuthorKind::ALL {
                    checks.set(checks.get() + 1);
                    let got = ae.eval_one(&a, kind);
                    let want = o.author_stat(&a, &chilean, kind);
                    if !close(got, want) {
                        return Err(mismatch(format!("stream {seed} t={t} {kind:?}({a:?})"), got, want));
                    }
                }
                if t == 0 {
                    continue;
                }
                let kc = rng.random_range(1..=5.min(t));
                let c = sorted_sample(&mut rng, t, kc);
                for kind in CitationKind::ALL {
                    checks.set(checks.get() + 1);
                    let got = ce.eval_one(&c, &a, kind);
                    let want = o.citation_stat(&c, &a, kind);
                    if !close(got, want) {
                        return Err(mismatch(format!("stream {seed} t={t} {kind:?}({c:?} | {a:?})"), got, want));
                    }
                }
            }
        }
        if t < w {
            index.apply(&events[t]).map_err(|e| e.to_string())?;
        }
    }
    Ok(checks.get())
}

use hyperevent::estimation::{ChoiceData, ChoiceStratum};
use hyperevent::statistics::StatKind;

pub fn kinds(p: usize) -> Vec<StatKind> {
    AuthorKind::ALL[..p].iter().map(|&k| StatKind::Author(k)).collect()
}

/// Strata of 2..=max_rows rows with standard-normal covariates.
pub fn random_choice_data<R: Rng>(rng: &mut R, strata: usize, max_rows: usize, p: usize) -> ChoiceData {
    let strata = (0..strata)
        .map(|_| {
            let rows = rng.random_range(2..=max_rows);
            let values = (0..rows * p).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            ChoiceStratum { rows, values }
        })
        .collect();
    ChoiceData::new(kinds(p), strata).unwrap()
}

/// Strata whose event row is drawn from the conditional logit with
/// coefficients `beta`, then moved to row 0.
pub fn logit_choice_data<R: Rng>(rng: &mut R, beta: &[f64], strata: usize, rows: usize) -> ChoiceData {
    let p = beta.len();
    let strata = (0..strata)
        .map(|_| {
            let mut values: Vec<f64> =
                (0..rows * p).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let w: Vec<f64> = (0..rows)
                .map(|r| (0..p).map(|c| values[r * p + c] * beta[c]).sum::<f64>().exp())
                .collect();
            let pick = rand::distr::weighted::WeightedIndex::new(&w).unwrap();
            let chosen = rng.sample(pick);
            for c in 0..p {
                values.swap(c, chosen * p + c);
            }
            ChoiceStratum { rows, values }
        })
        .collect();
    ChoiceData::new(kinds(p), strata).unwrap()
}

/// Log partial likelihood straight from the definition, no shifting.
pub fn naive_log_pl(data: &ChoiceData, beta: &[f64]) -> f64 {
    let p = beta.len();
    data.strata
        .iter()
        .map(|s| {
            let eta = |r: usize| (0..p).map(|c| s.values[r * p + c] * beta[c]).sum::<f64>();
            let denom: f64 = (0..s.rows).map(|r| eta(r).exp()).sum();
            eta(0) - denom.ln()
        })
        .sum()
}

/// Scalar strata replicated `count` times each.
pub fn replicated(patterns: &[(&[f64], usize)]) -> ChoiceData {
    let mut strata = Vec::new();
    for (values, count) in patterns {
        for _ in 0..*count {
            strata.push(ChoiceStratum { rows: values.len(), values: values.to_vec() });
        }
    }
    ChoiceData::new(kinds(1), strata).unwrap()
}
