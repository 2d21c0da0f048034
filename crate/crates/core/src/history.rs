//! Incremental store of the coauthorship and citation history.
//!
//! Events are applied strictly in order by a single writer. A shared borrow
//! of a [`HistoryIndex`] pins its as-of position: every query then reflects
//! exactly the works applied so far, i.e. those published strictly before the
//! next event.
//!
//! Joint counts are materialized for actor subsets up to size 4 and for
//! co-cited work subsets up to size 3; other orders of
//! [`HistoryIndex::cite_aw`] fall back to scanning the smallest posting list.

use std::io::{Read, Write};

use itertools::Itertools;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::stream::{ActorIx, Event, WorkIx};

type Counts<K> = FxHashMap<K, u32>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkRecord {
    /// Sorted author indices.
    pub authors: Vec<ActorIx>,
    /// Sorted indices of cited works.
    pub citations: Vec<WorkIx>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryIndex {
    n_actors: usize,
    last_seq: Option<i64>,
    works: Vec<WorkRecord>,
    /// Works citing each work, in application order.
    cited_by: Vec<Vec<WorkIx>>,
    /// Works authored by each actor, in application order.
    actor_works: Vec<Vec<WorkIx>>,
    /// Symmetric coauthor counts, no diagonal.
    coauth: Vec<Counts<ActorIx>>,
    triples: Counts<[ActorIx; 3]>,
    quartets: Counts<[ActorIx; 4]>,
    /// Works by actor i that cite work l.
    actor_cites: Vec<Counts<WorkIx>>,
    /// Row i: works by i citing at least one work by j (diagonal included).
    cite_aa: Vec<Counts<ActorIx>>,
    popularity: Vec<u32>,
    /// Symmetric author cocitation counts, no diagonal.
    cocite_aa: Vec<Counts<ActorIx>>,
    cocite_pairs: Counts<(WorkIx, WorkIx)>,
    cocite_triples: Counts<[WorkIx; 3]>,
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"HYPX";
const SNAPSHOT_VERSION: u32 = 1;

fn bump<K: std::hash::Hash + Eq>(map: &mut Counts<K>, key: K) {
    *map.entry(key).or_insert(0) += 1;
}

/// Sorted, deduplicated copy.
fn canonical<T: Ord + Copy>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn contains_all<T: Ord>(haystack: &[T], needles: &[T]) -> bool {
    needles.iter().all(|n| haystack.binary_search(n).is_ok())
}

pub(crate) fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

impl HistoryIndex {
    pub fn new(n_actors: usize) -> Self {
        HistoryIndex {
            n_actors,
            last_seq: None,
            works: Vec::new(),
            cited_by: Vec::new(),
            actor_works: vec![Vec::new(); n_actors],
            coauth: vec![Counts::default(); n_actors],
            triples: Counts::default(),
            quartets: Counts::default(),
            actor_cites: vec![Counts::default(); n_actors],
            cite_aa: vec![Counts::default(); n_actors],
            popularity: vec![0; n_actors],
            cocite_aa: vec![Counts::default(); n_actors],
            cocite_pairs: Counts::default(),
            cocite_triples: Counts::default(),
        }
    }

    pub fn n_actors(&self) -> usize {
        self.n_actors
    }

    /// Number of works applied; equals the stream position of the next event.
    pub fn len(&self) -> usize {
        self.works.len()
    }

    pub fn is_empty(&self) -> bool {
        self.works.is_empty()
    }

    pub fn last_seq(&self) -> Option<i64> {
        self.last_seq
    }

    pub fn work(&self, l: WorkIx) -> Result<&WorkRecord> {
        self.works.get(l as usize).ok_or(Error::UnknownWork(l as usize))
    }

    pub fn works(&self) -> &[WorkRecord] {
        &self.works
    }

    fn check_actor(&self, i: ActorIx) -> Result<()> {
        if (i as usize) < self.n_actors {
            Ok(())
        } else {
            Err(Error::UnknownActor(i as usize))
        }
    }

    fn check_work(&self, l: WorkIx) -> Result<()> {
        if (l as usize) < self.works.len() {
            Ok(())
        } else {
            Err(Error::UnknownWork(l as usize))
        }
    }

    /// Appends one publication to the history.
    pub fn apply(&mut self, event: &Event) -> Result<()> {
        if let Some(last) = self.last_seq {
            if event.seq <= last {
                return Err(Error::OutOfOrder { seq: event.seq, as_of: last });
            }
        }
        let authors = canonical(&event.authors);
        let citations = canonical(&event.citations);
        for &a in &authors {
            self.check_actor(a)?;
        }
        for &c in &citations {
            self.check_work(c)?;
        }
        let l = self.works.len() as WorkIx;

        for &a in &authors {
            self.actor_works[a as usize].push(l);
        }
        for (&a, &b) in authors.iter().tuple_combinations() {
            bump(&mut self.coauth[a as usize], b);
            bump(&mut self.coauth[b as usize], a);
        }
        for (a, b, c) in authors.iter().copied().tuple_combinations() {
            bump(&mut self.triples, [a, b, c]);
        }
        for (a, b, c, d) in authors.iter().copied().tuple_combinations() {
            bump(&mut self.quartets, [a, b, c, d]);
        }

        for &c in &citations {
            self.cited_by[c as usize].push(l);
            for &a in &authors {
                bump(&mut self.actor_cites[a as usize], c);
            }
        }
        for (h, k) in citations.iter().copied().tuple_combinations() {
            bump(&mut self.cocite_pairs, (h, k));
        }
        for (h, k, m) in citations.iter().copied().tuple_combinations() {
            bump(&mut self.cocite_triples, [h, k, m]);
        }

        let cited_authors: Vec<ActorIx> = citations
            .iter()
            .flat_map(|&c| self.works[c as usize].authors.iter().copied())
            .sorted_unstable()
            .dedup()
            .collect();
        for &i in &authors {
            for &j in &cited_authors {
                bump(&mut self.cite_aa[i as usize], j);
            }
        }
        for &j in &cited_authors {
            self.popularity[j as usize] += 1;
        }
        for (&i, &j) in cited_authors.iter().tuple_combinations() {
            bump(&mut self.cocite_aa[i as usize], j);
            bump(&mut self.cocite_aa[j as usize], i);
        }

        self.works.push(WorkRecord { authors, citations });
        self.cited_by.push(Vec::new());
        self.last_seq = Some(event.seq);
        Ok(())
    }

    /// Number of past works whose author set contains `a` and whose reference
    /// list contains `c`. Both empty gives the number of past works.
    pub fn cite_aw(&self, a: &[ActorIx], c: &[WorkIx]) -> u64 {
        let a = canonical(a);
        let c = canonical(c);
        if a.iter().any(|&i| i as usize >= self.n_actors)
            || c.iter().any(|&l| l as usize >= self.works.len())
        {
            return 0;
        }
        match (a.len(), c.len()) {
            (0, 0) => self.works.len() as u64,
            (1, 0) => self.actor_works[a[0] as usize].len() as u64,
            (2, 0) => self.coauth_count(a[0], a[1]) as u64,
            (3, 0) => self.triples.get(&[a[0], a[1], a[2]]).copied().unwrap_or(0) as u64,
            (4, 0) => self
                .quartets
                .get(&[a[0], a[1], a[2], a[3]])
                .copied()
                .unwrap_or(0) as u64,
            (0, 1) => self.cited_by[c[0] as usize].len() as u64,
            (0, 2) => self.cocite_pairs.get(&(c[0], c[1])).copied().unwrap_or(0) as u64,
            (0, 3) => self.cocite_triples.get(&[c[0], c[1], c[2]]).copied().unwrap_or(0) as u64,
            (1, 1) => self.actor_cites[a[0] as usize].get(&c[0]).copied().unwrap_or(0) as u64,
            _ => self.scan_cite_aw(&a, &c),
        }
    }

    fn scan_cite_aw(&self, a: &[ActorIx], c: &[WorkIx]) -> u64 {
        let postings = a
            .iter()
            .map(|&i| &self.actor_works[i as usize])
            .chain(c.iter().map(|&l| &self.cited_by[l as usize]))
            .min_by_key(|p| p.len())
            .expect("at least one non-empty argument");
        postings
            .iter()
            .filter(|&&w| {
                let rec = &self.works[w as usize];
                contains_all(&rec.authors, a) && contains_all(&rec.citations, c)
            })
            .count() as u64
    }

    /// Average of [`cite_aw`](Self::cite_aw) over all size-`k` subsets of `a`
    /// crossed with size-`kstar` subsets of `c`. Zero when a set is smaller
    /// than its subset order.
    pub fn subrep(&self, a: &[ActorIx], c: &[WorkIx], k: usize, kstar: usize) -> Result<f64> {
        if k == 0 && kstar == 0 {
            return Err(Error::InvalidQuery("subrep order (0,0) is undefined".into()));
        }
        let a = canonical(a);
        let c = canonical(c);
        if a.len() < k || c.len() < kstar {
            return Ok(0.0);
        }
        let mut total: u64 = 0;
        for sa in a.iter().copied().combinations(k) {
            for sc in c.iter().copied().combinations(kstar) {
                total += self.cite_aw(&sa, &sc);
            }
        }
        Ok(total as f64 / (binom(a.len(), k) * binom(c.len(), kstar)))
    }

    fn coauth_count(&self, i: ActorIx, j: ActorIx) -> u32 {
        if i == j {
            return self.actor_works[i as usize].len() as u32;
        }
        self.coauth[i as usize].get(&j).copied().unwrap_or(0)
    }

    /// Number of past works coauthored by `i` and `j`. For `i == j` this is
    /// the publication count of `i` (the pair collapses to a singleton).
    pub fn coauth(&self, i: ActorIx, j: ActorIx) -> Result<u32> {
        self.check_actor(i)?;
        self.check_actor(j)?;
        Ok(self.coauth_count(i, j))
    }

    pub(crate) fn coauth_unchecked(&self, i: ActorIx, j: ActorIx) -> u32 {
        self.coauth_count(i, j)
    }

    pub fn coauthor_degree(&self, i: ActorIx) -> usize {
        self.coauth[i as usize].len()
    }

    /// Past coauthors of `i` with their joint-publication counts.
    pub fn coauthors(&self, i: ActorIx) -> impl Iterator<Item = (ActorIx, u32)> + '_ {
        self.coauth[i as usize].iter().map(|(&j, &n)| (j, n))
    }

    pub fn publication_count(&self, i: ActorIx) -> Result<u32> {
        self.check_actor(i)?;
        Ok(self.actor_works[i as usize].len() as u32)
    }

    pub fn works_by(&self, i: ActorIx) -> &[WorkIx] {
        &self.actor_works[i as usize]
    }

    /// Number of past works by `i` that cite at least one work by `j`.
    pub fn cite_aa(&self, i: ActorIx, j: ActorIx) -> Result<u32> {
        self.check_actor(i)?;
        self.check_actor(j)?;
        if i == j {
            return Err(Error::InvalidQuery("author-to-author citation needs i != j".into()));
        }
        Ok(self.cite_aa_unchecked(i, j))
    }

    pub(crate) fn cite_aa_unchecked(&self, i: ActorIx, j: ActorIx) -> u32 {
        self.cite_aa[i as usize].get(&j).copied().unwrap_or(0)
    }

    /// Number of past works citing at least one work authored by `i`.
    pub fn citation_popularity(&self, i: ActorIx) -> Result<u32> {
        self.check_actor(i)?;
        Ok(self.popularity[i as usize])
    }

    pub(crate) fn popularity_unchecked(&self, i: ActorIx) -> u32 {
        self.popularity[i as usize]
    }

    /// 1 if work `k` cites work `h`.
    pub fn cite_ww(&self, k: WorkIx, h: WorkIx) -> Result<u8> {
        self.check_work(k)?;
        self.check_work(h)?;
        Ok(self.works[k as usize].citations.binary_search(&h).is_ok() as u8)
    }

    pub fn outdegree(&self, l: WorkIx) -> Result<usize> {
        Ok(self.work(l)?.citations.len())
    }

    pub fn in_citations(&self, l: WorkIx) -> Result<usize> {
        self.check_work(l)?;
        Ok(self.cited_by[l as usize].len())
    }

    /// 1 if `i` is an author of `l`.
    pub fn auth(&self, i: ActorIx, l: WorkIx) -> Result<u8> {
        self.check_actor(i)?;
        Ok(self.work(l)?.authors.binary_search(&i).is_ok() as u8)
    }

    /// Number of past works by `i` citing work `l`.
    pub fn actor_cites_work(&self, i: ActorIx, l: WorkIx) -> u32 {
        self.actor_cites[i as usize].get(&l).copied().unwrap_or(0)
    }

    /// Works cited by `i`, with the number of `i`'s works citing each.
    pub fn works_cited_by_actor(&self, i: ActorIx) -> impl Iterator<Item = (WorkIx, u32)> + '_ {
        self.actor_cites[i as usize].iter().map(|(&l, &n)| (l, n))
    }

    /// Number of past works citing at least one work of `i` and at least one
    /// work of `j`.
    pub fn cocite_aa(&self, i: ActorIx, j: ActorIx) -> Result<u32> {
        self.check_actor(i)?;
        self.check_actor(j)?;
        if i == j {
            return Err(Error::InvalidQuery("author cocitation needs i != j".into()));
        }
        Ok(self.cocite_aa_unchecked(i, j))
    }

    pub(crate) fn cocite_aa_unchecked(&self, i: ActorIx, j: ActorIx) -> u32 {
        self.cocite_aa[i as usize].get(&j).copied().unwrap_or(0)
    }

    /// Writes a versioned, checksummed binary snapshot.
    pub fn save_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        let mut payload = Vec::new();
        ciborium::into_writer(self, &mut payload).map_err(|e| Error::Snapshot(e.to_string()))?;
        let digest = Sha256::digest(&payload);
        out.write_all(SNAPSHOT_MAGIC)?;
        out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        out.write_all(&(payload.len() as u64).to_le_bytes())?;
        out.write_all(&payload)?;
        out.write_all(digest.as_slice())?;
        Ok(())
    }

    pub fn load_snapshot<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let mut len = [0u8; 8];
        input.read_exact(&mut len)?;
        let len = u64::from_le_bytes(len) as usize;
        let mut payload = vec![0u8; len];
        input.read_exact(&mut payload)?;
        let mut stored = [0u8; 32];
        input.read_exact(&mut stored)?;
        if Sha256::digest(&payload).as_slice() != stored {
            return Err(Error::Snapshot("checksum mismatch".into()));
        }
        ciborium::from_reader(payload.as_slice()).map_err(|e| Error::Snapshot(e.to_string()))
    }
}

/// Replays `events[..upto]` into a fresh index.
pub fn replay(n_actors: usize, events: &[Event], upto: usize) -> Result<HistoryIndex> {
    let mut index = HistoryIndex::new(n_actors);
    for e in &events[..upto] {
        index.apply(e)?;
    }
    Ok(index)
}
