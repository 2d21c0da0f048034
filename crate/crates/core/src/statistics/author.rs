use itertools::Itertools;

use super::AuthorKind;
use crate::error::{Error, Result};
use crate::history::{binom, HistoryIndex};
use crate::stream::{ActorIx, ActorRegistry};

/// Evaluates author-model statistics against a pinned history.
#[derive(Clone, Copy)]
pub struct AuthorEvaluator<'a> {
    index: &'a HistoryIndex,
    chilean: &'a [bool],
}

impl<'a> AuthorEvaluator<'a> {
    pub fn new(index: &'a HistoryIndex, chilean: &'a [bool]) -> Self {
        AuthorEvaluator { index, chilean }
    }

    /// `authors` must be sorted, distinct, non-empty and in range.
    pub fn eval_into(&self, authors: &[ActorIx], kinds: &[AuthorKind], out: &mut [f64]) {
        debug_assert_eq!(kinds.len(), out.len());
        for (slot, &kind) in out.iter_mut().zip(kinds) {
            *slot = self.eval_one(authors, kind);
        }
    }

    pub fn eval_one(&self, a: &[ActorIx], kind: AuthorKind) -> f64 {
        let h = self.index;
        let n = a.len() as f64;
        let pairs = binom(a.len(), 2);
        match kind {
            AuthorKind::RatioChilean => {
                a.iter().filter(|&&i| self.chilean[i as usize]).count() as f64 / n
            }
            AuthorKind::HeterogeneityChilean => {
                if a.len() < 2 {
                    return 0.0;
                }
                let c = a.iter().filter(|&&i| self.chilean[i as usize]).count();
                // Mixed pairs: one Chilean, one not.
                (c * (a.len() - c)) as f64 / pairs
            }
            AuthorKind::CitationPopAuthor => {
                a.iter().map(|&i| h.popularity_unchecked(i) as u64).sum::<u64>() as f64 / n
            }
            AuthorKind::PublicationActivity => {
                a.iter().map(|&i| h.works_by(i).len() as u64).sum::<u64>() as f64 / n
            }
            AuthorKind::CoauthorPairRep => self.subset_rep(a, 2),
            AuthorKind::CoauthorTripleRep => self.subset_rep(a, 3),
            AuthorKind::CoauthorQuartetRep => self.subset_rep(a, 4),
            AuthorKind::CollabWithCitingAuthor => {
                if a.len() < 2 {
                    return 0.0;
                }
                let total: u64 = a
                    .iter()
                    .tuple_combinations()
                    .map(|(&i, &j)| (h.cite_aa_unchecked(i, j) + h.cite_aa_unchecked(j, i)) as u64)
                    .sum();
                total as f64 / (2.0 * pairs)
            }
            AuthorKind::ClosureByCoauthor => {
                if a.len() < 2 {
                    return 0.0;
                }
                let mut total: u64 = 0;
                for (&i, &j) in a.iter().tuple_combinations() {
                    let (small, large) = if h.coauthor_degree(i) <= h.coauthor_degree(j) {
                        (i, j)
                    } else {
                        (j, i)
                    };
                    for (k, n_small) in h.coauthors(small) {
                        if k == large {
                            continue;
                        }
                        let n_large = h.coauth_unchecked(large, k);
                        total += n_small.min(n_large) as u64;
                    }
                }
                total as f64 / pairs
            }
            AuthorKind::ClosureByCitingSameWork => {
                if a.len() < 2 {
                    return 0.0;
                }
                let mut total: u64 = 0;
                for (&i, &j) in a.iter().tuple_combinations() {
                    for (l, n_i) in h.works_cited_by_actor(i) {
                        let n_j = h.actor_cites_work(j, l);
                        total += n_i.min(n_j) as u64;
                    }
                }
                total as f64 / pairs
            }
        }
    }

    fn subset_rep(&self, a: &[ActorIx], k: usize) -> f64 {
        if a.len() < k {
            return 0.0;
        }
        let total: u64 = a
            .iter()
            .copied()
            .combinations(k)
            .map(|s| self.index.cite_aw(&s, &[]))
            .sum();
        total as f64 / binom(a.len(), k)
    }
}

/// Raw author-model statistics for the author set `authors`.
pub fn eval_author_stats(
    index: &HistoryIndex,
    authors: &[ActorIx],
    kinds: &[AuthorKind],
    registry: &ActorRegistry,
) -> Result<Vec<f64>> {
    if authors.is_empty() {
        return Err(Error::InvalidQuery("empty author set".into()));
    }
    let mut a = authors.to_vec();
    a.sort_unstable();
    a.dedup();
    if let Some(&bad) = a.iter().find(|&&i| i as usize >= registry.len() || i as usize >= index.n_actors()) {
        return Err(Error::UnknownActor(bad as usize));
    }
    let chilean = registry.chilean_flags();
    let mut out = vec![0.0; kinds.len()];
    AuthorEvaluator::new(index, &chilean).eval_into(&a, kinds, &mut out);
    Ok(out)
}
