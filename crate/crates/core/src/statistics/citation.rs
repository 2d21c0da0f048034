use itertools::Itertools;

use super::CitationKind;
use crate::error::{Error, Result};
use crate::history::{binom, HistoryIndex};
use crate::stream::{ActorIx, WorkIx};

/// Evaluates citation-model statistics against a pinned history.
#[derive(Clone, Copy)]
pub struct CitationEvaluator<'a> {
    index: &'a HistoryIndex,
}

impl<'a> CitationEvaluator<'a> {
    pub fn new(index: &'a HistoryIndex) -> Self {
        CitationEvaluator { index }
    }

    /// `works` must be sorted, distinct, non-empty and already published;
    /// `authors` sorted and distinct.
    pub fn eval_into(
        &self,
        works: &[WorkIx],
        authors: &[ActorIx],
        kinds: &[CitationKind],
        out: &mut [f64],
    ) {
        debug_assert_eq!(kinds.len(), out.len());
        for (slot, &kind) in out.iter_mut().zip(kinds) {
            *slot = self.eval_one(works, authors, kind);
        }
    }

    pub fn eval_one(&self, c: &[WorkIx], a: &[ActorIx], kind: CitationKind) -> f64 {
        let h = self.index;
        let nc = c.len() as f64;
        let dyadic = (a.len() * c.len()) as f64;
        let work_pairs = binom(c.len(), 2);
        let authors_of = |l: WorkIx| -> &[ActorIx] { &h.works()[l as usize].authors };
        match kind {
            CitationKind::CitationPopWork => {
                c.iter().map(|&l| h.in_citations(l).unwrap_or(0) as u64).sum::<u64>() as f64 / nc
            }
            CitationKind::CocitationPopPair => self.cocitation_rep(c, 2),
            CitationKind::CocitationPopTriple => self.cocitation_rep(c, 3),
            CitationKind::CitationRepetition => {
                if a.is_empty() {
                    return 0.0;
                }
                let mut total: u64 = 0;
                for &i in a {
                    for &l in c {
                        total += h.actor_cites_work(i, l) as u64;
                    }
                }
                total as f64 / dyadic
            }
            CitationKind::OutdegreePop => {
                c.iter().map(|&l| h.works()[l as usize].citations.len() as u64).sum::<u64>() as f64
                    / nc
            }
            CitationKind::CiteWorkAndItsCitations => {
                if c.len() < 2 {
                    return 0.0;
                }
                let cites = |k: WorkIx, m: WorkIx| h.works()[k as usize].citations.binary_search(&m).is_ok();
                let total = c
                    .iter()
                    .tuple_combinations()
                    .map(|(&k, &m)| cites(k, m) as u64 + cites(m, k) as u64)
                    .sum::<u64>();
                total as f64 / work_pairs
            }
            CitationKind::SelfCitation => {
                if a.is_empty() {
                    return 0.0;
                }
                let mut total: u64 = 0;
                for &l in c {
                    let la = authors_of(l);
                    total += a.iter().filter(|i| la.binary_search(i).is_ok()).count() as u64;
                }
                total as f64 / dyadic
            }
            CitationKind::AdoptCitationOfCoauthor => {
                if a.is_empty() {
                    return 0.0;
                }
                let mut total: u64 = 0;
                for &i in a {
                    for (j, n_ij) in h.coauthors(i) {
                        for &l in c {
                            total += n_ij.min(h.actor_cites_work(j, l)) as u64;
                        }
                    }
                }
                total as f64 / dyadic
            }
            CitationKind::CiteWorkOfCoauthor => {
                self.author_link(c, a, |i, j| h.coauth_unchecked(i, j) > 0)
            }
            CitationKind::AuthorCitesAuthorRep => {
                self.author_link(c, a, |i, j| h.cite_aa_unchecked(i, j) > 0)
            }
            CitationKind::AuthorCitesAuthorRec => {
                self.author_link(c, a, |i, j| h.cite_aa_unchecked(j, i) > 0)
            }
            CitationKind::CiteMuchCitedAuthors => {
                let total: u64 = c
                    .iter()
                    .map(|&l| {
                        authors_of(l)
                            .iter()
                            .map(|&i| h.popularity_unchecked(i))
                            .max()
                            .unwrap_or(0) as u64
                    })
                    .sum();
                total as f64 / nc
            }
            CitationKind::CociteCoauthorPairs => {
                // i == j is admitted: coauth(i, i) is i's publication count,
                // positive whenever i authored k.
                self.linked_pairs(c, |i, j| i == j || h.coauth_unchecked(i, j) > 0)
            }
            CitationKind::AuthorCocitation => {
                self.linked_pairs(c, |i, j| i != j && h.cocite_aa_unchecked(i, j) > 0)
            }
        }
    }

    fn cocitation_rep(&self, c: &[WorkIx], k: usize) -> f64 {
        if c.len() < k {
            return 0.0;
        }
        let total: u64 = c
            .iter()
            .copied()
            .combinations(k)
            .map(|s| self.index.cite_aw(&[], &s))
            .sum();
        total as f64 / binom(c.len(), k)
    }

    /// Sum over i in A, l in C, j an author of l with j != i, of
    /// `linked(i, j)`, divided by |A||C|.
    fn author_link(&self, c: &[WorkIx], a: &[ActorIx], linked: impl Fn(ActorIx, ActorIx) -> bool) -> f64 {
        if a.is_empty() {
            return 0.0;
        }
        let h = self.index;
        let mut total: u64 = 0;
        for &l in c {
            let la = &h.works()[l as usize].authors;
            for &i in a {
                total += la.iter().filter(|&&j| j != i && linked(i, j)).count() as u64;
            }
        }
        total as f64 / (a.len() * c.len()) as f64
    }

    /// Fraction of work pairs {k, l} in C with some author i of k and j of l
    /// such that `linked(i, j)`.
    fn linked_pairs(&self, c: &[WorkIx], linked: impl Fn(ActorIx, ActorIx) -> bool) -> f64 {
        if c.len() < 2 {
            return 0.0;
        }
        let h = self.index;
        let hits = c
            .iter()
            .tuple_combinations()
            .filter(|&(&k, &l)| {
                let ak = &h.works()[k as usize].authors;
                let al = &h.works()[l as usize].authors;
                ak.iter().any(|&i| al.iter().any(|&j| linked(i, j)))
            })
            .count();
        hits as f64 / binom(c.len(), 2)
    }
}

/// Raw citation-model statistics for reference list `works` chosen by
/// author group `authors`.
pub fn eval_citation_stats(
    index: &HistoryIndex,
    works: &[WorkIx],
    authors: &[ActorIx],
    kinds: &[CitationKind],
) -> Result<Vec<f64>> {
    if works.is_empty() {
        return Err(Error::InvalidQuery("empty citation set".into()));
    }
    let mut c = works.to_vec();
    c.sort_unstable();
    c.dedup();
    if let Some(&bad) = c.iter().find(|&&l| l as usize >= index.len()) {
        // Includes the event's own work, which is not in the history yet.
        return Err(Error::UnknownWork(bad as usize));
    }
    let mut a = authors.to_vec();
    a.sort_unstable();
    a.dedup();
    if let Some(&bad) = a.iter().find(|&&i| i as usize >= index.n_actors()) {
        return Err(Error::UnknownActor(bad as usize));
    }
    let mut out = vec![0.0; kinds.len()];
    CitationEvaluator::new(index).eval_into(&c, &a, kinds, &mut out);
    Ok(out)
}
