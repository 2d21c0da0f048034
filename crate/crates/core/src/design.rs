//! Design matrices: raw statistic vectors for every event and its controls,
//! grouped into strata.
//!
//! The stream is replayed once. Before each event is applied, its strata are
//! sampled and every candidate set is evaluated against the history as it
//! stands, so an event never sees its own content.

use std::io::Write;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::HistoryIndex;
use crate::sampling::{self, derived_rng, model_stream, ControlConfig, Stratum};
use crate::statistics::{AuthorEvaluator, AuthorKind, CitationEvaluator, CitationKind, ModelTag, StatKind};
use crate::stream::{Event, EventStream};

/// One stratum of a design. Row 0 is the observed event.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignStratum {
    /// Stream position of the event.
    pub event: usize,
    pub rows: usize,
    pub set_size: usize,
    pub risk_set_size: BigUint,
    pub full_enumeration: bool,
    /// `rows * set_size` member indices, or empty when not retained.
    pub candidates: Vec<u32>,
    /// `rows * columns` values, row-major.
    pub values: Vec<f64>,
}

impl DesignStratum {
    /// Minimal stratum over pre-computed values (single column or row-major).
    pub fn from_values(event: usize, rows: usize, values: Vec<f64>) -> Self {
        DesignStratum {
            event,
            rows,
            set_size: 0,
            risk_set_size: BigUint::from(rows),
            full_enumeration: true,
            candidates: Vec::new(),
            values,
        }
    }

    pub fn is_informative(&self) -> bool {
        self.rows > 1
    }

    pub fn candidate(&self, row: usize) -> Option<&[u32]> {
        if self.candidates.is_empty() {
            None
        } else {
            Some(&self.candidates[row * self.set_size..(row + 1) * self.set_size])
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignDiagnostics {
    pub strata: usize,
    pub rows: usize,
    /// Strata retained with no controls (risk set of size one).
    pub non_informative: usize,
    pub full_enumeration: usize,
    /// Events with an empty reference list, which have no citation stratum.
    pub skipped_empty: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub model: ModelTag,
    pub columns: Vec<StatKind>,
    pub strata: Vec<DesignStratum>,
    pub diagnostics: DesignDiagnostics,
    pub transformed: bool,
}

/// Borrowed view of one design row.
#[derive(Debug, Clone, Copy)]
pub struct RawDesignRow<'a> {
    pub stratum: usize,
    pub event: usize,
    pub is_event: bool,
    pub candidate: Option<&'a [u32]>,
    pub values: &'a [f64],
}

impl DesignMatrix {
    pub fn empty(model: ModelTag, columns: Vec<StatKind>) -> Self {
        DesignMatrix {
            model,
            columns,
            strata: Vec::new(),
            diagnostics: DesignDiagnostics::default(),
            transformed: false,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.strata.iter().map(|s| s.rows).sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = RawDesignRow<'_>> {
        let p = self.columns.len();
        self.strata.iter().enumerate().flat_map(move |(si, s)| {
            (0..s.rows).map(move |r| RawDesignRow {
                stratum: si,
                event: s.event,
                is_event: r == 0,
                candidate: s.candidate(r),
                values: &s.values[r * p..(r + 1) * p],
            })
        })
    }

    /// Tabular text: `stratum,event,is_event,candidate,<one column per kind>`.
    /// Candidate members are `;`-separated ids resolved through `name`.
    pub fn write_csv<W: Write>(&self, out: W, name: impl Fn(u32) -> String) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["stratum".to_string(), "event".into(), "is_event".into(), "candidate".into()];
        header.extend(self.columns.iter().map(|k| k.label().to_string()));
        w.write_record(&header)?;
        for row in self.rows() {
            let mut rec = vec![
                row.stratum.to_string(),
                row.event.to_string(),
                (row.is_event as u8).to_string(),
                row.candidate
                    .map(|c| c.iter().map(|&m| name(m)).collect::<Vec<_>>().join(";"))
                    .unwrap_or_default(),
            ];
            rec.extend(row.values.iter().map(|v| format!("{v}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignConfig {
    pub controls: ControlConfig,
    /// Keep the member ids of every candidate set (needed for tabular output).
    pub keep_candidates: bool,
}

struct Builder<'a, K> {
    kinds: &'a [K],
    design: DesignMatrix,
}

impl<'a, K> Builder<'a, K> {
    fn push(&mut self, stratum: &Stratum, values: Vec<f64>, keep: bool) {
        let rows = 1 + stratum.controls.len();
        let d = &mut self.design.diagnostics;
        d.strata += 1;
        d.rows += rows;
        if !stratum.is_informative() {
            d.non_informative += 1;
        }
        if stratum.full_enumeration {
            d.full_enumeration += 1;
        }
        let candidates = if keep {
            let mut c = stratum.observed.clone();
            for ctl in &stratum.controls {
                c.extend_from_slice(ctl);
            }
            c
        } else {
            Vec::new()
        };
        self.design.strata.push(DesignStratum {
            event: stratum.event,
            rows,
            set_size: stratum.observed.len(),
            risk_set_size: stratum.risk_set_size.clone(),
            full_enumeration: stratum.full_enumeration,
            candidates,
            values,
        });
    }
}

fn eval_rows<F>(stratum: &Stratum, p: usize, eval: F) -> Vec<f64>
where
    F: Fn(&[u32], &mut [f64]) + Sync,
{
    let rows = 1 + stratum.controls.len();
    let mut values = vec![0.0; rows * p];
    if p == 0 {
        return values;
    }
    let (first, rest) = values.split_at_mut(p);
    eval(&stratum.observed, first);
    rest.par_chunks_mut(p)
        .zip(stratum.controls.par_iter())
        .for_each(|(out, set)| eval(set, out));
    values
}

/// Builds the author-model and/or citation-model designs in one replay.
pub fn build_designs(
    stream: &EventStream,
    author_kinds: Option<&[AuthorKind]>,
    citation_kinds: Option<&[CitationKind]>,
    cfg: &DesignConfig,
) -> Result<(Option<DesignMatrix>, Option<DesignMatrix>)> {
    let events = stream.events()?;
    build_designs_from_events(stream.registry().chilean_flags(), &events, author_kinds, citation_kinds, cfg)
}

pub fn build_designs_from_events(
    chilean: Vec<bool>,
    events: &[Event],
    author_kinds: Option<&[AuthorKind]>,
    citation_kinds: Option<&[CitationKind]>,
    cfg: &DesignConfig,
) -> Result<(Option<DesignMatrix>, Option<DesignMatrix>)> {
    cfg.controls.validate()?;
    let n_actors = chilean.len();
    let mut author = author_kinds.map(|kinds| Builder {
        kinds,
        design: DesignMatrix::empty(ModelTag::Author, kinds.iter().map(|&k| StatKind::Author(k)).collect()),
    });
    let mut citation = citation_kinds.map(|kinds| Builder {
        kinds,
        design: DesignMatrix::empty(ModelTag::Citation, kinds.iter().map(|&k| StatKind::Citation(k)).collect()),
    });
    let registry_len = n_actors;
    let mut index = HistoryIndex::new(n_actors);
    let seed = cfg.controls.seed;

    for (pos, ev) in events.iter().enumerate() {
        if let Some(b) = author.as_mut() {
            let mut rng = derived_rng(seed, model_stream(ModelTag::Author), pos as u64);
            let mut observed = ev.authors.clone();
            observed.sort_unstable();
            observed.dedup();
            if observed.is_empty() || observed.len() > registry_len {
                return Err(Error::InvalidQuery(format!("event {pos}: invalid author set")));
            }
            let (controls, risk, full) =
                sampling::sample_subsets(registry_len, &observed, cfg.controls.author_controls, cfg.controls.distinct, &mut rng)?;
            let stratum = Stratum {
                event: pos,
                model: ModelTag::Author,
                observed,
                controls,
                risk_set_size: risk,
                full_enumeration: full,
            };
            let eval = AuthorEvaluator::new(&index, &chilean);
            let kinds = b.kinds;
            let values = eval_rows(&stratum, kinds.len(), |set, out| eval.eval_into(set, kinds, out));
            b.push(&stratum, values, cfg.keep_candidates);
        }
        if let Some(b) = citation.as_mut() {
            if ev.citations.is_empty() {
                b.design.diagnostics.skipped_empty += 1;
            } else {
                let mut rng = derived_rng(seed, model_stream(ModelTag::Citation), pos as u64);
                let stratum = sampling::sample_citation_controls(pos, ev, &cfg.controls, &mut rng)?;
                let eval = CitationEvaluator::new(&index);
                let mut authors = ev.authors.clone();
                authors.sort_unstable();
                authors.dedup();
                let kinds = b.kinds;
                let values =
                    eval_rows(&stratum, kinds.len(), |set, out| eval.eval_into(set, &authors, kinds, out));
                b.push(&stratum, values, cfg.keep_candidates);
            }
        }
        index.apply(ev)?;
    }
    Ok((author.map(|b| b.design), citation.map(|b| b.design)))
}

pub fn build_author_design(stream: &EventStream, kinds: &[AuthorKind], cfg: &DesignConfig) -> Result<DesignMatrix> {
    Ok(build_designs(stream, Some(kinds), None, cfg)?.0.expect("author design requested"))
}

pub fn build_citation_design(
    stream: &EventStream,
    kinds: &[CitationKind],
    cfg: &DesignConfig,
) -> Result<DesignMatrix> {
    Ok(build_designs(stream, None, Some(kinds), cfg)?.1.expect("citation design requested"))
}
