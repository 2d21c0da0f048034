//! Domain types for publication streams, ingestion and validation.
//!
//! Events file: one JSON object per line with `work`, optional `seq`,
//! `authors` and `citations`. Actors file: CSV with header
//! `actor_id,chilean` where `chilean` is `0` or `1`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense actor index into an [`ActorRegistry`].
pub type ActorIx = u32;
/// Dense work index: position of the publication in its stream.
pub type WorkIx = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActorId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkId(pub String);

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for WorkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ActorId {
    fn from(s: &str) -> Self {
        ActorId(s.to_owned())
    }
}

impl From<&str> for WorkId {
    fn from(s: &str) -> Self {
        WorkId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub id: ActorId,
    pub chilean: bool,
}

/// The fixed actor universe of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActorRegistry {
    actors: Vec<Actor>,
    index: HashMap<ActorId, ActorIx>,
}

impl ActorRegistry {
    pub fn new(actors: Vec<Actor>) -> Result<Self> {
        let mut index = HashMap::with_capacity(actors.len());
        for (i, a) in actors.iter().enumerate() {
            if a.id.0.is_empty() {
                return Err(Error::Config("empty actor id".into()));
            }
            if index.insert(a.id.clone(), i as ActorIx).is_some() {
                return Err(Error::DuplicateActor(a.id.0.clone()));
            }
        }
        Ok(ActorRegistry { actors, index })
    }

    /// Builds a registry without checking ids; duplicates surface in
    /// [`validate_stream`].
    pub fn new_unchecked(actors: Vec<Actor>) -> Self {
        let mut index = HashMap::with_capacity(actors.len());
        for (i, a) in actors.iter().enumerate() {
            index.entry(a.id.clone()).or_insert(i as ActorIx);
        }
        ActorRegistry { actors, index }
    }

    pub fn len(&self) -> usize {
        self.actors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actors.is_empty()
    }

    pub fn actors(&self) -> &[Actor] {
        &self.actors
    }

    pub fn lookup(&self, id: &ActorId) -> Option<ActorIx> {
        self.index.get(id).copied()
    }

    pub fn id(&self, ix: ActorIx) -> &ActorId {
        &self.actors[ix as usize].id
    }

    pub fn is_chilean(&self, ix: ActorIx) -> bool {
        self.actors[ix as usize].chilean
    }

    /// Chilean flags indexed by [`ActorIx`].
    pub fn chilean_flags(&self) -> Vec<bool> {
        self.actors.iter().map(|a| a.chilean).collect()
    }
}

/// One hyperevent: a work, its author group and the works it cites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Publication {
    pub work: WorkId,
    pub authors: BTreeSet<ActorId>,
    pub citations: BTreeSet<WorkId>,
    pub seq: i64,
    /// Ordering key as found in the source, kept when ties forced renumbering.
    pub source_seq: Option<i64>,
}

impl Publication {
    pub fn new<A, C>(work: &str, authors: A, citations: C, seq: i64) -> Self
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        C: IntoIterator,
        C::Item: AsRef<str>,
    {
        Publication {
            work: WorkId(work.to_owned()),
            authors: authors.into_iter().map(|a| ActorId(a.as_ref().to_owned())).collect(),
            citations: citations
                .into_iter()
                .map(|c| WorkId(c.as_ref().to_owned()))
                .collect(),
            seq,
            source_seq: None,
        }
    }
}

/// A publication with ids resolved to dense indices; `citations` refer to
/// positions of earlier events in the same stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: i64,
    pub authors: Vec<ActorIx>,
    pub citations: Vec<WorkIx>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    registry: ActorRegistry,
    publications: Vec<Publication>,
}

impl EventStream {
    /// Wraps publications as given. Use [`validate_stream`] (or
    /// [`parse_event_stream`], which validates) before fitting.
    pub fn new(registry: ActorRegistry, publications: Vec<Publication>) -> Self {
        EventStream { registry, publications }
    }

    pub fn registry(&self) -> &ActorRegistry {
        &self.registry
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    /// Resolves the stream to dense indices. Fails with [`Error::Invalid`]
    /// unless every stream invariant holds.
    pub fn events(&self) -> Result<Vec<Event>> {
        let report = validate_stream(self);
        if !report.is_valid() {
            return Err(Error::Invalid(report));
        }
        let work_ix: HashMap<&WorkId, WorkIx> = self
            .publications
            .iter()
            .enumerate()
            .map(|(i, p)| (&p.work, i as WorkIx))
            .collect();
        Ok(self
            .publications
            .iter()
            .map(|p| {
                let mut authors: Vec<ActorIx> = p
                    .authors
                    .iter()
                    .map(|a| self.registry.lookup(a).expect("validated"))
                    .collect();
                authors.sort_unstable();
                let mut citations: Vec<WorkIx> =
                    p.citations.iter().map(|c| work_ix[c]).collect();
                citations.sort_unstable();
                Event { seq: p.seq, authors, citations }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyWorkId { position: usize },
    DuplicateWork { work: String },
    EmptyAuthors { work: String },
    UnregisteredAuthor { work: String, actor: String },
    SelfReference { work: String },
    UnknownCitation { work: String, cited: String },
    ForwardCitation { work: String, cited: String },
    NonStrictOrdering { position: usize, seq: i64, previous: i64 },
    DuplicateActor { actor: String },
    EmptyActorId { position: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyWorkId { position } => write!(f, "empty work id at position {position}"),
            Violation::DuplicateWork { work } => write!(f, "duplicate work id `{work}`"),
            Violation::EmptyAuthors { work } => write!(f, "work `{work}` has no authors"),
            Violation::UnregisteredAuthor { work, actor } => {
                write!(f, "work `{work}`: unregistered author `{actor}`")
            }
            Violation::SelfReference { work } => write!(f, "work `{work}`: self-reference"),
            Violation::UnknownCitation { work, cited } => {
                write!(f, "work `{work}`: citation of unknown work `{cited}`")
            }
            Violation::ForwardCitation { work, cited } => {
                write!(f, "work `{work}`: forward citation of `{cited}`")
            }
            Violation::NonStrictOrdering { position, seq, previous } => write!(
                f,
                "non-strict ordering at position {position}: seq {seq} after {previous}"
            ),
            Violation::DuplicateActor { actor } => write!(f, "duplicate actor id `{actor}`"),
            Violation::EmptyActorId { position } => {
                write!(f, "empty actor id at registry position {position}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Informational remarks that do not invalidate the stream, e.g. source
    /// ordering ties that were broken by file order.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Checks every publication and stream invariant. Violations are data, not
/// errors.
pub fn validate_stream(stream: &EventStream) -> ValidationReport {
    let mut report = ValidationReport::default();
    let registry = &stream.registry;

    let mut actor_ids = HashSet::new();
    for (i, a) in registry.actors.iter().enumerate() {
        if a.id.0.is_empty() {
            report.violations.push(Violation::EmptyActorId { position: i });
        } else if !actor_ids.insert(&a.id) {
            report.violations.push(Violation::DuplicateActor { actor: a.id.0.clone() });
        }
    }

    let mut first_seq: HashMap<&WorkId, i64> = HashMap::new();
    for (i, p) in stream.publications.iter().enumerate() {
        if p.work.0.is_empty() {
            report.violations.push(Violation::EmptyWorkId { position: i });
        }
        if first_seq.insert(&p.work, p.seq).is_some() {
            report.violations.push(Violation::DuplicateWork { work: p.work.0.clone() });
        }
        if i > 0 {
            let previous = stream.publications[i - 1].seq;
            if p.seq <= previous {
                report.violations.push(Violation::NonStrictOrdering {
                    position: i,
                    seq: p.seq,
                    previous,
                });
            }
        }
    }

    for p in &stream.publications {
        let work = &p.work.0;
        if p.authors.is_empty() {
            report.violations.push(Violation::EmptyAuthors { work: work.clone() });
        }
        for a in &p.authors {
            if registry.lookup(a).is_none() {
                report.violations.push(Violation::UnregisteredAuthor {
                    work: work.clone(),
                    actor: a.0.clone(),
                });
            }
        }
        for c in &p.citations {
            if *c == p.work {
                report.violations.push(Violation::SelfReference { work: work.clone() });
                continue;
            }
            match first_seq.get(c) {
                None => report.violations.push(Violation::UnknownCitation {
                    work: work.clone(),
                    cited: c.0.clone(),
                }),
                Some(&s) if s >= p.seq => report.violations.push(Violation::ForwardCitation {
                    work: work.clone(),
                    cited: c.0.clone(),
                }),
                Some(_) => {}
            }
        }
    }

    let mut by_source: HashMap<i64, usize> = HashMap::new();
    for p in &stream.publications {
        if let Some(s) = p.source_seq {
            *by_source.entry(s).or_default() += 1;
        }
    }
    let mut tied: Vec<_> = by_source.into_iter().filter(|&(_, n)| n > 1).collect();
    tied.sort_unstable();
    for (key, n) in tied {
        report.notes.push(format!(
            "{n} records share source seq {key}; ordered by file position"
        ));
    }
    report
}

/// What to do with citations of works outside the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CitationPolicy {
    #[default]
    DropWithWarning,
    Strict,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub citation_policy: CitationPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestSummary {
    pub records: usize,
    pub dropped_citations: usize,
    /// Records whose source ordering key collided with another record.
    pub tied_records: usize,
    /// True when ties forced renumbering to consecutive integers.
    pub renumbered: bool,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    work: String,
    #[serde(default)]
    seq: Option<i64>,
    authors: Vec<String>,
    #[serde(default)]
    citations: Vec<String>,
}

#[derive(Debug, Serialize)]
struct OutRecord<'a> {
    work: &'a str,
    seq: i64,
    authors: Vec<&'a str>,
    citations: Vec<&'a str>,
}

/// Reads the actors table (`actor_id,chilean`).
pub fn parse_actors<R: Read>(source: R) -> Result<ActorRegistry> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "actor_id" || &headers[1] != "chilean" {
        return Err(Error::Malformed {
            line: 1,
            message: "actors header must be `actor_id,chilean`".into(),
        });
    }
    let mut actors = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let id = rec.get(0).unwrap_or_default();
        if id.is_empty() {
            return Err(Error::Malformed { line, message: "empty actor id".into() });
        }
        let chilean = match rec.get(1) {
            Some("0") => false,
            Some("1") => true,
            other => {
                return Err(Error::Malformed {
                    line,
                    message: format!("chilean must be 0 or 1, got {other:?}"),
                })
            }
        };
        actors.push(Actor { id: ActorId(id.to_owned()), chilean });
    }
    ActorRegistry::new(actors)
}

/// Reads and validates an events file against an actors table.
///
/// Records are stably sorted by `seq` (line number when absent). When two
/// records share a key, all records are renumbered `1..=n` in sorted order and
/// the source key is kept in [`Publication::source_seq`].
pub fn parse_event_stream<E: BufRead, A: Read>(
    events_source: E,
    actors_source: A,
    opts: &IngestOptions,
) -> Result<(EventStream, IngestSummary)> {
    let registry = parse_actors(actors_source)?;
    let mut records = Vec::new();
    for (i, line) in events_source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.work.is_empty() {
            return Err(Error::Malformed { line: line_no, message: "empty work id".into() });
        }
        if rec.authors.is_empty() {
            return Err(Error::Malformed { line: line_no, message: "empty author list".into() });
        }
        let key = rec.seq.unwrap_or(line_no as i64);
        records.push((key, rec));
    }
    records.sort_by_key(|(k, _)| *k);

    let mut summary = IngestSummary { records: records.len(), ..Default::default() };
    let mut key_counts: HashMap<i64, usize> = HashMap::new();
    for (k, _) in &records {
        *key_counts.entry(*k).or_default() += 1;
    }
    summary.tied_records = key_counts.values().filter(|&&n| n > 1).sum();
    summary.renumbered = summary.tied_records > 0;

    let mut position: HashMap<String, usize> = HashMap::with_capacity(records.len());
    for (i, (_, rec)) in records.iter().enumerate() {
        if position.insert(rec.work.clone(), i).is_some() {
            return Err(Error::DuplicateWork(rec.work.clone()));
        }
    }

    let mut publications = Vec::with_capacity(records.len());
    for (i, (key, rec)) in records.into_iter().enumerate() {
        for a in &rec.authors {
            if registry.lookup(&ActorId(a.clone())).is_none() {
                return Err(Error::UnregisteredAuthor { work: rec.work.clone(), actor: a.clone() });
            }
        }
        let mut citations = BTreeSet::new();
        for c in rec.citations {
            if c == rec.work {
                return Err(Error::SelfReference { work: rec.work });
            }
            match position.get(&c) {
                None => match opts.citation_policy {
                    CitationPolicy::DropWithWarning => {
                        log::warn!("work `{}`: dropping citation of unknown work `{}`", rec.work, c);
                        summary.dropped_citations += 1;
                    }
                    CitationPolicy::Strict => {
                        return Err(Error::UnknownCitation { work: rec.work, cited: c })
                    }
                },
                Some(&j) if j >= i => {
                    return Err(Error::ForwardCitation { work: rec.work, cited: c })
                }
                Some(_) => {
                    citations.insert(WorkId(c));
                }
            }
        }
        let seq = if summary.renumbered { i as i64 + 1 } else { key };
        publications.push(Publication {
            work: WorkId(rec.work),
            authors: rec.authors.into_iter().map(ActorId).collect(),
            citations,
            seq,
            source_seq: rec.seq.map(|_| key),
        });
    }

    let stream = EventStream::new(registry, publications);
    let report = validate_stream(&stream);
    if !report.is_valid() {
        return Err(Error::Invalid(report));
    }
    Ok((stream, summary))
}

/// Writes the stream in the events-file format, one record per line.
pub fn write_events<W: Write>(stream: &EventStream, mut out: W) -> Result<()> {
    for p in &stream.publications {
        let rec = OutRecord {
            work: &p.work.0,
            seq: p.seq,
            authors: p.authors.iter().map(|a| a.0.as_str()).collect(),
            citations: p.citations.iter().map(|c| c.0.as_str()).collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_actors<W: Write>(registry: &ActorRegistry, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["actor_id", "chilean"])?;
    for a in &registry.actors {
        w.write_record([a.id.0.as_str(), if a.chilean { "1" } else { "0" }])?;
    }
    w.flush()?;
    Ok(())
}
