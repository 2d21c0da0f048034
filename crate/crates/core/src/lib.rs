//! Group-to-set relational hyperevent models for publication streams.
//!
//! A publication is a hyperevent linking a group of authors to a set of
//! previously published works it cites. This crate replays an ordered stream
//! of such events, maintains the network attributes of the growing
//! coauthorship/citation history, evaluates the author-model and
//! citation-model statistics, builds case-control strata of size-matched
//! non-events, and fits both models by stratified partial likelihood with
//! robust (sandwich) standard errors.
//!
//! A generative simulator lives in [`simulation`] for parameter-recovery
//! checks.
//!
//! Typical flow:
//!
//! ```no_run
//! use hyperevent::{design, estimation, statistics, stream};
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let events = std::io::BufReader::new(std::fs::File::open("events.jsonl")?);
//! let actors = std::fs::File::open("actors.csv")?;
//! let (stream, _summary) = stream::parse_event_stream(events, actors, &Default::default())?;
//! let kinds = statistics::AuthorKind::ALL.to_vec();
//! let cfg = design::DesignConfig::default();
//! let raw = design::build_author_design(&stream, &kinds, &cfg)?;
//! let spec = statistics::TransformSpec::sqrt_standardize(&raw.columns).fit(&raw)?;
//! let data = estimation::ChoiceData::from_design(&spec.apply_matrix(&raw)?)?;
//! let fit = estimation::fit(&data, &estimation::FitOptions::default())?;
//! println!("logPL = {}", fit.log_pl);
//! # Ok(())
//! # }
//! ```

pub mod design;
pub mod error;
pub mod estimation;
pub mod history;
pub mod sampling;
pub mod simulation;
pub mod statistics;
pub mod stream;

pub use error::{Error, Result};
