//! Author-model and citation-model statistics.
//!
//! Every statistic is a function of the history strictly before the event
//! being explained, so evaluation always takes a [`HistoryIndex`] borrowed at
//! the event's position.

mod author;
mod citation;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub use author::{eval_author_stats, AuthorEvaluator};
pub use citation::{eval_citation_stats, CitationEvaluator};
pub use transform::{ColumnTransform, TransformSpec};

/// Statistics of the author model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuthorKind {
    RatioChilean,
    HeterogeneityChilean,
    CitationPopAuthor,
    PublicationActivity,
    CoauthorPairRep,
    CoauthorTripleRep,
    CoauthorQuartetRep,
    CollabWithCitingAuthor,
    ClosureByCoauthor,
    ClosureByCitingSameWork,
}

/// Statistics of the citation model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CitationKind {
    CitationPopWork,
    CocitationPopPair,
    CocitationPopTriple,
    CitationRepetition,
    OutdegreePop,
    CiteWorkAndItsCitations,
    SelfCitation,
    AdoptCitationOfCoauthor,
    CiteWorkOfCoauthor,
    AuthorCitesAuthorRep,
    AuthorCitesAuthorRec,
    CiteMuchCitedAuthors,
    CociteCoauthorPairs,
    AuthorCocitation,
}

impl AuthorKind {
    pub const ALL: [AuthorKind; 10] = [
        AuthorKind::RatioChilean,
        AuthorKind::HeterogeneityChilean,
        AuthorKind::CitationPopAuthor,
        AuthorKind::PublicationActivity,
        AuthorKind::CoauthorPairRep,
        AuthorKind::CoauthorTripleRep,
        AuthorKind::CoauthorQuartetRep,
        AuthorKind::CollabWithCitingAuthor,
        AuthorKind::ClosureByCoauthor,
        AuthorKind::ClosureByCitingSameWork,
    ];

    /// Exogenous kinds depend only on actor attributes, not on history.
    pub fn is_exogenous(self) -> bool {
        matches!(self, AuthorKind::RatioChilean | AuthorKind::HeterogeneityChilean)
    }

    pub fn label(self) -> &'static str {
        match self {
            AuthorKind::RatioChilean => "ratio_chilean",
            AuthorKind::HeterogeneityChilean => "heterogeneity_chilean",
            AuthorKind::CitationPopAuthor => "citation_pop_author",
            AuthorKind::PublicationActivity => "publication_activity",
            AuthorKind::CoauthorPairRep => "coauthor_pair_rep",
            AuthorKind::CoauthorTripleRep => "coauthor_triple_rep",
            AuthorKind::CoauthorQuartetRep => "coauthor_quartet_rep",
            AuthorKind::CollabWithCitingAuthor => "collab_with_citing_author",
            AuthorKind::ClosureByCoauthor => "closure_by_coauthor",
            AuthorKind::ClosureByCitingSameWork => "closure_by_citing_same_work",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AuthorKind::RatioChilean => "Ratio Chileans",
            AuthorKind::HeterogeneityChilean => "Heterogeneity Chilean",
            AuthorKind::CitationPopAuthor => "Citation Popularity of Author",
            AuthorKind::PublicationActivity => "Publication Activity",
            AuthorKind::CoauthorPairRep => "Coauthor-pair Repetition",
            AuthorKind::CoauthorTripleRep => "Coauthor-triple Repetition",
            AuthorKind::CoauthorQuartetRep => "Coauthor-quartet Repetition",
            AuthorKind::CollabWithCitingAuthor => "Collaborate with Citing Author",
            AuthorKind::ClosureByCoauthor => "Closure by Coauthor",
            AuthorKind::ClosureByCitingSameWork => "Closure by Citing same Work",
        }
    }
}

impl CitationKind {
    pub const ALL: [CitationKind; 14] = [
        CitationKind::CitationPopWork,
        CitationKind::CocitationPopPair,
        CitationKind::CocitationPopTriple,
        CitationKind::CitationRepetition,
        CitationKind::OutdegreePop,
        CitationKind::CiteWorkAndItsCitations,
        CitationKind::SelfCitation,
        CitationKind::AdoptCitationOfCoauthor,
        CitationKind::CiteWorkOfCoauthor,
        CitationKind::AuthorCitesAuthorRep,
        CitationKind::AuthorCitesAuthorRec,
        CitationKind::CiteMuchCitedAuthors,
        CitationKind::CociteCoauthorPairs,
        CitationKind::AuthorCocitation,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CitationKind::CitationPopWork => "citation_pop_work",
            CitationKind::CocitationPopPair => "cocitation_pop_pair",
            CitationKind::CocitationPopTriple => "cocitation_pop_triple",
            CitationKind::CitationRepetition => "citation_repetition",
            CitationKind::OutdegreePop => "outdegree_pop",
            CitationKind::CiteWorkAndItsCitations => "cite_work_and_its_citations",
            CitationKind::SelfCitation => "self_citation",
            CitationKind::AdoptCitationOfCoauthor => "adopt_citation_of_coauthor",
            CitationKind::CiteWorkOfCoauthor => "cite_work_of_coauthor",
            CitationKind::AuthorCitesAuthorRep => "author_cites_author_rep",
            CitationKind::AuthorCitesAuthorRec => "author_cites_author_rec",
            CitationKind::CiteMuchCitedAuthors => "cite_much_cited_authors",
            CitationKind::CociteCoauthorPairs => "cocite_coauthor_pairs",
            CitationKind::AuthorCocitation => "author_cocitation",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            CitationKind::CitationPopWork => "Citation Popularity of Work",
            CitationKind::CocitationPopPair => "Cocitation Popularity: Pair",
            CitationKind::CocitationPopTriple => "Cocitation Popularity: Triple",
            CitationKind::CitationRepetition => "Citation Repetition",
            CitationKind::OutdegreePop => "Outdegree Popularity",
            CitationKind::CiteWorkAndItsCitations => "Cite Work and its Citations",
            CitationKind::SelfCitation => "Self Citation",
            CitationKind::AdoptCitationOfCoauthor => "Adopt Citation of Coauthor",
            CitationKind::CiteWorkOfCoauthor => "Cite Work of Coauthor",
            CitationKind::AuthorCitesAuthorRep => "Author cites Author Repetition",
            CitationKind::AuthorCitesAuthorRec => "Author cites Author Reciprocation",
            CitationKind::CiteMuchCitedAuthors => "Cite much Cited Authors",
            CitationKind::CociteCoauthorPairs => "Cocite Coauthor Pairs",
            CitationKind::AuthorCocitation => "Author Cocitation",
        }
    }
}

/// Which of the two models a design or stratum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Author,
    Citation,
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelTag::Author => "author",
            ModelTag::Citation => "citation",
        })
    }
}

/// A statistic of either model; serialized by its snake_case label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatKind {
    Author(AuthorKind),
    Citation(CitationKind),
}

impl StatKind {
    pub fn label(self) -> &'static str {
        match self {
            StatKind::Author(k) => k.label(),
            StatKind::Citation(k) => k.label(),
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            StatKind::Author(k) => k.display_name(),
            StatKind::Citation(k) => k.display_name(),
        }
    }

    pub fn is_exogenous(self) -> bool {
        matches!(self, StatKind::Author(k) if k.is_exogenous())
    }

    pub fn model(self) -> ModelTag {
        match self {
            StatKind::Author(_) => ModelTag::Author,
            StatKind::Citation(_) => ModelTag::Citation,
        }
    }

    pub fn all() -> impl Iterator<Item = StatKind> {
        AuthorKind::ALL
            .into_iter()
            .map(StatKind::Author)
            .chain(CitationKind::ALL.into_iter().map(StatKind::Citation))
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StatKind::all()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown statistic `{s}`")))
    }
}

impl FromStr for AuthorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<StatKind>()? {
            StatKind::Author(k) => Ok(k),
            StatKind::Citation(_) => Err(Error::Config(format!("`{s}` is a citation statistic"))),
        }
    }
}

impl FromStr for CitationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.parse::<StatKind>()? {
            StatKind::Citation(k) => Ok(k),
            StatKind::Author(_) => Err(Error::Config(format!("`{s}` is an author statistic"))),
        }
    }
}

macro_rules! serde_by_label {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.label())
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_by_label!(StatKind);
serde_by_label!(AuthorKind);
serde_by_label!(CitationKind);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip_and_are_unique() {
        let mut seen = std::collections::HashSet::new();
        for k in StatKind::all() {
            assert!(seen.insert(k.label()));
            assert_eq!(k.label().parse::<StatKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(serde_json::from_str::<StatKind>(&json).unwrap(), k);
        }
        assert_eq!(seen.len(), 24);
        assert!("nope".parse::<StatKind>().is_err());
        assert!("self_citation".parse::<AuthorKind>().is_err());
    }

    #[test]
    fn exactly_two_exogenous() {
        let exo: Vec<_> = StatKind::all().filter(|k| k.is_exogenous()).collect();
        assert_eq!(
            exo,
            vec![
                StatKind::Author(AuthorKind::RatioChilean),
                StatKind::Author(AuthorKind::HeterogeneityChilean)
            ]
        );
    }
}
