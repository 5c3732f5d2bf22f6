//! Made-in attribution: which countries a publication is produced in.
//!
//! A publication is made in country `c` when at least the threshold share
//! (default one half) of the institutions in its address list belong to
//! `c`, counted over the whole list, not only tracked countries. Shares
//! are compared as exact rationals. At the default threshold an exact
//! 50/50 split attributes the publication to both countries and marks it
//! as a tie; downstream totals then count it once per country, and the
//! diagnostics surface how often that happens.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::corpus::{AnalysisConfig, Corpus, CountryCode, PublicationRecord, Threshold};
use crate::diagnostics::ValidationReport;

/// Outcome of the made-in rule for one publication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MadeInResult {
    pub publication_id: String,
    /// Countries meeting the threshold; possibly empty.
    pub countries: BTreeSet<CountryCode>,
    /// True iff two or more countries meet the threshold at once.
    pub tie: bool,
}

impl MadeInResult {
    /// Made-in countries that are part of the tracked analysis set.
    pub fn production_countries<'a>(
        &'a self,
        config: &'a AnalysisConfig,
    ) -> impl Iterator<Item = &'a CountryCode> {
        self.countries
            .iter()
            .filter(|c| config.country_index(c).is_some())
    }
}

/// Applies the made-in rule to one publication.
pub fn made_in(record: &PublicationRecord, threshold: Threshold) -> MadeInResult {
    let total = record.affiliations.len();
    let mut counts: BTreeMap<&CountryCode, usize> = BTreeMap::new();
    for affiliation in &record.affiliations {
        *counts.entry(&affiliation.country).or_insert(0) += 1;
    }
    let countries: BTreeSet<CountryCode> = counts
        .into_iter()
        .filter(|&(_, count)| threshold.meets(count, total))
        .map(|(country, _)| country.clone())
        .collect();
    let tie = countries.len() >= 2;
    MadeInResult {
        publication_id: record.id.clone(),
        countries,
        tie,
    }
}

/// Made-in results for every cited-side candidate in a corpus.
#[derive(Debug, Clone)]
pub struct Attribution {
    results: BTreeMap<String, MadeInResult>,
    tie_count: u64,
    tie_examples: Vec<String>,
}

impl Attribution {
    pub fn get(&self, publication_id: &str) -> Option<&MadeInResult> {
        self.results.get(publication_id)
    }

    pub fn results(&self) -> &BTreeMap<String, MadeInResult> {
        &self.results
    }

    /// Candidates attributed to at least one tracked country.
    pub fn candidate_count(&self, config: &AnalysisConfig) -> usize {
        self.results
            .values()
            .filter(|r| r.production_countries(config).next().is_some())
            .count()
    }

    pub fn tie_count(&self) -> u64 {
        self.tie_count
    }

    /// Adds the tie-attribution tallies to a validation report.
    pub fn report_into(&self, report: &mut ValidationReport) {
        report.tie_attributions.count += self.tie_count;
        let cap = report.example_cap;
        for example in &self.tie_examples {
            if report.tie_attributions.examples.len() >= cap {
                break;
            }
            report.tie_attributions.examples.push(example.clone());
        }
    }
}

/// Attributes every production candidate (in period, eligible doc type)
/// of the corpus. Publications outside the window are skipped here but
/// remain available as citing publications.
pub fn attribute_corpus(corpus: &Corpus, config: &AnalysisConfig) -> Attribution {
    let mut results = BTreeMap::new();
    let mut tie_count = 0;
    let mut tie_examples = Vec::new();
    for record in corpus.publications() {
        if !config.production_eligible(record) {
            continue;
        }
        let result = made_in(record, config.threshold);
        let tracked = result.production_countries(config).next().is_some();
        if result.tie && tracked {
            tie_count += 1;
            if tie_examples.len() < config.example_cap {
                tie_examples.push(record.id.clone());
            }
        }
        results.insert(record.id.clone(), result);
    }
    Attribution {
        results,
        tie_count,
        tie_examples,
    }
}
