//! Converts citation links into benefits and gains and accumulates the
//! country-by-country flow matrix.
//!
//! A *benefit* is one citation of a made-in publication arriving from a
//! citing publication that lists at least one tracked country and falls
//! within the citation cutoff. Each benefit yields one *gain* per
//! distinct tracked country in the citing publication's address list —
//! mere presence, with no threshold on the citing side — for every
//! made-in country of the cited publication. Countries outside the
//! tracked set earn nothing; citations carrying no tracked country are
//! not observable flows and are not counted as benefits.

use std::collections::BTreeSet;

use crate::attribution::{made_in, Attribution};
use crate::corpus::{AnalysisConfig, Corpus, CountryCode, ScCode};
use crate::{BkfError, Result};

/// One (cited publication, citing publication, earning country) unit of
/// knowledge flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GainRecord {
    pub cited_id: String,
    pub citing_id: String,
    /// A made-in country of the cited publication.
    pub generator: CountryCode,
    /// A tracked country present in the citing publication's address list.
    pub earner: CountryCode,
    /// True iff earner equals generator.
    pub domestic: bool,
    /// Categories of the cited publication's journal; empty when the
    /// journal is unassigned.
    pub sc_codes: BTreeSet<ScCode>,
}

/// Borrowed view of one gain, emitted by [`visit_gains`]. Country fields
/// are indices into `config.countries`.
#[derive(Debug, Clone, Copy)]
pub struct GainView<'c> {
    pub cited_id: &'c str,
    pub citing_id: &'c str,
    pub generator_idx: usize,
    pub earner_idx: usize,
    pub domestic: bool,
    pub sc_codes: &'c BTreeSet<ScCode>,
}

impl GainView<'_> {
    pub fn to_record(&self, config: &AnalysisConfig) -> GainRecord {
        GainRecord {
            cited_id: self.cited_id.to_string(),
            citing_id: self.citing_id.to_string(),
            generator: config.countries[self.generator_idx].clone(),
            earner: config.countries[self.earner_idx].clone(),
            domestic: self.domestic,
            sc_codes: self.sc_codes.clone(),
        }
    }
}

/// For every publication, the sorted indices of tracked countries present
/// anywhere in its address list.
pub(crate) fn presence_table(corpus: &Corpus, config: &AnalysisConfig) -> Vec<Vec<u16>> {
    corpus
        .publications()
        .iter()
        .map(|record| {
            let mut present: BTreeSet<u16> = BTreeSet::new();
            for affiliation in &record.affiliations {
                if let Some(idx) = config.country_index(&affiliation.country) {
                    present.insert(idx as u16);
                }
            }
            present.into_iter().collect()
        })
        .collect()
}

/// Tracked generator countries per publication, from the attribution map.
fn generator_table(
    corpus: &Corpus,
    attribution: &Attribution,
    config: &AnalysisConfig,
) -> Vec<Vec<u16>> {
    corpus
        .publications()
        .iter()
        .map(|record| match attribution.get(&record.id) {
            Some(result) => result
                .production_countries(config)
                .map(|c| config.country_index(c).expect("tracked country") as u16)
                .collect(),
            None => Vec::new(),
        })
        .collect()
}

/// Streams every gain of the corpus in a deterministic order.
///
/// Iteration is cited-publication major (corpus id order), then citing
/// publications in index order, then generator and earner country order.
pub fn visit_gains<F: FnMut(&GainView<'_>)>(
    corpus: &Corpus,
    attribution: &Attribution,
    config: &AnalysisConfig,
    mut visit: F,
) {
    let presence = presence_table(corpus, config);
    let generators = generator_table(corpus, attribution, config);
    let publications = corpus.publications();

    for (cited_idx, cited) in publications.iter().enumerate() {
        let gens = &generators[cited_idx];
        if gens.is_empty() {
            continue;
        }
        let sc_codes = corpus.categories().lookup(&cited.journal_id);
        for &citing_idx in corpus.citing_indices(cited_idx) {
            let citing = &publications[citing_idx as usize];
            if !config.within_cutoff(citing) {
                continue;
            }
            let earners = &presence[citing_idx as usize];
            for &g in gens {
                for &e in earners {
                    visit(&GainView {
                        cited_id: &cited.id,
                        citing_id: &citing.id,
                        generator_idx: g as usize,
                        earner_idx: e as usize,
                        domestic: g == e,
                        sc_codes,
                    });
                }
            }
        }
    }
}

/// Number of benefits of one publication: distinct citing publications
/// within the cutoff whose address lists carry at least one tracked
/// country.
pub fn benefits_of(cited_id: &str, corpus: &Corpus, config: &AnalysisConfig) -> Result<u64> {
    let cited_idx = corpus
        .index_of(cited_id)
        .ok_or_else(|| BkfError::UnknownPublication {
            id: cited_id.to_string(),
        })?;
    let publications = corpus.publications();
    let mut count = 0;
    for &citing_idx in corpus.citing_indices(cited_idx) {
        let citing = &publications[citing_idx as usize];
        if !config.within_cutoff(citing) {
            continue;
        }
        let tracked = citing
            .affiliations
            .iter()
            .any(|a| config.country_index(&a.country).is_some());
        if tracked {
            count += 1;
        }
    }
    Ok(count)
}

/// All gain records of one cited publication. Empty when the publication
/// is not attributed to any tracked country.
pub fn gains_of(
    cited_id: &str,
    corpus: &Corpus,
    config: &AnalysisConfig,
) -> Result<Vec<GainRecord>> {
    let cited_idx = corpus
        .index_of(cited_id)
        .ok_or_else(|| BkfError::UnknownPublication {
            id: cited_id.to_string(),
        })?;
    let publications = corpus.publications();
    let cited = &publications[cited_idx];
    if !config.production_eligible(cited) {
        return Ok(Vec::new());
    }
    let result = made_in(cited, config.threshold);
    let generators: Vec<&CountryCode> = result.production_countries(config).collect();
    if generators.is_empty() {
        return Ok(Vec::new());
    }
    let sc_codes = corpus.categories().lookup(&cited.journal_id);

    let mut records = Vec::new();
    for &citing_idx in corpus.citing_indices(cited_idx) {
        let citing = &publications[citing_idx as usize];
        if !config.within_cutoff(citing) {
            continue;
        }
        let earners: BTreeSet<&CountryCode> = citing
            .affiliations
            .iter()
            .map(|a| &a.country)
            .filter(|c| config.country_index(c).is_some())
            .collect();
        for generator in &generators {
            for earner in &earners {
                records.push(GainRecord {
                    cited_id: cited.id.clone(),
                    citing_id: citing.id.clone(),
                    generator: (*generator).clone(),
                    earner: (*earner).clone(),
                    domestic: generator == earner,
                    sc_codes: sc_codes.clone(),
                });
            }
        }
    }
    Ok(records)
}

/// Square gains matrix over the tracked countries: rows are generators,
/// columns are earners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowMatrix {
    countries: Vec<CountryCode>,
    cells: Vec<u64>,
}

impl FlowMatrix {
    pub fn zero(countries: Vec<CountryCode>) -> Self {
        let n = countries.len();
        FlowMatrix {
            countries,
            cells: vec![0; n * n],
        }
    }

    /// Builds a matrix from generator-major rows; used for fixtures.
    pub fn from_rows(countries: Vec<CountryCode>, rows: &[Vec<u64>]) -> Result<Self> {
        let n = countries.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(BkfError::config(format!(
                "flow matrix rows must be {n}x{n}"
            )));
        }
        let cells = rows.iter().flatten().copied().collect();
        Ok(FlowMatrix { countries, cells })
    }

    pub fn countries(&self) -> &[CountryCode] {
        &self.countries
    }

    pub fn len(&self) -> usize {
        self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.countries.is_empty()
    }

    pub fn get(&self, generator: usize, earner: usize) -> u64 {
        self.cells[generator * self.countries.len() + earner]
    }

    pub fn add(&mut self, generator: usize, earner: usize, amount: u64) {
        self.cells[generator * self.countries.len() + earner] += amount;
    }

    /// Total gains generated by the country (domestic included).
    pub fn row_total(&self, generator: usize) -> u64 {
        (0..self.len()).map(|e| self.get(generator, e)).sum()
    }

    /// Total gains earned by the country (domestic included).
    pub fn col_total(&self, earner: usize) -> u64 {
        (0..self.len()).map(|g| self.get(g, earner)).sum()
    }

    pub fn diagonal(&self, country: usize) -> u64 {
        self.get(country, country)
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }
}

/// Accumulates the full country-by-country gains matrix.
pub fn compute_flow_matrix(
    corpus: &Corpus,
    attribution: &Attribution,
    config: &AnalysisConfig,
) -> FlowMatrix {
    let mut matrix = FlowMatrix::zero(config.countries.clone());
    visit_gains(corpus, attribution, config, |gain| {
        matrix.add(gain.generator_idx, gain.earner_idx, 1);
    });
    matrix
}

/// Per-country decomposition of a flow matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomesticSplit {
    pub country: CountryCode,
    /// Diagonal cell: gains kept at home.
    pub domestic_gains: u64,
    /// Row minus diagonal: gains the country's production sent abroad.
    pub foreign_gains_generated: u64,
    /// Column minus diagonal: gains earned from foreign production.
    pub gains_earned: u64,
}

pub fn domestic_split(matrix: &FlowMatrix) -> Vec<DomesticSplit> {
    (0..matrix.len())
        .map(|k| DomesticSplit {
            country: matrix.countries()[k].clone(),
            domestic_gains: matrix.diagonal(k),
            foreign_gains_generated: matrix.row_total(k) - matrix.diagonal(k),
            gains_earned: matrix.col_total(k) - matrix.diagonal(k),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::attribute_corpus;
    use crate::corpus::{
        build_corpus, Affiliation, CitationLink, DocType, IsoDate, JournalCategoryMap,
        PublicationRecord,
    };

    fn cc(code: &str) -> CountryCode {
        CountryCode::new(code).unwrap()
    }

    fn pub_record(id: &str, year: i32, countries: &[&str]) -> PublicationRecord {
        let affiliations = countries
            .iter()
            .enumerate()
            .map(|(i, c)| Affiliation::new(&format!("{id}-i{i}"), cc(c)).unwrap())
            .collect();
        PublicationRecord::new(id, year, DocType::Article, "J1", affiliations).unwrap()
    }

    fn config(countries: &[&str]) -> AnalysisConfig {
        AnalysisConfig::new(
            countries.iter().map(|c| cc(c)).collect(),
            (2004, 2008),
            IsoDate::parse("2017-06-10").unwrap(),
        )
        .unwrap()
    }

    fn corpus_of(
        pubs: Vec<PublicationRecord>,
        links: Vec<CitationLink>,
        cfg: &AnalysisConfig,
    ) -> Corpus {
        build_corpus(pubs, links, JournalCategoryMap::new(), cfg).unwrap()
    }

    #[test]
    fn benefits_count_distinct_citing_publications() {
        let cfg = config(&["AA", "BB"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA"]),
            pub_record("Q1", 2006, &["BB"]),
            pub_record("Q2", 2007, &["BB"]),
            pub_record("Q3", 2010, &["AA"]),
        ];
        let links = vec![
            CitationLink::new("Q1", "P1"),
            CitationLink::new("Q2", "P1"),
            CitationLink::new("Q3", "P1"),
        ];
        let corpus = corpus_of(pubs, links, &cfg);
        assert_eq!(benefits_of("P1", &corpus, &cfg).unwrap(), 3);
        assert_eq!(benefits_of("Q1", &corpus, &cfg).unwrap(), 0);
        assert!(benefits_of("NOPE", &corpus, &cfg).is_err());
    }

    #[test]
    fn citing_publication_with_two_tracked_countries_yields_two_gains() {
        // One benefit, two gains: a domestic one and a cross-border one.
        let cfg = config(&["AA", "BB"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA"]),
            pub_record("Q1", 2006, &["AA", "BB"]),
        ];
        let links = vec![CitationLink::new("Q1", "P1")];
        let corpus = corpus_of(pubs, links, &cfg);
        let gains = gains_of("P1", &corpus, &cfg).unwrap();
        assert_eq!(gains.len(), 2);
        assert!(gains.iter().any(|g| g.earner == cc("AA") && g.domestic));
        assert!(gains.iter().any(|g| g.earner == cc("BB") && !g.domestic));
        assert_eq!(benefits_of("P1", &corpus, &cfg).unwrap(), 1);
    }

    #[test]
    fn three_institutions_one_country_yield_one_gain() {
        let cfg = config(&["AA", "BB"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA"]),
            pub_record("Q1", 2006, &["BB", "BB", "BB"]),
        ];
        let links = vec![CitationLink::new("Q1", "P1")];
        let corpus = corpus_of(pubs, links, &cfg);
        let gains = gains_of("P1", &corpus, &cfg).unwrap();
        assert_eq!(gains.len(), 1);
        assert_eq!(gains[0].earner, cc("BB"));
        assert!(!gains[0].domestic);
    }

    #[test]
    fn untracked_citing_country_earns_nothing() {
        let cfg = config(&["AA", "BB"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA"]),
            pub_record("Q1", 2006, &["EE"]),
        ];
        let links = vec![CitationLink::new("Q1", "P1")];
        let corpus = corpus_of(pubs, links, &cfg);
        assert!(gains_of("P1", &corpus, &cfg).unwrap().is_empty());
        // Not an observable flow: no benefit either.
        assert_eq!(benefits_of("P1", &corpus, &cfg).unwrap(), 0);
    }

    #[test]
    fn citations_past_the_cutoff_are_ignored() {
        let cfg = config(&["AA", "BB"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA"]),
            pub_record("Q1", 2018, &["BB"]),
            // Exactly at the cutoff year: still counted (inclusive).
            pub_record("Q2", 2017, &["BB"]),
        ];
        let links = vec![CitationLink::new("Q1", "P1"), CitationLink::new("Q2", "P1")];
        let corpus = corpus_of(pubs, links, &cfg);
        assert_eq!(benefits_of("P1", &corpus, &cfg).unwrap(), 1);
        let gains = gains_of("P1", &corpus, &cfg).unwrap();
        assert_eq!(gains.len(), 1);
        assert_eq!(gains[0].citing_id, "Q2");
    }

    #[test]
    fn tie_attribution_generates_a_gain_set_per_generator() {
        let cfg = config(&["AA", "BB"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA", "BB"]),
            pub_record("Q1", 2006, &["AA"]),
        ];
        let links = vec![CitationLink::new("Q1", "P1")];
        let corpus = corpus_of(pubs, links, &cfg);
        let gains = gains_of("P1", &corpus, &cfg).unwrap();
        assert_eq!(gains.len(), 2);
        assert!(gains.iter().any(|g| g.generator == cc("AA") && g.domestic));
        assert!(gains.iter().any(|g| g.generator == cc("BB") && !g.domestic));
    }

    #[test]
    fn single_country_corpus_is_all_domestic() {
        let cfg = config(&["AA", "BB"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA"]),
            pub_record("Q1", 2006, &["AA"]),
            pub_record("Q2", 2007, &["AA"]),
        ];
        let links = vec![CitationLink::new("Q1", "P1"), CitationLink::new("Q2", "P1")];
        let corpus = corpus_of(pubs, links, &cfg);
        let attribution = attribute_corpus(&corpus, &cfg);
        let matrix = compute_flow_matrix(&corpus, &attribution, &cfg);
        assert_eq!(matrix.get(0, 0), 2);
        assert_eq!(matrix.total(), 2);
        assert_eq!(matrix.row_total(1), 0);
    }

    #[test]
    fn domestic_split_of_zero_matrix_is_zero() {
        let matrix = FlowMatrix::zero(vec![cc("AA"), cc("BB")]);
        for split in domestic_split(&matrix) {
            assert_eq!(split.domestic_gains, 0);
            assert_eq!(split.foreign_gains_generated, 0);
            assert_eq!(split.gains_earned, 0);
        }
    }

    #[test]
    fn matrix_conservation_and_closed_world() {
        let cfg = config(&["AA", "BB", "CC"]);
        let pubs = vec![
            pub_record("P1", 2005, &["AA"]),
            pub_record("P2", 2005, &["BB"]),
            pub_record("Q1", 2006, &["AA", "BB"]),
            pub_record("Q2", 2007, &["CC"]),
            pub_record("Q3", 2007, &["BB", "CC"]),
        ];
        let links = vec![
            CitationLink::new("Q1", "P1"),
            CitationLink::new("Q2", "P1"),
            CitationLink::new("Q3", "P2"),
            CitationLink::new("Q1", "P2"),
        ];
        let corpus = corpus_of(pubs, links, &cfg);
        let attribution = attribute_corpus(&corpus, &cfg);
        let matrix = compute_flow_matrix(&corpus, &attribution, &cfg);

        let mut streamed = 0u64;
        visit_gains(&corpus, &attribution, &cfg, |_| streamed += 1);
        assert_eq!(matrix.total(), streamed);

        let splits = domestic_split(&matrix);
        let generated: u64 = splits.iter().map(|s| s.foreign_gains_generated).sum();
        let earned: u64 = splits.iter().map(|s| s.gains_earned).sum();
        assert_eq!(generated, earned);
    }
}
