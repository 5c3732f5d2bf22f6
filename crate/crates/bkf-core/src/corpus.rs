//! Domain types and the validated in-memory corpus shared by all stages.
//!
//! A [`Corpus`] is immutable after construction and safe for concurrent
//! reads. Construction normalizes away input ordering: publications are
//! sorted by id and citation links are deduplicated into sorted per-target
//! adjacency lists, so any permutation of the input lists yields identical
//! indexes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::diagnostics::ValidationReport;
use crate::{BkfError, Result};

/// Uppercase country identifier (ISO-3166-alpha-2 style, but any length).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode(String);

impl CountryCode {
    /// Normalizes to ASCII uppercase. The code must be non-empty and free
    /// of whitespace and the delimiters used by the on-disk formats.
    pub fn new(code: &str) -> Result<Self> {
        let code = code.trim();
        if code.is_empty() {
            return Err(BkfError::config("empty country code"));
        }
        if code
            .chars()
            .any(|c| c.is_whitespace() || c == ',' || c == ';')
        {
            return Err(BkfError::config(format!(
                "country code `{code}` contains a delimiter character"
            )));
        }
        Ok(CountryCode(code.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Subject-category code attached to journals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScCode(String);

/// Bucket used for gains whose cited journal has no category assignment.
pub const UNASSIGNED_SC: &str = "unassigned";
/// Macro-area used for subject categories missing from the area file.
pub const UNASSIGNED_AREA: &str = "unassigned";

impl ScCode {
    pub fn new(code: &str) -> Result<Self> {
        let code = code.trim();
        if code.is_empty() {
            return Err(BkfError::config("empty subject category code"));
        }
        if code.contains(',') || code.contains(';') {
            return Err(BkfError::config(format!(
                "subject category `{code}` contains a delimiter character"
            )));
        }
        Ok(ScCode(code.to_string()))
    }

    pub fn unassigned() -> Self {
        ScCode(UNASSIGNED_SC.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ScCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Document types eligible for analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocType {
    Article,
    Review,
    Letter,
    Proceedings,
    Other,
}

impl DocType {
    pub fn parse(label: &str) -> Option<Self> {
        match label {
            "article" => Some(DocType::Article),
            "review" => Some(DocType::Review),
            "letter" => Some(DocType::Letter),
            "proceedings" => Some(DocType::Proceedings),
            "other" => Some(DocType::Other),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Letter => "letter",
            DocType::Proceedings => "proceedings",
            DocType::Other => "other",
        }
    }
}

/// Calendar date, used for the citation cutoff.
///
/// The canonical formats carry publication years only, so cutoff
/// comparisons use the year; the full date is kept for configuration echo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct IsoDate {
    pub year: i32,
    pub month: u8,
    pub day: u8,
}

impl IsoDate {
    pub fn new(year: i32, month: u8, day: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(BkfError::config(format!("month {month} out of range")));
        }
        let leap = year % 4 == 0 && (year % 100 != 0 || year % 400 == 0);
        let max_day = match month {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            2 if leap => 29,
            _ => 28,
        };
        if day == 0 || day > max_day {
            return Err(BkfError::config(format!(
                "day {day} out of range for {year}-{month:02}"
            )));
        }
        Ok(IsoDate { year, month, day })
    }

    /// Strict `YYYY-MM-DD`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split('-').collect();
        if parts.len() != 3 {
            return Err(BkfError::config(format!(
                "malformed date `{text}`, expected YYYY-MM-DD"
            )));
        }
        let year: i32 = parts[0]
            .parse()
            .map_err(|_| BkfError::config(format!("malformed year in date `{text}`")))?;
        let month: u8 = parts[1]
            .parse()
            .map_err(|_| BkfError::config(format!("malformed month in date `{text}`")))?;
        let day: u8 = parts[2]
            .parse()
            .map_err(|_| BkfError::config(format!("malformed day in date `{text}`")))?;
        IsoDate::new(year, month, day)
    }
}

impl fmt::Display for IsoDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

/// Exact rational threshold for the made-in rule.
///
/// Comparisons are done by cross-multiplication so a 1/3 share is never
/// threshold-equal to 1/2 through floating-point rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    num: u32,
    den: u32,
}

impl Threshold {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(BkfError::config(format!(
                "threshold {num}/{den} outside (0, 1]"
            )));
        }
        Ok(Threshold { num, den })
    }

    /// Accepts `a/b` fractions or plain decimals (`0.5` becomes 5/10).
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((a, b)) = text.split_once('/') {
            let num: u32 = a
                .trim()
                .parse()
                .map_err(|_| BkfError::config(format!("malformed threshold `{text}`")))?;
            let den: u32 = b
                .trim()
                .parse()
                .map_err(|_| BkfError::config(format!("malformed threshold `{text}`")))?;
            return Threshold::new(num, den);
        }
        if let Some((int, frac)) = text.split_once('.') {
            if frac.is_empty() || frac.len() > 6 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(BkfError::config(format!("malformed threshold `{text}`")));
            }
            let int: u32 = if int.is_empty() {
                0
            } else {
                int.parse()
                    .map_err(|_| BkfError::config(format!("malformed threshold `{text}`")))?
            };
            let den = 10u32.pow(frac.len() as u32);
            let num: u32 = frac.parse().unwrap();
            return Threshold::new(int * den + num, den);
        }
        let int: u32 = text
            .parse()
            .map_err(|_| BkfError::config(format!("malformed threshold `{text}`")))?;
        Threshold::new(int, 1)
    }

    /// True iff `count / total >= self`, exactly.
    pub fn meets(&self, count: usize, total: usize) -> bool {
        count as u64 * self.den as u64 >= total as u64 * self.num as u64
    }

    /// True iff `self > 1/2`; such thresholds admit at most one country.
    pub fn exceeds_half(&self) -> bool {
        2 * self.num as u64 > self.den as u64
    }

    pub fn half() -> Self {
        Threshold { num: 1, den: 2 }
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::half()
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// One institution-country pair from a publication's address list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affiliation {
    pub institution_id: String,
    pub country: CountryCode,
}

impl Affiliation {
    pub fn new(institution_id: &str, country: CountryCode) -> Result<Self> {
        if institution_id.is_empty() {
            return Err(BkfError::config("empty institution id"));
        }
        Ok(Affiliation {
            institution_id: institution_id.to_string(),
            country,
        })
    }
}

/// A publication with its year, type, hosting journal, and address list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub journal_id: String,
    pub affiliations: Vec<Affiliation>,
}

impl PublicationRecord {
    /// Validates the record-level invariants: non-empty id and journal,
    /// at least one affiliation, no two affiliations sharing an
    /// institution id.
    pub fn new(
        id: &str,
        year: i32,
        doc_type: DocType,
        journal_id: &str,
        affiliations: Vec<Affiliation>,
    ) -> Result<Self> {
        if id.is_empty() {
            return Err(BkfError::config("empty publication id"));
        }
        if journal_id.is_empty() {
            return Err(BkfError::config(format!(
                "publication `{id}` has empty journal id"
            )));
        }
        if affiliations.is_empty() {
            return Err(BkfError::config(format!(
                "publication `{id}` has an empty affiliation list"
            )));
        }
        let mut seen = BTreeSet::new();
        for a in &affiliations {
            if !seen.insert(a.institution_id.as_str()) {
                return Err(BkfError::config(format!(
                    "publication `{id}` lists institution `{}` twice",
                    a.institution_id
                )));
            }
        }
        Ok(PublicationRecord {
            id: id.to_string(),
            year,
            doc_type,
            journal_id: journal_id.to_string(),
            affiliations,
        })
    }

    /// Distinct countries present anywhere in the address list.
    pub fn countries_present(&self) -> BTreeSet<&CountryCode> {
        self.affiliations.iter().map(|a| &a.country).collect()
    }
}

/// A directed citing -> cited edge between publication ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CitationLink {
    pub citing_id: String,
    pub cited_id: String,
}

impl CitationLink {
    pub fn new(citing_id: &str, cited_id: &str) -> Self {
        CitationLink {
            citing_id: citing_id.to_string(),
            cited_id: cited_id.to_string(),
        }
    }
}

/// Journal -> subject categories and subject category -> macro-area maps.
///
/// A journal may carry several categories (gains are then fully counted
/// in each); a category belongs to exactly one macro-area.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JournalCategoryMap {
    journal_scs: BTreeMap<String, BTreeSet<ScCode>>,
    sc_areas: BTreeMap<ScCode, String>,
    empty: BTreeSet<ScCode>,
}

impl JournalCategoryMap {
    pub fn new() -> Self {
        JournalCategoryMap::default()
    }

    /// Adds categories for a journal, unioning with any previous entry.
    pub fn insert_journal(&mut self, journal_id: &str, scs: impl IntoIterator<Item = ScCode>) {
        self.journal_scs
            .entry(journal_id.to_string())
            .or_default()
            .extend(scs);
    }

    /// Assigns a category to a macro-area. Conflicting reassignment is a
    /// hard error; repeating the same assignment is fine.
    pub fn assign_area(&mut self, sc: ScCode, area: &str) -> Result<()> {
        if let Some(existing) = self.sc_areas.get(&sc) {
            if existing != area {
                return Err(BkfError::ScInMultipleAreas {
                    sc: sc.as_str().to_string(),
                    first: existing.clone(),
                    second: area.to_string(),
                });
            }
            return Ok(());
        }
        self.sc_areas.insert(sc, area.to_string());
        Ok(())
    }

    /// Categories of a journal; empty set when the journal is unknown.
    pub fn lookup(&self, journal_id: &str) -> &BTreeSet<ScCode> {
        self.journal_scs.get(journal_id).unwrap_or(&self.empty)
    }

    /// Macro-area of a category, `unassigned` when missing.
    pub fn area_of(&self, sc: &ScCode) -> &str {
        if sc.as_str() == UNASSIGNED_SC {
            return UNASSIGNED_AREA;
        }
        self.sc_areas
            .get(sc)
            .map(String::as_str)
            .unwrap_or(UNASSIGNED_AREA)
    }

    /// Every category known to the map: area-mapped ones plus any that
    /// appear only on journals.
    pub fn sc_universe(&self) -> BTreeSet<ScCode> {
        let mut all: BTreeSet<ScCode> = self.sc_areas.keys().cloned().collect();
        for scs in self.journal_scs.values() {
            all.extend(scs.iter().cloned());
        }
        all
    }

    /// Every macro-area label in the map.
    pub fn areas(&self) -> BTreeSet<&str> {
        self.sc_areas.values().map(String::as_str).collect()
    }

    pub fn journals(&self) -> impl Iterator<Item = (&str, &BTreeSet<ScCode>)> {
        self.journal_scs.iter().map(|(j, s)| (j.as_str(), s))
    }

    pub fn area_entries(&self) -> impl Iterator<Item = (&ScCode, &str)> {
        self.sc_areas.iter().map(|(sc, a)| (sc, a.as_str()))
    }
}

/// Switches for the specialization-index construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpecializationOptions {
    /// Count domestic gains in the per-category tables fed to the index.
    pub include_domestic: bool,
    /// Exclude the focal category from the row totals of the Balassa ratio.
    pub exclude_focal_sc: bool,
}

/// Analysis window, tracked country set, and counting conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Ordered, distinct tracked countries; at least two.
    pub countries: Vec<CountryCode>,
    /// Inclusive production period `[year_min, year_max]`.
    pub period: (i32, i32),
    /// Citations are observed up to this date (inclusive, year granularity).
    pub cutoff: IsoDate,
    /// Document types eligible on the cited (production) side.
    pub doc_types: BTreeSet<DocType>,
    /// Made-in share threshold.
    pub threshold: Threshold,
    /// Cap on per-class example lists in validation reports.
    pub example_cap: usize,
    pub specialization: SpecializationOptions,
}

pub const DEFAULT_EXAMPLE_CAP: usize = 20;

pub fn default_doc_types() -> BTreeSet<DocType> {
    [
        DocType::Article,
        DocType::Review,
        DocType::Letter,
        DocType::Proceedings,
    ]
    .into_iter()
    .collect()
}

impl AnalysisConfig {
    pub fn new(countries: Vec<CountryCode>, period: (i32, i32), cutoff: IsoDate) -> Result<Self> {
        let config = AnalysisConfig {
            countries,
            period,
            cutoff,
            doc_types: default_doc_types(),
            threshold: Threshold::default(),
            example_cap: DEFAULT_EXAMPLE_CAP,
            specialization: SpecializationOptions::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.countries.len() < 2 {
            return Err(BkfError::config(format!(
                "need at least 2 countries, got {}",
                self.countries.len()
            )));
        }
        let distinct: BTreeSet<&CountryCode> = self.countries.iter().collect();
        if distinct.len() != self.countries.len() {
            return Err(BkfError::config("countries list contains duplicates"));
        }
        if self.period.0 > self.period.1 {
            return Err(BkfError::config(format!(
                "period start {} after end {}",
                self.period.0, self.period.1
            )));
        }
        if self.doc_types.is_empty() {
            return Err(BkfError::config("doc_types must not be empty"));
        }
        Ok(())
    }

    pub fn country_index(&self, code: &CountryCode) -> Option<usize> {
        self.countries.iter().position(|c| c == code)
    }

    /// Whether a publication is a cited-side (production) candidate:
    /// inside the period and of an eligible document type. Publications
    /// failing this remain usable on the citing side.
    pub fn production_eligible(&self, record: &PublicationRecord) -> bool {
        record.year >= self.period.0
            && record.year <= self.period.1
            && self.doc_types.contains(&record.doc_type)
    }

    /// Whether a citing publication falls within the citation cutoff.
    /// Only years are recorded, so the comparison is by year, inclusive.
    pub fn within_cutoff(&self, record: &PublicationRecord) -> bool {
        record.year <= self.cutoff.year
    }
}

/// Immutable, indexed corpus: publications sorted by id, a deduplicated
/// citing index, the journal category map, and construction diagnostics.
#[derive(Debug, Clone)]
pub struct Corpus {
    publications: Vec<PublicationRecord>,
    by_id: HashMap<String, u32>,
    citing: Vec<Vec<u32>>,
    categories: JournalCategoryMap,
    diagnostics: ValidationReport,
}

impl Corpus {
    pub fn publications(&self) -> &[PublicationRecord] {
        &self.publications
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).map(|&i| i as usize)
    }

    pub fn publication(&self, id: &str) -> Option<&PublicationRecord> {
        self.index_of(id).map(|i| &self.publications[i])
    }

    /// Indices of publications citing the publication at `cited_idx`,
    /// sorted and deduplicated.
    pub fn citing_indices(&self, cited_idx: usize) -> &[u32] {
        &self.citing[cited_idx]
    }

    pub fn citing_of(&self, cited_id: &str) -> Option<&[u32]> {
        self.index_of(cited_id).map(|i| self.citing[i].as_slice())
    }

    /// Total deduplicated citation links retained in the index.
    pub fn link_count(&self) -> usize {
        self.citing.iter().map(Vec::len).sum()
    }

    pub fn categories(&self) -> &JournalCategoryMap {
        &self.categories
    }

    pub fn diagnostics(&self) -> &ValidationReport {
        &self.diagnostics
    }
}

/// Indexes the inputs into a [`Corpus`].
///
/// Duplicate publication ids are a hard error. Links are cleaned with
/// diagnostics instead: self-citations and links with an absent endpoint
/// are dropped, duplicate links are collapsed to one edge.
pub fn build_corpus(
    publications: Vec<PublicationRecord>,
    citations: Vec<CitationLink>,
    categories: JournalCategoryMap,
    config: &AnalysisConfig,
) -> Result<Corpus> {
    let mut publications = publications;
    publications.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in publications.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(BkfError::DuplicatePublication {
                id: pair[0].id.clone(),
            });
        }
    }

    let mut by_id = HashMap::with_capacity(publications.len());
    for (i, record) in publications.iter().enumerate() {
        by_id.insert(record.id.clone(), i as u32);
    }

    let mut diagnostics = ValidationReport::new(config.example_cap);
    let mut citing_sets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); publications.len()];
    for link in &citations {
        if link.citing_id == link.cited_id {
            diagnostics
                .self_citations
                .record(&link.citing_id, config.example_cap);
            continue;
        }
        let (citing, cited) = match (by_id.get(&link.citing_id), by_id.get(&link.cited_id)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => {
                diagnostics.dangling_links.record(
                    format!("{}->{}", link.citing_id, link.cited_id),
                    config.example_cap,
                );
                continue;
            }
        };
        if !citing_sets[cited as usize].insert(citing) {
            diagnostics.duplicate_links.record(
                format!("{}->{}", link.citing_id, link.cited_id),
                config.example_cap,
            );
        }
    }
    let citing: Vec<Vec<u32>> = citing_sets
        .into_iter()
        .map(|set| set.into_iter().collect())
        .collect();

    let mut unassigned_seen = BTreeSet::new();
    for record in &publications {
        if categories.lookup(&record.journal_id).is_empty()
            && unassigned_seen.insert(record.journal_id.clone())
        {
            diagnostics
                .unassigned_journals
                .record(&record.journal_id, config.example_cap);
        }
    }

    Ok(Corpus {
        publications,
        by_id,
        citing,
        categories,
        diagnostics,
    })
}
