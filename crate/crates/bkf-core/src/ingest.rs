//! Parsers and writers for the canonical on-disk corpus formats.
//!
//! Formats (all UTF-8):
//! - `publications.jsonl` — one JSON object per line:
//!   `{"id", "year", "doc_type", "journal_id", "affiliations": [{"institution_id", "country"}]}`
//! - `citations.csv` — `citing_id,cited_id`, optional header detected by
//!   exact column names
//! - `journals.csv` — `journal_id,sc_codes` with semicolon-separated codes
//! - `sc_areas.csv` — `sc_code,macro_area`
//! - config — flat `key = value` lines, `#` comments
//!
//! Data-row parsers are lenient: a malformed row is recorded in the
//! [`ValidationReport`] and parsing continues. Structural failures
//! (a category in two macro-areas, an unusable config) are hard errors.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    default_doc_types, Affiliation, AnalysisConfig, CitationLink, CountryCode, DocType, IsoDate,
    JournalCategoryMap, PublicationRecord, ScCode, SpecializationOptions, Threshold,
    DEFAULT_EXAMPLE_CAP,
};
use crate::diagnostics::ValidationReport;
use crate::{BkfError, Result};

const CITATIONS_HEADER: &str = "citing_id,cited_id";
const JOURNALS_HEADER: &str = "journal_id,sc_codes";
const AREAS_HEADER: &str = "sc_code,macro_area";

#[derive(Debug, Serialize, Deserialize)]
struct RawAffiliation {
    institution_id: String,
    country: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPublication {
    id: String,
    year: i32,
    doc_type: String,
    journal_id: String,
    affiliations: Vec<RawAffiliation>,
}

#[derive(Debug)]
pub struct ParsedPublications {
    pub records: Vec<PublicationRecord>,
    pub report: ValidationReport,
}

#[derive(Debug)]
pub struct ParsedCitations {
    pub links: Vec<CitationLink>,
    pub report: ValidationReport,
}

fn domain_record(raw: RawPublication) -> Result<PublicationRecord> {
    let doc_type = DocType::parse(&raw.doc_type)
        .ok_or_else(|| BkfError::config(format!("unknown doc_type `{}`", raw.doc_type)))?;
    let mut affiliations = Vec::with_capacity(raw.affiliations.len());
    for a in raw.affiliations {
        affiliations.push(Affiliation::new(
            &a.institution_id,
            CountryCode::new(&a.country)?,
        )?);
    }
    PublicationRecord::new(&raw.id, raw.year, doc_type, &raw.journal_id, affiliations)
}

/// Parses newline-delimited publication records, collecting malformed
/// lines (with their line numbers) instead of failing.
pub fn parse_publications(input: &str, example_cap: usize) -> ParsedPublications {
    let mut records = Vec::new();
    let mut report = ValidationReport::new(example_cap);
    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let raw: RawPublication = match serde_json::from_str(line) {
            Ok(raw) => raw,
            Err(err) => {
                report
                    .rejected_records
                    .record(format!("publications line {lineno}: {err}"), example_cap);
                continue;
            }
        };
        match domain_record(raw) {
            Ok(record) => records.push(record),
            Err(err) => {
                report
                    .rejected_records
                    .record(format!("publications line {lineno}: {err}"), example_cap);
            }
        }
    }
    ParsedPublications { records, report }
}

/// Parses the two-column citation format. The header row is optional and
/// recognized only by its exact column names.
pub fn parse_citations(input: &str, example_cap: usize) -> ParsedCitations {
    let mut links = Vec::new();
    let mut report = ValidationReport::new(example_cap);
    let mut seen_data = false;
    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if !seen_data && line.trim() == CITATIONS_HEADER {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
            report.rejected_records.record(
                format!("citations line {lineno}: expected citing_id,cited_id"),
                example_cap,
            );
            continue;
        }
        links.push(CitationLink::new(fields[0], fields[1]));
    }
    ParsedCitations { links, report }
}

/// Parses the journal-category and category-area files into one map.
///
/// Multi-category journals keep every code; categories absent from the
/// area file report as `unassigned`. A category listed under two areas is
/// a hard error.
pub fn parse_journal_categories(
    journals: &str,
    areas: &str,
    example_cap: usize,
) -> Result<(JournalCategoryMap, ValidationReport)> {
    let mut map = JournalCategoryMap::new();
    let mut report = ValidationReport::new(example_cap);

    let mut seen_data = false;
    for (lineno, line) in areas.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if !seen_data && line.trim() == AREAS_HEADER {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 || fields[0].trim().is_empty() || fields[1].trim().is_empty() {
            report.rejected_records.record(
                format!("sc_areas line {lineno}: expected sc_code,macro_area"),
                example_cap,
            );
            continue;
        }
        let sc = match ScCode::new(fields[0]) {
            Ok(sc) => sc,
            Err(err) => {
                report
                    .rejected_records
                    .record(format!("sc_areas line {lineno}: {err}"), example_cap);
                continue;
            }
        };
        map.assign_area(sc, fields[1].trim())?;
    }

    let mut seen_data = false;
    for (lineno, line) in journals.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if !seen_data && line.trim() == JOURNALS_HEADER {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 || fields[0].is_empty() {
            report.rejected_records.record(
                format!("journals line {lineno}: expected journal_id,sc_codes"),
                example_cap,
            );
            continue;
        }
        let mut codes = Vec::new();
        let mut bad = false;
        for part in fields[1].split(';').filter(|p| !p.trim().is_empty()) {
            match ScCode::new(part) {
                Ok(sc) => codes.push(sc),
                Err(err) => {
                    report
                        .rejected_records
                        .record(format!("journals line {lineno}: {err}"), example_cap);
                    bad = true;
                    break;
                }
            }
        }
        if !bad {
            map.insert_journal(fields[0], codes);
        }
    }

    Ok((map, report))
}

/// Splits flat `key = value` configuration text. Blank lines and `#`
/// comments are skipped; a non-blank line without `=` is a hard error.
pub fn parse_key_values(input: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(BkfError::config(format!(
                "config line {}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_period(value: &str) -> Result<(i32, i32)> {
    let cleaned = value.replace("..", " ").replace(',', " ");
    let parts: Vec<&str> = cleaned.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(BkfError::config(format!(
            "period `{value}` must hold two years"
        )));
    }
    let min: i32 = parts[0]
        .parse()
        .map_err(|_| BkfError::config(format!("malformed period year `{}`", parts[0])))?;
    let max: i32 = parts[1]
        .parse()
        .map_err(|_| BkfError::config(format!("malformed period year `{}`", parts[1])))?;
    Ok((min, max))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(BkfError::config(format!(
            "key `{key}` expects true/false, got `{value}`"
        ))),
    }
}

pub(crate) fn parse_country_list(value: &str) -> Result<Vec<CountryCode>> {
    value
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(CountryCode::new)
        .collect()
}

/// Parses the analysis configuration. Unknown keys are ignored so the
/// same file can carry generator parameters.
pub fn parse_config(input: &str) -> Result<AnalysisConfig> {
    let pairs = parse_key_values(input)?;
    let mut countries: Option<Vec<CountryCode>> = None;
    let mut period: Option<(i32, i32)> = None;
    let mut cutoff: Option<IsoDate> = None;
    let mut doc_types = default_doc_types();
    let mut threshold = Threshold::default();
    let mut example_cap = DEFAULT_EXAMPLE_CAP;
    let mut specialization = SpecializationOptions::default();

    for (key, value) in &pairs {
        match key.as_str() {
            "countries" => countries = Some(parse_country_list(value)?),
            "period" => period = Some(parse_period(value)?),
            "cutoff" => cutoff = Some(IsoDate::parse(value)?),
            "doc_types" => {
                let mut set = BTreeSet::new();
                for part in value.split(',').filter(|p| !p.trim().is_empty()) {
                    let part = part.trim();
                    let dt = DocType::parse(part)
                        .ok_or_else(|| BkfError::config(format!("unknown doc_type `{part}`")))?;
                    set.insert(dt);
                }
                doc_types = set;
            }
            "threshold" => threshold = Threshold::parse(value)?,
            "report_examples" => {
                example_cap = value.parse().map_err(|_| {
                    BkfError::config(format!("malformed report_examples `{value}`"))
                })?;
            }
            "spec_include_domestic" => specialization.include_domestic = parse_bool(key, value)?,
            "spec_exclude_focal_sc" => specialization.exclude_focal_sc = parse_bool(key, value)?,
            _ => {}
        }
    }

    let config = AnalysisConfig {
        countries: countries.ok_or_else(|| BkfError::config("missing key `countries`"))?,
        period: period.ok_or_else(|| BkfError::config("missing key `period`"))?,
        cutoff: cutoff.ok_or_else(|| BkfError::config("missing key `cutoff`"))?,
        doc_types,
        threshold,
        example_cap,
        specialization,
    };
    config.validate()?;
    Ok(config)
}

fn raw_publication(record: &PublicationRecord) -> RawPublication {
    RawPublication {
        id: record.id.clone(),
        year: record.year,
        doc_type: record.doc_type.label().to_string(),
        journal_id: record.journal_id.clone(),
        affiliations: record
            .affiliations
            .iter()
            .map(|a| RawAffiliation {
                institution_id: a.institution_id.clone(),
                country: a.country.as_str().to_string(),
            })
            .collect(),
    }
}

pub fn write_publications_jsonl(records: &[PublicationRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(&raw_publication(record)).expect("serialize record"));
        out.push('\n');
    }
    out
}

pub fn write_citations_csv(links: &[CitationLink]) -> String {
    let mut out = String::from(CITATIONS_HEADER);
    out.push('\n');
    for link in links {
        out.push_str(&link.citing_id);
        out.push(',');
        out.push_str(&link.cited_id);
        out.push('\n');
    }
    out
}

pub fn write_journals_csv(map: &JournalCategoryMap) -> String {
    let mut out = String::from(JOURNALS_HEADER);
    out.push('\n');
    for (journal, scs) in map.journals() {
        let codes: Vec<&str> = scs.iter().map(ScCode::as_str).collect();
        out.push_str(journal);
        out.push(',');
        out.push_str(&codes.join(";"));
        out.push('\n');
    }
    out
}

pub fn write_sc_areas_csv(map: &JournalCategoryMap) -> String {
    let mut out = String::from(AREAS_HEADER);
    out.push('\n');
    for (sc, area) in map.area_entries() {
        out.push_str(sc.as_str());
        out.push(',');
        out.push_str(area);
        out.push('\n');
    }
    out
}

pub fn write_config(config: &AnalysisConfig) -> String {
    let countries: Vec<&str> = config.countries.iter().map(CountryCode::as_str).collect();
    let doc_types: Vec<&str> = config.doc_types.iter().map(|d| d.label()).collect();
    let mut out = String::new();
    out.push_str(&format!("countries = {}\n", countries.join(",")));
    out.push_str(&format!(
        "period = {}..{}\n",
        config.period.0, config.period.1
    ));
    out.push_str(&format!("cutoff = {}\n", config.cutoff));
    out.push_str(&format!("doc_types = {}\n", doc_types.join(",")));
    out.push_str(&format!("threshold = {}\n", config.threshold));
    out.push_str(&format!("report_examples = {}\n", config.example_cap));
    out.push_str(&format!(
        "spec_include_domestic = {}\n",
        config.specialization.include_domestic
    ));
    out.push_str(&format!(
        "spec_exclude_focal_sc = {}\n",
        config.specialization.exclude_focal_sc
    ));
    out
}
