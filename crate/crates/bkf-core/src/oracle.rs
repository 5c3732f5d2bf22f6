//! Brute-force reference for gains accounting.
//!
//! The oracle re-derives flow matrices, per-category tables, and
//! bilateral tables from the raw input lists with linear scans only: no
//! corpus indexes, no attribution cache, no shared accumulation code with
//! the engine. It is deliberately slow and bounded in corpus size; its
//! job is to disagree with the pipeline whenever the pipeline is wrong.

use std::collections::BTreeSet;

use crate::aggregate::{BilateralRow, FieldBkfRow};
use crate::corpus::{
    AnalysisConfig, CitationLink, CountryCode, JournalCategoryMap, PublicationRecord, ScCode,
    UNASSIGNED_AREA,
};
use crate::flow::FlowMatrix;
use crate::{BkfError, Result};

/// Default upper bound on oracle corpus size.
pub const DEFAULT_SIZE_BOUND: usize = 10_000;

fn check_bound(publications: &[PublicationRecord], bound: usize) -> Result<()> {
    if publications.len() > bound {
        return Err(BkfError::CorpusTooLarge {
            publications: publications.len(),
            bound,
        });
    }
    Ok(())
}

fn find_publication<'p>(
    publications: &'p [PublicationRecord],
    id: &str,
) -> Option<&'p PublicationRecord> {
    publications.iter().find(|p| p.id == id)
}

/// Naive made-in check for a single country: share of its institutions
/// against the whole address list, compared exactly.
fn naive_made_in(
    record: &PublicationRecord,
    country: &CountryCode,
    config: &AnalysisConfig,
) -> bool {
    let total = record.affiliations.len();
    let count = record
        .affiliations
        .iter()
        .filter(|a| &a.country == country)
        .count();
    config.threshold.meets(count, total)
}

fn naive_journal_scs<'m>(
    categories: &'m JournalCategoryMap,
    journal_id: &str,
) -> Option<&'m BTreeSet<ScCode>> {
    for (journal, scs) in categories.journals() {
        if journal == journal_id {
            return Some(scs);
        }
    }
    None
}

fn naive_area<'m>(categories: &'m JournalCategoryMap, sc: &ScCode) -> &'m str {
    for (candidate, area) in categories.area_entries() {
        if candidate == sc {
            return area;
        }
    }
    UNASSIGNED_AREA
}

/// Enumerates every accepted (cited, citing, generator, earner) tuple by
/// brute force and hands it to the accumulator.
fn enumerate_gains<F>(
    publications: &[PublicationRecord],
    citations: &[CitationLink],
    config: &AnalysisConfig,
    mut accumulate: F,
) where
    F: FnMut(&PublicationRecord, &PublicationRecord, &CountryCode, &CountryCode),
{
    let mut processed: Vec<(&str, &str)> = Vec::new();
    for link in citations {
        if link.citing_id == link.cited_id {
            continue;
        }
        let pair = (link.citing_id.as_str(), link.cited_id.as_str());
        if processed.contains(&pair) {
            continue;
        }
        processed.push(pair);

        let Some(cited) = find_publication(publications, &link.cited_id) else {
            continue;
        };
        let Some(citing) = find_publication(publications, &link.citing_id) else {
            continue;
        };
        if cited.year < config.period.0 || cited.year > config.period.1 {
            continue;
        }
        if !config.doc_types.contains(&cited.doc_type) {
            continue;
        }
        if citing.year > config.cutoff.year {
            continue;
        }
        for generator in &config.countries {
            if !naive_made_in(cited, generator, config) {
                continue;
            }
            for earner in &config.countries {
                let present = citing.affiliations.iter().any(|a| &a.country == earner);
                if present {
                    accumulate(cited, citing, generator, earner);
                }
            }
        }
    }
}

/// Country-by-country gains matrix, recomputed from scratch.
pub fn oracle_flow_matrix(
    publications: &[PublicationRecord],
    citations: &[CitationLink],
    config: &AnalysisConfig,
    bound: usize,
) -> Result<FlowMatrix> {
    check_bound(publications, bound)?;
    let mut matrix = FlowMatrix::zero(config.countries.clone());
    enumerate_gains(
        publications,
        citations,
        config,
        |_, _, generator, earner| {
            let g = config
                .countries
                .iter()
                .position(|c| c == generator)
                .expect("generator is tracked");
            let e = config
                .countries
                .iter()
                .position(|c| c == earner)
                .expect("earner is tracked");
            matrix.add(g, e, 1);
        },
    );
    Ok(matrix)
}

/// Per-category balance table for one country, recomputed from scratch
/// with full counting.
pub fn oracle_field_table(
    publications: &[PublicationRecord],
    citations: &[CitationLink],
    categories: &JournalCategoryMap,
    config: &AnalysisConfig,
    country: &CountryCode,
    bound: usize,
) -> Result<Vec<FieldBkfRow>> {
    check_bound(publications, bound)?;
    if !config.countries.contains(country) {
        return Err(BkfError::UnknownCountry {
            code: country.as_str().to_string(),
        });
    }

    let mut universe: BTreeSet<ScCode> = categories.sc_universe();
    universe.insert(ScCode::unassigned());
    let mut generated: Vec<u64> = vec![0; universe.len()];
    let mut earned: Vec<u64> = vec![0; universe.len()];
    let codes: Vec<ScCode> = universe.into_iter().collect();

    let position = |sc: &ScCode| {
        codes
            .iter()
            .position(|c| c == sc)
            .expect("universe covers gains")
    };
    let unassigned = ScCode::unassigned();

    enumerate_gains(
        publications,
        citations,
        config,
        |cited, _, generator, earner| {
            if generator == earner {
                return;
            }
            let outbound = generator == country;
            let inbound = earner == country;
            if !outbound && !inbound {
                return;
            }
            let scs = naive_journal_scs(categories, &cited.journal_id);
            let mut targets: Vec<&ScCode> = Vec::new();
            match scs {
                Some(set) if !set.is_empty() => targets.extend(set.iter()),
                _ => targets.push(&unassigned),
            }
            for sc in targets {
                let idx = position(sc);
                if outbound {
                    generated[idx] += 1;
                }
                if inbound {
                    earned[idx] += 1;
                }
            }
        },
    );

    Ok(codes
        .into_iter()
        .enumerate()
        .map(|(idx, sc_code)| {
            let area = naive_area(categories, &sc_code).to_string();
            FieldBkfRow {
                macro_area: if sc_code.as_str() == crate::corpus::UNASSIGNED_SC {
                    UNASSIGNED_AREA.to_string()
                } else {
                    area
                },
                foreign_gains_generated: generated[idx],
                earned_gains: earned[idx],
                balance: generated[idx] as i64 - earned[idx] as i64,
                sc_code,
            }
        })
        .collect())
}

/// Overall and per-category bilateral rows between two countries, from
/// `k`'s perspective, recomputed from scratch.
pub fn oracle_bilateral_table(
    publications: &[PublicationRecord],
    citations: &[CitationLink],
    categories: &JournalCategoryMap,
    config: &AnalysisConfig,
    k: &CountryCode,
    l: &CountryCode,
    bound: usize,
) -> Result<(BilateralRow, Vec<BilateralRow>)> {
    check_bound(publications, bound)?;
    if k == l {
        return Err(BkfError::SameCountryPair {
            code: k.as_str().to_string(),
        });
    }
    for code in [k, l] {
        if !config.countries.contains(code) {
            return Err(BkfError::UnknownCountry {
                code: code.as_str().to_string(),
            });
        }
    }

    let mut universe: BTreeSet<ScCode> = categories.sc_universe();
    universe.insert(ScCode::unassigned());
    let codes: Vec<ScCode> = universe.into_iter().collect();
    let mut out_total = 0u64;
    let mut in_total = 0u64;
    let mut out_by_sc: Vec<u64> = vec![0; codes.len()];
    let mut in_by_sc: Vec<u64> = vec![0; codes.len()];
    let unassigned = ScCode::unassigned();

    enumerate_gains(
        publications,
        citations,
        config,
        |cited, _, generator, earner| {
            let outbound = generator == k && earner == l;
            let inbound = generator == l && earner == k;
            if !outbound && !inbound {
                return;
            }
            if outbound {
                out_total += 1;
            } else {
                in_total += 1;
            }
            let scs = naive_journal_scs(categories, &cited.journal_id);
            let mut targets: Vec<&ScCode> = Vec::new();
            match scs {
                Some(set) if !set.is_empty() => targets.extend(set.iter()),
                _ => targets.push(&unassigned),
            }
            for sc in targets {
                let idx = codes
                    .iter()
                    .position(|c| c == sc)
                    .expect("universe covers gains");
                if outbound {
                    out_by_sc[idx] += 1;
                } else {
                    in_by_sc[idx] += 1;
                }
            }
        },
    );

    let overall = BilateralRow {
        sc_code: None,
        outbound: out_total,
        inbound: in_total,
        balance: out_total as i64 - in_total as i64,
    };
    let per_sc = codes
        .into_iter()
        .enumerate()
        .map(|(idx, sc)| BilateralRow {
            sc_code: Some(sc),
            outbound: out_by_sc[idx],
            inbound: in_by_sc[idx],
            balance: out_by_sc[idx] as i64 - in_by_sc[idx] as i64,
        })
        .collect();
    Ok((overall, per_sc))
}
