//! Property tests over randomized corpora, affiliation lists, and gains
//! tables.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use bkf_core::aggregate::{bkf_overall, ScFlowCube};
use bkf_core::attribution::{attribute_corpus, made_in};
use bkf_core::corpus::{
    build_corpus, Affiliation, AnalysisConfig, CitationLink, CountryCode, DocType, IsoDate,
    JournalCategoryMap, PublicationRecord, ScCode, Threshold,
};
use bkf_core::flow::{benefits_of, compute_flow_matrix, domestic_split, gains_of};
use bkf_core::ingest::{
    parse_citations, parse_journal_categories, parse_publications, write_citations_csv,
    write_journals_csv, write_publications_jsonl, write_sc_areas_csv,
};
use bkf_core::specialization::{balassa_ratio, specialization_index, GainsTable};

const POOL: [&str; 6] = ["AA", "BB", "CC", "DD", "EE", "FF"];
const TRACKED: [&str; 4] = ["AA", "BB", "CC", "DD"];

fn cc(code: &str) -> CountryCode {
    CountryCode::new(code).unwrap()
}

fn config() -> AnalysisConfig {
    AnalysisConfig::new(
        TRACKED.iter().map(|c| cc(c)).collect(),
        (2004, 2008),
        IsoDate::parse("2017-06-10").unwrap(),
    )
    .unwrap()
}

fn affiliations(countries: &[usize]) -> Vec<Affiliation> {
    countries
        .iter()
        .enumerate()
        .map(|(i, &c)| Affiliation::new(&format!("i{i}"), cc(POOL[c % POOL.len()])).unwrap())
        .collect()
}

fn record(id: &str, year: i32, doc_type: DocType, countries: &[usize]) -> PublicationRecord {
    PublicationRecord::new(id, year, doc_type, "J1", affiliations(countries)).unwrap()
}

prop_compose! {
    fn affiliation_countries()(countries in prop::collection::vec(0usize..POOL.len(), 1..8)) -> Vec<usize> {
        countries
    }
}

prop_compose! {
    fn threshold_strategy()(den in 1u32..12, num_seed in 1u32..12) -> Threshold {
        let num = 1 + (num_seed - 1) % den;
        Threshold::new(num, den).unwrap()
    }
}

proptest! {
    #[test]
    fn made_in_is_permutation_invariant(countries in affiliation_countries(), seed in 0usize..40) {
        let base = record("P1", 2005, DocType::Article, &countries);
        let mut rotated = countries.clone();
        rotated.rotate_left(seed % countries.len().max(1));
        let other = record("P1", 2005, DocType::Article, &rotated);
        let result = made_in(&base, Threshold::half());
        prop_assert_eq!(
            result.countries.clone(),
            made_in(&other, Threshold::half()).countries
        );
        // At the one-half threshold no more than two countries can qualify.
        prop_assert!(result.countries.len() <= 2);
        prop_assert_eq!(result.tie, result.countries.len() >= 2);
    }

    #[test]
    fn raising_the_threshold_never_enlarges_the_set(
        countries in affiliation_countries(),
        a in threshold_strategy(),
        b in threshold_strategy(),
    ) {
        let rec = record("P1", 2005, DocType::Article, &countries);
        // a <= b iff every share meeting b also meets a, checked on the
        // full share grid of this record.
        let a_le_b = (0..=countries.len()).all(|count| {
            !b.meets(count, countries.len()) || a.meets(count, countries.len())
        });
        let (low, high) = if a_le_b { (a, b) } else { (b, a) };
        let low_set = made_in(&rec, low).countries;
        let high_set = made_in(&rec, high).countries;
        prop_assert!(high_set.is_subset(&low_set));
    }

    #[test]
    fn above_half_threshold_is_single_country(countries in affiliation_countries(), den in 2u32..10) {
        let threshold = Threshold::new(den / 2 + 1, den).unwrap();
        prop_assert!(threshold.exceeds_half());
        let rec = record("P1", 2005, DocType::Article, &countries);
        prop_assert!(made_in(&rec, threshold).countries.len() <= 1);
    }

    #[test]
    fn publications_roundtrip(pub_specs in prop::collection::vec(
        (2000i32..2020, 0usize..5, affiliation_countries()), 1..25,
    )) {
        let doc_types = [DocType::Article, DocType::Review, DocType::Letter, DocType::Proceedings, DocType::Other];
        let records: Vec<PublicationRecord> = pub_specs
            .iter()
            .enumerate()
            .map(|(i, (year, dt, countries))| {
                record(&format!("P{i}"), *year, doc_types[*dt], countries)
            })
            .collect();
        let parsed = parse_publications(&write_publications_jsonl(&records), 20);
        prop_assert!(parsed.report.is_clean());
        prop_assert_eq!(parsed.records, records);
    }

    #[test]
    fn citations_roundtrip(pairs in prop::collection::vec((0usize..30, 0usize..30), 0..60)) {
        let links: Vec<CitationLink> = pairs
            .iter()
            .map(|(a, b)| CitationLink::new(&format!("P{a}"), &format!("P{b}")))
            .collect();
        let parsed = parse_citations(&write_citations_csv(&links), 20);
        prop_assert!(parsed.report.is_clean());
        prop_assert_eq!(parsed.links, links);
    }

    #[test]
    fn journal_map_roundtrip(entries in prop::collection::btree_map(
        0usize..20,
        prop::collection::btree_set(0usize..10, 0..4),
        0..12,
    )) {
        let mut map = JournalCategoryMap::new();
        for (journal, scs) in &entries {
            map.insert_journal(
                &format!("J{journal}"),
                scs.iter().map(|s| ScCode::new(&format!("SC{s}")).unwrap()),
            );
        }
        for s in 0..10 {
            map.assign_area(ScCode::new(&format!("SC{s}")).unwrap(), &format!("AREA{}", s % 3)).unwrap();
        }
        let journals_csv = write_journals_csv(&map);
        let areas_csv = write_sc_areas_csv(&map);
        let (reparsed, report) = parse_journal_categories(&journals_csv, &areas_csv, 20).unwrap();
        prop_assert!(report.is_clean());
        prop_assert_eq!(&reparsed, &map);

        // Line order never matters for the set-valued result.
        let reverse_lines = |text: &str| -> String {
            let mut lines: Vec<&str> = text.lines().skip(1).collect();
            lines.reverse();
            let mut out = text.lines().next().unwrap_or_default().to_string();
            out.push('\n');
            out.push_str(&lines.join("\n"));
            out.push('\n');
            out
        };
        let (shuffled, _) = parse_journal_categories(
            &reverse_lines(&journals_csv),
            &reverse_lines(&areas_csv),
            20,
        )
        .unwrap();
        prop_assert_eq!(shuffled, map);
    }
}

/// Random corpus description: publication specs plus index-based links.
#[derive(Debug, Clone)]
struct CorpusSpec {
    pubs: Vec<(i32, usize, Vec<usize>)>,
    links: Vec<(usize, usize)>,
}

fn corpus_spec() -> impl Strategy<Value = CorpusSpec> {
    (
        prop::collection::vec((2000i32..2020, 0usize..5, affiliation_countries()), 2..30),
        prop::collection::vec((0usize..30, 0usize..30), 0..80),
    )
        .prop_map(|(pubs, links)| CorpusSpec { pubs, links })
}

fn build_from_spec(spec: &CorpusSpec, cfg: &AnalysisConfig) -> bkf_core::corpus::Corpus {
    let doc_types = [
        DocType::Article,
        DocType::Review,
        DocType::Letter,
        DocType::Proceedings,
        DocType::Other,
    ];
    let records: Vec<PublicationRecord> = spec
        .pubs
        .iter()
        .enumerate()
        .map(|(i, (year, dt, countries))| {
            record(&format!("P{i:03}"), *year, doc_types[*dt], countries)
        })
        .collect();
    let n = records.len();
    let links: Vec<CitationLink> = spec
        .links
        .iter()
        .map(|(a, b)| CitationLink::new(&format!("P{:03}", a % n), &format!("P{:03}", b % n)))
        .collect();
    build_corpus(records, links, JournalCategoryMap::new(), cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn corpus_build_is_permutation_invariant(spec in corpus_spec(), rot_p in 0usize..30, rot_l in 0usize..80) {
        let cfg = config();
        let a = build_from_spec(&spec, &cfg);
        // Same records and links with stable ids, fed in rotated order.
        let doc_types = [DocType::Article, DocType::Review, DocType::Letter, DocType::Proceedings, DocType::Other];
        let mut records: Vec<PublicationRecord> = spec
            .pubs
            .iter()
            .enumerate()
            .map(|(i, (year, dt, countries))| record(&format!("P{i:03}"), *year, doc_types[*dt], countries))
            .collect();
        let n = records.len();
        let mut links: Vec<CitationLink> = spec
            .links
            .iter()
            .map(|(a, b)| CitationLink::new(&format!("P{:03}", a % n), &format!("P{:03}", b % n)))
            .collect();
        records.rotate_left(rot_p % n.max(1));
        if !links.is_empty() {
            let r = rot_l % links.len();
            links.rotate_left(r);
        }
        let b = build_corpus(records, links, JournalCategoryMap::new(), &cfg).unwrap();

        prop_assert_eq!(a.publications(), b.publications());
        for idx in 0..a.len() {
            prop_assert_eq!(a.citing_indices(idx), b.citing_indices(idx));
        }
        prop_assert_eq!(a.diagnostics().dangling_links.count, b.diagnostics().dangling_links.count);
        prop_assert_eq!(a.diagnostics().self_citations.count, b.diagnostics().self_citations.count);
    }

    #[test]
    fn gains_stay_within_benefit_bounds(spec in corpus_spec()) {
        let cfg = config();
        let corpus = build_from_spec(&spec, &cfg);
        let n_tracked = cfg.countries.len() as u64;
        for record in corpus.publications() {
            let benefits = benefits_of(&record.id, &corpus, &cfg).unwrap();
            let gains = gains_of(&record.id, &corpus, &cfg).unwrap();
            if gains.is_empty() {
                continue;
            }
            // Per-generator ledgers stay within [benefits, benefits * n].
            let mut per_generator: BTreeMap<&CountryCode, u64> = BTreeMap::new();
            for gain in &gains {
                *per_generator.entry(&gain.generator).or_insert(0) += 1;
            }
            for (_, count) in per_generator {
                prop_assert!(count >= benefits);
                prop_assert!(count <= benefits * n_tracked);
            }
            // Each benefit earns between 1 and n gains per generator.
            let mut per_citation: BTreeMap<(&str, &CountryCode), u64> = BTreeMap::new();
            for gain in &gains {
                *per_citation.entry((gain.citing_id.as_str(), &gain.generator)).or_insert(0) += 1;
            }
            for (_, earners) in per_citation {
                prop_assert!(earners >= 1 && earners <= n_tracked);
            }
        }
    }

    #[test]
    fn matrix_conserves_gain_records(spec in corpus_spec()) {
        let cfg = config();
        let corpus = build_from_spec(&spec, &cfg);
        let attribution = attribute_corpus(&corpus, &cfg);
        let matrix = compute_flow_matrix(&corpus, &attribution, &cfg);

        let mut total_records = 0u64;
        for record in corpus.publications() {
            total_records += gains_of(&record.id, &corpus, &cfg).unwrap().len() as u64;
        }
        prop_assert_eq!(matrix.total(), total_records);

        // Closed world: off-diagonal mass is counted once on each side.
        let splits = domestic_split(&matrix);
        let generated: u64 = splits.iter().map(|s| s.foreign_gains_generated).sum();
        let earned: u64 = splits.iter().map(|s| s.gains_earned).sum();
        prop_assert_eq!(generated, earned);

        // Zero-sum balances, exactly.
        let balance_total: i64 = bkf_overall(&matrix).iter().map(|r| r.balance).sum();
        prop_assert_eq!(balance_total, 0);
    }

    #[test]
    fn removing_an_uncited_citing_publication_is_linear(spec in corpus_spec()) {
        let cfg = config();
        let corpus = build_from_spec(&spec, &cfg);
        // Pick a publication nobody cites; removing it only removes the
        // gains it earns as a citing publication.
        let victim = corpus
            .publications()
            .iter()
            .enumerate()
            .find(|(idx, _)| corpus.citing_indices(*idx).is_empty())
            .map(|(_, record)| record.id.clone());
        prop_assume!(victim.is_some());
        let victim = victim.unwrap();

        let mut contribution: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for record in corpus.publications() {
            for gain in gains_of(&record.id, &corpus, &cfg).unwrap() {
                if gain.citing_id == victim {
                    let g = cfg.country_index(&gain.generator).unwrap();
                    let e = cfg.country_index(&gain.earner).unwrap();
                    *contribution.entry((g, e)).or_insert(0) += 1;
                }
            }
        }

        let attribution = attribute_corpus(&corpus, &cfg);
        let full = compute_flow_matrix(&corpus, &attribution, &cfg);

        let remaining: Vec<PublicationRecord> = corpus
            .publications()
            .iter()
            .filter(|r| r.id != victim)
            .cloned()
            .collect();
        let mut links = Vec::new();
        for (idx, record) in corpus.publications().iter().enumerate() {
            for &citing in corpus.citing_indices(idx) {
                let citing_id = &corpus.publications()[citing as usize].id;
                if citing_id != &victim && record.id != victim {
                    links.push(CitationLink::new(citing_id, &record.id));
                }
            }
        }
        let reduced_corpus =
            build_corpus(remaining, links, JournalCategoryMap::new(), &cfg).unwrap();
        let reduced_attribution = attribute_corpus(&reduced_corpus, &cfg);
        let reduced = compute_flow_matrix(&reduced_corpus, &reduced_attribution, &cfg);

        for g in 0..cfg.countries.len() {
            for e in 0..cfg.countries.len() {
                let removed = contribution.get(&(g, e)).copied().unwrap_or(0);
                prop_assert_eq!(full.get(g, e), reduced.get(g, e) + removed);
            }
        }
    }

    #[test]
    fn full_counting_identity_over_categories(spec in corpus_spec(), multi in 0usize..3) {
        let cfg = config();
        // Journal J1 with `multi` + 1 categories.
        let mut map = JournalCategoryMap::new();
        let codes: Vec<ScCode> = (0..=multi).map(|i| ScCode::new(&format!("SC{i}")).unwrap()).collect();
        map.insert_journal("J1", codes.clone());
        for code in &codes {
            map.assign_area(code.clone(), "AREA0").unwrap();
        }

        let doc_types = [DocType::Article, DocType::Review, DocType::Letter, DocType::Proceedings, DocType::Other];
        let records: Vec<PublicationRecord> = spec
            .pubs
            .iter()
            .enumerate()
            .map(|(i, (year, dt, countries))| record(&format!("P{i:03}"), *year, doc_types[*dt], countries))
            .collect();
        let n = records.len();
        let links: Vec<CitationLink> = spec
            .links
            .iter()
            .map(|(a, b)| CitationLink::new(&format!("P{:03}", a % n), &format!("P{:03}", b % n)))
            .collect();
        let corpus = build_corpus(records, links, map.clone(), &cfg).unwrap();
        let attribution = attribute_corpus(&corpus, &cfg);

        let mut all_records = Vec::new();
        for record in corpus.publications() {
            all_records.extend(gains_of(&record.id, &corpus, &cfg).unwrap());
        }
        // Every gain carries the same |SC| = multi + 1 set here, so summed
        // per-category generated and earned gains both equal the sum of
        // |SC| over cross-border gains.
        let expected: u64 = all_records
            .iter()
            .filter(|g| !g.domestic)
            .map(|g| g.sc_codes.len().max(1) as u64)
            .sum();
        let cube = ScFlowCube::from_corpus(&corpus, &attribution, &cfg);
        let mut summed_generated = 0u64;
        let mut summed_earned = 0u64;
        for country in &cfg.countries {
            let k = cfg.country_index(country).unwrap();
            for sc in cube.subject_categories() {
                summed_generated += cube.generated(sc, k);
                summed_earned += cube.earned(sc, k);
            }
        }
        prop_assert_eq!(summed_generated, expected);
        prop_assert_eq!(summed_earned, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn specialization_scale_invariance_and_range(
        rows in prop::collection::vec(prop::collection::vec(0u64..500, 4), 3),
        factor in 1u64..1000,
    ) {
        let countries: Vec<CountryCode> = ["AA", "BB", "CC"].iter().map(|c| cc(c)).collect();
        let scs: Vec<ScCode> = (0..4).map(|i| ScCode::new(&format!("SC{i}")).unwrap()).collect();
        let table = GainsTable::from_cells(countries.clone(), scs.clone(), &rows).unwrap();
        let mut scaled = table.clone();
        scaled.scale(factor);

        for country in &countries {
            for sc in &scs {
                let base = specialization_index(
                    &balassa_ratio(&table, country, sc, Default::default()).unwrap(),
                );
                let after = specialization_index(
                    &balassa_ratio(&scaled, country, sc, Default::default()).unwrap(),
                );
                prop_assert_eq!(base, after);
                if let Some(value) = base.defined() {
                    prop_assert!((-100.0..=100.0).contains(&value));
                }
            }
        }
    }

    #[test]
    fn specialization_is_strictly_monotonic_in_the_focal_cell(
        rows in prop::collection::vec(prop::collection::vec(1u64..200, 3), 2),
        bump in 1u64..50,
    ) {
        let countries: Vec<CountryCode> = ["AA", "BB"].iter().map(|c| cc(c)).collect();
        let scs: Vec<ScCode> = (0..3).map(|i| ScCode::new(&format!("SC{i}")).unwrap()).collect();
        let table = GainsTable::from_cells(countries.clone(), scs.clone(), &rows).unwrap();
        let mut bumped = table.clone();
        bumped.set(0, 0, table.get(0, 0) + bump);

        let before = specialization_index(
            &balassa_ratio(&table, &countries[0], &scs[0], Default::default()).unwrap(),
        )
        .defined()
        .unwrap();
        let after = specialization_index(
            &balassa_ratio(&bumped, &countries[0], &scs[0], Default::default()).unwrap(),
        )
        .defined()
        .unwrap();
        prop_assert!(after > before);
    }
}

#[test]
fn presence_of_fifth_country_earns_nothing_but_its_production_cites() {
    // A publication made in an untracked country generates no gains, but
    // tracked countries can still earn from citing it? No: earning needs a
    // tracked generator. The tracked world can, however, earn gains when
    // the untracked publication cites tracked production.
    let cfg = config();
    let pubs = vec![
        record("P1", 2005, DocType::Article, &[0]), // AA production
        record("P2", 2005, DocType::Article, &[4, 4]), // EE production (untracked)
        record("Q1", 2006, DocType::Article, &[4, 4, 1]), // EE-led, BB present
    ];
    let links = vec![
        CitationLink::new("Q1", "P1"), // tracked production cited by EE-led pub
        CitationLink::new("Q1", "P2"),
        CitationLink::new("P1", "P2"), // untracked production cited by AA
    ];
    let corpus = build_corpus(pubs, links, JournalCategoryMap::new(), &cfg).unwrap();

    // P2 (made in EE only) generates nothing.
    assert!(gains_of("P2", &corpus, &cfg).unwrap().is_empty());

    // P1's citation from Q1 earns BB a gain even though Q1 is made in EE.
    let gains = gains_of("P1", &corpus, &cfg).unwrap();
    assert_eq!(gains.len(), 1);
    assert_eq!(gains[0].earner, cc("BB"));
    assert_eq!(gains[0].generator, cc("AA"));

    let attribution = attribute_corpus(&corpus, &cfg);
    let matrix = compute_flow_matrix(&corpus, &attribution, &cfg);
    assert_eq!(matrix.total(), 1);
}

#[test]
fn distinct_earner_sets_deduplicate() {
    let cfg = config();
    let pubs = vec![
        record("P1", 2005, DocType::Article, &[0]),
        record("Q1", 2006, DocType::Article, &[1, 1, 2, 2, 2]),
    ];
    let links = vec![CitationLink::new("Q1", "P1")];
    let corpus = build_corpus(pubs, links, JournalCategoryMap::new(), &cfg).unwrap();
    let gains = gains_of("P1", &corpus, &cfg).unwrap();
    let earners: BTreeSet<&str> = gains.iter().map(|g| g.earner.as_str()).collect();
    assert_eq!(gains.len(), 2);
    assert_eq!(earners, BTreeSet::from(["BB", "CC"]));
}
