//! Seeded synthetic-corpus generation in the canonical ingest formats.
//!
//! Randomness comes from a self-contained splitmix64 stream seeded with
//! `GeneratorParams::seed`, so a given parameter set produces the same
//! corpus on every platform and toolchain. All corpus structure —
//! countries, journals, categories, citation topology — is derived from
//! that single stream in a fixed order.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{
    AnalysisConfig, CitationLink, CountryCode, DocType, JournalCategoryMap, PublicationRecord,
    ScCode,
};
use crate::ingest::{
    parse_config, parse_key_values, write_citations_csv, write_config, write_journals_csv,
    write_publications_jsonl, write_sc_areas_csv,
};
use crate::{Affiliation, BkfError, Result};

/// splitmix64 (Steele, Lea, Flood 2014): 64-bit state, one additive
/// constant, two xor-shift multiplies per draw.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `0..bound` by rejection, unbiased.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let draw = self.next_u64();
            if draw < zone {
                return draw % bound;
            }
        }
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn chance(&mut self, probability: f64) -> bool {
        self.next_f64() < probability
    }

    /// Knuth's product-of-uniforms Poisson sampler; fine for small means.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        if mean <= 0.0 {
            return 0;
        }
        let limit = (-mean).exp();
        let mut k = 0u64;
        let mut product = 1.0;
        loop {
            product *= self.next_f64();
            if product <= limit {
                return k;
            }
            k += 1;
        }
    }
}

/// Per-country generation profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryProfile {
    /// Publications produced by the country inside the period.
    pub publication_count: u32,
    /// Probability that a citing publication is drawn from the country's
    /// own pool rather than from everyone.
    pub home_bias: f64,
    /// Probability that a publication lands in a journal of the country's
    /// favorite subject category.
    pub sc_focus: f64,
}

impl Default for CountryProfile {
    fn default() -> Self {
        CountryProfile {
            publication_count: 50,
            home_bias: 0.6,
            sc_focus: 0.5,
        }
    }
}

/// Everything the generator needs; parsed from the same flat key-value
/// format as the analysis configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub seed: u64,
    pub analysis: AnalysisConfig,
    pub profiles: BTreeMap<CountryCode, CountryProfile>,
    pub journal_count: u32,
    pub sc_count: u32,
    pub area_count: u32,
    /// Mean citations received per made-in publication.
    pub citation_density: f64,
    /// Share of publications split exactly 50/50 with a partner country.
    pub tie_rate: f64,
    /// Share of publications adding one below-threshold foreign partner.
    pub collab_rate: f64,
    /// Extra publications (fraction of the base count) from an untracked
    /// country, usable on the citing side only.
    pub outside_rate: f64,
    /// Extra citing-only publications dated past the citation cutoff.
    pub late_rate: f64,
    /// Probability that a journal carries a second or third category.
    pub multi_sc_rate: f64,
    /// Probability that a journal is omitted from the category file.
    pub unassigned_journal_rate: f64,
    /// Probability that a publication's document type is `other`.
    pub other_doc_rate: f64,
}

/// Country code reserved for generated outside-world publications.
pub const OUTSIDE_COUNTRY: &str = "ZZ";

impl GeneratorParams {
    pub fn new(analysis: AnalysisConfig, seed: u64) -> Self {
        let profiles = analysis
            .countries
            .iter()
            .map(|c| (c.clone(), CountryProfile::default()))
            .collect();
        GeneratorParams {
            seed,
            analysis,
            profiles,
            journal_count: 40,
            sc_count: 12,
            area_count: 4,
            citation_density: 2.0,
            tie_rate: 0.05,
            collab_rate: 0.25,
            outside_rate: 0.0,
            late_rate: 0.0,
            multi_sc_rate: 0.3,
            unassigned_journal_rate: 0.05,
            other_doc_rate: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        for (name, value) in [
            (
                "home_bias",
                self.profiles
                    .values()
                    .map(|p| p.home_bias)
                    .fold(0.0, f64::max),
            ),
            (
                "sc_focus",
                self.profiles
                    .values()
                    .map(|p| p.sc_focus)
                    .fold(0.0, f64::max),
            ),
            ("tie_rate", self.tie_rate),
            ("collab_rate", self.collab_rate),
            ("outside_rate", self.outside_rate),
            ("late_rate", self.late_rate),
            ("multi_sc_rate", self.multi_sc_rate),
            ("unassigned_journal_rate", self.unassigned_journal_rate),
            ("other_doc_rate", self.other_doc_rate),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(BkfError::params(format!("{name} must lie in [0, 1]")));
            }
        }
        for profile in self.profiles.values() {
            if profile.home_bias < 0.0 || profile.sc_focus < 0.0 {
                return Err(BkfError::params("profile probabilities must lie in [0, 1]"));
            }
        }
        if self.citation_density < 0.0 {
            return Err(BkfError::params("citation_density must be non-negative"));
        }
        let total_pubs: u64 = self
            .profiles
            .values()
            .map(|p| p.publication_count as u64)
            .sum();
        if self.citation_density > 0.0 && total_pubs == 0 {
            return Err(BkfError::params(
                "citations requested but no publications configured",
            ));
        }
        if self.journal_count == 0 || self.sc_count == 0 || self.area_count == 0 {
            return Err(BkfError::params(
                "journal, category, and area counts must be positive",
            ));
        }
        if self.outside_rate > 0.0
            && self
                .analysis
                .countries
                .iter()
                .any(|c| c.as_str() == OUTSIDE_COUNTRY)
        {
            return Err(BkfError::params(format!(
                "country code {OUTSIDE_COUNTRY} is reserved for outside-world publications"
            )));
        }
        Ok(())
    }
}

/// Parses generator parameters (and the embedded analysis configuration)
/// from flat key-value text.
pub fn parse_generator_params(input: &str) -> Result<GeneratorParams> {
    let analysis = parse_config(input)?;
    let pairs = parse_key_values(input)?;
    let mut seed: Option<u64> = None;
    let mut params = GeneratorParams::new(analysis, 0);

    let parse_f64 = |key: &str, value: &str| -> Result<f64> {
        value
            .parse()
            .map_err(|_| BkfError::params(format!("malformed value for `{key}`: `{value}`")))
    };
    let parse_u32 = |key: &str, value: &str| -> Result<u32> {
        value
            .parse()
            .map_err(|_| BkfError::params(format!("malformed value for `{key}`: `{value}`")))
    };

    for (key, value) in &pairs {
        match key.as_str() {
            "seed" => {
                seed = Some(
                    value
                        .parse()
                        .map_err(|_| BkfError::params(format!("malformed seed `{value}`")))?,
                )
            }
            "journals" => params.journal_count = parse_u32(key, value)?,
            "scs" => params.sc_count = parse_u32(key, value)?,
            "areas" => params.area_count = parse_u32(key, value)?,
            "citation_density" => params.citation_density = parse_f64(key, value)?,
            "tie_rate" => params.tie_rate = parse_f64(key, value)?,
            "collab_rate" => params.collab_rate = parse_f64(key, value)?,
            "outside_rate" => params.outside_rate = parse_f64(key, value)?,
            "late_rate" => params.late_rate = parse_f64(key, value)?,
            "multi_sc_rate" => params.multi_sc_rate = parse_f64(key, value)?,
            "unassigned_journal_rate" => params.unassigned_journal_rate = parse_f64(key, value)?,
            "other_doc_rate" => params.other_doc_rate = parse_f64(key, value)?,
            _ => {
                if let Some(code) = key.strip_prefix("pubs.") {
                    let country = CountryCode::new(code)?;
                    let profile = profile_mut(&mut params, &country)?;
                    profile.publication_count = parse_u32(key, value)?;
                } else if let Some(code) = key.strip_prefix("home_bias.") {
                    let country = CountryCode::new(code)?;
                    profile_mut(&mut params, &country)?.home_bias = parse_f64(key, value)?;
                } else if let Some(code) = key.strip_prefix("sc_focus.") {
                    let country = CountryCode::new(code)?;
                    profile_mut(&mut params, &country)?.sc_focus = parse_f64(key, value)?;
                }
            }
        }
    }

    params.seed = seed.ok_or_else(|| BkfError::params("missing key `seed`"))?;
    params.validate()?;
    Ok(params)
}

fn profile_mut<'p>(
    params: &'p mut GeneratorParams,
    country: &CountryCode,
) -> Result<&'p mut CountryProfile> {
    if !params.profiles.contains_key(country) {
        return Err(BkfError::params(format!(
            "profile key for `{country}` does not match any configured country"
        )));
    }
    Ok(params.profiles.get_mut(country).expect("checked above"))
}

/// A generated corpus plus the configuration that analyzes it.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub publications: Vec<PublicationRecord>,
    pub citations: Vec<CitationLink>,
    pub categories: JournalCategoryMap,
    pub config: AnalysisConfig,
}

/// Canonical-format file images of a generated corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedFiles {
    pub publications_jsonl: String,
    pub citations_csv: String,
    pub journals_csv: String,
    pub sc_areas_csv: String,
    pub config_txt: String,
}

impl GeneratedCorpus {
    pub fn to_files(&self) -> GeneratedFiles {
        GeneratedFiles {
            publications_jsonl: write_publications_jsonl(&self.publications),
            citations_csv: write_citations_csv(&self.citations),
            journals_csv: write_journals_csv(&self.categories),
            sc_areas_csv: write_sc_areas_csv(&self.categories),
            config_txt: write_config(&self.config),
        }
    }
}

struct PubPlan {
    home: usize,
    year: i32,
    doc_type: DocType,
    journal: String,
    affiliations: Vec<Affiliation>,
}

pub fn generate_corpus(params: &GeneratorParams) -> Result<GeneratedCorpus> {
    params.validate()?;
    let mut rng = SplitMix64::new(params.seed);
    let config = &params.analysis;
    let countries = &config.countries;
    let n = countries.len();

    // Categories and macro-areas: SC{j} assigned round-robin to AREA{a}.
    let scs: Vec<ScCode> = (1..=params.sc_count)
        .map(|j| ScCode::new(&format!("SC{j:03}")).expect("valid code"))
        .collect();
    let mut categories = JournalCategoryMap::new();
    for (j, code) in scs.iter().enumerate() {
        let area = format!("AREA{:02}", (j as u32 % params.area_count) + 1);
        categories.assign_area(code.clone(), &area)?;
    }

    // Journals: primary category by index, extras by chance, a few left
    // out of the category file entirely.
    let journal_ids: Vec<String> = (1..=params.journal_count)
        .map(|j| format!("J{j:04}"))
        .collect();
    let mut journal_primary_sc: Vec<usize> = Vec::with_capacity(journal_ids.len());
    for (idx, journal) in journal_ids.iter().enumerate() {
        let primary = idx % scs.len();
        journal_primary_sc.push(primary);
        if rng.chance(params.unassigned_journal_rate) {
            continue;
        }
        let mut codes = vec![scs[primary].clone()];
        while codes.len() < 3 && rng.chance(params.multi_sc_rate) {
            let extra = rng.next_below(scs.len() as u64) as usize;
            if !codes.contains(&scs[extra]) {
                codes.push(scs[extra].clone());
            }
        }
        categories.insert_journal(journal, codes);
    }

    // Institutions: a pool per country, plus one for the outside world.
    let pool_size = |count: u32| (count as usize / 10).max(4);
    let institution_pools: Vec<Vec<String>> = countries
        .iter()
        .map(|c| {
            let count = params.profiles[c].publication_count;
            (0..pool_size(count))
                .map(|i| format!("{}-I{i:04}", c.as_str()))
                .collect()
        })
        .collect();
    let outside_pool: Vec<String> = (0..8)
        .map(|i| format!("{OUTSIDE_COUNTRY}-I{i:04}"))
        .collect();
    let outside_country = CountryCode::new(OUTSIDE_COUNTRY)?;

    let year_span = (config.period.1 - config.period.0 + 1) as u64;
    let draw_year = |rng: &mut SplitMix64| config.period.0 + rng.next_below(year_span) as i32;
    fn draw_doc_type(rng: &mut SplitMix64, other_rate: f64) -> DocType {
        if rng.chance(other_rate) {
            return DocType::Other;
        }
        match rng.next_below(20) {
            0..=15 => DocType::Article,
            16 | 17 => DocType::Review,
            18 => DocType::Letter,
            _ => DocType::Proceedings,
        }
    }

    fn sample_distinct(rng: &mut SplitMix64, pool: &[String], want: usize) -> Vec<String> {
        let mut picked: Vec<String> = Vec::with_capacity(want);
        while picked.len() < want {
            let candidate = &pool[rng.next_below(pool.len() as u64) as usize];
            if !picked.contains(candidate) {
                picked.push(candidate.clone());
            }
        }
        picked
    }

    let mut plans: Vec<PubPlan> = Vec::new();
    let mut home_pools: Vec<Vec<usize>> = vec![Vec::new(); n];

    let pick_journal = |rng: &mut SplitMix64, focus: f64, favorite_sc: usize| -> String {
        if rng.chance(focus) {
            let favored: Vec<usize> = (0..journal_ids.len())
                .filter(|&j| journal_primary_sc[j] == favorite_sc)
                .collect();
            if !favored.is_empty() {
                let j = favored[rng.next_below(favored.len() as u64) as usize];
                return journal_ids[j].clone();
            }
        }
        journal_ids[rng.next_below(journal_ids.len() as u64) as usize].clone()
    };

    for (home, country) in countries.iter().enumerate() {
        let profile = &params.profiles[country];
        let favorite_sc = home % scs.len();
        for _ in 0..profile.publication_count {
            let year = draw_year(&mut rng);
            let doc_type = draw_doc_type(&mut rng, params.other_doc_rate);
            let journal = pick_journal(&mut rng, profile.sc_focus, favorite_sc);
            let home_insts = &institution_pools[home];

            let affiliations: Vec<Affiliation> =
                if params.tie_rate > 0.0 && rng.chance(params.tie_rate) && n > 1 {
                    // Exactly 50/50 between home and a partner country.
                    let partner = {
                        let offset = 1 + rng.next_below((n - 1) as u64) as usize;
                        (home + offset) % n
                    };
                    let own = sample_distinct(&mut rng, home_insts, 1);
                    let theirs = sample_distinct(&mut rng, &institution_pools[partner], 1);
                    vec![
                        Affiliation::new(&own[0], country.clone())?,
                        Affiliation::new(&theirs[0], countries[partner].clone())?,
                    ]
                } else if params.collab_rate > 0.0 && rng.chance(params.collab_rate) && n > 1 {
                    // Two home institutions and one foreign: made in home only,
                    // but two countries present on the citing side.
                    let partner = {
                        let offset = 1 + rng.next_below((n - 1) as u64) as usize;
                        (home + offset) % n
                    };
                    let own = sample_distinct(&mut rng, home_insts, 2);
                    let theirs = sample_distinct(&mut rng, &institution_pools[partner], 1);
                    vec![
                        Affiliation::new(&own[0], country.clone())?,
                        Affiliation::new(&own[1], country.clone())?,
                        Affiliation::new(&theirs[0], countries[partner].clone())?,
                    ]
                } else {
                    let count = 1 + rng.next_below(3) as usize;
                    sample_distinct(&mut rng, home_insts, count)
                        .into_iter()
                        .map(|inst| Affiliation::new(&inst, country.clone()))
                        .collect::<Result<Vec<_>>>()?
                };

            home_pools[home].push(plans.len());
            plans.push(PubPlan {
                home,
                year,
                doc_type,
                journal,
                affiliations,
            });
        }
    }

    let base_count = plans.len();

    // Outside-world publications: citing-side only. Half are pure
    // outside, half mix in one tracked country below the threshold.
    let outside_count = (base_count as f64 * params.outside_rate).floor() as usize;
    for _ in 0..outside_count {
        let year = draw_year(&mut rng);
        let doc_type = draw_doc_type(&mut rng, params.other_doc_rate);
        let journal = journal_ids[rng.next_below(journal_ids.len() as u64) as usize].clone();
        let outside_insts = sample_distinct(&mut rng, &outside_pool, 2);
        let mut affiliations = vec![
            Affiliation::new(&outside_insts[0], outside_country.clone())?,
            Affiliation::new(&outside_insts[1], outside_country.clone())?,
        ];
        if rng.chance(0.5) {
            let tracked = rng.next_below(n as u64) as usize;
            let inst = sample_distinct(&mut rng, &institution_pools[tracked], 1);
            affiliations.push(Affiliation::new(&inst[0], countries[tracked].clone())?);
        }
        plans.push(PubPlan {
            home: usize::MAX,
            year,
            doc_type,
            journal,
            affiliations,
        });
    }

    // Late publications: past the cutoff, so their citations must not count.
    let late_count = (base_count as f64 * params.late_rate).floor() as usize;
    for _ in 0..late_count {
        let home = rng.next_below(n as u64) as usize;
        let year = config.cutoff.year + 1 + rng.next_below(3) as i32;
        let doc_type = draw_doc_type(&mut rng, params.other_doc_rate);
        let journal = journal_ids[rng.next_below(journal_ids.len() as u64) as usize].clone();
        let inst = sample_distinct(&mut rng, &institution_pools[home], 1);
        plans.push(PubPlan {
            home,
            year,
            doc_type,
            journal,
            affiliations: vec![Affiliation::new(&inst[0], countries[home].clone())?],
        });
    }

    let width = plans.len().max(1).to_string().len().max(6);
    let publications: Vec<PublicationRecord> = plans
        .iter()
        .enumerate()
        .map(|(i, plan)| {
            PublicationRecord::new(
                &format!("P{:0width$}", i + 1, width = width),
                plan.year,
                plan.doc_type,
                &plan.journal,
                plan.affiliations.clone(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    // Citations: each in-period publication receives a Poisson number of
    // citing publications, biased toward its home pool.
    let mut citations: Vec<CitationLink> = Vec::new();
    let total = publications.len();
    if params.citation_density > 0.0 && total > 1 {
        for (cited_idx, plan) in plans.iter().enumerate() {
            if plan.home == usize::MAX {
                continue;
            }
            if plan.year < config.period.0 || plan.year > config.period.1 {
                continue;
            }
            let want = rng.poisson(params.citation_density);
            let bias = params.profiles[&countries[plan.home]].home_bias;
            let mut chosen: BTreeSet<usize> = BTreeSet::new();
            for _ in 0..want {
                let mut found = None;
                for _ in 0..16 {
                    let candidate = if rng.chance(bias) && !home_pools[plan.home].is_empty() {
                        home_pools[plan.home]
                            [rng.next_below(home_pools[plan.home].len() as u64) as usize]
                    } else {
                        rng.next_below(total as u64) as usize
                    };
                    if candidate != cited_idx && !chosen.contains(&candidate) {
                        found = Some(candidate);
                        break;
                    }
                }
                if let Some(citing_idx) = found {
                    chosen.insert(citing_idx);
                }
            }
            for citing_idx in chosen {
                citations.push(CitationLink::new(
                    &publications[citing_idx].id,
                    &publications[cited_idx].id,
                ));
            }
        }
    }

    Ok(GeneratedCorpus {
        publications,
        citations,
        categories,
        config: config.clone(),
    })
}
