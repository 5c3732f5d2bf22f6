//! Report-table assembly: country summaries, overall balances, per-field
//! and per-macro-area balances, and bilateral breakdowns.
//!
//! Every table is exact integer arithmetic over gain counts; percentages
//! and ratios exist only in the presentation layer ([`crate::output`]).
//! Field tables use full counting: a gain whose cited journal carries
//! several categories contributes once to every category row, and gains
//! from unassigned journals land in the `unassigned` bucket so field
//! tables always reconcile with overall totals.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::attribution::Attribution;
use crate::corpus::{
    AnalysisConfig, Corpus, CountryCode, JournalCategoryMap, ScCode, UNASSIGNED_AREA,
};
use crate::flow::{presence_table, visit_gains, FlowMatrix, GainRecord};
use crate::{BkfError, Result};

/// Per-country production and citation tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountrySummary {
    pub country: CountryCode,
    /// Publications in the analysis window listing the country anywhere.
    pub publications: u64,
    /// Of those, publications made in the country.
    pub made_in: u64,
    /// Made-in publications with at least one benefit.
    pub cited: u64,
    /// Citations of the country's made-in publications.
    pub benefits: u64,
    /// Gains generated by the country's made-in publications.
    pub gains: u64,
    /// Gains whose earner is the country itself.
    pub domestic_gains: u64,
}

/// One row of the overall balance table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BkfRow {
    pub country: CountryCode,
    /// (a) Gains generated for other tracked countries.
    pub foreign_gains_generated: u64,
    /// (b) Gains earned from other countries' production.
    pub earned_gains: u64,
    /// a - b, exactly.
    pub balance: i64,
    /// All gains generated by the country, domestic included.
    pub total_gains: u64,
    /// Foreign gains generated by the other tracked countries combined;
    /// the denominator of the earned-gains share.
    pub foreign_gains_by_foreign: u64,
}

/// One row of a per-subject-category balance table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldBkfRow {
    pub sc_code: ScCode,
    pub macro_area: String,
    pub foreign_gains_generated: u64,
    pub earned_gains: u64,
    pub balance: i64,
}

impl FieldBkfRow {
    pub fn new(sc_code: ScCode, macro_area: &str, generated: u64, earned: u64) -> Self {
        FieldBkfRow {
            sc_code,
            macro_area: macro_area.to_string(),
            foreign_gains_generated: generated,
            earned_gains: earned,
            balance: generated as i64 - earned as i64,
        }
    }
}

/// One row of a macro-area rollup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AreaBkfRow {
    pub macro_area: String,
    pub foreign_gains_generated: u64,
    pub earned_gains: u64,
    pub balance: i64,
}

/// One row of a bilateral table; `sc_code` is `None` for the overall row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilateralRow {
    pub sc_code: Option<ScCode>,
    /// Gains flowing from the perspective country to the partner.
    pub outbound: u64,
    /// Gains flowing from the partner to the perspective country.
    pub inbound: u64,
    /// outbound - inbound, from the perspective country's side.
    pub balance: i64,
}

impl BilateralRow {
    pub fn new(sc_code: Option<ScCode>, outbound: u64, inbound: u64) -> Self {
        BilateralRow {
            sc_code,
            outbound,
            inbound,
            balance: outbound as i64 - inbound as i64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilateralLevel {
    Overall,
    PerSc,
}

/// Gains split by subject category: one generator-by-earner matrix per
/// category, with full counting across multi-category journals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScFlowCube {
    countries: Vec<CountryCode>,
    per_sc: BTreeMap<ScCode, Vec<u64>>,
}

impl ScFlowCube {
    pub fn new(countries: Vec<CountryCode>) -> Self {
        ScFlowCube {
            countries,
            per_sc: BTreeMap::new(),
        }
    }

    pub fn countries(&self) -> &[CountryCode] {
        &self.countries
    }

    pub fn subject_categories(&self) -> impl Iterator<Item = &ScCode> {
        self.per_sc.keys()
    }

    fn cells_mut(&mut self, sc: &ScCode) -> &mut Vec<u64> {
        let n = self.countries.len();
        self.per_sc
            .entry(sc.clone())
            .or_insert_with(|| vec![0; n * n])
    }

    fn add(&mut self, sc: &ScCode, generator: usize, earner: usize, amount: u64) {
        let n = self.countries.len();
        self.cells_mut(sc)[generator * n + earner] += amount;
    }

    /// Adds one gain, fanning it out to every category of the cited
    /// journal, or to the `unassigned` bucket when there is none.
    fn add_gain(&mut self, sc_codes: &BTreeSet<ScCode>, generator: usize, earner: usize) {
        if sc_codes.is_empty() {
            self.add(&ScCode::unassigned(), generator, earner, 1);
        } else {
            for sc in sc_codes {
                self.add(sc, generator, earner, 1);
            }
        }
    }

    pub fn get(&self, sc: &ScCode, generator: usize, earner: usize) -> u64 {
        let n = self.countries.len();
        self.per_sc
            .get(sc)
            .map(|cells| cells[generator * n + earner])
            .unwrap_or(0)
    }

    /// Ensures a (possibly zero) entry for every category the map knows
    /// about plus the `unassigned` bucket, so tables report zero rows
    /// instead of omitting them.
    pub fn ensure_universe(&mut self, map: &JournalCategoryMap) {
        for sc in map.sc_universe() {
            self.cells_mut(&sc);
        }
        self.cells_mut(&ScCode::unassigned());
    }

    /// Accumulates the cube from a corpus in one streaming pass.
    pub fn from_corpus(
        corpus: &Corpus,
        attribution: &Attribution,
        config: &AnalysisConfig,
    ) -> Self {
        let mut cube = ScFlowCube::new(config.countries.clone());
        visit_gains(corpus, attribution, config, |gain| {
            cube.add_gain(gain.sc_codes, gain.generator_idx, gain.earner_idx);
        });
        cube
    }

    /// Accumulates the cube from owned gain records; used when tables are
    /// built from record fixtures rather than a corpus.
    pub fn from_records<I>(records: I, countries: &[CountryCode]) -> Result<Self>
    where
        I: IntoIterator<Item = GainRecord>,
    {
        let mut cube = ScFlowCube::new(countries.to_vec());
        for record in records {
            let generator = countries
                .iter()
                .position(|c| *c == record.generator)
                .ok_or(BkfError::UnknownCountry {
                    code: record.generator.as_str().to_string(),
                })?;
            let earner = countries.iter().position(|c| *c == record.earner).ok_or(
                BkfError::UnknownCountry {
                    code: record.earner.as_str().to_string(),
                },
            )?;
            cube.add_gain(&record.sc_codes, generator, earner);
        }
        Ok(cube)
    }

    fn country_index(&self, code: &CountryCode) -> Result<usize> {
        self.countries
            .iter()
            .position(|c| c == code)
            .ok_or_else(|| BkfError::UnknownCountry {
                code: code.as_str().to_string(),
            })
    }

    /// Foreign gains generated by `country` in one category.
    pub fn generated(&self, sc: &ScCode, k: usize) -> u64 {
        (0..self.countries.len())
            .filter(|&e| e != k)
            .map(|e| self.get(sc, k, e))
            .sum()
    }

    /// Gains earned by `country` from abroad in one category.
    pub fn earned(&self, sc: &ScCode, k: usize) -> u64 {
        (0..self.countries.len())
            .filter(|&g| g != k)
            .map(|g| self.get(sc, g, k))
            .sum()
    }

    /// Domestic gains of `country` in one category.
    pub fn domestic(&self, sc: &ScCode, k: usize) -> u64 {
        self.get(sc, k, k)
    }
}

/// One summary row per tracked country, in configuration order.
pub fn country_summary(
    corpus: &Corpus,
    attribution: &Attribution,
    matrix: &FlowMatrix,
    config: &AnalysisConfig,
) -> Vec<CountrySummary> {
    let n = config.countries.len();
    let presence = presence_table(corpus, config);
    let mut publications = vec![0u64; n];
    let mut made_in = vec![0u64; n];
    let mut cited = vec![0u64; n];
    let mut benefits = vec![0u64; n];

    let records = corpus.publications();
    for (idx, record) in records.iter().enumerate() {
        if !config.production_eligible(record) {
            continue;
        }
        for &c in &presence[idx] {
            publications[c as usize] += 1;
        }
        let Some(result) = attribution.get(&record.id) else {
            continue;
        };
        let generators: Vec<usize> = result
            .production_countries(config)
            .map(|c| config.country_index(c).expect("tracked country"))
            .collect();
        if generators.is_empty() {
            continue;
        }
        let mut pub_benefits = 0u64;
        for &citing_idx in corpus.citing_indices(idx) {
            let citing = &records[citing_idx as usize];
            if config.within_cutoff(citing) && !presence[citing_idx as usize].is_empty() {
                pub_benefits += 1;
            }
        }
        for &g in &generators {
            made_in[g] += 1;
            benefits[g] += pub_benefits;
            if pub_benefits > 0 {
                cited[g] += 1;
            }
        }
    }

    (0..n)
        .map(|k| CountrySummary {
            country: config.countries[k].clone(),
            publications: publications[k],
            made_in: made_in[k],
            cited: cited[k],
            benefits: benefits[k],
            gains: matrix.row_total(k),
            domestic_gains: matrix.diagonal(k),
        })
        .collect()
}

/// Overall balance rows in matrix country order. The balance of every
/// country is its off-diagonal row total minus its off-diagonal column
/// total, so the rows always sum to zero.
pub fn bkf_overall(matrix: &FlowMatrix) -> Vec<BkfRow> {
    let n = matrix.len();
    let foreign_generated: Vec<u64> = (0..n)
        .map(|k| matrix.row_total(k) - matrix.diagonal(k))
        .collect();
    let all_foreign: u64 = foreign_generated.iter().sum();
    (0..n)
        .map(|k| {
            let a = foreign_generated[k];
            let b = matrix.col_total(k) - matrix.diagonal(k);
            BkfRow {
                country: matrix.countries()[k].clone(),
                foreign_gains_generated: a,
                earned_gains: b,
                balance: a as i64 - b as i64,
                total_gains: matrix.row_total(k),
                foreign_gains_by_foreign: all_foreign - a,
            }
        })
        .collect()
}

/// Field rows for one country from an accumulated cube, sorted by
/// category code. Every category of the cube appears, zeros included.
pub fn field_rows(
    cube: &ScFlowCube,
    map: &JournalCategoryMap,
    country: &CountryCode,
) -> Result<Vec<FieldBkfRow>> {
    let k = cube.country_index(country)?;
    Ok(cube
        .per_sc
        .keys()
        .map(|sc| {
            FieldBkfRow::new(
                sc.clone(),
                map.area_of(sc),
                cube.generated(sc, k),
                cube.earned(sc, k),
            )
        })
        .collect())
}

/// Per-category balance table for one country, built directly from gain
/// records with full counting.
pub fn bkf_by_field<I>(
    records: I,
    map: &JournalCategoryMap,
    country: &CountryCode,
    config: &AnalysisConfig,
) -> Result<Vec<FieldBkfRow>>
where
    I: IntoIterator<Item = GainRecord>,
{
    let mut cube = ScFlowCube::from_records(records, &config.countries)?;
    cube.ensure_universe(map);
    field_rows(&cube, map, country)
}

/// Sums field rows into macro-area rows. Areas known to the map appear
/// even when empty; full counting is preserved (no deduplication across
/// member categories).
pub fn macro_area_rollup(rows: &[FieldBkfRow], map: &JournalCategoryMap) -> Vec<AreaBkfRow> {
    let mut totals: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for area in map.areas() {
        totals.entry(area.to_string()).or_insert((0, 0));
    }
    totals.entry(UNASSIGNED_AREA.to_string()).or_insert((0, 0));
    for row in rows {
        let entry = totals.entry(row.macro_area.clone()).or_insert((0, 0));
        entry.0 += row.foreign_gains_generated;
        entry.1 += row.earned_gains;
    }
    totals
        .into_iter()
        .map(|(macro_area, (generated, earned))| AreaBkfRow {
            macro_area,
            foreign_gains_generated: generated,
            earned_gains: earned,
            balance: generated as i64 - earned as i64,
        })
        .collect()
}

/// The `n` lowest-balance and `n` highest-balance field rows. Ties break
/// by category code so ranked tables are reproducible.
pub fn top_bottom_fields(rows: &[FieldBkfRow], n: usize) -> (Vec<FieldBkfRow>, Vec<FieldBkfRow>) {
    let mut ascending: Vec<FieldBkfRow> = rows.to_vec();
    ascending.sort_by(|a, b| {
        a.balance
            .cmp(&b.balance)
            .then_with(|| a.sc_code.cmp(&b.sc_code))
    });
    let bottom: Vec<FieldBkfRow> = ascending.iter().take(n).cloned().collect();
    let mut descending: Vec<FieldBkfRow> = rows.to_vec();
    descending.sort_by(|a, b| {
        b.balance
            .cmp(&a.balance)
            .then_with(|| a.sc_code.cmp(&b.sc_code))
    });
    let top: Vec<FieldBkfRow> = descending.into_iter().take(n).collect();
    (bottom, top)
}

/// The overall bilateral row between two countries, from `k`'s side.
pub fn bilateral_overall(
    matrix: &FlowMatrix,
    k: &CountryCode,
    l: &CountryCode,
) -> Result<BilateralRow> {
    if k == l {
        return Err(BkfError::SameCountryPair {
            code: k.as_str().to_string(),
        });
    }
    let ki = matrix
        .countries()
        .iter()
        .position(|c| c == k)
        .ok_or_else(|| BkfError::UnknownCountry {
            code: k.as_str().to_string(),
        })?;
    let li = matrix
        .countries()
        .iter()
        .position(|c| c == l)
        .ok_or_else(|| BkfError::UnknownCountry {
            code: l.as_str().to_string(),
        })?;
    Ok(BilateralRow::new(
        None,
        matrix.get(ki, li),
        matrix.get(li, ki),
    ))
}

/// Per-category bilateral rows between two countries, from `k`'s side,
/// sorted by category code with zero rows included.
pub fn bilateral_per_sc(
    cube: &ScFlowCube,
    k: &CountryCode,
    l: &CountryCode,
) -> Result<Vec<BilateralRow>> {
    if k == l {
        return Err(BkfError::SameCountryPair {
            code: k.as_str().to_string(),
        });
    }
    let ki = cube.country_index(k)?;
    let li = cube.country_index(l)?;
    Ok(cube
        .per_sc
        .keys()
        .map(|sc| BilateralRow::new(Some(sc.clone()), cube.get(sc, ki, li), cube.get(sc, li, ki)))
        .collect())
}

/// Bilateral table from gain records at the requested level.
pub fn bilateral_bkf<I>(
    records: I,
    k: &CountryCode,
    l: &CountryCode,
    map: &JournalCategoryMap,
    level: BilateralLevel,
    config: &AnalysisConfig,
) -> Result<Vec<BilateralRow>>
where
    I: IntoIterator<Item = GainRecord>,
{
    if k == l {
        return Err(BkfError::SameCountryPair {
            code: k.as_str().to_string(),
        });
    }
    let records: Vec<GainRecord> = records.into_iter().collect();
    match level {
        BilateralLevel::Overall => {
            let mut matrix = FlowMatrix::zero(config.countries.to_vec());
            for record in &records {
                let g = config.country_index(&record.generator).ok_or_else(|| {
                    BkfError::UnknownCountry {
                        code: record.generator.as_str().to_string(),
                    }
                })?;
                let e = config.country_index(&record.earner).ok_or_else(|| {
                    BkfError::UnknownCountry {
                        code: record.earner.as_str().to_string(),
                    }
                })?;
                matrix.add(g, e, 1);
            }
            Ok(vec![bilateral_overall(&matrix, k, l)?])
        }
        BilateralLevel::PerSc => {
            let mut cube = ScFlowCube::from_records(records, &config.countries)?;
            cube.ensure_universe(map);
            bilateral_per_sc(&cube, k, l)
        }
    }
}
