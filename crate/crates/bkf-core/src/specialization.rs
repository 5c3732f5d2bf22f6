//! Knowledge outflow/inflow specialization indexes (KOSI/KISI).
//!
//! Both indexes apply the Balassa revealed-comparative-advantage ratio to
//! a country-by-category gains table — foreign gains generated for the
//! outflow index, gains earned for the inflow one — and map it into
//! [-100, +100] with `100 * tanh(ln r)`. The transform is evaluated
//! through the algebraically equivalent closed form
//! `100 * (r^2 - 1) / (r^2 + 1)`, which needs no logarithm at zero and,
//! on exact rational ratios, reproduces round values exactly (ratio 3
//! gives +80, ratio 1/3 gives -80).
//!
//! Zero denominators never collapse to a number silently: a country with
//! no gains at all, or an empty rest-of-world, yields `Undefined`.

use std::collections::BTreeMap;

use crate::aggregate::ScFlowCube;
use crate::corpus::{AnalysisConfig, CountryCode, ScCode, SpecializationOptions};
use crate::{BkfError, Result};

/// Non-negative rational in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    /// `None` when the denominator is zero.
    pub fn new(num: u128, den: u128) -> Option<Self> {
        if den == 0 {
            return None;
        }
        if num == 0 {
            return Some(Rational { num: 0, den: 1 });
        }
        let g = gcd(num, den);
        Some(Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u128 {
        self.num
    }

    pub fn den(&self) -> u128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn recip(&self) -> Option<Self> {
        Rational::new(self.den, self.num)
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Outcome of the Balassa ratio for one (country, category) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BalassaRatio {
    Finite(Rational),
    /// The rest of the world has nothing in the category while the
    /// country does.
    Infinite,
    /// A zero denominator: the country has no gains at all, the rest of
    /// the world has none, or both sides of the category are empty.
    Undefined,
}

/// A specialization-index value; `Undefined` is first-class and never
/// coerced to a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexValue {
    Defined(f64),
    Undefined,
}

impl IndexValue {
    pub fn defined(&self) -> Option<f64> {
        match self {
            IndexValue::Defined(v) => Some(*v),
            IndexValue::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDirection {
    /// Foreign gains generated: capacity to export knowledge (KOSI).
    Outflow,
    /// Gains earned from abroad: capacity to import knowledge (KISI).
    Inflow,
}

/// Country-by-category gains table feeding the Balassa construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GainsTable {
    countries: Vec<CountryCode>,
    scs: Vec<ScCode>,
    cells: Vec<u64>,
}

impl GainsTable {
    pub fn new(countries: Vec<CountryCode>, scs: Vec<ScCode>) -> Self {
        let cells = vec![0; countries.len() * scs.len()];
        GainsTable {
            countries,
            scs,
            cells,
        }
    }

    pub fn from_cells(
        countries: Vec<CountryCode>,
        scs: Vec<ScCode>,
        rows: &[Vec<u64>],
    ) -> Result<Self> {
        if rows.len() != countries.len() || rows.iter().any(|r| r.len() != scs.len()) {
            return Err(BkfError::config("gains table shape mismatch"));
        }
        Ok(GainsTable {
            countries,
            scs,
            cells: rows.iter().flatten().copied().collect(),
        })
    }

    /// Extracts the directional per-category table from a flow cube.
    pub fn from_cube(cube: &ScFlowCube, direction: FlowDirection, include_domestic: bool) -> Self {
        let countries = cube.countries().to_vec();
        let scs: Vec<ScCode> = cube.subject_categories().cloned().collect();
        let mut table = GainsTable::new(countries, scs);
        for (j, sc) in table.scs.clone().iter().enumerate() {
            for k in 0..table.countries.len() {
                let mut value = match direction {
                    FlowDirection::Outflow => cube.generated(sc, k),
                    FlowDirection::Inflow => cube.earned(sc, k),
                };
                if include_domestic {
                    value += cube.domestic(sc, k);
                }
                table.set(k, j, value);
            }
        }
        table
    }

    pub fn countries(&self) -> &[CountryCode] {
        &self.countries
    }

    pub fn subject_categories(&self) -> &[ScCode] {
        &self.scs
    }

    pub fn get(&self, country: usize, sc: usize) -> u64 {
        self.cells[country * self.scs.len() + sc]
    }

    pub fn set(&mut self, country: usize, sc: usize, value: u64) {
        self.cells[country * self.scs.len() + sc] = value;
    }

    pub fn scale(&mut self, factor: u64) {
        for cell in &mut self.cells {
            *cell *= factor;
        }
    }

    fn country_index(&self, code: &CountryCode) -> Result<usize> {
        self.countries
            .iter()
            .position(|c| c == code)
            .ok_or_else(|| BkfError::UnknownCountry {
                code: code.as_str().to_string(),
            })
    }

    fn sc_index(&self, code: &ScCode) -> Result<usize> {
        self.scs
            .iter()
            .position(|s| s == code)
            .ok_or_else(|| BkfError::UnknownSubjectCategory {
                code: code.as_str().to_string(),
            })
    }

    fn row_total(&self, country: usize, exclude_sc: Option<usize>) -> u64 {
        (0..self.scs.len())
            .filter(|&j| Some(j) != exclude_sc)
            .map(|j| self.get(country, j))
            .sum()
    }
}

/// Balassa ratio of country `k` in category `j`: the country's share of
/// `j` in its own gains over the rest-of-world share of `j` in
/// rest-of-world gains. Row shares run over all categories unless the
/// focal-exclusion switch is on.
pub fn balassa_ratio(
    table: &GainsTable,
    k: &CountryCode,
    j: &ScCode,
    options: SpecializationOptions,
) -> Result<BalassaRatio> {
    let ki = table.country_index(k)?;
    let ji = table.sc_index(j)?;
    let exclude = if options.exclude_focal_sc {
        Some(ji)
    } else {
        None
    };

    let own_cell = table.get(ki, ji);
    let own_total = table.row_total(ki, exclude);

    let mut rest_cell: u64 = 0;
    let mut rest_total: u64 = 0;
    for z in 0..table.countries.len() {
        if z == ki {
            continue;
        }
        rest_cell += table.get(z, ji);
        rest_total += table.row_total(z, exclude);
    }

    if own_total == 0 || rest_total == 0 {
        return Ok(BalassaRatio::Undefined);
    }
    if rest_cell == 0 {
        return Ok(if own_cell > 0 {
            BalassaRatio::Infinite
        } else {
            BalassaRatio::Undefined
        });
    }
    // (own_cell / own_total) / (rest_cell / rest_total)
    let num = own_cell as u128 * rest_total as u128;
    let den = own_total as u128 * rest_cell as u128;
    Ok(BalassaRatio::Finite(
        Rational::new(num, den).expect("nonzero denominator"),
    ))
}

/// `100 * tanh(ln r)` through the closed form; plain-float helper for
/// grids and cross-checks. The ratio must be non-negative.
pub fn closed_form_index(ratio: f64) -> f64 {
    assert!(ratio >= 0.0, "Balassa ratio must be non-negative");
    if ratio.is_infinite() {
        return 100.0;
    }
    let r2 = ratio * ratio;
    100.0 * (r2 - 1.0) / (r2 + 1.0)
}

/// Maps a Balassa ratio into [-100, +100].
///
/// Exact rational squares are used whenever they fit, so reciprocal
/// ratios produce exactly opposite values and round cases come out
/// exact; very large ratios fall back to floats, where the closed form
/// is already saturated.
pub fn specialization_index(ratio: &BalassaRatio) -> IndexValue {
    match ratio {
        BalassaRatio::Undefined => IndexValue::Undefined,
        BalassaRatio::Infinite => IndexValue::Defined(100.0),
        BalassaRatio::Finite(r) => {
            if r.is_zero() {
                return IndexValue::Defined(-100.0);
            }
            const EXACT_LIMIT: u128 = 1 << 63;
            if r.num < EXACT_LIMIT && r.den < EXACT_LIMIT {
                let n2 = r.num * r.num;
                let d2 = r.den * r.den;
                let diff = n2 as i128 - d2 as i128;
                let sum = n2 + d2;
                IndexValue::Defined(100.0 * diff as f64 / sum as f64)
            } else {
                let nf = r.num as f64;
                let df = r.den as f64;
                let n2 = nf * nf;
                let d2 = df * df;
                IndexValue::Defined(100.0 * (n2 - d2) / (n2 + d2))
            }
        }
    }
}

/// Per-(country, category) index values for one flow direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecializationTable {
    pub direction: FlowDirection,
    entries: BTreeMap<(CountryCode, ScCode), IndexValue>,
}

impl SpecializationTable {
    pub fn get(&self, country: &CountryCode, sc: &ScCode) -> Option<&IndexValue> {
        self.entries.get(&(country.clone(), sc.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(CountryCode, ScCode), &IndexValue)> {
        self.entries.iter()
    }

    /// Defined entries of one country, in category order.
    pub fn defined_for(&self, country: &CountryCode) -> Vec<(ScCode, f64)> {
        self.entries
            .iter()
            .filter(|((c, _), _)| c == country)
            .filter_map(|((_, sc), v)| v.defined().map(|value| (sc.clone(), value)))
            .collect()
    }
}

fn specialization_table(
    cube: &ScFlowCube,
    direction: FlowDirection,
    options: SpecializationOptions,
) -> Result<SpecializationTable> {
    let table = GainsTable::from_cube(cube, direction, options.include_domestic);
    let mut entries = BTreeMap::new();
    for country in table.countries() {
        for sc in table.subject_categories() {
            let ratio = balassa_ratio(&table, country, sc, options)?;
            entries.insert((country.clone(), sc.clone()), specialization_index(&ratio));
        }
    }
    Ok(SpecializationTable { direction, entries })
}

/// Knowledge outflow specialization: Balassa indexes over the per-category
/// foreign-gains-generated table.
pub fn kosi_table(cube: &ScFlowCube, config: &AnalysisConfig) -> Result<SpecializationTable> {
    specialization_table(cube, FlowDirection::Outflow, config.specialization)
}

/// Knowledge inflow specialization: the same construction on the
/// per-category gains-earned table.
pub fn kisi_table(cube: &ScFlowCube, config: &AnalysisConfig) -> Result<SpecializationTable> {
    specialization_table(cube, FlowDirection::Inflow, config.specialization)
}

/// Top `n` defined values for one country, descending, ties by category
/// code; undefined entries are excluded.
pub fn top_specializations(
    table: &SpecializationTable,
    country: &CountryCode,
    n: usize,
) -> Vec<(ScCode, f64)> {
    let mut defined = table.defined_for(country);
    defined.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    defined.truncate(n);
    defined
}
