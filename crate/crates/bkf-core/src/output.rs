//! Presentation layer: CSV table writers, the JSON bundle, and the exact
//! rounding helpers.
//!
//! Internal accounting stays in integers; this module is the only place
//! values are rounded. Percentages get one decimal and ratios two, both
//! rounded half-up through integer arithmetic so output never depends on
//! binary floating point. Division by zero renders as `undefined`.

use std::io;

use serde::Serialize;

use crate::aggregate::{AreaBkfRow, BilateralRow, BkfRow, CountrySummary, FieldBkfRow};
use crate::attribution::Attribution;
use crate::corpus::{AnalysisConfig, Corpus, CountryCode, ScCode};
use crate::flow::{visit_gains, FlowMatrix};
use crate::specialization::{IndexValue, SpecializationTable};

pub const UNDEFINED: &str = "undefined";

/// `num/den` as a percentage with one decimal, half-up; `None` when the
/// denominator is zero.
pub fn pct1(num: u64, den: u64) -> Option<String> {
    if den == 0 {
        return None;
    }
    let tenths = (2000 * num as u128 + den as u128) / (2 * den as u128);
    Some(format!("{}.{}", tenths / 10, tenths % 10))
}

/// `num/den` as a ratio with two decimals, half-up; `None` when the
/// denominator is zero.
pub fn ratio2(num: u64, den: u64) -> Option<String> {
    if den == 0 {
        return None;
    }
    let hundredths = (200 * num as u128 + den as u128) / (2 * den as u128);
    Some(format!("{}.{:02}", hundredths / 100, hundredths % 100))
}

/// Index value with one decimal, half away from zero.
pub fn index1(value: f64) -> String {
    let scaled = value * 10.0;
    let rounded = if scaled >= 0.0 {
        (scaled + 0.5).floor()
    } else {
        (scaled - 0.5).ceil()
    } as i64;
    let sign = if rounded < 0 { "-" } else { "" };
    let magnitude = rounded.unsigned_abs();
    format!("{sign}{}.{}", magnitude / 10, magnitude % 10)
}

fn or_undefined(value: Option<String>) -> String {
    value.unwrap_or_else(|| UNDEFINED.to_string())
}

pub fn summary_csv(rows: &[CountrySummary]) -> String {
    let mut out = String::from(
        "country,publications,made_in,made_in_pct,cited,cited_pct,benefits,avg_benefits_per_cited,gains,domestic_gains,domestic_pct,avg_gains_per_benefit\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.country,
            row.publications,
            row.made_in,
            or_undefined(pct1(row.made_in, row.publications)),
            row.cited,
            or_undefined(pct1(row.cited, row.made_in)),
            row.benefits,
            or_undefined(ratio2(row.benefits, row.cited)),
            row.gains,
            row.domestic_gains,
            or_undefined(pct1(row.domestic_gains, row.gains)),
            or_undefined(ratio2(row.gains, row.benefits)),
        ));
    }
    out
}

pub fn bkf_csv(rows: &[BkfRow]) -> String {
    let mut out =
        String::from("country,foreign_gains_generated,generated_pct,earned_gains,earned_pct,bkf\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.country,
            row.foreign_gains_generated,
            or_undefined(pct1(row.foreign_gains_generated, row.total_gains)),
            row.earned_gains,
            or_undefined(pct1(row.earned_gains, row.foreign_gains_by_foreign)),
            row.balance,
        ));
    }
    out
}

pub fn flow_matrix_csv(matrix: &FlowMatrix) -> String {
    let mut out = String::from("generator,earner,gains,row_pct\n");
    for g in 0..matrix.len() {
        let row_total = matrix.row_total(g);
        for e in 0..matrix.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                matrix.countries()[g],
                matrix.countries()[e],
                matrix.get(g, e),
                or_undefined(pct1(matrix.get(g, e), row_total)),
            ));
        }
    }
    out
}

pub fn field_csv(per_country: &[(CountryCode, Vec<FieldBkfRow>)]) -> String {
    let mut out =
        String::from("country,sc_code,macro_area,foreign_gains_generated,earned_gains,bkf\n");
    for (country, rows) in per_country {
        for row in rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                country,
                row.sc_code,
                row.macro_area,
                row.foreign_gains_generated,
                row.earned_gains,
                row.balance,
            ));
        }
    }
    out
}

pub fn area_csv(per_country: &[(CountryCode, Vec<AreaBkfRow>)]) -> String {
    let mut out = String::from("country,macro_area,foreign_gains_generated,earned_gains,bkf\n");
    for (country, rows) in per_country {
        for row in rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                country, row.macro_area, row.foreign_gains_generated, row.earned_gains, row.balance,
            ));
        }
    }
    out
}

/// Bilateral table from `k`'s perspective: per-category rows first, the
/// overall `ALL` row last.
pub fn bilateral_csv(sc_rows: &[BilateralRow], overall: &BilateralRow) -> String {
    let mut out = String::from("sc_code,gains_out,gains_in,bkf\n");
    for row in sc_rows {
        let code = row.sc_code.as_ref().map(ScCode::as_str).unwrap_or("ALL");
        out.push_str(&format!(
            "{},{},{},{}\n",
            code, row.outbound, row.inbound, row.balance
        ));
    }
    out.push_str(&format!(
        "ALL,{},{},{}\n",
        overall.outbound, overall.inbound, overall.balance
    ));
    out
}

/// KOSI/KISI table: one row per (country, category) in configuration
/// country order.
pub fn specialization_csv(table: &SpecializationTable, config: &AnalysisConfig) -> String {
    let mut out = String::from("country,sc_code,value\n");
    for country in &config.countries {
        for ((_, sc), value) in table.iter().filter(|((c, _), _)| c == country) {
            let rendered = match value {
                IndexValue::Defined(v) => index1(*v),
                IndexValue::Undefined => UNDEFINED.to_string(),
            };
            out.push_str(&format!("{country},{sc},{rendered}\n"));
        }
    }
    out
}

/// Streams the raw gain records as CSV; the record set can be large, so
/// this writes through instead of building a string.
pub fn write_gains_csv<W: io::Write>(
    writer: &mut W,
    corpus: &Corpus,
    attribution: &Attribution,
    config: &AnalysisConfig,
) -> io::Result<()> {
    writer.write_all(b"cited_id,citing_id,generator,earner,domestic,sc_codes\n")?;
    let mut result = Ok(());
    visit_gains(corpus, attribution, config, |gain| {
        if result.is_err() {
            return;
        }
        let codes: Vec<&str> = gain.sc_codes.iter().map(ScCode::as_str).collect();
        result = writeln!(
            writer,
            "{},{},{},{},{},{}",
            gain.cited_id,
            gain.citing_id,
            config.countries[gain.generator_idx],
            config.countries[gain.earner_idx],
            gain.domestic,
            codes.join(";"),
        );
    });
    result
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub countries: Vec<String>,
    pub period: [i32; 2],
    pub cutoff: String,
    pub doc_types: Vec<String>,
    pub threshold: String,
    pub spec_include_domestic: bool,
    pub spec_exclude_focal_sc: bool,
}

pub fn config_echo(config: &AnalysisConfig) -> ConfigEcho {
    ConfigEcho {
        countries: config
            .countries
            .iter()
            .map(|c| c.as_str().to_string())
            .collect(),
        period: [config.period.0, config.period.1],
        cutoff: config.cutoff.to_string(),
        doc_types: config
            .doc_types
            .iter()
            .map(|d| d.label().to_string())
            .collect(),
        threshold: config.threshold.to_string(),
        spec_include_domestic: config.specialization.include_domestic,
        spec_exclude_focal_sc: config.specialization.exclude_focal_sc,
    }
}

#[derive(Serialize)]
struct SummaryJson {
    country: String,
    publications: u64,
    made_in: u64,
    made_in_pct: Option<String>,
    cited: u64,
    cited_pct: Option<String>,
    benefits: u64,
    avg_benefits_per_cited: Option<String>,
    gains: u64,
    domestic_gains: u64,
    domestic_pct: Option<String>,
    avg_gains_per_benefit: Option<String>,
}

#[derive(Serialize)]
struct BkfJson {
    country: String,
    foreign_gains_generated: u64,
    generated_pct: Option<String>,
    earned_gains: u64,
    earned_pct: Option<String>,
    bkf: i64,
}

#[derive(Serialize)]
struct MatrixJson {
    countries: Vec<String>,
    rows: Vec<Vec<u64>>,
}

#[derive(Serialize)]
struct FieldJson {
    country: String,
    sc_code: String,
    macro_area: String,
    foreign_gains_generated: u64,
    earned_gains: u64,
    bkf: i64,
}

#[derive(Serialize)]
struct AreaJson {
    country: String,
    macro_area: String,
    foreign_gains_generated: u64,
    earned_gains: u64,
    bkf: i64,
}

#[derive(Serialize)]
struct SpecJson {
    country: String,
    sc_code: String,
    value: Option<String>,
}

#[derive(Serialize)]
struct TablesJson {
    config: ConfigEcho,
    summary: Vec<SummaryJson>,
    bkf: Vec<BkfJson>,
    flow_matrix: MatrixJson,
    bkf_by_sc: Vec<FieldJson>,
    bkf_by_area: Vec<AreaJson>,
    kosi: Vec<SpecJson>,
    kisi: Vec<SpecJson>,
}

fn spec_json(table: &SpecializationTable, config: &AnalysisConfig) -> Vec<SpecJson> {
    let mut rows = Vec::new();
    for country in &config.countries {
        for ((_, sc), value) in table.iter().filter(|((c, _), _)| c == country) {
            rows.push(SpecJson {
                country: country.as_str().to_string(),
                sc_code: sc.as_str().to_string(),
                value: value.defined().map(index1),
            });
        }
    }
    rows
}

/// Machine-readable bundle mirroring every report table.
#[allow(clippy::too_many_arguments)]
pub fn tables_json(
    config: &AnalysisConfig,
    summary: &[CountrySummary],
    bkf: &[BkfRow],
    matrix: &FlowMatrix,
    fields: &[(CountryCode, Vec<FieldBkfRow>)],
    areas: &[(CountryCode, Vec<AreaBkfRow>)],
    kosi: &SpecializationTable,
    kisi: &SpecializationTable,
) -> String {
    let bundle = TablesJson {
        config: config_echo(config),
        summary: summary
            .iter()
            .map(|row| SummaryJson {
                country: row.country.as_str().to_string(),
                publications: row.publications,
                made_in: row.made_in,
                made_in_pct: pct1(row.made_in, row.publications),
                cited: row.cited,
                cited_pct: pct1(row.cited, row.made_in),
                benefits: row.benefits,
                avg_benefits_per_cited: ratio2(row.benefits, row.cited),
                gains: row.gains,
                domestic_gains: row.domestic_gains,
                domestic_pct: pct1(row.domestic_gains, row.gains),
                avg_gains_per_benefit: ratio2(row.gains, row.benefits),
            })
            .collect(),
        bkf: bkf
            .iter()
            .map(|row| BkfJson {
                country: row.country.as_str().to_string(),
                foreign_gains_generated: row.foreign_gains_generated,
                generated_pct: pct1(row.foreign_gains_generated, row.total_gains),
                earned_gains: row.earned_gains,
                earned_pct: pct1(row.earned_gains, row.foreign_gains_by_foreign),
                bkf: row.balance,
            })
            .collect(),
        flow_matrix: MatrixJson {
            countries: matrix
                .countries()
                .iter()
                .map(|c| c.as_str().to_string())
                .collect(),
            rows: (0..matrix.len())
                .map(|g| (0..matrix.len()).map(|e| matrix.get(g, e)).collect())
                .collect(),
        },
        bkf_by_sc: fields
            .iter()
            .flat_map(|(country, rows)| {
                rows.iter().map(move |row| FieldJson {
                    country: country.as_str().to_string(),
                    sc_code: row.sc_code.as_str().to_string(),
                    macro_area: row.macro_area.clone(),
                    foreign_gains_generated: row.foreign_gains_generated,
                    earned_gains: row.earned_gains,
                    bkf: row.balance,
                })
            })
            .collect(),
        bkf_by_area: areas
            .iter()
            .flat_map(|(country, rows)| {
                rows.iter().map(move |row| AreaJson {
                    country: country.as_str().to_string(),
                    macro_area: row.macro_area.clone(),
                    foreign_gains_generated: row.foreign_gains_generated,
                    earned_gains: row.earned_gains,
                    bkf: row.balance,
                })
            })
            .collect(),
        kosi: spec_json(kosi, config),
        kisi: spec_json(kisi, config),
    };
    let mut text = serde_json::to_string_pretty(&bundle).expect("serialize bundle");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentages_round_half_up() {
        assert_eq!(pct1(58_725, 76_509).unwrap(), "76.8");
        assert_eq!(pct1(164_688, 247_128).unwrap(), "66.6");
        assert_eq!(pct1(1, 2).unwrap(), "50.0");
        assert_eq!(pct1(1, 800).unwrap(), "0.1"); // 0.125% rounds up
        assert_eq!(pct1(1, 1600).unwrap(), "0.1"); // 0.0625% rounds up
        assert_eq!(pct1(0, 5).unwrap(), "0.0");
        assert_eq!(pct1(5, 0), None);
    }

    #[test]
    fn ratios_round_half_up() {
        assert_eq!(ratio2(238_025, 35_546).unwrap(), "6.70");
        assert_eq!(ratio2(247_128, 238_025).unwrap(), "1.04");
        assert_eq!(ratio2(1, 3).unwrap(), "0.33");
        assert_eq!(ratio2(1, 200).unwrap(), "0.01"); // exact .005 goes up
        assert_eq!(ratio2(3, 0), None);
    }

    #[test]
    fn index_rendering_is_symmetric() {
        assert_eq!(index1(80.0), "80.0");
        assert_eq!(index1(-80.0), "-80.0");
        assert_eq!(index1(80.05), "80.1");
        assert_eq!(index1(-80.05), "-80.1");
        assert_eq!(index1(0.0), "0.0");
    }

    #[test]
    fn undefined_rendered_for_zero_denominators() {
        let rows = vec![CountrySummary {
            country: CountryCode::new("AA").unwrap(),
            publications: 0,
            made_in: 0,
            cited: 0,
            benefits: 0,
            gains: 0,
            domestic_gains: 0,
        }];
        let csv = summary_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        assert!(line.contains(UNDEFINED));
        assert!(!line.contains(",0.0,0.0,")); // ratios must not silently be zero
    }
}
