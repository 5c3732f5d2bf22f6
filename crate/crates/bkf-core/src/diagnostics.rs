//! Collect-and-continue diagnostics for parsing, corpus construction,
//! and attribution.
//!
//! Hard failures surface as [`crate::BkfError`]; everything recoverable is
//! counted here, with a capped list of exemplar locations per class so a
//! dirty ten-million-line dump cannot balloon the report.

use serde::Serialize;

/// One diagnostic class: a total and the first few offending items.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DiagCounter {
    pub count: u64,
    pub examples: Vec<String>,
}

impl DiagCounter {
    pub fn record(&mut self, example: impl Into<String>, cap: usize) {
        self.count += 1;
        if self.examples.len() < cap {
            self.examples.push(example.into());
        }
    }

    fn merge(&mut self, other: &DiagCounter, cap: usize) {
        self.count += other.count;
        for e in &other.examples {
            if self.examples.len() >= cap {
                break;
            }
            self.examples.push(e.clone());
        }
    }
}

/// Counts per diagnostic class accumulated across pipeline stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub example_cap: usize,
    /// Input rows or lines that failed schema validation.
    pub rejected_records: DiagCounter,
    /// Citation links with at least one endpoint missing from the corpus.
    pub dangling_links: DiagCounter,
    /// Citation links submitted more than once (collapsed to one edge).
    pub duplicate_links: DiagCounter,
    /// Links whose citing and cited ids coincide (dropped as malformed).
    pub self_citations: DiagCounter,
    /// Journals of corpus publications with no category assignment.
    pub unassigned_journals: DiagCounter,
    /// Production candidates made in two or more countries at once.
    pub tie_attributions: DiagCounter,
}

impl ValidationReport {
    pub fn new(example_cap: usize) -> Self {
        ValidationReport {
            example_cap,
            rejected_records: DiagCounter::default(),
            dangling_links: DiagCounter::default(),
            duplicate_links: DiagCounter::default(),
            self_citations: DiagCounter::default(),
            unassigned_journals: DiagCounter::default(),
            tie_attributions: DiagCounter::default(),
        }
    }

    /// Folds another report into this one, keeping this report's cap.
    pub fn merge(&mut self, other: &ValidationReport) {
        let cap = self.example_cap;
        self.rejected_records.merge(&other.rejected_records, cap);
        self.dangling_links.merge(&other.dangling_links, cap);
        self.duplicate_links.merge(&other.duplicate_links, cap);
        self.self_citations.merge(&other.self_citations, cap);
        self.unassigned_journals
            .merge(&other.unassigned_journals, cap);
        self.tie_attributions.merge(&other.tie_attributions, cap);
    }

    pub fn is_clean(&self) -> bool {
        self.rejected_records.count == 0
            && self.dangling_links.count == 0
            && self.duplicate_links.count == 0
            && self.self_citations.count == 0
            && self.unassigned_journals.count == 0
            && self.tie_attributions.count == 0
    }

    pub fn render_text(&self) -> String {
        let mut out = String::from("validation report\n");
        for (label, counter) in [
            ("rejected records", &self.rejected_records),
            ("dangling links", &self.dangling_links),
            ("duplicate links", &self.duplicate_links),
            ("self citations", &self.self_citations),
            ("unassigned journals", &self.unassigned_journals),
            ("tie attributions", &self.tie_attributions),
        ] {
            out.push_str(&format!("  {label:<22}{}\n", counter.count));
            for example in &counter.examples {
                out.push_str(&format!("    - {example}\n"));
            }
        }
        out
    }
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport::new(crate::corpus::DEFAULT_EXAMPLE_CAP)
    }
}
