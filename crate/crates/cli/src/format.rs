//! File formats: the code weight table, per-point block reports, the
//! certification report, and the sweep CSV.
//!
//! All formats are plain text. JSON maps are ordered (BTreeMap backed) and
//! floats use the shortest round-trip representation, so a fixed
//! configuration always produces identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use adcert_core::code_space::{build_custom_pi_code, PiCode};
use adcert_core::pi_ad_codes::MomentTable;

/// Weight-table file: `{"m", "t", "weights": {"0": {b: "p/q"}, "1": {...}}}`.
///
/// Excitation numbers and rationals are strings, keeping the weights exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFile {
    pub m: u32,
    pub t: u32,
    pub weights: BTreeMap<String, BTreeMap<String, String>>,
}

impl CodeFile {
    pub fn from_code(code: &PiCode, t: u32) -> Self {
        let mut weights = BTreeMap::new();
        for j in 0..2usize {
            let row: BTreeMap<String, String> = code
                .support(j)
                .map(|(b, lambda)| (b.to_string(), lambda.to_string()))
                .collect();
            weights.insert(j.to_string(), row);
        }
        Self {
            m: code.qubits(),
            t,
            weights,
        }
    }

    pub fn to_code(&self) -> Result<PiCode, String> {
        let mut rows: [BTreeMap<u32, BigRational>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (j, slot) in rows.iter_mut().enumerate() {
            let row = self
                .weights
                .get(&j.to_string())
                .ok_or_else(|| format!("weight table is missing row \"{j}\""))?;
            for (b, lambda) in row {
                let b: u32 = b
                    .parse()
                    .map_err(|_| format!("excitation number {b:?} is not an integer"))?;
                let lambda: BigRational = lambda
                    .parse()
                    .map_err(|_| format!("weight {lambda:?} is not a rational p/q"))?;
                slot.insert(b, lambda);
            }
        }
        build_custom_pi_code(self.m, rows).map_err(|e| e.to_string())
    }
}

/// Per-point summary of the perturbed block data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReportFile {
    pub gamma: f64,
    pub eps_max: f64,
    #[serde(rename = "lambda_min_G")]
    pub lambda_min_g: f64,
    #[serde(rename = "trace_G")]
    pub trace_g: f64,
    /// Closed-form fidelity bound; absent when the average matrix is not
    /// positive definite.
    pub theorem1_bound: Option<f64>,
}

/// Exact moment rows as rational strings, `values[j][c][l]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentTableFile {
    pub c_max: u32,
    pub l_max: u32,
    pub values: Vec<Vec<Vec<String>>>,
}

impl MomentTableFile {
    pub fn from_table(table: &MomentTable) -> Self {
        let (c_max, l_max) = table.order_bounds();
        let values = (0..2usize)
            .map(|j| {
                (0..=c_max)
                    .map(|c| {
                        (0..=l_max)
                            .map(|l| table.value(j, c, l).to_string())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            c_max,
            l_max,
            values,
        }
    }
}

/// Certification report for one code at one order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationFile {
    pub t: u32,
    pub m: u32,
    pub lemma4: bool,
    pub moment_table: MomentTableFile,
    pub cross_terms_zero: bool,
    pub eps_slope: Option<f64>,
    /// First `(c, l)` where the moment rows disagree, if they do.
    pub first_mismatch: Option<(u32, u32)>,
}

/// Identity-verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReportFile {
    pub max_n: u32,
    pub alternating_sum_zero: bool,
    pub boundary_matches_factorial: bool,
    pub max_m: u64,
    pub corrected_ratio_matches: bool,
    /// Tuples where the form printed with `C(m, k-c)` disagrees; nonzero
    /// whenever `max_m` admits `c >= 1`.
    pub printed_ratio_mismatches: u64,
}

/// One sweep grid point. Cells are absent when the quantity was not
/// computed at that point (bound inapplicable or code too large for the
/// fidelity pipeline).
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub gamma: f64,
    pub eta: Option<f64>,
    pub leung_bound: Option<f64>,
    pub theorem1_bound: Option<f64>,
    pub worst_case_fidelity: Option<f64>,
    pub fidelity_mixed_logical: Option<f64>,
}

pub const SWEEP_HEADER: &str =
    "gamma,eta,leung_bound,theorem1_bound,worst_case_fidelity,fidelity_mixed_logical";

fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "nan".to_string(),
    }
}

/// Renders the sweep table plus trailing `#`-prefixed slope summaries.
pub fn render_sweep_csv(rows: &[SweepRow], slopes: &[(&str, Option<f64>)]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.gamma,
            cell(r.eta),
            cell(r.leung_bound),
            cell(r.theorem1_bound),
            cell(r.worst_case_fidelity),
            cell(r.fidelity_mixed_logical)
        );
    }
    for (name, value) in slopes {
        let _ = writeln!(out, "# {name},{}", cell(*value));
    }
    out
}

/// Serializes any report as pretty JSON with a trailing newline.
pub fn to_json_file<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
