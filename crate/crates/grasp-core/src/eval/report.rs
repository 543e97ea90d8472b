//! Aggregation of run records into a metrics report.
//!
//! Per-scenario secure-pass@k values are averaged across scenarios with
//! equal weight; security rates roll up by CWE and overall from raw
//! counts, never from averaged rates. Stored values are exact rationals;
//! rounding happens only in the text rendering (two decimals for rates,
//! four for money).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{scenario_counts, secure_pass_at_k, security_rate_counts, MetricsError};
use super::record::RunRecord;
use crate::provider::Pricing;
use crate::rational::Rational;

/// Metrics for one scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario_id: String,
    pub cwe: String,
    /// Countable samples (analysis failures and environment errors are
    /// excluded).
    pub n: u32,
    pub valid: u64,
    pub secure: u64,
    /// None when no sample was valid.
    pub sr: Option<Rational>,
    /// Samples that are secure and pass every test.
    pub sp: u32,
    /// k → secure-pass@k.
    pub secure_pass: BTreeMap<u32, Rational>,
}

/// Rollup over one CWE (or overall).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollupRow {
    pub scope: String,
    pub scenarios: usize,
    pub valid: u64,
    pub secure: u64,
    pub sr: Option<Rational>,
}

/// Token and money accounting over every record in the run, excluded
/// samples included — their cost was incurred all the same. Averages are
/// per sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostSummary {
    pub samples: u64,
    pub total_input_tokens: u64,
    pub total_output_tokens: u64,
    pub total_calls: u64,
    pub avg_input_tokens: Rational,
    pub avg_output_tokens: Rational,
    pub avg_iterations: Rational,
    pub avg_cost: Rational,
    pub total_cost: Rational,
}

/// The full report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenarios: Vec<ScenarioRow>,
    pub cwes: Vec<RollupRow>,
    pub overall: RollupRow,
    /// Equal-weight scenario average, k → value.
    pub secure_pass_overall: BTreeMap<u32, Rational>,
    pub excluded_samples: u64,
    pub cost: CostSummary,
}

/// Aggregate records into a report. `cwe_by_scenario` maps scenario ids
/// to CWE labels; scenarios missing from the map roll up under
/// "(unknown)".
pub fn aggregate_report(
    records: &[RunRecord],
    ks: &[u32],
    pricing: &Pricing,
    cwe_by_scenario: &BTreeMap<String, String>,
) -> Result<MetricsReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyScope);
    }

    let mut by_scenario: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        by_scenario.entry(&record.scenario_id).or_default().push(record);
    }

    let unknown = "(unknown)".to_string();
    let mut scenario_rows = Vec::with_capacity(by_scenario.len());
    for (scenario_id, scenario_records) in &by_scenario {
        let owned: Vec<RunRecord> = scenario_records.iter().map(|r| (*r).clone()).collect();
        let counts = scenario_counts(&owned);
        let mut secure_pass = BTreeMap::new();
        for &k in ks {
            if k > counts.n {
                return Err(MetricsError::KExceedsScenario {
                    scenario: scenario_id.to_string(),
                    k,
                    n: counts.n,
                });
            }
            secure_pass.insert(k, secure_pass_at_k(counts.n, counts.sp, k)?);
        }
        scenario_rows.push(ScenarioRow {
            scenario_id: scenario_id.to_string(),
            cwe: cwe_by_scenario.get(*scenario_id).unwrap_or(&unknown).clone(),
            n: counts.n,
            valid: counts.valid,
            secure: counts.secure,
            sr: security_rate_counts(counts.valid, counts.secure),
            sp: counts.sp,
            secure_pass,
        });
    }

    // CWE and overall rollups from raw counts.
    let mut cwe_counts: BTreeMap<String, (usize, u64, u64)> = BTreeMap::new();
    for row in &scenario_rows {
        let entry = cwe_counts.entry(row.cwe.clone()).or_default();
        entry.0 += 1;
        entry.1 += row.valid;
        entry.2 += row.secure;
    }
    let cwes: Vec<RollupRow> = cwe_counts
        .into_iter()
        .map(|(cwe, (scenarios, valid, secure))| RollupRow {
            scope: cwe,
            scenarios,
            valid,
            secure,
            sr: security_rate_counts(valid, secure),
        })
        .collect();

    let total_valid: u64 = scenario_rows.iter().map(|r| r.valid).sum();
    let total_secure: u64 = scenario_rows.iter().map(|r| r.secure).sum();
    let overall = RollupRow {
        scope: "overall".to_string(),
        scenarios: scenario_rows.len(),
        valid: total_valid,
        secure: total_secure,
        sr: security_rate_counts(total_valid, total_secure),
    };

    let scenario_count = Rational::from_int(scenario_rows.len() as i128);
    let mut secure_pass_overall = BTreeMap::new();
    for &k in ks {
        let total: Rational = scenario_rows.iter().map(|r| r.secure_pass[&k]).sum();
        secure_pass_overall.insert(k, total / scenario_count);
    }

    let samples = records.len() as u64;
    let total_input: u64 = records.iter().map(|r| r.usage.input_tokens).sum();
    let total_output: u64 = records.iter().map(|r| r.usage.output_tokens).sum();
    let total_calls: u64 = records.iter().map(|r| r.usage.calls).sum();
    let total_iterations: u64 = records.iter().map(|r| r.iterations as u64).sum();
    let sample_count = Rational::from_int(samples as i128);
    let avg_input = Rational::from_int(total_input as i128) / sample_count;
    let avg_output = Rational::from_int(total_output as i128) / sample_count;
    let total_cost = pricing
        .cost(Rational::from_int(total_input as i128), Rational::from_int(total_output as i128));
    let cost = CostSummary {
        samples,
        total_input_tokens: total_input,
        total_output_tokens: total_output,
        total_calls,
        avg_input_tokens: avg_input,
        avg_output_tokens: avg_output,
        avg_iterations: Rational::from_int(total_iterations as i128) / sample_count,
        avg_cost: total_cost / sample_count,
        total_cost,
    };

    Ok(MetricsReport {
        scenarios: scenario_rows,
        cwes,
        overall,
        secure_pass_overall,
        excluded_samples: records.iter().filter(|r| !r.countable()).count() as u64,
        cost,
    })
}

fn fmt_sr(sr: &Option<Rational>) -> String {
    match sr {
        Some(r) => r.display_rounded(2),
        None => "n/a".to_string(),
    }
}

impl MetricsReport {
    /// Machine-readable form; rationals serialize as `{num, den}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned text tables, rates at two decimals, money at four.
    pub fn render_text(&self) -> String {
        let ks: Vec<u32> = self.secure_pass_overall.keys().copied().collect();
        let mut out = String::new();

        out.push_str("Per-scenario\n");
        let mut header = format!(
            "{:<24} {:<10} {:>4} {:>6} {:>7} {:>5} {:>4}",
            "scenario", "cwe", "n", "valid", "secure", "SR", "sp"
        );
        for k in &ks {
            header.push_str(&format!(" {:>8}", format!("sp@{k}")));
        }
        out.push_str(&header);
        out.push('\n');
        for row in &self.scenarios {
            let mut line = format!(
                "{:<24} {:<10} {:>4} {:>6} {:>7} {:>5} {:>4}",
                row.scenario_id,
                row.cwe,
                row.n,
                row.valid,
                row.secure,
                fmt_sr(&row.sr),
                row.sp
            );
            for k in &ks {
                line.push_str(&format!(" {:>8}", row.secure_pass[k].display_rounded(2)));
            }
            out.push_str(&line);
            out.push('\n');
        }

        out.push_str("\nBy CWE\n");
        out.push_str(&format!(
            "{:<10} {:>9} {:>6} {:>7} {:>5}\n",
            "cwe", "scenarios", "valid", "secure", "SR"
        ));
        for row in &self.cwes {
            out.push_str(&format!(
                "{:<10} {:>9} {:>6} {:>7} {:>5}\n",
                row.scope,
                row.scenarios,
                row.valid,
                row.secure,
                fmt_sr(&row.sr)
            ));
        }
        out.push_str(&format!(
            "{:<10} {:>9} {:>6} {:>7} {:>5}\n",
            "overall",
            self.overall.scenarios,
            self.overall.valid,
            self.overall.secure,
            fmt_sr(&self.overall.sr)
        ));

        out.push_str("\nsecure-pass@k (scenario average)\n");
        for k in &ks {
            out.push_str(&format!(
                "  k={:<3} {}\n",
                k,
                self.secure_pass_overall[k].display_rounded(2)
            ));
        }

        if self.excluded_samples > 0 {
            out.push_str(&format!(
                "\nexcluded samples (analysis/environment failures): {}\n",
                self.excluded_samples
            ));
        }

        let c = &self.cost;
        out.push_str("\nCost\n");
        out.push_str(&format!("  samples            {}\n", c.samples));
        out.push_str(&format!(
            "  input tokens       {} total, {} avg\n",
            c.total_input_tokens,
            c.avg_input_tokens.display_rounded(2)
        ));
        out.push_str(&format!(
            "  output tokens      {} total, {} avg\n",
            c.total_output_tokens,
            c.avg_output_tokens.display_rounded(2)
        ));
        out.push_str(&format!("  provider calls     {}\n", c.total_calls));
        out.push_str(&format!(
            "  iterations         {} avg\n",
            c.avg_iterations.display_rounded(2)
        ));
        out.push_str(&format!(
            "  cost               ${} total, ${} avg\n",
            c.total_cost.display_rounded(4),
            c.avg_cost.display_rounded(4)
        ));
        out
    }
}
