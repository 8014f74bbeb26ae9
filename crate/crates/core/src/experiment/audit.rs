//! Complexity audit across codes and strategies.

use std::io::Write;

use crate::catalog::{self, CATALOG};
use crate::decode::{complexity_audit, AuditTable, DecodeOptions, Strategy};
use crate::error::Result;

use super::{config_err, decoding_partition, load_code};

pub const AUDIT_SCHEMA: &str = "tops-stbc-audit/1";
pub const AUDIT_COLUMNS: &[&str] = &["code", "strategy", "M", "metric_evals", "fallbacks", "exponent"];
pub const DEFAULT_AUDIT_M: [usize; 3] = [4, 16, 64];

/// Joint-search ceiling used by audits, large enough for four complex
/// symbols of 64-QAM.
pub const AUDIT_CAP: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub codes: Vec<String>,
    /// `None` runs each code's default strategy list.
    pub strategies: Option<Vec<Strategy>>,
    pub m_list: Vec<usize>,
}

impl AuditConfig {
    /// `codes` is `all` or a comma-separated list; `strategies` a
    /// comma-separated list of strategy ids.
    pub fn parse(codes: &str, strategies: Option<&str>, m_list: &[usize]) -> Result<Self> {
        let codes: Vec<String> = if codes.trim() == "all" {
            CATALOG.iter().map(|e| e.name.to_string()).collect()
        } else {
            codes.split(',').map(|s| s.trim().to_string()).collect()
        };
        if codes.iter().any(String::is_empty) {
            return Err(config_err("codes", "empty code name"));
        }
        let strategies = strategies
            .map(|s| {
                s.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<Strategy>()
                            .map_err(|_| config_err("strategy", format!("unknown strategy {:?}", x.trim())))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        if m_list.len() < 2 {
            return Err(config_err("M", "need at least two constellation sizes"));
        }
        Ok(Self {
            codes,
            strategies,
            m_list: m_list.to_vec(),
        })
    }
}

/// Strategies audited for a code when none are given. Joint search is left
/// out where its codebook at 64-QAM exceeds the audit ceiling.
pub fn default_strategies(code: &str) -> Vec<Strategy> {
    use Strategy::*;
    match code {
        "vblast4" | "golden" => vec![Joint, Group, Iq, QrHardlimit],
        "alamouti" | "sr2x2" => vec![Joint, Group, Subgroup, QrHardlimit],
        _ => vec![Group, Subgroup, QrHardlimit],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditResult {
    pub tables: Vec<AuditTable>,
}

pub fn run_complexity_audit(cfg: &AuditConfig) -> Result<AuditResult> {
    let opts = DecodeOptions {
        joint_cap: AUDIT_CAP,
        ..DecodeOptions::default()
    };
    let mut tables = Vec::new();
    for name in &cfg.codes {
        let code = load_code(name)?;
        let partition = decoding_partition(&code);
        let strategies = cfg.strategies.clone().unwrap_or_else(|| default_strategies(name));
        let n_rx = catalog::default_n_rx(name);
        for st in strategies {
            tables.push(complexity_audit(&code, &partition, st, &cfg.m_list, n_rx, &opts)?);
        }
    }
    Ok(AuditResult { tables })
}

pub fn write_audit_csv<W: Write>(result: &AuditResult, mut out: W) -> Result<()> {
    writeln!(out, "# {AUDIT_SCHEMA} version={}", env!("CARGO_PKG_VERSION"))?;
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(AUDIT_COLUMNS)?;
    for t in &result.tables {
        for r in &t.rows {
            wr.write_record([
                t.code.clone(),
                t.strategy.id().to_string(),
                r.m.to_string(),
                r.metric_evals.to_string(),
                r.fallbacks.to_string(),
                format!("{:.4}", t.exponent),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}
