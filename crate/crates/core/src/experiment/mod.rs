//! Experiment runner behind the command-line tool.

mod audit;
mod ber;
pub mod config;
mod report;

use std::path::Path;

use crate::catalog;
use crate::error::{Error, Result};
use crate::stbc::{csr_partition, parse_code, CsrPartition, LinearStbc, SUPPORT_TOL};

pub use audit::{
    default_strategies, run_complexity_audit, write_audit_csv, AuditConfig, AuditResult, AUDIT_CAP, AUDIT_COLUMNS,
    AUDIT_SCHEMA, DEFAULT_AUDIT_M,
};
pub use ber::{
    cross_path_max_diff, draw_symbols, group_codewords, mrc_bpsk_ber, noise_n0, read_ber_csv, run_ber_sweep,
    write_ber_csv, BerRow, ExperimentResult, Provenance, BER_COLUMNS, BER_SCHEMA, CROSS_CHECK_FRAMES, CROSS_CHECK_TOL,
};
pub use config::{ExperimentConfig, SnrKind};
pub use report::{complexity_summary, report_partition, support_label};

/// Catalog name, or a path to a code description file.
pub fn load_code(name_or_path: &str) -> Result<LinearStbc> {
    match catalog::build(name_or_path) {
        Ok(code) => Ok(code),
        Err(e) => {
            let path = Path::new(name_or_path);
            if path.is_file() {
                parse_code(&std::fs::read_to_string(path)?)
            } else {
                Err(e)
            }
        }
    }
}

/// The partition used for pulse assignment and decoding: the equal-support
/// classes of the weight matrices.
pub fn decoding_partition(code: &LinearStbc) -> CsrPartition {
    csr_partition(code, SUPPORT_TOL)
}

pub(crate) fn config_err(field: &str, msg: impl Into<String>) -> Error {
    Error::ConfigInvalid {
        field: field.into(),
        line: None,
        msg: msg.into(),
    }
}
