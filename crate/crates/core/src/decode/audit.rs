//! Metric-evaluation counts against constellation size.

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::rng::{stream, Role};
use crate::sim::{discrete_shortcut, draw_channel};
use crate::stbc::{group_codeword, CsrPartition, LinearStbc};

use super::{decode, intra_structures, DecodeOptions, Problem, Strategy};

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub m: usize,
    pub metric_evals: u64,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditTable {
    pub code: String,
    pub strategy: Strategy,
    pub rows: Vec<AuditRow>,
    /// Least-squares slope of `ln(metric_evals)` against `ln(M)`.
    pub exponent: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two points to fit an exponent".into(),
        ));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("constellation sizes must differ".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Decodes one noisy codeword per constellation size and records the counts.
pub fn complexity_audit(
    code: &LinearStbc,
    partition: &CsrPartition,
    strategy: Strategy,
    m_list: &[usize],
    n_rx: usize,
    opts: &DecodeOptions,
) -> Result<AuditTable> {
    let intra = intra_structures(code, partition)?;
    let h = draw_channel(code.n_tx(), n_rx, &mut stream(0, 0, Role::Channel));
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let c = Constellation::from_size(m)?;
        // Corner point of the constellation on every symbol.
        let s: Vec<f64> = (0..code.k())
            .map(|k| if k % 2 == 0 { c.points()[0].re } else { c.points()[0].im })
            .collect();
        let xg: Vec<ComplexGrid> = (0..partition.len())
            .map(|g| group_codeword(code, partition, g, &s))
            .collect::<Result<_>>()?;
        let obs = discrete_shortcut(&xg, &h, 0.1, &mut stream(0, m as u64, Role::Noise))?;
        let pr = Problem {
            obs: &obs,
            h: &h,
            code,
            partition,
            constellation: &c,
        };
        let r = decode(&pr, strategy, &intra, opts)?;
        rows.push(AuditRow {
            m,
            metric_evals: r.metric_evals,
            fallbacks: r.fallbacks,
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.m as f64, r.metric_evals as f64)).collect();
    Ok(AuditTable {
        code: code.name().to_string(),
        strategy,
        exponent: fit_exponent(&pts)?,
        rows,
    })
}
