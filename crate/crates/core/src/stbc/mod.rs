//! Linear space-time block codes described by their weight matrices.
//!
//! A codeword is `X = c * sum_k s_k A_k` where `s_k` are real information
//! symbols, `A_k` the `n_tx x n_slots` weight matrices and `c` a global
//! energy scale. Symbol and group indices are 0-based throughout the API;
//! reports print them 1-based.

mod format;
mod metrics;
mod partition;

pub use format::{emit_code, parse_code};
pub use metrics::{coding_gain, diversity_rank, enumerate_codebook, CodeMetrics, CODEBOOK_CAP};
pub use partition::{
    coarsen, csr_partition, group_codeword, intra_group_structure, pulse_assignable_partition, quasi_orthogonal_pair,
    support_set, CsrPartition, Group, IntraGroupStructure, SupportSet, QO_TOL, SUPPORT_TOL,
};

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

/// One weight matrix and the real symbol it multiplies.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    grid: ComplexGrid,
    symbol_index: usize,
}

impl WeightMatrix {
    pub fn grid(&self) -> &ComplexGrid {
        &self.grid
    }

    pub fn symbol_index(&self) -> usize {
        self.symbol_index
    }

    /// Support under the relative tolerance [`SUPPORT_TOL`].
    pub fn support(&self) -> SupportSet {
        support_set(&self.grid, SUPPORT_TOL * self.grid.max_abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearStbc {
    name: String,
    n_tx: usize,
    n_slots: usize,
    weights: Vec<WeightMatrix>,
    energy_scale: f64,
    min_delay_exempt: bool,
}

impl LinearStbc {
    /// Minimum-delay code (`n_slots == n_tx`).
    pub fn new(name: impl Into<String>, n_tx: usize, n_slots: usize, weights: Vec<ComplexGrid>) -> Result<Self> {
        if n_slots != n_tx {
            return Err(Error::InvalidArgument(format!(
                "minimum-delay codes need T == Nt, got Nt={n_tx} T={n_slots}"
            )));
        }
        Self::build(name.into(), n_tx, n_slots, weights, false)
    }

    /// Code with `n_slots != n_tx`, such as single-slot spatial multiplexing.
    pub fn new_exempt(name: impl Into<String>, n_tx: usize, n_slots: usize, weights: Vec<ComplexGrid>) -> Result<Self> {
        let exempt = n_slots != n_tx;
        Self::build(name.into(), n_tx, n_slots, weights, exempt)
    }

    fn build(name: String, n_tx: usize, n_slots: usize, grids: Vec<ComplexGrid>, exempt: bool) -> Result<Self> {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("bad code name {name:?}")));
        }
        if n_tx == 0 || n_slots == 0 || grids.is_empty() {
            return Err(Error::InvalidArgument("code needs Nt, T, K >= 1".into()));
        }
        let mut weights = Vec::with_capacity(grids.len());
        for (k, grid) in grids.into_iter().enumerate() {
            if grid.shape() != (n_tx, n_slots) {
                return Err(Error::dims(
                    format!("{n_tx}x{n_slots} weight matrix"),
                    format!("{}x{} for symbol {}", grid.rows(), grid.cols(), k + 1),
                ));
            }
            if grid.is_zero() {
                return Err(Error::InvalidArgument(format!(
                    "weight matrix of symbol {} is all zero",
                    k + 1
                )));
            }
            weights.push(WeightMatrix { grid, symbol_index: k });
        }
        // Unit-variance complex symbols put variance 1/2 on each real symbol,
        // so E||X||^2 = c^2 / 2 * sum_k ||A_k||^2 and we solve for c.
        let total: f64 = weights.iter().map(|w| w.grid.frobenius_sq()).sum();
        let energy_scale = ((n_tx * n_slots) as f64 / (0.5 * total)).sqrt();
        Ok(Self {
            name,
            n_tx,
            n_slots,
            weights,
            energy_scale,
            min_delay_exempt: exempt,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// Number of real symbols `K`.
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[WeightMatrix] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> &WeightMatrix {
        &self.weights[k]
    }

    pub fn energy_scale(&self) -> f64 {
        self.energy_scale
    }

    pub fn is_min_delay_exempt(&self) -> bool {
        self.min_delay_exempt
    }

    /// `energy_scale * A_k`, the matrix actually transmitted per unit of `s_k`.
    pub fn scaled_weight(&self, k: usize) -> ComplexGrid {
        self.weights[k].grid.scale(self.energy_scale)
    }

    /// `X = c * sum_k s_k A_k`.
    pub fn assemble_codeword(&self, s: &[f64]) -> Result<ComplexGrid> {
        self.check_symbols(s)?;
        Ok(self.partial_codeword(s, 0..self.k()))
    }

    pub(crate) fn check_symbols(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.k() {
            return Err(Error::dims(format!("{} real symbols", self.k()), s.len()));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("symbols must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn partial_codeword(&self, s: &[f64], members: impl IntoIterator<Item = usize>) -> ComplexGrid {
        let mut x = ComplexGrid::zeros(self.n_tx, self.n_slots);
        for k in members {
            if s[k] != 0.0 {
                x.axpy(s[k], &self.weights[k].grid);
            }
        }
        if self.energy_scale != 1.0 {
            x = x.scale(self.energy_scale);
        }
        x
    }
}
