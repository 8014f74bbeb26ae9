//! ML decoding strategies with exact metric-evaluation counts.
//!
//! Every strategy works on the real-valued equivalent of the per-group
//! observations: `vec(Y_g)` stacked as reals against the columns
//! `vec(H c A_k)` of the group's symbols. A metric evaluation is one
//! computation of `||y - G s||^2` for a completed candidate.

mod audit;
mod search;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::constellation::{Constellation, Dim};
use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::sim::{ChannelRealization, FilteredObservations};
use crate::stbc::{
    intra_group_structure, quasi_orthogonal_pair, CsrPartition, IntraGroupStructure, LinearStbc, QO_TOL,
};

pub use audit::{complexity_audit, fit_exponent, AuditRow, AuditTable};
use search::{apply_choice, candidate_count, exhaustive, units_for, RealModel, Unit};

/// Default ceiling on the joint-ML codebook size.
pub const JOINT_CAP: u128 = 1_000_000;

/// Pivot threshold of the QR back-substitution, relative to the largest
/// column norm.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Joint,
    Group,
    Subgroup,
    Iq,
    QrHardlimit,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Joint,
        Strategy::Group,
        Strategy::Subgroup,
        Strategy::Iq,
        Strategy::QrHardlimit,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Strategy::Joint => "joint",
            Strategy::Group => "group",
            Strategy::Subgroup => "subgroup",
            Strategy::Iq => "iq",
            Strategy::QrHardlimit => "qr-hardlimit",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.id() == s)
            .ok_or_else(|| Error::config("strategy", format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub s_hat: Vec<f64>,
    pub x_hat: ComplexGrid,
    /// Constellation point per complex symbol.
    pub points: Vec<usize>,
    pub bits: Vec<u8>,
    pub metric_evals: u64,
    pub strategy: Strategy,
    /// Subproblems where QR back-substitution hit a singular pivot and
    /// exhaustive search was used instead.
    pub fallbacks: usize,
}

/// Everything a decoder sees for one received codeword.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub obs: &'a FilteredObservations,
    pub h: &'a ChannelRealization,
    pub code: &'a LinearStbc,
    pub partition: &'a CsrPartition,
    pub constellation: &'a Constellation,
}

#[derive(Debug, Clone)]
pub struct DecodeOptions {
    pub joint_cap: u128,
    /// Symbols enumerated by `qr-hardlimit`; `None` conditions on the first
    /// member of every subgroup with two or more members.
    pub condition_set: Option<Vec<usize>>,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            joint_cap: JOINT_CAP,
            condition_set: None,
        }
    }
}

/// Intra-group structure of every group of `p`.
pub fn intra_structures(code: &LinearStbc, p: &CsrPartition) -> Result<Vec<IntraGroupStructure>> {
    (0..p.len())
        .map(|g| intra_group_structure(code, p, g, QO_TOL))
        .collect()
}

impl Problem<'_> {
    fn validate(&self) -> Result<()> {
        let (code, h) = (self.code, self.h);
        if h.n_tx() != code.n_tx() {
            return Err(Error::dims(
                format!("channel with {} columns", code.n_tx()),
                format!("{} columns", h.n_tx()),
            ));
        }
        if self.obs.groups.len() != self.partition.len() {
            return Err(Error::PartitionMismatch(format!(
                "{} observation groups for a {}-group partition",
                self.obs.groups.len(),
                self.partition.len()
            )));
        }
        let mut seen = vec![false; code.k()];
        for g in self.partition.groups() {
            for &k in g.members() {
                if k >= code.k() || std::mem::replace(&mut seen[k], true) {
                    return Err(Error::PartitionMismatch(format!(
                        "partition does not cover symbols 1..={} exactly once",
                        code.k()
                    )));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::PartitionMismatch(format!(
                "partition does not cover all {} symbols",
                code.k()
            )));
        }
        for y in &self.obs.groups {
            if y.shape() != (h.n_rx(), code.n_slots()) {
                return Err(Error::dims(
                    format!("{}x{} observations", h.n_rx(), code.n_slots()),
                    format!("{}x{}", y.rows(), y.cols()),
                ));
            }
        }
        Ok(())
    }

    fn channel_columns(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.code.k())
            .map(|k| Ok(self.h.h.matmul(&self.code.scaled_weight(k))?.to_real_vec()))
            .collect()
    }

    fn group_model(&self, g: usize, symbols: &[usize], cols: &[Vec<f64>]) -> RealModel {
        RealModel {
            y: self.obs.groups[g].to_real_vec(),
            symbols: symbols.to_vec(),
            cols: symbols.iter().map(|&k| cols[k].clone()).collect(),
        }
    }

    fn finish(&self, s_hat: Vec<f64>, metric_evals: u64, strategy: Strategy, fallbacks: usize) -> Result<DecodeResult> {
        let x_hat = self.code.assemble_codeword(&s_hat)?;
        let c = self.constellation;
        let points: Vec<usize> = s_hat
            .chunks(2)
            .map(|pair| {
                let z = num_complex::Complex64::new(pair[0], pair.get(1).copied().unwrap_or(0.0));
                nearest_point(c, z)
            })
            .collect();
        let bits = points.iter().flat_map(|&p| c.bits_of(p)).collect();
        Ok(DecodeResult {
            s_hat,
            x_hat,
            points,
            bits,
            metric_evals,
            strategy,
            fallbacks,
        })
    }
}

fn nearest_point(c: &Constellation, z: num_complex::Complex64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in c.points().iter().enumerate() {
        let d = (p - z).norm_sqr();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn check_cap(units: &[Unit], cap: u128) -> Result<()> {
    let size = candidate_count(units);
    if size > cap {
        return Err(Error::CodebookTooLarge { size, cap });
    }
    Ok(())
}

/// Exhaustive search over the whole codebook, all groups jointly.
pub fn joint_ml(pr: &Problem<'_>, cap: u128) -> Result<DecodeResult> {
    pr.validate()?;
    let cols = pr.channel_columns()?;
    let k = pr.code.k();
    let units = units_for(&(0..k).collect::<Vec<_>>(), pr.constellation)?;
    check_cap(&units, cap)?;
    // Stack the group observations; a symbol's column lives in its group's block.
    let block = pr.obs.groups[0].to_real_vec().len();
    let p = pr.partition.len();
    let mut model = RealModel {
        y: Vec::with_capacity(block * p),
        symbols: (0..k).collect(),
        cols: vec![vec![0.0; block * p]; k],
    };
    for (g, group) in pr.partition.groups().iter().enumerate() {
        model.y.extend(pr.obs.groups[g].to_real_vec());
        for &s in group.members() {
            model.cols[s][g * block..(g + 1) * block].copy_from_slice(&cols[s]);
        }
    }
    let out = exhaustive(&model, &units);
    let mut s = vec![0.0; k];
    apply_choice(&units, &out.choice, &mut s);
    pr.finish(s, out.evals, Strategy::Joint, 0)
}

/// Independent exhaustive search per group.
pub fn group_ml(pr: &Problem<'_>, cap: u128) -> Result<DecodeResult> {
    pr.validate()?;
    let cols = pr.channel_columns()?;
    let mut s = vec![0.0; pr.code.k()];
    let mut evals = 0;
    for (g, group) in pr.partition.groups().iter().enumerate() {
        let units = units_for(group.members(), pr.constellation)?;
        check_cap(&units, cap)?;
        let out = exhaustive(&pr.group_model(g, group.members(), &cols), &units);
        apply_choice(&units, &out.choice, &mut s);
        evals += out.evals;
    }
    pr.finish(s, evals, Strategy::Group, 0)
}

fn check_intra(pr: &Problem<'_>, intra: &[IntraGroupStructure]) -> Result<()> {
    if intra.len() != pr.partition.len() {
        return Err(Error::StructureMismatch(format!(
            "{} intra-group structures for {} groups",
            intra.len(),
            pr.partition.len()
        )));
    }
    for (g, (st, group)) in intra.iter().zip(pr.partition.groups()).enumerate() {
        let mut members: Vec<usize> = st.subgroups().iter().flatten().copied().collect();
        members.sort_unstable();
        if st.parent_group() != g || members != group.members() {
            return Err(Error::StructureMismatch(format!(
                "subgroups of group {} do not match its members",
                g + 1
            )));
        }
    }
    Ok(())
}

/// Independent exhaustive search per quasi-orthogonal subgroup.
pub fn subgroup_ml(pr: &Problem<'_>, intra: &[IntraGroupStructure], cap: u128) -> Result<DecodeResult> {
    pr.validate()?;
    check_intra(pr, intra)?;
    let cols = pr.channel_columns()?;
    let mut s = vec![0.0; pr.code.k()];
    let mut evals = 0;
    for (g, st) in intra.iter().enumerate() {
        for sub in st.subgroups() {
            let units = units_for(sub, pr.constellation)?;
            check_cap(&units, cap)?;
            let out = exhaustive(&pr.group_model(g, sub, &cols), &units);
            apply_choice(&units, &out.choice, &mut s);
            evals += out.evals;
        }
    }
    pr.finish(s, evals, Strategy::Subgroup, 0)
}

/// Per group, searches in-phase and quadrature symbols separately. Requires
/// a separable constellation and every I weight matrix quasi-orthogonal to
/// every Q weight matrix of the group.
pub fn iq_separated_ml(pr: &Problem<'_>, cap: u128) -> Result<DecodeResult> {
    pr.validate()?;
    if !pr.constellation.is_separable() {
        return Err(Error::NotSeparable(format!(
            "{} has no independent I/Q coordinates",
            pr.constellation.name()
        )));
    }
    let cols = pr.channel_columns()?;
    let mut s = vec![0.0; pr.code.k()];
    let mut evals = 0;
    for (g, group) in pr.partition.groups().iter().enumerate() {
        let (i_set, q_set): (Vec<usize>, Vec<usize>) =
            group.members().iter().partition(|&&k| Dim::of_real_symbol(k) == Dim::I);
        for &a in &i_set {
            for &b in &q_set {
                if !quasi_orthogonal_pair(pr.code.weight(a), pr.code.weight(b), QO_TOL)? {
                    return Err(Error::NotSeparable(format!(
                        "symbols {} and {} of group {} couple I and Q",
                        a + 1,
                        b + 1,
                        g + 1
                    )));
                }
            }
        }
        for set in [&i_set, &q_set] {
            if set.is_empty() {
                continue;
            }
            let units = units_for(set, pr.constellation)?;
            check_cap(&units, cap)?;
            let out = exhaustive(&pr.group_model(g, set, &cols), &units);
            apply_choice(&units, &out.choice, &mut s);
            evals += out.evals;
        }
    }
    pr.finish(s, evals, Strategy::Iq, 0)
}

/// Conditional decoding per subgroup: enumerates the conditioned symbols and
/// resolves the rest by QR back-substitution with nearest-level rounding.
pub fn qr_hardlimit_ml(
    pr: &Problem<'_>,
    intra: &[IntraGroupStructure],
    condition_set: Option<&[usize]>,
) -> Result<DecodeResult> {
    pr.validate()?;
    check_intra(pr, intra)?;
    if !pr.constellation.is_separable() {
        return Err(Error::NotSeparable(format!(
            "hard-limiting needs per-coordinate levels; {} has none",
            pr.constellation.name()
        )));
    }
    if let Some(set) = condition_set {
        if let Some(&bad) = set.iter().find(|&&k| k >= pr.code.k()) {
            return Err(Error::InvalidArgument(format!(
                "conditioning symbol {} out of range 1..={}",
                bad + 1,
                pr.code.k()
            )));
        }
    }
    let cols = pr.channel_columns()?;
    let mut s = vec![0.0; pr.code.k()];
    let mut evals = 0;
    let mut fallbacks = 0;
    for (g, st) in intra.iter().enumerate() {
        for sub in st.subgroups() {
            let conditioned: Vec<usize> = match condition_set {
                Some(set) => sub.iter().copied().filter(|k| set.contains(k)).collect(),
                None if sub.len() >= 2 => vec![sub[0]],
                None => Vec::new(),
            };
            let free: Vec<usize> = sub.iter().copied().filter(|k| !conditioned.contains(k)).collect();
            let model = pr.group_model(g, sub, &cols);
            match conditional_search(&model, &conditioned, &free, pr.constellation)? {
                Some((values, n)) => {
                    for (&k, v) in sub.iter().zip(values) {
                        s[k] = v;
                    }
                    evals += n;
                }
                None => {
                    fallbacks += 1;
                    let units = units_for(sub, pr.constellation)?;
                    let out = exhaustive(&model, &units);
                    apply_choice(&units, &out.choice, &mut s);
                    evals += out.evals;
                }
            }
        }
    }
    pr.finish(s, evals, Strategy::QrHardlimit, fallbacks)
}

/// Returns the decided values of `model.symbols` (in that order) and the
/// evaluation count, or `None` if the free columns are rank deficient.
fn conditional_search(
    model: &RealModel,
    conditioned: &[usize],
    free: &[usize],
    constellation: &Constellation,
) -> Result<Option<(Vec<f64>, u64)>> {
    let n = model.y.len();
    let f = free.len();
    let col = |k: usize| model.col_of(k).expect("symbol in model");
    let units = units_for(conditioned, constellation)?;

    let (r, qty, qtc) = if f > 0 {
        if n < f {
            return Ok(None);
        }
        let gf = DMatrix::from_fn(n, f, |i, j| col(free[j])[i]);
        let scale = (0..f).map(|j| gf.column(j).norm()).fold(0.0, f64::max);
        let qr = gf.qr();
        let r = qr.r();
        if (0..f).any(|i| r[(i, i)].abs() <= RANK_TOL * scale) {
            return Ok(None);
        }
        let qt = qr.q().transpose();
        let qty = &qt * DVector::from_column_slice(&model.y);
        let qtc: Vec<DVector<f64>> = conditioned
            .iter()
            .map(|&k| &qt * DVector::from_column_slice(col(k)))
            .collect();
        (r, qty, qtc)
    } else {
        (DMatrix::zeros(0, 0), DVector::zeros(0), Vec::new())
    };

    let free_levels: Vec<&[f64]> = free
        .iter()
        .map(|&k| constellation.levels(Dim::of_real_symbol(k)))
        .collect();
    let sizes: Vec<usize> = units.iter().map(Unit::size).collect();
    let mut idx = vec![0usize; units.len()];
    let mut cond_vals = vec![0.0; conditioned.len()];
    let mut free_vals = vec![0.0; f];
    let mut best_metric = f64::INFINITY;
    let mut best: Vec<f64> = Vec::new();
    let mut evals = 0u64;
    let mut residual = vec![0.0; n];
    loop {
        for (u, &o) in units.iter().zip(&idx) {
            for (&k, &v) in u.symbols.iter().zip(&u.options[o]) {
                let pos = conditioned.iter().position(|&c| c == k).expect("conditioned");
                cond_vals[pos] = v;
            }
        }
        if f > 0 {
            let mut z = qty.clone();
            for (q, &v) in qtc.iter().zip(&cond_vals) {
                z.axpy(-v, q, 1.0);
            }
            for i in (0..f).rev() {
                let mut acc = z[i];
                for j in i + 1..f {
                    acc -= r[(i, j)] * free_vals[j];
                }
                let x = acc / r[(i, i)];
                free_vals[i] = free_levels[i][crate::constellation::hard_limit(free_levels[i], x)];
            }
        }
        residual.copy_from_slice(&model.y);
        for (&k, &v) in conditioned.iter().zip(&cond_vals).chain(free.iter().zip(&free_vals)) {
            for (ri, ci) in residual.iter_mut().zip(col(k)) {
                *ri -= ci * v;
            }
        }
        let metric: f64 = residual.iter().map(|x| x * x).sum();
        evals += 1;
        if metric < best_metric {
            best_metric = metric;
            best = model
                .symbols
                .iter()
                .map(|k| {
                    conditioned
                        .iter()
                        .position(|c| c == k)
                        .map(|p| cond_vals[p])
                        .unwrap_or_else(|| free_vals[free.iter().position(|c| c == k).expect("free")])
                })
                .collect();
        }
        // Odometer, last unit fastest.
        let mut d = units.len();
        loop {
            if d == 0 {
                return Ok(Some((best, evals)));
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < sizes[d] {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Runs one strategy.
pub fn decode(
    pr: &Problem<'_>,
    strategy: Strategy,
    intra: &[IntraGroupStructure],
    opts: &DecodeOptions,
) -> Result<DecodeResult> {
    match strategy {
        Strategy::Joint => joint_ml(pr, opts.joint_cap),
        Strategy::Group => group_ml(pr, opts.joint_cap),
        Strategy::Subgroup => subgroup_ml(pr, intra, opts.joint_cap),
        Strategy::Iq => iq_separated_ml(pr, opts.joint_cap),
        Strategy::QrHardlimit => qr_hardlimit_ml(pr, intra, opts.condition_set.as_deref()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rng::{stream, Role};
    use crate::sim::{discrete_shortcut, draw_channel};
    use crate::stbc::{csr_partition, group_codeword, SUPPORT_TOL};

    fn noiseless(
        code: &LinearStbc,
        p: &CsrPartition,
        s: &[f64],
        seed: u64,
    ) -> (FilteredObservations, ChannelRealization) {
        let h = draw_channel(code.n_tx(), 2, &mut stream(seed, 0, Role::Channel));
        let xg: Vec<ComplexGrid> = (0..p.len()).map(|g| group_codeword(code, p, g, s).unwrap()).collect();
        let obs = discrete_shortcut(&xg, &h, 0.0, &mut stream(seed, 0, Role::Noise)).unwrap();
        (obs, h)
    }

    #[test]
    fn strategy_ids_round_trip() {
        for st in Strategy::ALL {
            assert_eq!(st.id().parse::<Strategy>().unwrap(), st);
        }
        assert!(matches!("sphere".parse::<Strategy>(), Err(Error::ConfigInvalid { .. })));
    }

    #[test]
    fn golden_noiseless_all_strategies() {
        let code = catalog::build("golden").unwrap();
        let c = Constellation::qam(4).unwrap();
        let p = csr_partition(&code, SUPPORT_TOL);
        let intra = intra_structures(&code, &p).unwrap();
        let d = 0.5f64.sqrt();
        let s = [d, -d, -d, -d, d, d, -d, d];
        let (obs, h) = noiseless(&code, &p, &s, 4);
        let pr = Problem {
            obs: &obs,
            h: &h,
            code: &code,
            partition: &p,
            constellation: &c,
        };
        let expected = [
            (Strategy::Joint, 256),
            (Strategy::Group, 32),
            (Strategy::Iq, 16),
            (Strategy::QrHardlimit, 8),
        ];
        for (st, count) in expected {
            let r = decode(&pr, st, &intra, &DecodeOptions::default()).unwrap();
            assert_eq!(r.metric_evals, count, "{st}");
            for (a, b) in r.s_hat.iter().zip(&s) {
                assert!((a - b).abs() < 1e-12, "{st}");
            }
            assert_eq!(r.bits.len(), 8);
        }
    }

    #[test]
    fn partition_mismatch_detected() {
        let code = catalog::build("golden").unwrap();
        let c = Constellation::qam(4).unwrap();
        let p = csr_partition(&code, SUPPORT_TOL);
        let single = CsrPartition::single(&code);
        let (obs, h) = noiseless(&code, &single, &[0.0; 8], 1);
        let pr = Problem {
            obs: &obs,
            h: &h,
            code: &code,
            partition: &p,
            constellation: &c,
        };
        assert!(matches!(group_ml(&pr, JOINT_CAP), Err(Error::PartitionMismatch(_))));
    }

    #[test]
    fn codebook_cap_enforced() {
        let code = catalog::build("golden").unwrap();
        let c = Constellation::qam(64).unwrap();
        let p = CsrPartition::single(&code);
        let (obs, h) = noiseless(&code, &p, &[0.0; 8], 1);
        let pr = Problem {
            obs: &obs,
            h: &h,
            code: &code,
            partition: &p,
            constellation: &c,
        };
        assert!(matches!(joint_ml(&pr, JOINT_CAP), Err(Error::CodebookTooLarge { .. })));
    }
}
