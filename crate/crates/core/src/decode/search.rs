//! Real-valued equivalent model and exhaustive enumeration.

use crate::constellation::{Constellation, Dim};
use crate::error::{Error, Result};

/// `y ~ sum_i cols[i] * s[symbols[i]]` over the reals.
#[derive(Debug, Clone)]
pub(crate) struct RealModel {
    pub y: Vec<f64>,
    pub symbols: Vec<usize>,
    pub cols: Vec<Vec<f64>>,
}

impl RealModel {
    pub fn col_of(&self, symbol: usize) -> Option<&[f64]> {
        self.symbols
            .iter()
            .position(|&s| s == symbol)
            .map(|i| self.cols[i].as_slice())
    }
}

/// A block of real symbols enumerated together: one real symbol of a
/// separable set, or an (I, Q) pair of a non-separable one.
#[derive(Debug, Clone)]
pub(crate) struct Unit {
    pub symbols: Vec<usize>,
    /// `options[o][i]` is the value of `symbols[i]` under option `o`.
    pub options: Vec<Vec<f64>>,
}

impl Unit {
    pub fn size(&self) -> usize {
        self.options.len()
    }
}

/// Splits a symbol set into enumeration units. Non-separable sets require
/// both halves of every complex symbol to be present.
pub(crate) fn units_for(symbols: &[usize], constellation: &Constellation) -> Result<Vec<Unit>> {
    let mut units = Vec::new();
    if constellation.is_separable() {
        for &k in symbols {
            let levels = constellation.levels(Dim::of_real_symbol(k));
            units.push(Unit {
                symbols: vec![k],
                options: levels.iter().map(|&l| vec![l]).collect(),
            });
        }
        return Ok(units);
    }
    for &k in symbols {
        if k % 2 == 1 {
            if !symbols.contains(&(k - 1)) {
                return Err(Error::NotSeparable(format!(
                    "{} splits the I/Q pair of complex symbol {}",
                    constellation.name(),
                    k / 2 + 1
                )));
            }
            continue;
        }
        if !symbols.contains(&(k + 1)) {
            return Err(Error::NotSeparable(format!(
                "{} splits the I/Q pair of complex symbol {}",
                constellation.name(),
                k / 2 + 1
            )));
        }
        units.push(Unit {
            symbols: vec![k, k + 1],
            options: constellation.points().iter().map(|p| vec![p.re, p.im]).collect(),
        });
    }
    Ok(units)
}

pub(crate) fn candidate_count(units: &[Unit]) -> u128 {
    units.iter().map(|u| u.size() as u128).product()
}

pub(crate) struct SearchOutcome {
    /// Chosen option per unit.
    pub choice: Vec<usize>,
    pub metric: f64,
    pub evals: u64,
}

/// Exhaustive minimisation of `||y - sum cols * s||^2` over the units.
/// Units are enumerated lexicographically with the first unit slowest; the
/// first strict minimum wins, so ties keep the smallest candidate.
pub(crate) fn exhaustive(model: &RealModel, units: &[Unit]) -> SearchOutcome {
    let n = model.y.len();
    // Contribution vector of every option of every unit.
    let contrib: Vec<Vec<Vec<f64>>> = units
        .iter()
        .map(|u| {
            let cols: Vec<&[f64]> = u
                .symbols
                .iter()
                .map(|&s| model.col_of(s).expect("unit symbol in model"))
                .collect();
            u.options
                .iter()
                .map(|opt| {
                    let mut v = vec![0.0; n];
                    for (c, &x) in cols.iter().zip(opt) {
                        for (vi, ci) in v.iter_mut().zip(c.iter()) {
                            *vi += ci * x;
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();

    let depth = units.len();
    let mut residuals = vec![model.y.clone(); depth + 1];
    let mut choice = vec![0usize; depth];
    let mut best = SearchOutcome {
        choice: choice.clone(),
        metric: f64::INFINITY,
        evals: 0,
    };
    if depth == 0 {
        best.metric = model.y.iter().map(|x| x * x).sum();
        best.evals = 1;
        return best;
    }
    descend(0, &contrib, &mut residuals, &mut choice, &mut best);
    best
}

fn descend(
    d: usize,
    contrib: &[Vec<Vec<f64>>],
    residuals: &mut [Vec<f64>],
    choice: &mut [usize],
    best: &mut SearchOutcome,
) {
    let last = d + 1 == contrib.len();
    for (o, c) in contrib[d].iter().enumerate() {
        choice[d] = o;
        let (head, tail) = residuals.split_at_mut(d + 1);
        let parent = &head[d];
        let child = &mut tail[0];
        if last {
            let mut m = 0.0;
            for ((p, ci), ch) in parent.iter().zip(c).zip(child.iter_mut()) {
                *ch = p - ci;
                m += *ch * *ch;
            }
            best.evals += 1;
            if m < best.metric {
                best.metric = m;
                best.choice.copy_from_slice(choice);
            }
        } else {
            for ((p, ci), ch) in parent.iter().zip(c).zip(child.iter_mut()) {
                *ch = p - ci;
            }
            descend(d + 1, contrib, residuals, choice, best);
        }
    }
}

/// Writes the chosen option values into a full symbol vector.
pub(crate) fn apply_choice(units: &[Unit], choice: &[usize], s: &mut [f64]) {
    for (u, &o) in units.iter().zip(choice) {
        for (&k, &v) in u.symbols.iter().zip(&u.options[o]) {
            s[k] = v;
        }
    }
}
