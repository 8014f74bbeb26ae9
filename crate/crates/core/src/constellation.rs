//! Unit-energy signal sets with Gray labels.
//!
//! Real information symbols come in (I, Q) pairs: real symbol `2j` is the
//! in-phase part of complex symbol `j` and `2j + 1` its quadrature part. For a
//! separable set (square QAM, BPSK) each coordinate ranges over its own PAM
//! level list independently.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstellationKind {
    Bpsk,
    Qam,
    Psk,
}

/// Coordinate of a complex symbol carried by one real symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    I,
    Q,
}

impl Dim {
    pub fn of_real_symbol(k: usize) -> Dim {
        if k.is_multiple_of(2) {
            Dim::I
        } else {
            Dim::Q
        }
    }
}

#[derive(Clone)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    bits_per_symbol: usize,
    // Separable sets only; empty otherwise.
    i_levels: Vec<f64>,
    q_levels: Vec<f64>,
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn log2_exact(n: usize) -> Option<usize> {
    (n.is_power_of_two()).then(|| n.trailing_zeros() as usize)
}

impl Constellation {
    /// Square M-QAM, the product of two Gray-labelled sqrt(M)-PAM sets.
    pub fn qam(m: usize) -> Result<Self> {
        let bits = log2_exact(m)
            .filter(|b| *b >= 2 && b % 2 == 0)
            .ok_or_else(|| Error::InvalidArgument(format!("square QAM needs M = 4^k, got {m}")))?;
        let side = 1usize << (bits / 2);
        let d = (3.0 / (2.0 * (m as f64 - 1.0))).sqrt();
        let levels: Vec<f64> = (0..side).map(|j| (2.0 * j as f64 - side as f64 + 1.0) * d).collect();
        let half = bits / 2;
        let mut points = Vec::with_capacity(m);
        let mut labels = Vec::with_capacity(m);
        for (i, &li) in levels.iter().enumerate() {
            for (q, &lq) in levels.iter().enumerate() {
                points.push(Complex64::new(li, lq));
                labels.push((gray(i as u32) << half) | gray(q as u32));
            }
        }
        Ok(Self {
            kind: ConstellationKind::Qam,
            points,
            labels,
            bits_per_symbol: bits,
            i_levels: levels.clone(),
            q_levels: levels,
        })
    }

    pub fn bpsk() -> Self {
        Self {
            kind: ConstellationKind::Bpsk,
            points: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            labels: vec![0, 1],
            bits_per_symbol: 1,
            i_levels: vec![-1.0, 1.0],
            q_levels: vec![0.0],
        }
    }

    /// Gray-labelled M-PSK. Not separable.
    pub fn psk(m: usize) -> Result<Self> {
        let bits = log2_exact(m)
            .filter(|b| *b >= 1)
            .ok_or_else(|| Error::InvalidArgument(format!("PSK needs M = 2^k, got {m}")))?;
        let points = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64))
            .collect();
        let labels = (0..m as u32).map(gray).collect();
        Ok(Self {
            kind: ConstellationKind::Psk,
            points,
            labels,
            bits_per_symbol: bits,
            i_levels: Vec::new(),
            q_levels: Vec::new(),
        })
    }

    /// `2` selects BPSK, powers of four select square QAM.
    pub fn from_size(m: usize) -> Result<Self> {
        if m == 2 {
            Ok(Self::bpsk())
        } else {
            Self::qam(m)
        }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn label(&self, point: usize) -> u32 {
        self.labels[point]
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn is_separable(&self) -> bool {
        self.kind != ConstellationKind::Psk
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Level list of one coordinate. Empty for non-separable sets.
    pub fn levels(&self, dim: Dim) -> &[f64] {
        match dim {
            Dim::I => &self.i_levels,
            Dim::Q => &self.q_levels,
        }
    }

    /// Point index of a separable set from per-coordinate level indices.
    pub fn point_from_levels(&self, i_idx: usize, q_idx: usize) -> usize {
        debug_assert!(self.is_separable());
        i_idx * self.q_levels.len() + q_idx
    }

    /// Per-coordinate level indices of a point of a separable set.
    pub fn levels_of_point(&self, point: usize) -> (usize, usize) {
        let nq = self.q_levels.len();
        (point / nq, point % nq)
    }

    /// Index of the level nearest to `x`; exact midpoints go to the lower level.
    pub fn hard_limit(&self, dim: Dim, x: f64) -> usize {
        hard_limit(self.levels(dim), x)
    }

    /// Bits of a point, most significant first.
    pub fn bits_of(&self, point: usize) -> impl Iterator<Item = u8> + '_ {
        let label = self.labels[point];
        let n = self.bits_per_symbol;
        (0..n).rev().map(move |b| ((label >> b) & 1) as u8)
    }

    pub fn name(&self) -> String {
        match self.kind {
            ConstellationKind::Bpsk => "bpsk".into(),
            ConstellationKind::Qam => format!("{}-qam", self.size()),
            ConstellationKind::Psk => format!("{}-psk", self.size()),
        }
    }
}

impl fmt::Debug for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Constellation({})", self.name())
    }
}

/// Nearest entry of an ascending level list; ties resolve to the lower level.
pub fn hard_limit(levels: &[f64], x: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &l) in levels.iter().enumerate() {
        let d = (x - l).abs();
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}
