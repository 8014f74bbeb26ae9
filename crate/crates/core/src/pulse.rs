//! Time-orthogonal shaping pulses built from Hermite functions.
//!
//! Pulses live on a uniform grid `t_k = k T_s / N`, `k = 0..=N`, and inner
//! products use trapezoidal weights (half weight on the two end points). A
//! family of `P` pulses takes Hermite orders `0..P` and is then
//! re-orthonormalized on that grid, so its Gram matrix is the identity to
//! rounding error rather than only approximately.

use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const MAX_HERMITE_ORDER: usize = 16;
pub const DEFAULT_OVERSAMPLING: usize = 64;

/// Uniform sample grid over `[0, duration]` with `intervals + 1` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    intervals: usize,
    duration: f64,
}

impl SampleGrid {
    pub fn new(duration: f64, intervals: usize) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) || intervals < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs duration > 0 and >= 2 intervals, got {duration} / {intervals}"
            )));
        }
        Ok(Self { intervals, duration })
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.intervals as f64
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn time(&self, k: usize) -> f64 {
        self.duration * k as f64 / self.intervals as f64
    }

    /// Offset `t_k - T_s/2`, exact zero at the midpoint for even `N`.
    fn centered(&self, k: usize) -> f64 {
        (2.0 * k as f64 - self.intervals as f64) * (self.duration / (2.0 * self.intervals as f64))
    }
}

/// Trapezoid weight of sample `k` out of `len`.
#[inline]
pub(crate) fn trapezoid_weight(k: usize, len: usize) -> f64 {
    if k == 0 || k + 1 == len {
        0.5
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    samples: Vec<f64>,
    dt: f64,
    duration: f64,
}

impl SampledWaveform {
    pub fn new(samples: Vec<f64>, grid: &SampleGrid) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}-point grid",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self {
            samples,
            dt: grid.dt(),
            duration: grid.duration(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn energy(&self) -> f64 {
        inner_unchecked(&self.samples, &self.samples, self.dt)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| a * x).collect(),
            ..self.clone()
        }
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.samples.len() == other.samples.len() && self.dt == other.dt && self.duration == other.duration
    }
}

fn inner_unchecked(a: &[f64], b: &[f64], dt: f64) -> f64 {
    let n = a.len();
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| trapezoid_weight(k, n) * x * y)
        .sum::<f64>()
        * dt
}

/// Trapezoidal `<a, b> = sum_k q_k a_k b_k dt`.
pub fn inner_product(a: &SampledWaveform, b: &SampledWaveform) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch("waveforms sampled on different grids".into()));
    }
    Ok(inner_unchecked(&a.samples, &b.samples, a.dt))
}

/// Hermite function of the given order centred at `T_s/2`, with
/// `u = (t - T_s/2) / width`, scaled to unit energy on the grid.
pub fn hermite_waveform(order: usize, grid: &SampleGrid, width: f64) -> Result<SampledWaveform> {
    if order > MAX_HERMITE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "hermite order {order} above {MAX_HERMITE_ORDER}"
        )));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!("width must be positive, got {width}")));
    }
    let samples: Vec<f64> = (0..grid.len())
        .map(|k| hermite_function(order, grid.centered(k) / width))
        .collect();
    let mut w = SampledWaveform::new(samples, grid)?;
    let e = w.energy();
    if !(e.is_finite() && e > f64::MIN_POSITIVE) {
        return Err(Error::UnstableOrder(order));
    }
    w = w.scaled(1.0 / e.sqrt());
    Ok(w)
}

/// Normalized Hermite function `psi_n(u)` by the stable three-term recurrence.
fn hermite_function(n: usize, u: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * u * u).exp();
    for j in 0..n {
        let next = (2.0 / (j as f64 + 1.0)).sqrt() * u * cur - (j as f64 / (j as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `P` mutually orthonormal pulses on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseFamily {
    pulses: Vec<SampledWaveform>,
    gram: Vec<Vec<f64>>,
    grid: SampleGrid,
}

impl PulseFamily {
    pub fn pulses(&self) -> &[SampledWaveform] {
        &self.pulses
    }

    pub fn pulse(&self, g: usize) -> &SampledWaveform {
        &self.pulses[g]
    }

    pub fn p_count(&self) -> usize {
        self.pulses.len()
    }

    pub fn gram(&self) -> &[Vec<f64>] {
        &self.gram
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    /// Largest `|G_ij - delta_ij|`.
    pub fn gram_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// Writes `t,w0,w1,...` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((0..self.p_count()).map(|g| format!("w{g}")));
        wr.write_record(&header)?;
        for k in 0..self.grid.len() {
            let mut row = vec![self.grid.time(k).to_string()];
            row.extend(self.pulses.iter().map(|p| p.samples[k].to_string()));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Builds `p_count` orthonormal pulses on `[0, t_s]` with `oversampling`
/// intervals. Hermite orders `0..p_count` are orthonormalized by two passes
/// of modified Gram-Schmidt under the trapezoidal inner product.
pub fn build_pulse_family(p_count: usize, t_s: f64, oversampling: usize, width: f64) -> Result<PulseFamily> {
    if p_count == 0 {
        return Err(Error::InvalidArgument("pulse family needs P >= 1".into()));
    }
    if oversampling < 8 * p_count {
        return Err(Error::InvalidArgument(format!(
            "oversampling {oversampling} below 8*P = {}",
            8 * p_count
        )));
    }
    let grid = SampleGrid::new(t_s, oversampling)?;
    let dt = grid.dt();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p_count);
    for order in 0..p_count {
        let mut v = hermite_waveform(order, &grid, width)?.samples;
        for _pass in 0..2 {
            for b in &basis {
                let c = inner_unchecked(&v, b, dt);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let norm = inner_unchecked(&v, &v, dt).sqrt();
        if !(norm > 1e-8) {
            return Err(Error::DegenerateFamily {
                rank: basis.len(),
                expected: p_count,
            });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let pulses: Vec<SampledWaveform> = basis
        .into_iter()
        .map(|s| SampledWaveform::new(s, &grid))
        .collect::<Result<_>>()?;
    let gram: Vec<Vec<f64>> = pulses
        .iter()
        .map(|a| {
            pulses
                .iter()
                .map(|b| inner_unchecked(&a.samples, &b.samples, dt))
                .collect()
        })
        .collect();
    let family = PulseFamily { pulses, gram, grid };
    if family.gram_error() > 1e-12 {
        return Err(Error::Numeric(format!(
            "pulse family Gram error {:e} after orthonormalization",
            family.gram_error()
        )));
    }
    Ok(family)
}

/// Family with the default grid: width `t_s / 8`, at least 64 samples per
/// pulse and at least `8 P`.
pub fn default_pulse_family(p_count: usize, t_s: f64) -> Result<PulseFamily> {
    build_pulse_family(p_count, t_s, DEFAULT_OVERSAMPLING.max(8 * p_count), t_s / 8.0)
}

/// Smallest two-sided bandwidth `B` (Hz) such that the zero-padded discrete
/// spectrum holds at least `fraction` of the energy inside `[-B/2, B/2]`.
pub fn fractional_energy_bandwidth(w: &SampledWaveform, fraction: f64) -> f64 {
    let nfft = (w.samples.len() * 16).next_power_of_two().max(1024);
    let mut buf: Vec<Complex<f64>> = w.samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    buf.resize(nfft, Complex::new(0.0, 0.0));
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(nfft);
    fft.process(&mut buf);
    let energy: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = energy.iter().sum();
    let df = 1.0 / (nfft as f64 * w.dt);
    if total == 0.0 {
        return 0.0;
    }
    let target = fraction * total;
    let mut acc = energy[0];
    let mut k = 0;
    while acc < target && k < nfft / 2 {
        k += 1;
        acc += energy[k];
        if nfft - k != k {
            acc += energy[nfft - k];
        }
    }
    2.0 * k as f64 * df
}
