//! Waveform-level transmission and the matched-filter bank.
//!
//! Group `g` of the transmit partition rides on pulse `w_g`, so the slot-`j`
//! waveform at receive antenna `r` is `sum_g w_g(t) (H X_g)[r, j]` plus white
//! noise. Correlating against each pulse returns `Y_g = H X_g + N_g`. The
//! discrete shortcut produces the same statistics without the waveforms.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::pulse::{trapezoid_weight, PulseFamily};
use crate::rng::complex_gaussian;

/// Flat-fading `N_r x N_t` channel, constant over the codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: ComplexGrid,
}

impl ChannelRealization {
    pub fn n_rx(&self) -> usize {
        self.h.rows()
    }

    pub fn n_tx(&self) -> usize {
        self.h.cols()
    }
}

/// i.i.d. CN(0, 1) entries.
pub fn draw_channel<R: Rng + ?Sized>(n_tx: usize, n_rx: usize, rng: &mut R) -> ChannelRealization {
    let mut h = ComplexGrid::zeros(n_rx, n_tx);
    for r in 0..n_rx {
        for c in 0..n_tx {
            h[(r, c)] = complex_gaussian(rng, 0.5);
        }
    }
    ChannelRealization { h }
}

/// Received complex baseband waveforms, one per (receive antenna, slot).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformFrame {
    n_rx: usize,
    slot_count: usize,
    samples_per_slot: usize,
    samples: Vec<Complex64>,
    pub n0: f64,
}

impl WaveformFrame {
    pub fn zeros(n_rx: usize, slot_count: usize, samples_per_slot: usize) -> Self {
        Self {
            n_rx,
            slot_count,
            samples_per_slot,
            samples: vec![Complex64::new(0.0, 0.0); n_rx * slot_count * samples_per_slot],
            n0: 0.0,
        }
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn samples_per_slot(&self) -> usize {
        self.samples_per_slot
    }

    pub fn waveform(&self, rx: usize, slot: usize) -> &[Complex64] {
        let n = self.samples_per_slot;
        let off = (rx * self.slot_count + slot) * n;
        &self.samples[off..off + n]
    }

    fn waveform_mut(&mut self, rx: usize, slot: usize) -> &mut [Complex64] {
        let n = self.samples_per_slot;
        let off = (rx * self.slot_count + slot) * n;
        &mut self.samples[off..off + n]
    }
}

/// Per-group matched-filter outputs, aligned with the transmit partition.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredObservations {
    pub groups: Vec<ComplexGrid>,
    pub n0: f64,
}

impl FilteredObservations {
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

fn check_groups(x_groups: &[ComplexGrid], h: &ChannelRealization) -> Result<()> {
    let first = x_groups
        .first()
        .ok_or_else(|| Error::InvalidArgument("no transmit groups".into()))?;
    for x in x_groups {
        if x.rows() != h.n_tx() || x.shape() != first.shape() {
            return Err(Error::dims(
                format!("{}x{} group codewords", h.n_tx(), first.cols()),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
    }
    Ok(())
}

fn check_n0(n0: f64) -> Result<()> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(Error::InvalidArgument(format!("N0 must be finite and >= 0, got {n0}")));
    }
    Ok(())
}

/// Sends each group codeword on its own pulse through `h` and adds white
/// noise with per-sample variance `N0 / (2 dt)` per real part.
pub fn transmit<R: Rng + ?Sized>(
    x_groups: &[ComplexGrid],
    pulses: &PulseFamily,
    h: &ChannelRealization,
    n0: f64,
    rng: &mut R,
) -> Result<WaveformFrame> {
    if x_groups.len() != pulses.p_count() {
        return Err(Error::GroupCountMismatch {
            expected: pulses.p_count(),
            got: x_groups.len(),
        });
    }
    check_groups(x_groups, h)?;
    check_n0(n0)?;
    let received: Vec<ComplexGrid> = x_groups.iter().map(|x| h.h.matmul(x)).collect::<Result<_>>()?;
    let n_rx = h.n_rx();
    let slots = x_groups[0].cols();
    let len = pulses.grid().len();
    let mut frame = WaveformFrame::zeros(n_rx, slots, len);
    frame.n0 = n0;
    let noise_var = n0 / (2.0 * pulses.grid().dt());
    for r in 0..n_rx {
        for j in 0..slots {
            let wf = frame.waveform_mut(r, j);
            for (g, hx) in received.iter().enumerate() {
                let a = hx[(r, j)];
                for (y, &w) in wf.iter_mut().zip(pulses.pulse(g).samples()) {
                    *y += a * w;
                }
            }
            if n0 > 0.0 {
                for y in wf.iter_mut() {
                    *y += complex_gaussian(rng, noise_var);
                }
            }
        }
    }
    Ok(frame)
}

/// Correlates every received waveform against every pulse.
pub fn matched_filter_bank(frame: &WaveformFrame, pulses: &PulseFamily) -> Result<FilteredObservations> {
    let len = pulses.grid().len();
    if frame.samples_per_slot != len {
        return Err(Error::GridMismatch(format!(
            "frame has {} samples per slot, pulses have {len}",
            frame.samples_per_slot
        )));
    }
    let dt = pulses.grid().dt();
    let groups = pulses
        .pulses()
        .iter()
        .map(|p| {
            let w = p.samples();
            ComplexGrid::from_fn(frame.n_rx, frame.slot_count, |r, j| {
                frame
                    .waveform(r, j)
                    .iter()
                    .zip(w)
                    .enumerate()
                    .map(|(k, (y, &wk))| y * (trapezoid_weight(k, len) * wk))
                    .sum::<Complex64>()
                    * dt
            })
        })
        .collect();
    Ok(FilteredObservations { groups, n0: frame.n0 })
}

/// `Y_g = H X_g + N_g` with `N_g` i.i.d. CN(0, N0) (variance `N0/2` per real
/// dimension), skipping the waveform stage.
pub fn discrete_shortcut<R: Rng + ?Sized>(
    x_groups: &[ComplexGrid],
    h: &ChannelRealization,
    n0: f64,
    rng: &mut R,
) -> Result<FilteredObservations> {
    check_groups(x_groups, h)?;
    check_n0(n0)?;
    let mut groups = Vec::with_capacity(x_groups.len());
    for x in x_groups {
        let mut y = h.h.matmul(x)?;
        if n0 > 0.0 {
            for r in 0..y.rows() {
                for c in 0..y.cols() {
                    y[(r, c)] += complex_gaussian(rng, n0 / 2.0);
                }
            }
        }
        groups.push(y);
    }
    Ok(FilteredObservations { groups, n0 })
}
