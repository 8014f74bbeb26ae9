//! Monte-Carlo BER sweeps.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::constellation::Constellation;
use crate::decode::{decode, intra_structures, DecodeOptions, Problem, Strategy};
use crate::error::{Error, Result};
use crate::grid::ComplexGrid;
use crate::pulse::{build_pulse_family, PulseFamily};
use crate::rng::{stream, Role};
use crate::sim::{
    discrete_shortcut, draw_channel, matched_filter_bank, transmit, ChannelRealization, FilteredObservations,
};
use crate::stbc::{group_codeword, CsrPartition, LinearStbc};

use super::config::{ExperimentConfig, SnrKind};
use super::{decoding_partition, load_code};

/// Version tag written in the first line of every BER CSV.
pub const BER_SCHEMA: &str = "tops-stbc-ber/1";

pub const BER_COLUMNS: &[&str] = &[
    "code",
    "strategy",
    "M",
    "snr_db",
    "bit_errors",
    "bits",
    "ber",
    "ber_se",
    "mean_metric_evals",
    "fallbacks",
    "config_hash",
    "wall_time_s",
];

/// Noiseless frames compared across the waveform and discrete paths before
/// every sweep.
pub const CROSS_CHECK_FRAMES: usize = 500;
pub const CROSS_CHECK_TOL: f64 = 1e-8;

/// Trials are processed in blocks of this size between progress merges.
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub code: String,
    pub strategy: Strategy,
    pub m: usize,
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    /// Standard error of `ber` from the spread of per-trial error counts.
    pub ber_se: f64,
    pub mean_metric_evals: f64,
    pub fallbacks: u64,
    pub config_hash: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<BerRow>,
    pub provenance: Provenance,
}

/// `N0` for a given SNR. With unit-energy constellations and the code's
/// energy scale, each receive antenna collects energy `Nt` per channel use.
pub fn noise_n0(code: &LinearStbc, constellation: &Constellation, kind: SnrKind, snr_db: f64) -> f64 {
    let es = code.n_tx() as f64;
    let snr = 10f64.powf(snr_db / 10.0);
    match kind {
        SnrKind::EsN0 => es / snr,
        SnrKind::EbN0 => {
            let bits_per_use = (code.k() / 2) as f64 * constellation.bits_per_symbol() as f64 / code.n_slots() as f64;
            es / bits_per_use / snr
        }
    }
}

/// Uniform random constellation points and the matching real symbol vector.
pub fn draw_symbols<R: Rng + ?Sized>(code: &LinearStbc, c: &Constellation, rng: &mut R) -> (Vec<usize>, Vec<f64>) {
    let points: Vec<usize> = (0..code.k() / 2).map(|_| rng.random_range(0..c.size())).collect();
    let s = points
        .iter()
        .flat_map(|&p| [c.points()[p].re, c.points()[p].im])
        .collect();
    (points, s)
}

pub fn group_codewords(code: &LinearStbc, p: &CsrPartition, s: &[f64]) -> Result<Vec<ComplexGrid>> {
    (0..p.len()).map(|g| group_codeword(code, p, g, s)).collect()
}

/// Passes the same noiseless frames through both channel paths and returns
/// the largest entrywise difference.
pub fn cross_path_max_diff(
    code: &LinearStbc,
    p: &CsrPartition,
    c: &Constellation,
    pulses: &PulseFamily,
    n_rx: usize,
    seed: u64,
    frames: usize,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for f in 0..frames {
        let key = u64::MAX - f as u64;
        let (_, s) = draw_symbols(code, c, &mut stream(seed, key, Role::Symbols));
        let h = draw_channel(code.n_tx(), n_rx, &mut stream(seed, key, Role::Channel));
        let xg = group_codewords(code, p, &s)?;
        let mut unused = stream(seed, key, Role::Noise);
        let wave = matched_filter_bank(&transmit(&xg, pulses, &h, 0.0, &mut unused)?, pulses)?;
        let disc = discrete_shortcut(&xg, &h, 0.0, &mut unused)?;
        for (a, b) in wave.groups.iter().zip(&disc.groups) {
            worst = worst.max(a.max_abs_diff(b));
        }
    }
    Ok(worst)
}

struct Setup {
    code: LinearStbc,
    partition: CsrPartition,
    intra: Vec<crate::stbc::IntraGroupStructure>,
    constellation: Constellation,
    pulses: PulseFamily,
    n_rx: usize,
    trials: u64,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let code = load_code(&cfg.code)?;
        let partition = decoding_partition(&code);
        let intra = intra_structures(&code, &partition)?;
        let constellation = Constellation::from_size(cfg.m)?;
        let p = partition.len();
        let pulses = build_pulse_family(p, 1.0, cfg.oversampling.max(8 * p), cfg.pulse_width)?;
        let n_rx = cfg.n_rx.unwrap_or_else(|| crate::catalog::default_n_rx(&cfg.code));
        let bits_per_frame = (code.k() / 2 * constellation.bits_per_symbol()) as u64;
        let trials = cfg.trials.unwrap_or_else(|| cfg.bits.div_ceil(bits_per_frame));
        Ok(Self {
            code,
            partition,
            intra,
            constellation,
            pulses,
            n_rx,
            trials,
        })
    }

    fn observe(
        &self,
        xg: &[ComplexGrid],
        h: &ChannelRealization,
        n0: f64,
        waveform: bool,
        rng: &mut impl Rng,
    ) -> Result<FilteredObservations> {
        if waveform {
            matched_filter_bank(&transmit(xg, &self.pulses, h, n0, rng)?, &self.pulses)
        } else {
            discrete_shortcut(xg, h, n0, rng)
        }
    }
}

#[derive(Default, Clone)]
struct Tally {
    errors: u64,
    errors_sq: u128,
    evals: u64,
    fallbacks: u64,
}

/// Runs the sweep. With `resume` set and an existing output file whose config
/// hash matches, SNR points already present are kept and not recomputed.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let setup = Setup::new(cfg)?;
    let hash = cfg.hash();
    let diff = cross_path_max_diff(
        &setup.code,
        &setup.partition,
        &setup.constellation,
        &setup.pulses,
        setup.n_rx,
        cfg.seed,
        CROSS_CHECK_FRAMES,
    )?;
    if !(diff <= CROSS_CHECK_TOL) {
        return Err(Error::Numeric(format!(
            "waveform and discrete paths differ by {diff:e} on noiseless frames"
        )));
    }

    let mut previous = Vec::new();
    if cfg.resume {
        if let Some(path) = cfg.output.as_deref().filter(|p| p.exists()) {
            let (old_hash, rows) = read_ber_csv(path)?;
            if old_hash != hash {
                return Err(Error::ConfigInvalid {
                    field: "resume".into(),
                    line: None,
                    msg: format!(
                        "{} was written with config {old_hash}, current config is {hash}",
                        path.display()
                    ),
                });
            }
            previous = rows;
        }
    }

    let opts = DecodeOptions::default();
    let mut rows = Vec::new();
    for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
        let done: Vec<&BerRow> = previous.iter().filter(|r| r.snr_db == snr_db).collect();
        if cfg.strategies.iter().all(|st| done.iter().any(|r| r.strategy == *st)) {
            for st in &cfg.strategies {
                rows.push((*done.iter().find(|r| r.strategy == *st).expect("present")).clone());
            }
            continue;
        }
        let start = Instant::now();
        let n0 = noise_n0(&setup.code, &setup.constellation, cfg.snr_kind, snr_db);
        let mut tallies = vec![Tally::default(); cfg.strategies.len()];
        let mut t0 = 0;
        while t0 < setup.trials {
            let t1 = (t0 + CHUNK).min(setup.trials);
            let chunk: Vec<Vec<(u64, u64, usize)>> = (t0..t1)
                .into_par_iter()
                .map(|t| run_trial(&setup, cfg, &opts, ((si as u64) << 40) | t, n0))
                .collect::<Result<_>>()?;
            for trial in chunk {
                for (tally, (e, ev, fb)) in tallies.iter_mut().zip(trial) {
                    tally.errors += e;
                    tally.errors_sq += (e as u128) * (e as u128);
                    tally.evals += ev;
                    tally.fallbacks += fb as u64;
                }
            }
            t0 = t1;
        }
        let wall = start.elapsed().as_secs_f64();
        let bits_per_frame = (setup.code.k() / 2 * setup.constellation.bits_per_symbol()) as u64;
        let bits = setup.trials * bits_per_frame;
        for (st, tally) in cfg.strategies.iter().zip(tallies) {
            rows.push(BerRow {
                code: setup.code.name().to_string(),
                strategy: *st,
                m: cfg.m,
                snr_db,
                bit_errors: tally.errors,
                bits,
                ber: tally.errors as f64 / bits as f64,
                ber_se: standard_error(tally.errors, tally.errors_sq, setup.trials, bits),
                mean_metric_evals: tally.evals as f64 / setup.trials as f64,
                fallbacks: tally.fallbacks,
                config_hash: hash.clone(),
                wall_time_s: wall,
            });
        }
    }
    Ok(ExperimentResult {
        rows,
        provenance: Provenance {
            seed: cfg.seed,
            config_hash: hash,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn standard_error(sum: u64, sum_sq: u128, trials: u64, bits: u64) -> f64 {
    if trials < 2 {
        return f64::NAN;
    }
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = ((sum_sq as f64) - n * mean * mean).max(0.0) / (n - 1.0);
    (n * var).sqrt() / bits as f64
}

/// Per strategy: (bit errors, metric evaluations, fallbacks).
fn run_trial(
    setup: &Setup,
    cfg: &ExperimentConfig,
    opts: &DecodeOptions,
    key: u64,
    n0: f64,
) -> Result<Vec<(u64, u64, usize)>> {
    let c = &setup.constellation;
    let (points, s) = draw_symbols(&setup.code, c, &mut stream(cfg.seed, key, Role::Symbols));
    let h = draw_channel(setup.code.n_tx(), setup.n_rx, &mut stream(cfg.seed, key, Role::Channel));
    let xg = group_codewords(&setup.code, &setup.partition, &s)?;
    let obs = setup.observe(&xg, &h, n0, cfg.waveform, &mut stream(cfg.seed, key, Role::Noise))?;
    let truth: Vec<u8> = points.iter().flat_map(|&p| c.bits_of(p)).collect();
    let pr = Problem {
        obs: &obs,
        h: &h,
        code: &setup.code,
        partition: &setup.partition,
        constellation: c,
    };
    cfg.strategies
        .iter()
        .map(|&st| {
            let r = decode(&pr, st, &setup.intra, opts)?;
            let errors = truth.iter().zip(&r.bits).filter(|(a, b)| a != b).count() as u64;
            Ok((errors, r.metric_evals, r.fallbacks))
        })
        .collect()
}

pub fn write_ber_csv<W: Write>(result: &ExperimentResult, mut out: W) -> Result<()> {
    let p = &result.provenance;
    writeln!(
        out,
        "# {BER_SCHEMA} config_hash={} seed={} version={}",
        p.config_hash, p.seed, p.version
    )?;
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(BER_COLUMNS)?;
    for r in &result.rows {
        wr.write_record([
            r.code.clone(),
            r.strategy.id().to_string(),
            r.m.to_string(),
            r.snr_db.to_string(),
            r.bit_errors.to_string(),
            r.bits.to_string(),
            r.ber.to_string(),
            r.ber_se.to_string(),
            r.mean_metric_evals.to_string(),
            r.fallbacks.to_string(),
            r.config_hash.clone(),
            format!("{:.3}", r.wall_time_s),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a BER CSV back, returning its config hash and rows.
pub fn read_ber_csv(path: &Path) -> Result<(String, Vec<BerRow>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let bad = |msg: String| Error::ConfigInvalid {
        field: "resume".into(),
        line: Some(1),
        msg: format!("{}: {msg}", path.display()),
    };
    let rest = first
        .trim()
        .strip_prefix("# ")
        .and_then(|s| s.strip_prefix(BER_SCHEMA))
        .ok_or_else(|| bad(format!("missing `{BER_SCHEMA}` header")))?;
    let hash = rest
        .split_whitespace()
        .find_map(|f| f.strip_prefix("config_hash="))
        .ok_or_else(|| bad("header has no config_hash".into()))?
        .to_string();
    let mut rd = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| bad(format!("bad number {:?} in column {}", field(i), BER_COLUMNS[i])))
        };
        let int = |i: usize| -> Result<u64> {
            field(i)
                .parse()
                .map_err(|_| bad(format!("bad integer {:?} in column {}", field(i), BER_COLUMNS[i])))
        };
        rows.push(BerRow {
            code: field(0).to_string(),
            strategy: field(1).parse()?,
            m: int(2)? as usize,
            snr_db: num(3)?,
            bit_errors: int(4)?,
            bits: int(5)?,
            ber: num(6)?,
            ber_se: num(7)?,
            mean_metric_evals: num(8)?,
            fallbacks: int(9)?,
            config_hash: field(10).to_string(),
            wall_time_s: num(11)?,
        });
    }
    Ok((hash, rows))
}

/// Closed-form BER of BPSK over `branches` i.i.d. Rayleigh branches with
/// maximal-ratio combining at average per-branch SNR `gamma`.
pub fn mrc_bpsk_ber(gamma: f64, branches: u32) -> f64 {
    let mu = (gamma / (1.0 + gamma)).sqrt();
    let p = (1.0 - mu) / 2.0;
    let l = branches as i32;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 0..branches {
        if k > 0 {
            binom *= (l - 1 + k as i32) as f64 / k as f64;
        }
        sum += binom * (1.0 - p).powi(k as i32);
    }
    p.powi(l) * sum
}
