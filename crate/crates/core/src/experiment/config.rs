//! Sweep configuration: `key = value` files and command-line flags share one
//! parser so both get the same validation and diagnostics.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::decode::Strategy;
use crate::error::{Error, Result};

/// Normalisation of the SNR axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrKind {
    /// Energy per information bit over N0.
    EbN0,
    /// Received energy per channel use and receive antenna over N0.
    EsN0,
}

impl SnrKind {
    pub fn id(self) -> &'static str {
        match self {
            SnrKind::EbN0 => "ebn0",
            SnrKind::EsN0 => "esn0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Catalog name or path to a code description file.
    pub code: String,
    pub m: usize,
    pub strategies: Vec<Strategy>,
    pub snr_db: Vec<f64>,
    pub snr_kind: SnrKind,
    /// Target number of information bits per SNR point.
    pub bits: u64,
    /// Explicit trial count per SNR point; overrides `bits`.
    pub trials: Option<u64>,
    pub seed: u64,
    pub waveform: bool,
    pub n_rx: Option<usize>,
    pub oversampling: usize,
    /// Hermite width as a fraction of the symbol period.
    pub pulse_width: f64,
    pub output: Option<PathBuf>,
    pub resume: bool,
}

/// Keys accepted in config files; flags use the same names.
pub const KEYS: &[&str] = &[
    "code",
    "M",
    "strategy",
    "snr",
    "snr_kind",
    "bits",
    "trials",
    "seed",
    "waveform",
    "n_rx",
    "oversampling",
    "pulse_width",
    "output",
    "resume",
];

/// One `key = value` setting with the line it came from, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    pub line: Option<usize>,
}

impl Setting {
    pub fn flag(key: &str, value: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            value: value.into(),
            line: None,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::ConfigInvalid {
            field: self.key.clone(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, what: &str) -> Result<T> {
        self.value
            .parse()
            .map_err(|_| self.err(format!("expected {what}, got {:?}", self.value)))
    }
}

/// Parses a config file into settings. Blank lines and `#` comments are
/// skipped; unknown keys are rejected.
pub fn parse_settings(text: &str) -> Result<Vec<Setting>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::ConfigInvalid {
            field: line.to_string(),
            line: Some(i + 1),
            msg: "expected `key = value`".into(),
        })?;
        let key = k.trim();
        if !KEYS.contains(&key) {
            return Err(Error::ConfigInvalid {
                field: key.to_string(),
                line: Some(i + 1),
                msg: "unknown key".into(),
            });
        }
        out.push(Setting {
            key: key.to_string(),
            value: v.trim().to_string(),
            line: Some(i + 1),
        });
    }
    Ok(out)
}

/// Expands `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_snr_grid(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, step] => {
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number {s:?}"));
            let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
            if !(step > 0.0 && step.is_finite()) {
                return Err("step must be positive".into());
            }
            let n = ((b - a) / step + 1e-9).floor();
            if !(n >= 0.0) || n > 1e6 {
                return Err(format!("empty or oversized grid {spec:?}"));
            }
            (0..=n as usize).map(|i| a + i as f64 * step).collect()
        }
        [_] => spec
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad number {s:?}")))
            .collect::<std::result::Result<Vec<_>, _>>()?,
        _ => return Err(format!("expected a:b:step or a list, got {spec:?}")),
    };
    if grid.iter().any(|x| !x.is_finite()) {
        return Err("SNR values must be finite".into());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err("SNR grid must be strictly increasing".into());
    }
    Ok(grid)
}

fn parse_bool(s: &Setting) -> Result<bool> {
    match s.value.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(s.err(format!("expected true or false, got {:?}", s.value))),
    }
}

impl ExperimentConfig {
    /// Builds a config from settings; later settings override earlier ones.
    pub fn from_settings(settings: &[Setting]) -> Result<Self> {
        let last = |key: &str| settings.iter().rev().find(|s| s.key == key);
        let required = |key: &str| {
            last(key).ok_or_else(|| Error::ConfigInvalid {
                field: key.into(),
                line: None,
                msg: "missing".into(),
            })
        };

        for s in settings {
            if !KEYS.contains(&s.key.as_str()) {
                return Err(s.err("unknown key"));
            }
        }

        let code = required("code")?.value.clone();
        if code.is_empty() {
            return Err(required("code")?.err("empty code name"));
        }
        let m_set = required("M")?;
        let m: usize = m_set.parse("an integer constellation size")?;
        if crate::constellation::Constellation::from_size(m).is_err() {
            return Err(m_set.err(format!("M must be 2 (BPSK) or a power of 4, got {m}")));
        }
        let st_set = required("strategy")?;
        let strategies = st_set
            .value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<Strategy>()
                    .map_err(|_| st_set.err(format!("unknown strategy {:?}", s.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut seen = strategies.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != strategies.len() {
            return Err(st_set.err("strategy listed twice"));
        }
        let snr_set = required("snr")?;
        let snr_db = parse_snr_grid(&snr_set.value).map_err(|e| snr_set.err(e))?;
        let snr_kind = match last("snr_kind") {
            None => SnrKind::EbN0,
            Some(s) => match s.value.as_str() {
                "ebn0" => SnrKind::EbN0,
                "esn0" => SnrKind::EsN0,
                _ => return Err(s.err("expected ebn0 or esn0")),
            },
        };
        let trials = match last("trials") {
            None => None,
            Some(s) => {
                let t: u64 = s.parse("an integer")?;
                if t == 0 {
                    return Err(s.err("trials must be at least 1"));
                }
                Some(t)
            }
        };
        let bits = match last("bits") {
            None if trials.is_some() => 0,
            None => return Err(required("bits")?.err("missing")),
            Some(s) => {
                let b: u64 = s.parse("an integer")?;
                if b == 0 && trials.is_none() {
                    return Err(s.err("bits must be at least 1"));
                }
                b
            }
        };
        let seed: u64 = required("seed")?.parse("an unsigned integer seed")?;
        let waveform = last("waveform").map(parse_bool).transpose()?.unwrap_or(false);
        let resume = last("resume").map(parse_bool).transpose()?.unwrap_or(false);
        let n_rx = match last("n_rx") {
            None => None,
            Some(s) => {
                let n: usize = s.parse("an integer")?;
                if n == 0 {
                    return Err(s.err("need at least one receive antenna"));
                }
                Some(n)
            }
        };
        let oversampling = match last("oversampling") {
            None => crate::pulse::DEFAULT_OVERSAMPLING,
            Some(s) => {
                let o: usize = s.parse("an integer")?;
                if o == 0 {
                    return Err(s.err("oversampling must be positive"));
                }
                o
            }
        };
        let pulse_width = match last("pulse_width") {
            None => 0.125,
            Some(s) => {
                let w: f64 = s.parse("a number")?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(s.err("pulse width must be positive"));
                }
                w
            }
        };
        let output = last("output").map(|s| PathBuf::from(&s.value));
        Ok(Self {
            code,
            m,
            strategies,
            snr_db,
            snr_kind,
            bits,
            trials,
            seed,
            waveform,
            n_rx,
            oversampling,
            pulse_width,
            output,
            resume,
        })
    }

    pub fn from_file_text(text: &str) -> Result<Self> {
        Self::from_settings(&parse_settings(text)?)
    }

    /// Canonical text of everything that affects results. Output location and
    /// the resume flag are excluded.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "code={}", self.code);
        let _ = writeln!(s, "M={}", self.m);
        let ids: Vec<&str> = self.strategies.iter().map(|st| st.id()).collect();
        let _ = writeln!(s, "strategy={}", ids.join(","));
        let snr: Vec<String> = self.snr_db.iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(s, "snr={}", snr.join(","));
        let _ = writeln!(s, "snr_kind={}", self.snr_kind.id());
        let _ = writeln!(s, "bits={}", self.bits);
        let _ = writeln!(s, "trials={}", self.trials.map_or("-".into(), |t| t.to_string()));
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "waveform={}", self.waveform);
        let _ = writeln!(s, "n_rx={}", self.n_rx.map_or("-".into(), |n| n.to_string()));
        let _ = writeln!(s, "oversampling={}", self.oversampling);
        let _ = writeln!(s, "pulse_width={:?}", self.pulse_width);
        s
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}
