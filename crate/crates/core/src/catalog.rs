//! Constructors for the codes studied by this crate.
//!
//! Every constructor returns weight matrices over *unrotated* information
//! reals. Where a code rotates its QAM symbols, the rotation is folded into
//! the weight matrices, which is what lets equal-support classes line up with
//! the diagonal / off-diagonal structure of the code.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, I};
use crate::stbc::{coarsen, CsrPartition, LinearStbc};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Parameters of the Golden code.
#[derive(Debug, Clone, Copy)]
pub struct GoldenParams {
    pub theta: f64,
    pub theta_bar: f64,
    pub alpha: Complex64,
    pub alpha_bar: Complex64,
    pub gamma: Complex64,
}

impl GoldenParams {
    pub fn with_gamma(gamma: Complex64) -> Self {
        let theta = (1.0 + 5f64.sqrt()) / 2.0;
        let theta_bar = 1.0 - theta;
        Self {
            theta,
            theta_bar,
            alpha: Complex64::new(1.0, 1.0 - theta),
            alpha_bar: Complex64::new(1.0, 1.0 - theta_bar),
            gamma,
        }
    }
}

impl Default for GoldenParams {
    fn default() -> Self {
        Self::with_gamma(I)
    }
}

/// Rotation used by the Srinath-Rajan codes and the CIOD baseline.
#[derive(Debug, Clone, Copy)]
pub struct SrParams {
    pub rotation: f64,
    pub sqrt_i: Complex64,
}

impl Default for SrParams {
    fn default() -> Self {
        Self {
            rotation: 2f64.atan() / 2.0,
            sqrt_i: Complex64::from_polar(1.0, FRAC_PI_4),
        }
    }
}

/// Parameters of the fast-decodable 4x2 code.
///
/// `s_i = sum_k f_{4i+k} u_k` with `u = {1, z + 1/z, (z - 1/z)/2, (z^2 - 1/z^2)/2}`.
/// The automorphism `sigma` acts on the bases through `z -> z^sigma_power`,
/// optionally followed by complex conjugation.
#[derive(Debug, Clone, Copy)]
pub struct Fast4x2Params {
    pub r: Complex64,
    pub zeta: Complex64,
    pub sigma_power: i32,
    pub sigma_conjugate: bool,
}

impl Default for Fast4x2Params {
    fn default() -> Self {
        let zeta = Complex64::from_polar(1.0, 2.0 * PI / 15.0);
        Self {
            r: zeta,
            zeta,
            sigma_power: 2,
            sigma_conjugate: true,
        }
    }
}

impl Fast4x2Params {
    fn bases_at(z: Complex64) -> [Complex64; 4] {
        let zi = z.inv();
        [re(1.0), z + zi, (z - zi) / 2.0, (z * z - zi * zi) / 2.0]
    }

    pub fn bases(&self) -> [Complex64; 4] {
        Self::bases_at(self.zeta)
    }

    /// Images of the bases under `sigma`.
    pub fn sigma_bases(&self) -> [Complex64; 4] {
        let mut b = Self::bases_at(self.zeta.powi(self.sigma_power));
        if self.sigma_conjugate {
            for x in &mut b {
                *x = x.conj();
            }
        }
        b
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zeta.norm() - 1.0).abs().lt(&1e-12) {
            return Err(Error::InvalidParams(format!("|zeta| = {} != 1", self.zeta.norm())));
        }
        if !self.r.is_finite() || self.r.norm() == 0.0 {
            return Err(Error::InvalidParams("r must be finite and nonzero".into()));
        }
        for (what, bases) in [("basis", self.bases()), ("sigma image", self.sigma_bases())] {
            for (k, u) in bases.iter().enumerate() {
                if !u.is_finite() || u.norm() < 1e-9 {
                    return Err(Error::InvalidParams(format!("{what} u{} vanishes", k + 1)));
                }
            }
        }
        Ok(())
    }
}

/// Spatial multiplexing over `n_tx` antennas in a single slot.
pub fn build_vblast(n_tx: usize) -> Result<LinearStbc> {
    if n_tx == 0 {
        return Err(Error::InvalidArgument("V-BLAST needs n_tx >= 1".into()));
    }
    let mut weights = Vec::with_capacity(2 * n_tx);
    for j in 0..n_tx {
        for v in [re(1.0), I] {
            let mut g = ComplexGrid::zeros(n_tx, 1);
            g[(j, 0)] = v;
            weights.push(g);
        }
    }
    LinearStbc::new_exempt(format!("vblast{n_tx}"), n_tx, 1, weights)
}

/// `[[s1, -s2*], [s2, s1*]]`.
pub fn build_alamouti() -> LinearStbc {
    let g = |e: [Complex64; 4]| ComplexGrid::from_rows(2, 2, e.to_vec()).expect("2x2");
    let z = re(0.0);
    let weights = vec![
        g([re(1.0), z, z, re(1.0)]),
        g([I, z, z, -I]),
        g([z, re(-1.0), re(1.0), z]),
        g([z, I, I, z]),
    ];
    LinearStbc::new("alamouti", 2, 2, weights).expect("valid alamouti")
}

/// `(1/sqrt5) [[a(a+b th), a(c+d th)], [g ab (c+d thb), ab (a+b thb)]]` over
/// the reals `a_I, a_Q, b_I, b_Q, c_I, c_Q, d_I, d_Q`.
pub fn build_golden(p: &GoldenParams) -> LinearStbc {
    let k = 1.0 / 5f64.sqrt();
    let mut weights = Vec::with_capacity(8);
    // a, b on the diagonal; c, d on the anti-diagonal.
    for (diag, mult, mult_bar) in [
        (true, 1.0, 1.0),
        (true, p.theta, p.theta_bar),
        (false, 1.0, 1.0),
        (false, p.theta, p.theta_bar),
    ] {
        for unit in [re(1.0), I] {
            let mut g = ComplexGrid::zeros(2, 2);
            if diag {
                g[(0, 0)] = p.alpha * mult * unit * k;
                g[(1, 1)] = p.alpha_bar * mult_bar * unit * k;
            } else {
                g[(0, 1)] = p.alpha * mult * unit * k;
                g[(1, 0)] = p.gamma * p.alpha_bar * mult_bar * unit * k;
            }
            weights.push(g);
        }
    }
    LinearStbc::new("golden", 2, 2, weights).expect("valid golden code")
}

#[derive(Clone, Copy)]
enum Part {
    I,
    Q,
}

/// `coef * s_{sym,part}` placed at `cell`; `sym` is 1-based.
struct Term {
    cell: (usize, usize),
    coef: Complex64,
    sym: usize,
    part: Part,
}

fn term(r: usize, c: usize, coef: Complex64, sym: usize, part: Part) -> Term {
    Term {
        cell: (r, c),
        coef,
        sym,
        part,
    }
}

/// Weight matrices over `x_kI, x_kQ` for a template written in the rotated
/// coordinates `s_kI = x_kI cos t - x_kQ sin t`, `s_kQ = x_kI sin t + x_kQ cos t`.
fn rotated_template_weights(n: usize, n_sym: usize, rotation: f64, terms: &[Term]) -> Vec<ComplexGrid> {
    let (sin, cos) = rotation.sin_cos();
    let mut weights = vec![ComplexGrid::zeros(n, n); 2 * n_sym];
    for t in terms {
        let (di, dq) = match t.part {
            Part::I => (cos, -sin),
            Part::Q => (sin, cos),
        };
        let base = 2 * (t.sym - 1);
        weights[base][t.cell] += t.coef * di;
        weights[base + 1][t.cell] += t.coef * dq;
    }
    weights
}

/// `[[s1I + i s2Q, w(s3I + i s4Q)], [w(s4I + i s3Q), s2I + i s1Q]]`, `w = sqrt(i)`.
pub fn build_sr2x2(p: &SrParams) -> LinearStbc {
    use Part::{I as SI, Q as SQ};
    let one = re(1.0);
    let w = p.sqrt_i;
    let terms = [
        term(0, 0, one, 1, SI),
        term(0, 0, I, 2, SQ),
        term(1, 1, one, 2, SI),
        term(1, 1, I, 1, SQ),
        term(0, 1, w, 3, SI),
        term(0, 1, I * w, 4, SQ),
        term(1, 0, w, 4, SI),
        term(1, 0, I * w, 3, SQ),
    ];
    let weights = rotated_template_weights(2, 4, p.rotation, &terms);
    LinearStbc::new("sr2x2", 2, 2, weights).expect("valid sr2x2")
}

/// Diagonal 2x2 blocks of the 4x2 Srinath-Rajan code (a 4-antenna CIOD).
fn ciod_block_terms() -> Vec<Term> {
    use Part::{I as SI, Q as SQ};
    let one = re(1.0);
    vec![
        term(0, 0, one, 1, SI),
        term(0, 0, I, 3, SQ),
        term(0, 1, -one, 2, SI),
        term(0, 1, I, 4, SQ),
        term(1, 0, one, 2, SI),
        term(1, 0, I, 4, SQ),
        term(1, 1, one, 1, SI),
        term(1, 1, -I, 3, SQ),
        term(2, 2, one, 3, SI),
        term(2, 2, I, 1, SQ),
        term(2, 3, -one, 4, SI),
        term(2, 3, I, 2, SQ),
        term(3, 2, one, 4, SI),
        term(3, 2, I, 2, SQ),
        term(3, 3, one, 3, SI),
        term(3, 3, -I, 1, SQ),
    ]
}

/// Four-antenna CIOD: the diagonal blocks of the 4x2 Srinath-Rajan code.
pub fn build_ciod4(p: &SrParams) -> LinearStbc {
    let weights = rotated_template_weights(4, 4, p.rotation, &ciod_block_terms());
    LinearStbc::new("ciod4", 4, 4, weights).expect("valid ciod4")
}

/// 4x2 Srinath-Rajan code: CIOD blocks on the diagonal carrying `s1..s4`,
/// `sqrt(i)`-scaled CIOD blocks off the diagonal carrying `s5..s8`.
pub fn build_sr4x2(p: &SrParams) -> LinearStbc {
    use Part::{I as SI, Q as SQ};
    let w = p.sqrt_i;
    let iw = I * w;
    let mut terms = ciod_block_terms();
    terms.extend([
        term(0, 2, w, 5, SI),
        term(0, 2, iw, 7, SQ),
        term(0, 3, -w, 6, SI),
        term(0, 3, iw, 8, SQ),
        term(1, 2, w, 6, SI),
        term(1, 2, iw, 8, SQ),
        term(1, 3, w, 5, SI),
        term(1, 3, -iw, 7, SQ),
        term(2, 0, w, 7, SI),
        term(2, 0, iw, 5, SQ),
        term(2, 1, -w, 8, SI),
        term(2, 1, iw, 6, SQ),
        term(3, 0, w, 8, SI),
        term(3, 0, iw, 6, SQ),
        term(3, 1, w, 7, SI),
        term(3, 1, -iw, 5, SQ),
    ]);
    let weights = rotated_template_weights(4, 8, p.rotation, &terms);
    LinearStbc::new("sr4x2", 4, 4, weights).expect("valid sr4x2")
}

/// Symbol slot inside an Alamouti-patterned block: complex symbol index
/// (0-based) and whether the automorphism is applied.
#[derive(Clone, Copy)]
struct BlockSym {
    sym: usize,
    sigma: bool,
}

/// Fast-decodable 4x2 code made of four Alamouti-patterned 2x2 blocks
/// `[[ca a, -cb b*], [cb b, ca a*]]`: `(s1, s2)` and `(sigma s1, sigma s2)`
/// on the diagonal, `(sigma s4, sigma s3)` and `(s3, s4)` off it.
pub fn build_fast4x2(p: &Fast4x2Params) -> Result<LinearStbc> {
    p.validate()?;
    let bases = p.bases();
    let sigma_bases = p.sigma_bases();
    let r = p.r;
    let blocks = [
        (
            (0, 0),
            BlockSym { sym: 0, sigma: false },
            re(1.0),
            BlockSym { sym: 1, sigma: false },
            r.powi(2),
        ),
        (
            (2, 2),
            BlockSym { sym: 0, sigma: true },
            re(1.0),
            BlockSym { sym: 1, sigma: true },
            r.powi(2),
        ),
        (
            (0, 2),
            BlockSym { sym: 3, sigma: true },
            -r.powi(3),
            BlockSym { sym: 2, sigma: true },
            r,
        ),
        (
            (2, 0),
            BlockSym { sym: 2, sigma: false },
            r,
            BlockSym { sym: 3, sigma: false },
            r.powi(3),
        ),
    ];
    let mut weights = vec![ComplexGrid::zeros(4, 4); 16];
    for ((r0, c0), a, ca, b, cb) in blocks {
        for k in 0..4 {
            let ua = if a.sigma { sigma_bases[k] } else { bases[k] };
            let ub = if b.sigma { sigma_bases[k] } else { bases[k] };
            let wa = &mut weights[4 * a.sym + k];
            wa[(r0, c0)] += ca * ua;
            wa[(r0 + 1, c0 + 1)] += ca * ua.conj();
            let wb = &mut weights[4 * b.sym + k];
            wb[(r0, c0 + 1)] += -cb * ub.conj();
            wb[(r0 + 1, c0)] += cb * ub;
        }
    }
    LinearStbc::new("fast4x2", 4, 4, weights)
}

/// Merges equal-support classes that occupy the same set of `block x block`
/// tiles. For the 4x2 codes with `block = 2` this yields one pulse for the
/// diagonal blocks and one for the off-diagonal blocks.
pub fn block_partition(p: &CsrPartition, block: usize) -> Result<CsrPartition> {
    if block == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let mut by_tiles: BTreeMap<Vec<(usize, usize)>, Vec<usize>> = BTreeMap::new();
    for (g, group) in p.groups().iter().enumerate() {
        let mut tiles: Vec<(usize, usize)> = group.support().cells().map(|(r, c)| (r / block, c / block)).collect();
        tiles.sort_unstable();
        tiles.dedup();
        by_tiles.entry(tiles).or_default().push(g);
    }
    let spec: Vec<Vec<usize>> = by_tiles.into_values().collect();
    coarsen(p, &spec)
}

/// A named code with its default receive-antenna count.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub default_n_rx: usize,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "vblast4",
        description: "V-BLAST spatial multiplexing, 4 Tx, single slot",
        default_n_rx: 4,
    },
    CatalogEntry {
        name: "alamouti",
        description: "Alamouti orthogonal design, 2 Tx",
        default_n_rx: 1,
    },
    CatalogEntry {
        name: "golden",
        description: "Golden code, 2x2",
        default_n_rx: 2,
    },
    CatalogEntry {
        name: "sr2x2",
        description: "Srinath-Rajan 2x2 code",
        default_n_rx: 2,
    },
    CatalogEntry {
        name: "sr4x2",
        description: "Srinath-Rajan 4x2 code",
        default_n_rx: 2,
    },
    CatalogEntry {
        name: "fast4x2",
        description: "fast-decodable 4x2 code (structure-verified constants)",
        default_n_rx: 2,
    },
    CatalogEntry {
        name: "ciod4",
        description: "coordinate-interleaved orthogonal design, 4 Tx",
        default_n_rx: 1,
    },
];

pub fn entry(name: &str) -> Result<&'static CatalogEntry> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown code {name:?}")))
}

/// Builds a catalog code with default parameters. `vblast<N>` is accepted for
/// any `N >= 1`.
pub fn build(name: &str) -> Result<LinearStbc> {
    match name {
        "alamouti" => Ok(build_alamouti()),
        "golden" => Ok(build_golden(&GoldenParams::default())),
        "sr2x2" => Ok(build_sr2x2(&SrParams::default())),
        "sr4x2" => Ok(build_sr4x2(&SrParams::default())),
        "fast4x2" => build_fast4x2(&Fast4x2Params::default()),
        "ciod4" => Ok(build_ciod4(&SrParams::default())),
        _ => match name.strip_prefix("vblast").and_then(|n| n.parse().ok()) {
            Some(n) => build_vblast(n),
            None => Err(Error::InvalidArgument(format!("unknown code {name:?}"))),
        },
    }
}

/// Default receive antennas for a code name (`vblast<N>` gets `N`).
pub fn default_n_rx(name: &str) -> usize {
    entry(name)
        .map(|e| e.default_n_rx)
        .ok()
        .or_else(|| name.strip_prefix("vblast").and_then(|n| n.parse().ok()))
        .unwrap_or(2)
}
