//! Independent reference computations shared by the integration tests. These
//! deliberately avoid the library's own partition and metric helpers.

#![allow(dead_code)]

use num_complex::Complex64;
use tops_stbc::{ComplexGrid, LinearStbc};

pub const CATALOG_NAMES: [&str; 7] = ["vblast4", "alamouti", "golden", "sr2x2", "sr4x2", "fast4x2", "ciod4"];

/// Nonzero cells of `m`, relative tolerance 1e-12 of its largest entry,
/// 0-based, row-major.
pub fn support_cells(m: &ComplexGrid) -> Vec<(usize, usize)> {
    let mut max = 0.0f64;
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            max = max.max(m[(r, c)].norm());
        }
    }
    let mut cells = Vec::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if m[(r, c)].norm() > 1e-12 * max {
                cells.push((r, c));
            }
        }
    }
    cells
}

/// Equal-support classes by pairwise comparison, each sorted, ordered by
/// smallest member.
pub fn support_classes(code: &LinearStbc) -> Vec<Vec<usize>> {
    let supports: Vec<Vec<(usize, usize)>> = code.weights().iter().map(|w| support_cells(w.grid())).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for k in 0..code.k() {
        for class in classes.iter_mut() {
            if supports[class[0]] == supports[k] {
                class.push(k);
                continue 'outer;
            }
        }
        classes.push(vec![k]);
    }
    classes
}

fn mul_adj(a: &ComplexGrid, b: &ComplexGrid) -> Vec<Complex64> {
    // a * b^H
    let (n, t) = (a.rows(), a.cols());
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..t {
                s += a[(i, k)] * b[(j, k)].conj();
            }
            out[i * n + j] = s;
        }
    }
    out
}

fn fro(m: &ComplexGrid) -> f64 {
    let mut s = 0.0;
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            s += m[(r, c)].norm_sqr();
        }
    }
    s.sqrt()
}

/// `A B^H + B A^H == 0` up to 1e-10 relative.
pub fn qo(a: &ComplexGrid, b: &ComplexGrid) -> bool {
    let ab = mul_adj(a, b);
    let ba = mul_adj(b, a);
    let norm: f64 = ab.iter().zip(&ba).map(|(x, y)| (x + y).norm_sqr()).sum::<f64>().sqrt();
    norm <= 1e-10 * fro(a) * fro(b)
}

/// Components of the "not quasi-orthogonal" graph on `members`, by
/// repeated flood fill.
pub fn qo_components(code: &LinearStbc, members: &[usize]) -> Vec<Vec<usize>> {
    let mut label: Vec<Option<usize>> = vec![None; members.len()];
    let mut comps = Vec::new();
    for start in 0..members.len() {
        if label[start].is_some() {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![start];
        label[start] = Some(id);
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(members[i]);
            for j in 0..members.len() {
                if label[j].is_none() && !qo(code.weight(members[i]).grid(), code.weight(members[j]).grid()) {
                    label[j] = Some(id);
                    stack.push(j);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Determinant of a small complex matrix by Gaussian elimination with
/// partial pivoting.
pub fn det(mut m: Vec<Vec<Complex64>>) -> Complex64 {
    let n = m.len();
    let mut d = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap())
            .unwrap();
        if m[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        d *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    d
}

/// `det(D D^H)` for a difference codeword `D`.
pub fn gram_det(d: &ComplexGrid) -> f64 {
    let n = d.rows();
    let g: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..d.cols()).map(|k| d[(i, k)] * d[(j, k)].conj()).sum())
                .collect()
        })
        .collect();
    det(g).re
}

/// All real symbol vectors of a separable constellation given its I and Q
/// level lists, first symbol slowest.
pub fn all_symbol_vectors(k: usize, i_levels: &[f64], q_levels: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for idx in 0..k {
        let levels = if idx % 2 == 0 { i_levels } else { q_levels };
        out = out
            .into_iter()
            .flat_map(|v| {
                levels.iter().map(move |&l| {
                    let mut w = v.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    out
}

/// Minimum `det(D D^H)` over all distinct codeword pairs.
pub fn brute_force_min_det(code: &LinearStbc, i_levels: &[f64], q_levels: &[f64]) -> f64 {
    let words: Vec<ComplexGrid> = all_symbol_vectors(code.k(), i_levels, q_levels)
        .iter()
        .map(|s| code.assemble_codeword(s).unwrap())
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            best = best.min(gram_det(&(&words[i] - &words[j])));
        }
    }
    best
}
