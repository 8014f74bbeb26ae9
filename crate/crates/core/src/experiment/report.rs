//! Text report of a code's partition structure.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::catalog::block_partition;
use crate::constellation::Dim;
use crate::decode::{intra_structures, Strategy};
use crate::error::Result;
use crate::stbc::{
    pulse_assignable_partition, quasi_orthogonal_pair, CsrPartition, IntraGroupStructure, LinearStbc, SupportSet,
    QO_TOL,
};

use super::{decoding_partition, load_code};

/// `diag` if every cell is on the main diagonal, `offdiag` if none is,
/// `mixed` otherwise.
pub fn support_label(s: &SupportSet) -> &'static str {
    let on = s.cells().filter(|(r, c)| r == c).count();
    if on == s.len() {
        "diag"
    } else if on == 0 {
        "offdiag"
    } else {
        "mixed"
    }
}

fn one_based(set: &[usize]) -> String {
    let items: Vec<String> = set.iter().map(|k| (k + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Sum of `coef * M^(halves/2)` terms, largest power first.
fn polynomial(halves: impl IntoIterator<Item = usize>) -> String {
    let mut terms: BTreeMap<usize, usize> = BTreeMap::new();
    for h in halves {
        *terms.entry(h).or_default() += 1;
    }
    let parts: Vec<String> = terms
        .iter()
        .rev()
        .map(|(&h, &c)| {
            let power = match h {
                0 => String::new(),
                1 => "sqrt(M)".into(),
                2 => "M".into(),
                h if h % 2 == 0 => format!("M^{}", h / 2),
                h => format!("M^{}.5", h / 2),
            };
            match (c, power.is_empty()) {
                (c, true) => c.to_string(),
                (1, false) => power,
                (c, false) => format!("{c}*{power}"),
            }
        })
        .collect();
    parts.join(" + ")
}

/// Metric-evaluation count of each strategy for square M-QAM, as a
/// polynomial in `M`. Strategies that do not apply are omitted.
pub fn complexity_summary(
    code: &LinearStbc,
    p: &CsrPartition,
    intra: &[IntraGroupStructure],
) -> Result<Vec<(Strategy, String)>> {
    let mut out = vec![
        (Strategy::Joint, polynomial([code.k()])),
        (Strategy::Group, polynomial(p.sizes())),
        (
            Strategy::Subgroup,
            polynomial(intra.iter().flat_map(|st| st.subgroups().iter().map(Vec::len))),
        ),
    ];
    let mut iq = Vec::new();
    let mut iq_ok = true;
    for g in p.groups() {
        let (i_set, q_set): (Vec<usize>, Vec<usize>) =
            g.members().iter().partition(|&&k| Dim::of_real_symbol(k) == Dim::I);
        for &a in &i_set {
            for &b in &q_set {
                iq_ok &= quasi_orthogonal_pair(code.weight(a), code.weight(b), QO_TOL)?;
            }
        }
        iq.extend([i_set.len(), q_set.len()].into_iter().filter(|&n| n > 0));
    }
    if iq_ok {
        out.push((Strategy::Iq, polynomial(iq)));
    }
    out.push((
        Strategy::QrHardlimit,
        polynomial(
            intra
                .iter()
                .flat_map(|st| st.subgroups().iter().map(|s| usize::from(s.len() >= 2))),
        ),
    ));
    Ok(out)
}

/// Human-readable partition report for a catalog name or code file.
pub fn report_partition(name_or_path: &str) -> Result<String> {
    let code = load_code(name_or_path)?;
    let p = decoding_partition(&code);
    let intra = intra_structures(&code, &p)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "code {}: Nt={} T={} K={}",
        code.name(),
        code.n_tx(),
        code.n_slots(),
        code.k()
    );
    let groups: Vec<String> = p
        .groups()
        .iter()
        .map(|g| format!("{}{} g={}", support_label(g.support()), g.support(), g.size()))
        .collect();
    let _ = writeln!(s, "P={}; groups: {}", p.len(), groups.join(", "));
    for (g, st) in intra.iter().enumerate() {
        let subs: Vec<String> = st.subgroups().iter().map(|x| one_based(x)).collect();
        let _ = writeln!(
            s,
            "group {} symbols {}: Q={} subgroups {}",
            g + 1,
            one_based(p.groups()[g].members()),
            st.q_count(),
            subs.join(" ")
        );
    }
    let pa = pulse_assignable_partition(&p);
    if pa.len() != p.len() {
        let _ = writeln!(s, "disjoint-support merge: P={} g={:?}", pa.len(), pa.sizes());
    }
    if code.n_tx() > 2 && code.n_tx() % 2 == 0 && code.n_slots() % 2 == 0 {
        let b = block_partition(&p, 2)?;
        if b.len() != p.len() {
            let _ = writeln!(s, "2x2 block merge: P={} g={:?}", b.len(), b.sizes());
        }
    }
    let summary: Vec<String> = complexity_summary(&code, &p, &intra)?
        .into_iter()
        .map(|(st, f)| format!("{st} {f}"))
        .collect();
    let _ = writeln!(s, "metric evaluations (M-QAM): {}", summary.join("; "));
    Ok(s)
}
