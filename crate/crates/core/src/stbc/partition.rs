//! Support sets, the common-support partition and what can be built on it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::ComplexGrid;

use super::{LinearStbc, WeightMatrix};

/// Relative tolerance for a weight-matrix entry to count as nonzero.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Relative tolerance for the quasi-orthogonality test.
pub const QO_TOL: f64 = 1e-10;

/// Set of (row, col) cells, 0-based, kept in row-major order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet {
    cells: BTreeSet<(usize, usize)>,
}

impl SupportSet {
    pub fn from_cells(cells: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            cells: cells.into_iter().collect(),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.cells.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: (usize, usize)) -> bool {
        self.cells.contains(&cell)
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.cells.is_disjoint(&other.cells)
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.cells.is_subset(&other.cells)
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        Self {
            cells: self.cells.union(&other.cells).copied().collect(),
        }
    }
}

/// Prints 1-based cells, e.g. `{(1,1),(2,2)}`.
impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (r, c)) in self.cells.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{})", r + 1, c + 1)?;
        }
        write!(f, "}}")
    }
}

/// Cells whose modulus exceeds `tol` (absolute).
pub fn support_set(m: &ComplexGrid, tol: f64) -> SupportSet {
    let mut cells = BTreeSet::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if m[(r, c)].norm() > tol {
                cells.insert((r, c));
            }
        }
    }
    SupportSet { cells }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    members: Vec<usize>,
    support: SupportSet,
}

impl Group {
    /// Member symbol indices, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    fn merged(groups: &[&Group]) -> Group {
        let mut members: Vec<usize> = groups.iter().flat_map(|g| g.members.iter().copied()).collect();
        members.sort_unstable();
        let support = groups
            .iter()
            .fold(SupportSet::default(), |acc, g| acc.union(&g.support));
        Group { members, support }
    }
}

/// Partition of the symbol indices into groups, ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPartition {
    groups: Vec<Group>,
}

impl CsrPartition {
    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> Result<&Group> {
        self.groups.get(g).ok_or(Error::UnknownGroup(g))
    }

    /// Number of groups `P`.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Group::size).collect()
    }

    /// Total number of symbols covered.
    pub fn symbol_count(&self) -> usize {
        self.groups.iter().map(Group::size).sum()
    }

    /// Group containing symbol `k`.
    pub fn group_of(&self, k: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.members.binary_search(&k).is_ok())
    }

    /// One group holding every symbol of `code`: conventional single-pulse
    /// transmission.
    pub fn single(code: &LinearStbc) -> Self {
        let support = code
            .weights()
            .iter()
            .fold(SupportSet::default(), |acc, w| acc.union(&w.support()));
        Self {
            groups: vec![Group {
                members: (0..code.k()).collect(),
                support,
            }],
        }
    }

    pub fn has_disjoint_supports(&self) -> bool {
        self.groups
            .iter()
            .enumerate()
            .all(|(i, a)| self.groups[i + 1..].iter().all(|b| a.support.is_disjoint(&b.support)))
    }

    fn from_groups(mut groups: Vec<Group>) -> Self {
        groups.sort_by_key(|g| g.members[0]);
        Self { groups }
    }
}

/// Classes of equal support among the weight matrices (relative tolerance).
pub fn csr_partition(code: &LinearStbc, rel_tol: f64) -> CsrPartition {
    let mut index: HashMap<SupportSet, usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();
    for w in code.weights() {
        let ss = support_set(w.grid(), rel_tol * w.grid().max_abs());
        match index.get(&ss) {
            Some(&g) => groups[g].members.push(w.symbol_index()),
            None => {
                index.insert(ss.clone(), groups.len());
                groups.push(Group {
                    members: vec![w.symbol_index()],
                    support: ss,
                });
            }
        }
    }
    // Symbols are visited in order, so groups already sit in canonical order.
    CsrPartition { groups }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }

    fn components(&mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

/// Merges groups with intersecting supports until all supports are pairwise
/// disjoint, so one pulse per group never shares a space-time cell.
pub fn pulse_assignable_partition(p: &CsrPartition) -> CsrPartition {
    if p.has_disjoint_supports() {
        return p.clone();
    }
    let n = p.groups.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if !p.groups[i].support.is_disjoint(&p.groups[j].support) {
                uf.union(i, j);
            }
        }
    }
    let groups = uf
        .components()
        .into_iter()
        .map(|comp| Group::merged(&comp.iter().map(|&i| &p.groups[i]).collect::<Vec<_>>()))
        .collect();
    CsrPartition::from_groups(groups)
}

/// Merges the listed group ids (0-based); unlisted groups stay as they are.
/// Every merged set must have pairwise disjoint supports.
pub fn coarsen(p: &CsrPartition, merge_spec: &[Vec<usize>]) -> Result<CsrPartition> {
    let mut used = vec![false; p.groups.len()];
    let mut groups = Vec::new();
    for set in merge_spec {
        if set.is_empty() {
            return Err(Error::InvalidMerge("empty merge set".into()));
        }
        let mut parts = Vec::with_capacity(set.len());
        for &g in set {
            let group = p.group(g)?;
            if std::mem::replace(&mut used[g], true) {
                return Err(Error::InvalidMerge(format!("group {} listed twice", g + 1)));
            }
            if let Some(other) = parts.iter().find(|o: &&&Group| !o.support.is_disjoint(&group.support)) {
                return Err(Error::InvalidMerge(format!(
                    "supports {} and {} intersect",
                    other.support, group.support
                )));
            }
            parts.push(group);
        }
        groups.push(Group::merged(&parts));
    }
    for (g, group) in p.groups.iter().enumerate() {
        if !used[g] {
            groups.push(group.clone());
        }
    }
    Ok(CsrPartition::from_groups(groups))
}

/// Sub-codeword `c * sum_{k in group g} s_k A_k`.
pub fn group_codeword(code: &LinearStbc, p: &CsrPartition, g: usize, s: &[f64]) -> Result<ComplexGrid> {
    let group = p.group(g)?;
    code.check_symbols(s)?;
    if let Some(&k) = group.members.iter().find(|&&k| k >= code.k()) {
        return Err(Error::PartitionMismatch(format!(
            "symbol {} outside code with K={}",
            k + 1,
            code.k()
        )));
    }
    Ok(code.partial_codeword(s, group.members.iter().copied()))
}

/// `||A B^H + B A^H||_F <= rel_tol * ||A||_F ||B||_F`.
pub fn quasi_orthogonal_pair(a: &WeightMatrix, b: &WeightMatrix, rel_tol: f64) -> Result<bool> {
    quasi_orthogonal_grids(a.grid(), b.grid(), rel_tol)
}

pub(crate) fn quasi_orthogonal_grids(a: &ComplexGrid, b: &ComplexGrid, rel_tol: f64) -> Result<bool> {
    if a.shape() != b.shape() {
        return Err(Error::dims(
            format!("{}x{}", a.rows(), a.cols()),
            format!("{}x{}", b.rows(), b.cols()),
        ));
    }
    let ab = a.matmul(&b.adjoint())?;
    let sum = &ab + &ab.adjoint();
    Ok(sum.frobenius() <= rel_tol * a.frobenius() * b.frobenius())
}

/// Quasi-orthogonal split of one group: subgroups of members such that every
/// cross-subgroup pair satisfies the quasi-orthogonality test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntraGroupStructure {
    parent_group: usize,
    subgroups: Vec<Vec<usize>>,
}

impl IntraGroupStructure {
    pub fn parent_group(&self) -> usize {
        self.parent_group
    }

    /// Subgroups of symbol indices, each ascending, ordered by first member.
    pub fn subgroups(&self) -> &[Vec<usize>] {
        &self.subgroups
    }

    /// Number of subgroups `Q`.
    pub fn q_count(&self) -> usize {
        self.subgroups.len()
    }
}

/// Finest split of group `g`: connected components of the graph whose edges
/// join members that are *not* quasi-orthogonal.
pub fn intra_group_structure(
    code: &LinearStbc,
    p: &CsrPartition,
    g: usize,
    rel_tol: f64,
) -> Result<IntraGroupStructure> {
    let members = p.group(g)?.members();
    let n = members.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (code.weight(members[i]), code.weight(members[j]));
            if !quasi_orthogonal_pair(a, b, rel_tol)? {
                uf.union(i, j);
            }
        }
    }
    let mut subgroups: Vec<Vec<usize>> = uf
        .components()
        .into_iter()
        .map(|c| c.into_iter().map(|i| members[i]).collect())
        .collect();
    subgroups.sort_by_key(|s: &Vec<usize>| s[0]);
    Ok(IntraGroupStructure {
        parent_group: g,
        subgroups,
    })
}
