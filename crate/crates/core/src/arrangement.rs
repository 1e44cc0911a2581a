//! The family of parallelly transported hyperplane arrangements and its
//! matroid-level combinatorics: independence, circuits, discriminant,
//! Euler characteristic, dense edges and unbalancedness.
//!
//! Everything here is exact rational; no floating point enters.

use crate::linalg::QMat;
use crate::rational::CQ;
use serde::Deserialize;
use std::collections::{BTreeSet, HashSet};
use std::ops::Mul;

#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("zero linear form at column {0}")]
    ZeroColumn(usize),
    #[error("coefficient matrix has rank {rank} < k = {k}")]
    RankDeficient { rank: usize, k: usize },
    #[error("weight a_{0} is zero")]
    ZeroWeight(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// The coefficient data of the family A(x): columns of `b` are the linear
/// forms g_j on C^k.
#[derive(Clone, Debug)]
pub struct ArrangementFamily {
    pub k: usize,
    pub n: usize,
    pub b: QMat,
    pub labels: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct WeightVector {
    pub a: Vec<CQ>,
}

impl WeightVector {
    pub fn new(a: Vec<CQ>) -> Result<Self, FamilyError> {
        for (j, w) in a.iter().enumerate() {
            if w.is_zero() {
                return Err(FamilyError::ZeroWeight(j + 1));
            }
        }
        Ok(WeightVector { a })
    }

    /// a_infinity = -sum(a_j), the weight of the hyperplane at infinity.
    pub fn a_infinity(&self) -> CQ {
        let mut s = CQ::zero();
        for w in &self.a {
            s += w;
        }
        -s
    }

    pub fn all_positive(&self) -> bool {
        self.a.iter().all(|w| w.is_positive_real())
    }
}

#[derive(Clone, Debug)]
pub struct FiberPoint {
    pub x: Vec<CQ>,
}

/// A minimal dependent subset of the columns of B with its normalized
/// relation coefficients: lambda has length n, is zero off the circuit,
/// and its first nonzero entry equals one.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub members: Vec<usize>,
    pub lambda: Vec<CQ>,
}

impl Circuit {
    /// f_C(x) = sum_j lambda_j x_j, the linear form cutting H_C in the base.
    pub fn f_c(&self, x: &[CQ]) -> CQ {
        let mut s = CQ::zero();
        for &j in &self.members {
            let term = &self.lambda[j] * &x[j];
            s += &term;
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DiscriminantMembership {
    Off,
    On { violating: Vec<usize> },
}

/// An edge of the projectivized arrangement with its localized weight.
#[derive(Clone, Debug)]
pub struct DenseEdge {
    /// Hyperplane indices containing the edge; `usize::MAX` stands for
    /// the hyperplane at infinity.
    pub members: Vec<usize>,
    pub weight: CQ,
}

pub const INFINITY_INDEX: usize = usize::MAX;

impl ArrangementFamily {
    pub fn new(
        k: usize,
        n: usize,
        b: QMat,
        labels: Option<Vec<String>>,
    ) -> Result<Self, FamilyError> {
        if k == 0 || n <= k {
            return Err(FamilyError::Dimension(format!(
                "need 0 < k < n, got k={k}, n={n}"
            )));
        }
        if b.rows != k || b.cols != n {
            return Err(FamilyError::Dimension(format!(
                "B must be {k}x{n}, got {}x{}",
                b.rows, b.cols
            )));
        }
        for j in 0..n {
            if (0..k).all(|i| b[(i, j)].is_zero()) {
                return Err(FamilyError::ZeroColumn(j + 1));
            }
        }
        let rank = b.rank();
        if rank < k {
            return Err(FamilyError::RankDeficient { rank, k });
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(FamilyError::Dimension("labels length != n".into()));
            }
        }
        Ok(ArrangementFamily { k, n, b, labels })
    }

    fn submatrix_cols(&self, cols: &[usize]) -> QMat {
        let mut m = QMat::zeros(self.k, cols.len());
        for (jj, &j) in cols.iter().enumerate() {
            for i in 0..self.k {
                m[(i, jj)] = self.b[(i, j)].clone();
            }
        }
        m
    }

    pub fn is_independent(&self, cols: &[usize]) -> bool {
        cols.len() <= self.k && self.submatrix_cols(cols).rank() == cols.len()
    }

    /// All independent p-subsets of columns, in lexicographic order.
    pub fn independent_subsets(&self, p: usize) -> Result<Vec<Vec<usize>>, FamilyError> {
        if p > self.k {
            return Err(FamilyError::Dimension(format!(
                "degree p={p} out of range 0..={}",
                self.k
            )));
        }
        Ok(subsets_lex(self.n, p)
            .into_iter()
            .filter(|s| self.is_independent(s))
            .collect())
    }

    /// All circuits of the column matroid, ordered lexicographically by
    /// member list.
    pub fn circuits(&self) -> Vec<Circuit> {
        let mut found: Vec<Circuit> = Vec::new();
        for size in 2..=(self.k + 1).min(self.n) {
            for s in subsets_lex(self.n, size) {
                if found.iter().any(|c| is_subset(&c.members, &s)) {
                    continue;
                }
                let sub = self.submatrix_cols(&s);
                let ns = sub.nullspace();
                if ns.is_empty() {
                    continue;
                }
                // Minimality: a circuit has a one-dimensional relation space
                // with all coordinates nonzero.
                if ns.len() > 1 || ns[0].iter().any(|c| c.is_zero()) {
                    continue;
                }
                let mut lambda = vec![CQ::zero(); self.n];
                let first = ns[0][0].inv();
                for (pos, &j) in s.iter().enumerate() {
                    lambda[j] = (&ns[0][pos]).mul(&first);
                }
                found.push(Circuit { members: s, lambda });
            }
        }
        found.sort_by(|a, b| a.members.cmp(&b.members));
        found
    }

    /// Exact test of x against the discriminant.
    pub fn discriminant_membership(&self, x: &FiberPoint) -> DiscriminantMembership {
        let circuits = self.circuits();
        self.discriminant_membership_with(&circuits, x)
    }

    pub fn discriminant_membership_with(
        &self,
        circuits: &[Circuit],
        x: &FiberPoint,
    ) -> DiscriminantMembership {
        let violating: Vec<usize> = circuits
            .iter()
            .enumerate()
            .filter(|(_, c)| c.f_c(&x.x).is_zero())
            .map(|(i, _)| i)
            .collect();
        if violating.is_empty() {
            DiscriminantMembership::Off
        } else {
            DiscriminantMembership::On { violating }
        }
    }

    /// chi(U(A(x))) for x off the discriminant, via the signed count of
    /// independent subsets.
    pub fn euler_characteristic(&self) -> i64 {
        let mut chi: i64 = 0;
        let mut sign = 1i64;
        for p in 0..=self.k {
            chi += sign * self.independent_subsets(p).unwrap().len() as i64;
            sign = -sign;
        }
        chi
    }

    pub fn abs_chi(&self) -> usize {
        self.euler_characteristic().unsigned_abs() as usize
    }

    /// Unbalancedness of the weighted arrangement: no dense edge of the
    /// projective closure has weight zero. Returns the verdict and the
    /// dense edges examined (empty when the positivity shortcut applies).
    pub fn is_unbalanced(
        &self,
        a: &WeightVector,
        x: &FiberPoint,
        edge_cap: usize,
    ) -> Result<(bool, Vec<DenseEdge>), FamilyError> {
        if a.all_positive() {
            return Ok((true, Vec::new()));
        }
        if self.n > edge_cap {
            return Err(FamilyError::Dimension(format!(
                "edge enumeration capped at n <= {edge_cap}; only the positivity shortcut is available"
            )));
        }
        // Projectivized normals in C^{k+1}: (b_j, x_j) for finite j, plus
        // the hyperplane at infinity (0,...,0,1).
        let mut normals: Vec<Vec<CQ>> = Vec::with_capacity(self.n + 1);
        for j in 0..self.n {
            let mut v: Vec<CQ> = (0..self.k).map(|i| self.b[(i, j)].clone()).collect();
            v.push(x.x[j].clone());
            normals.push(v);
        }
        let mut inf = vec![CQ::zero(); self.k];
        inf.push(CQ::one());
        normals.push(inf);
        let m = normals.len();
        let rank_of = |s: &[usize]| -> usize {
            QMat::from_rows(s.iter().map(|&j| normals[j].clone()).collect()).rank()
        };
        // Flats of rank <= k are the edges of the projective arrangement.
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut dense = Vec::new();
        for r in 1..=self.k {
            for s in subsets_lex(m, r) {
                if rank_of(&s) != r {
                    continue;
                }
                let closure: Vec<usize> = (0..m)
                    .filter(|&j| {
                        let mut t = s.clone();
                        if !t.contains(&j) {
                            t.push(j);
                        }
                        rank_of(&t) == r
                    })
                    .collect();
                if !seen.insert(closure.clone()) {
                    continue;
                }
                if !localization_connected(&normals, &closure) {
                    continue;
                }
                let mut weight = CQ::zero();
                for &j in &closure {
                    if j == self.n {
                        weight += &a.a_infinity();
                    } else {
                        weight += &a.a[j];
                    }
                }
                let members = closure
                    .iter()
                    .map(|&j| if j == self.n { INFINITY_INDEX } else { j })
                    .collect();
                dense.push(DenseEdge { members, weight });
            }
        }
        let ok = dense.iter().all(|e| !e.weight.is_zero());
        Ok((ok, dense))
    }
}

/// Connectivity of the matroid restricted to `subset`: every pair of
/// elements must lie on a common circuit of the localization. Singletons
/// (single hyperplanes) count as dense.
fn localization_connected(normals: &[Vec<CQ>], subset: &[usize]) -> bool {
    let m = subset.len();
    if m == 1 {
        return true;
    }
    let rank_of = |s: &BTreeSet<usize>| -> usize {
        QMat::from_rows(s.iter().map(|&j| normals[subset[j]].clone()).collect()).rank()
    };
    let full: BTreeSet<usize> = (0..m).collect();
    let local_rank = rank_of(&full);
    // Union-find over elements joined by circuits.
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for size in 2..=(local_rank + 1).min(m) {
        for s in subsets_lex(m, size) {
            let set: BTreeSet<usize> = s.iter().copied().collect();
            if rank_of(&set) < size {
                // Dependent; minimality is irrelevant for connectivity,
                // any dependent set is a union of circuits on its support.
                let all_proper_indep = s.iter().all(|&drop| {
                    let sub: BTreeSet<usize> =
                        s.iter().copied().filter(|&e| e != drop).collect();
                    rank_of(&sub) == sub.len()
                });
                if all_proper_indep {
                    let r0 = find(&mut parent, s[0]);
                    for &e in &s[1..] {
                        let re = find(&mut parent, e);
                        parent[re] = r0;
                    }
                }
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..m).all(|i| find(&mut parent, i) == root)
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|e| big.contains(e))
}

/// All p-subsets of {0,..,n-1} in lexicographic order.
pub fn subsets_lex(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if p > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..p).collect();
    loop {
        out.push(cur.clone());
        // Advance to the next combination.
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - p {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..p {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Input document
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(untagged)]
enum RatLit {
    Int(i64),
    Str(String),
}

impl RatLit {
    fn to_cq(&self) -> Result<CQ, FamilyError> {
        match self {
            RatLit::Int(n) => Ok(CQ::from_int(*n)),
            RatLit::Str(s) => CQ::parse_rational(s).map_err(FamilyError::Parse),
        }
    }
}

#[derive(Deserialize)]
struct InputDoc {
    k: usize,
    n: usize,
    #[serde(rename = "B")]
    b: Vec<Vec<RatLit>>,
    weights: Vec<RatLit>,
    x: Vec<RatLit>,
    labels: Option<Vec<String>>,
}

/// Parse and validate the JSON input document.
pub fn load_family(
    document: &str,
) -> Result<(ArrangementFamily, WeightVector, FiberPoint), FamilyError> {
    let doc: InputDoc =
        serde_json::from_str(document).map_err(|e| FamilyError::Parse(e.to_string()))?;
    if doc.b.len() != doc.k {
        return Err(FamilyError::Dimension(format!(
            "B has {} rows, expected k = {}",
            doc.b.len(),
            doc.k
        )));
    }
    let mut rows = Vec::with_capacity(doc.k);
    for row in &doc.b {
        if row.len() != doc.n {
            return Err(FamilyError::Dimension(format!(
                "B row has {} entries, expected n = {}",
                row.len(),
                doc.n
            )));
        }
        rows.push(row.iter().map(|r| r.to_cq()).collect::<Result<Vec<_>, _>>()?);
    }
    if doc.weights.len() != doc.n {
        return Err(FamilyError::Dimension("weights length != n".into()));
    }
    if doc.x.len() != doc.n {
        return Err(FamilyError::Dimension("x length != n".into()));
    }
    let fam = ArrangementFamily::new(doc.k, doc.n, QMat::from_rows(rows), doc.labels)?;
    let a = WeightVector::new(
        doc.weights
            .iter()
            .map(|r| r.to_cq())
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    let x = FiberPoint {
        x: doc.x.iter().map(|r| r.to_cq()).collect::<Result<Vec<_>, _>>()?,
    };
    Ok((fam, a, x))
}
