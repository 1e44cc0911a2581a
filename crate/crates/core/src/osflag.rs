//! Standard bases of the Orlik-Solomon and flag spaces of a
//! normal-crossings fiber, the Aomoto and flag differentials, the
//! contravariant form, the singular subspace and its orthogonal
//! projection, and the marked flag elements.

use crate::arrangement::{ArrangementFamily, FamilyError, WeightVector};
use crate::linalg::QMat;
use crate::rational::{C64, CQ};
use std::collections::HashMap;

/// Standard basis of OS^p / F^p: independent p-subsets in lexicographic
/// order, with an index lookup.
#[derive(Clone)]
pub struct StdBasis {
    pub degree: usize,
    pub sets: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl StdBasis {
    pub fn new(fam: &ArrangementFamily, p: usize) -> Self {
        let sets = fam.independent_subsets(p).unwrap();
        let index = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        StdBasis {
            degree: p,
            sets,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.sets.len()
    }

    pub fn position(&self, set: &[usize]) -> Option<usize> {
        self.index.get(set).copied()
    }
}

/// Sort a tuple of indices; returns the sorted set and the sign of the
/// sorting permutation, or `None` when an index repeats.
pub fn sort_with_sign(tuple: &[usize]) -> Option<(Vec<usize>, i8)> {
    let mut v = tuple.to_vec();
    let mut sign = 1i8;
    // Insertion sort, counting transpositions.
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Matrix of multiplication by omega^(a) from OS^{p-1} to OS^p in the
/// standard bases, with the appending sign convention: the generator
/// indexed by S goes to sum_j a_j (H_S, H_j).
pub fn aomoto_differential(
    fam: &ArrangementFamily,
    a: &WeightVector,
    p: usize,
) -> Result<QMat, FamilyError> {
    if p == 0 || p > fam.k {
        return Err(FamilyError::Dimension(format!(
            "aomoto differential needs 1 <= p <= k, got p={p}"
        )));
    }
    let src = StdBasis::new(fam, p - 1);
    let dst = StdBasis::new(fam, p);
    let mut m = QMat::zeros(dst.dim(), src.dim());
    for (col, s) in src.sets.iter().enumerate() {
        for j in 0..fam.n {
            if s.contains(&j) {
                continue;
            }
            let mut tuple = s.clone();
            tuple.push(j);
            let (sorted, sign) = sort_with_sign(&tuple).unwrap();
            let Some(row) = dst.position(&sorted) else {
                continue; // dependent tuple vanishes in OS
            };
            let term = if sign > 0 {
                a.a[j].clone()
            } else {
                -&a.a[j]
            };
            m[(row, col)] += &term;
        }
    }
    Ok(m)
}

/// Integer matrix of the flag differential F^{k-1} -> F^k in the standard
/// bases: the flag through H_S is extended by every vertex below it.
pub fn flag_differential(fam: &ArrangementFamily) -> QMat {
    let src = StdBasis::new(fam, fam.k - 1);
    let dst = StdBasis::new(fam, fam.k);
    let mut m = QMat::zeros(dst.dim(), src.dim());
    for (col, s) in src.sets.iter().enumerate() {
        for j in 0..fam.n {
            if s.contains(&j) {
                continue;
            }
            let mut tuple = s.clone();
            tuple.push(j);
            let (sorted, sign) = sort_with_sign(&tuple).unwrap();
            let Some(row) = dst.position(&sorted) else {
                continue;
            };
            m[(row, col)] += &CQ::from_int(sign as i64);
        }
    }
    m
}

/// Diagonal entries of the contravariant form on F^p: products of the
/// weights over each independent p-subset.
pub fn contravariant_gram(fam: &ArrangementFamily, a: &WeightVector, p: usize) -> Vec<CQ> {
    let basis = StdBasis::new(fam, p);
    basis
        .sets
        .iter()
        .map(|s| {
            let mut prod = CQ::one();
            for &j in s {
                prod *= &a.a[j];
            }
            prod
        })
        .collect()
}

/// S^(a)(v, w) for coordinate vectors in the top standard basis.
pub fn contravariant_pairing(diag: &[CQ], v: &[CQ], w: &[CQ]) -> CQ {
    let mut s = CQ::zero();
    for ((d, a), b) in diag.iter().zip(v).zip(w) {
        let t = &(d * a) * b;
        s += &t;
    }
    s
}

pub fn contravariant_pairing_c64(diag: &[C64], v: &[C64], w: &[C64]) -> C64 {
    diag.iter()
        .zip(v)
        .zip(w)
        .map(|((d, a), b)| d * a * b)
        .sum()
}

pub struct SingularSubspace {
    /// Columns are the basis vectors, coordinates in the standard basis
    /// of F^k.
    pub basis: QMat,
    /// Gram matrix of the contravariant form on that basis.
    pub gram: QMat,
    pub diag: Vec<CQ>,
}

impl SingularSubspace {
    pub fn dim(&self) -> usize {
        self.basis.cols
    }
}

/// Sing_a F^k as the exact annihilator of the image of the top Aomoto
/// differential. Errors if the dimension disagrees with |chi|.
pub fn singular_subspace(
    fam: &ArrangementFamily,
    a: &WeightVector,
) -> Result<SingularSubspace, FamilyError> {
    let d_top = aomoto_differential(fam, a, fam.k)?;
    // F in Sing iff sum_T d_top[T,S] F_T = 0 for every column S.
    let null = d_top.transpose().nullspace();
    let expected = fam.abs_chi();
    if null.len() != expected {
        return Err(FamilyError::Dimension(format!(
            "dim Sing = {} but |chi| = {expected}",
            null.len()
        )));
    }
    let dim_f = StdBasis::new(fam, fam.k).dim();
    let mut basis = QMat::zeros(dim_f, null.len());
    for (c, v) in null.iter().enumerate() {
        for (r, val) in v.iter().enumerate() {
            basis[(r, c)] = val.clone();
        }
    }
    let diag = contravariant_gram(fam, a, fam.k);
    let mut gram = QMat::zeros(null.len(), null.len());
    for i in 0..null.len() {
        for j in 0..null.len() {
            gram[(i, j)] = contravariant_pairing(&diag, &basis.column(i), &basis.column(j));
        }
    }
    Ok(SingularSubspace { basis, gram, diag })
}

/// Orthogonal projection of a flag vector onto Sing with respect to the
/// contravariant form, by an exact Gram solve.
pub fn orthogonal_projection(
    sing: &SingularSubspace,
    f: &[CQ],
) -> Result<Vec<CQ>, FamilyError> {
    let coords = sing_coordinates(sing, f)?;
    Ok(sing.basis.matvec(&coords))
}

/// Coordinates of the projection of `f` in the Sing basis.
pub fn sing_coordinates(sing: &SingularSubspace, f: &[CQ]) -> Result<Vec<CQ>, FamilyError> {
    let d = sing.dim();
    let mut rhs = QMat::zeros(d, 1);
    for i in 0..d {
        rhs[(i, 0)] = contravariant_pairing(&sing.diag, f, &sing.basis.column(i));
    }
    let sol = sing
        .gram
        .solve(&rhs)
        .ok_or_else(|| FamilyError::Dimension("singular gram matrix".into()))?;
    Ok((0..d).map(|i| sol[(i, 0)].clone()).collect())
}

/// The marked elements v_{i_1..i_k}: orthogonal projections of the
/// standard basis vectors, indexed by independent k-subsets.
pub fn marked_flag_elements(
    fam: &ArrangementFamily,
    sing: &SingularSubspace,
) -> Result<Vec<(Vec<usize>, Vec<CQ>)>, FamilyError> {
    let basis = StdBasis::new(fam, fam.k);
    let mut out = Vec::with_capacity(basis.dim());
    for (i, set) in basis.sets.iter().enumerate() {
        let mut e = vec![CQ::zero(); basis.dim()];
        e[i] = CQ::one();
        out.push((set.clone(), orthogonal_projection(sing, &e)?));
    }
    verify_marked_relations(fam, &basis, &out)?;
    Ok(out)
}

/// Exact check of the relations sum_j v_{j,i_2..i_k} = 0 over all
/// independent (k-1)-subsets.
fn verify_marked_relations(
    fam: &ArrangementFamily,
    basis: &StdBasis,
    marked: &[(Vec<usize>, Vec<CQ>)],
) -> Result<(), FamilyError> {
    let lookup: HashMap<&[usize], &Vec<CQ>> = marked
        .iter()
        .map(|(s, v)| (s.as_slice(), v))
        .collect();
    for rest in fam.independent_subsets(fam.k - 1).unwrap() {
        let mut total = vec![CQ::zero(); basis.dim()];
        for j in 0..fam.n {
            let mut tuple = vec![j];
            tuple.extend_from_slice(&rest);
            let Some((sorted, sign)) = sort_with_sign(&tuple) else {
                continue;
            };
            let Some(v) = lookup.get(sorted.as_slice()) else {
                continue; // dependent: marked element is zero
            };
            for (t, val) in total.iter_mut().zip(v.iter()) {
                if sign > 0 {
                    *t += val;
                } else {
                    *t -= val;
                }
            }
        }
        if total.iter().any(|c| !c.is_zero()) {
            return Err(FamilyError::Dimension(format!(
                "marked relation violated at subset {rest:?}"
            )));
        }
    }
    Ok(())
}
