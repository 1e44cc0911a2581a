//! The circuit operators L_C and the Gauss-Manin coefficient operators
//! K_j(x) on the top flag space, with their restrictions to the singular
//! subspace.

use crate::arrangement::{ArrangementFamily, Circuit, WeightVector};
use crate::linalg::{cmat_matmul, csolve, QMat};
use crate::osflag::{sort_with_sign, SingularSubspace, StdBasis};
use crate::rational::{C64, CQ};

#[derive(Debug, thiserror::Error)]
pub enum OperatorError {
    #[error("x lies on the discriminant: f_C(x) = 0 for circuit {0:?}")]
    OnDiscriminant(Vec<usize>),
    #[error("x too close to the discriminant: |f_C(x)| = {value:.3e} for circuit {circuit:?}")]
    NearDiscriminant { circuit: Vec<usize>, value: f64 },
    #[error("operator does not preserve the singular subspace")]
    NotPreserved,
    #[error("singular gram matrix")]
    SingularGram,
}

/// An assembled operator on F^k with an optional restriction to Sing.
pub struct OperatorMatrix {
    pub matrix: QMat,
    pub restricted: Option<QMat>,
    pub provenance: String,
}

/// Matrix of L_C in the standard basis of F^k, following the circuit-order
/// convention: basis tuples are rewritten as (circuit elements minus one,
/// then the remainder in increasing order) before the formula is read off.
pub fn l_c_matrix(fam: &ArrangementFamily, a: &WeightVector, circuit: &Circuit) -> QMat {
    let basis = StdBasis::new(fam, fam.k);
    let r = circuit.members.len();
    let mut mat = QMat::zeros(basis.dim(), basis.dim());
    for (col, set) in basis.sets.iter().enumerate() {
        let inter: Vec<usize> = set
            .iter()
            .copied()
            .filter(|j| circuit.members.contains(j))
            .collect();
        if inter.len() + 1 != r {
            continue; // |set ∩ C| = r is impossible: C is dependent
        }
        // The one circuit element absent from the basis tuple; m is its
        // 1-based position within the circuit.
        let (m_pos, &missing) = circuit
            .members
            .iter()
            .enumerate()
            .find(|(_, e)| !set.contains(e))
            .unwrap();
        let m = m_pos + 1;
        let tail: Vec<usize> = set
            .iter()
            .copied()
            .filter(|j| !circuit.members.contains(j))
            .collect();
        // Sign relating the sorted basis tuple to the canonical
        // representative (C - missing in circuit order, then the tail).
        let mut source = Vec::with_capacity(fam.k);
        source.extend(circuit.members.iter().copied().filter(|&e| e != missing));
        source.extend(tail.iter().copied());
        let (sorted_src, eps) = sort_with_sign(&source).unwrap();
        debug_assert_eq!(&sorted_src, set);
        for (l_pos, &il) in circuit.members.iter().enumerate() {
            let l = l_pos + 1;
            let mut target = Vec::with_capacity(fam.k);
            target.extend(circuit.members.iter().copied().filter(|&e| e != il));
            target.extend(tail.iter().copied());
            let Some((sorted_t, eps_t)) = sort_with_sign(&target) else {
                continue;
            };
            let Some(row) = basis.position(&sorted_t) else {
                continue; // dependent tuple: F vanishes
            };
            let parity = m + l;
            let sign = (eps as i64) * (eps_t as i64) * if parity % 2 == 0 { 1 } else { -1 };
            let term = a.a[il].clone() * &CQ::from_int(sign);
            mat[(row, col)] += &term;
        }
    }
    mat
}

/// Exact K_j(x) = sum_C lambda^C_j / f_C(x) L_C on the standard basis,
/// with the restriction to a Sing basis when one is supplied.
pub fn k_j_matrix(
    fam: &ArrangementFamily,
    a: &WeightVector,
    circuits: &[Circuit],
    x: &[CQ],
    j: usize,
    sing: Option<&SingularSubspace>,
) -> Result<OperatorMatrix, OperatorError> {
    let dim = StdBasis::new(fam, fam.k).dim();
    let mut total = QMat::zeros(dim, dim);
    for c in circuits {
        if c.lambda[j].is_zero() {
            continue;
        }
        let fc = c.f_c(x);
        if fc.is_zero() {
            return Err(OperatorError::OnDiscriminant(
                c.members.iter().map(|&m| m + 1).collect(),
            ));
        }
        let coeff = &c.lambda[j] / &fc;
        let lc = l_c_matrix(fam, a, c);
        total = add(total, lc.scale(&coeff));
    }
    let restricted = match sing {
        Some(s) => Some(restrict_to_sing(s, &total)?),
        None => None,
    };
    Ok(OperatorMatrix {
        matrix: total,
        restricted,
        provenance: format!("K_{}(x)", j + 1),
    })
}

/// Exact matrix of the x-derivative d K_i / d z_j =
/// -sum_C lambda^C_i lambda^C_j f_C(x)^{-2} L_C.
pub fn k_derivative_matrix(
    fam: &ArrangementFamily,
    a: &WeightVector,
    circuits: &[Circuit],
    x: &[CQ],
    i: usize,
    j: usize,
) -> Result<QMat, OperatorError> {
    let dim = StdBasis::new(fam, fam.k).dim();
    let mut total = QMat::zeros(dim, dim);
    for c in circuits {
        if c.lambda[i].is_zero() || c.lambda[j].is_zero() {
            continue;
        }
        let fc = c.f_c(x);
        if fc.is_zero() {
            return Err(OperatorError::OnDiscriminant(
                c.members.iter().map(|&m| m + 1).collect(),
            ));
        }
        let coeff = -&(&(&c.lambda[i] * &c.lambda[j]) / &(&fc * &fc));
        total = add(total, l_c_matrix(fam, a, c).scale(&coeff));
    }
    Ok(total)
}

/// Numeric K_j at a complex fiber point, guarding against near-discriminant
/// denominators.
pub fn k_j_matrix_c64(
    lc_cache: &[(Circuit, Vec<Vec<C64>>)],
    x: &[C64],
    j: usize,
    near_tol: f64,
) -> Result<Vec<Vec<C64>>, OperatorError> {
    let dim = lc_cache
        .first()
        .map(|(_, m)| m.len())
        .expect("at least one circuit");
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut total = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for (c, lc) in lc_cache {
        let lam = c.lambda[j].to_c64();
        if lam.norm() == 0.0 {
            continue;
        }
        let fc: C64 = c
            .members
            .iter()
            .map(|&m| c.lambda[m].to_c64() * x[m])
            .sum();
        if fc.norm() <= near_tol * (1.0 + scale) {
            return Err(OperatorError::NearDiscriminant {
                circuit: c.members.iter().map(|&m| m + 1).collect(),
                value: fc.norm(),
            });
        }
        let coeff = lam / fc;
        for r in 0..dim {
            for cidx in 0..dim {
                total[r][cidx] += coeff * lc[r][cidx];
            }
        }
    }
    Ok(total)
}

/// Cache the exact L_C matrices as complex doubles for path transport.
pub fn lc_cache_c64(
    fam: &ArrangementFamily,
    a: &WeightVector,
    circuits: &[Circuit],
) -> Vec<(Circuit, Vec<Vec<C64>>)> {
    circuits
        .iter()
        .map(|c| (c.clone(), l_c_matrix(fam, a, c).to_c64()))
        .collect()
}

/// Restriction of an operator to the Sing basis: solves the coordinates
/// through the gram matrix and verifies exact preservation.
pub fn restrict_to_sing(sing: &SingularSubspace, m: &QMat) -> Result<QMat, OperatorError> {
    let d = sing.dim();
    let kb = m.matmul(&sing.basis);
    let mut rhs = QMat::zeros(d, d);
    for col in 0..d {
        let kcol = kb.column(col);
        for row in 0..d {
            rhs[(row, col)] = crate::osflag::contravariant_pairing(
                &sing.diag,
                &sing.basis.column(row),
                &kcol,
            );
        }
    }
    let r = sing.gram.solve(&rhs).ok_or(OperatorError::SingularGram)?;
    // Exact preservation: basis * R must reproduce m * basis.
    if !sing.basis.matmul(&r).sub(&kb).is_zero() {
        return Err(OperatorError::NotPreserved);
    }
    Ok(r)
}

/// Numeric restriction for complex operators along a transport path. The
/// gram solve projects; preservation is exact in theory, so no residual
/// check is made here.
pub fn restrict_to_sing_c64(
    sing_basis: &[Vec<C64>],
    gram: &[Vec<C64>],
    diag: &[C64],
    m: &[Vec<C64>],
) -> Option<Vec<Vec<C64>>> {
    let d = sing_basis[0].len();
    let kb = cmat_matmul(m, sing_basis);
    let mut cols = Vec::with_capacity(d);
    for col in 0..d {
        let kcol: Vec<C64> = kb.iter().map(|row| row[col]).collect();
        let rhs: Vec<C64> = (0..d)
            .map(|row| {
                let bcol: Vec<C64> = sing_basis.iter().map(|r| r[row]).collect();
                crate::osflag::contravariant_pairing_c64(diag, &bcol, &kcol)
            })
            .collect();
        cols.push(csolve(gram, &rhs)?);
    }
    let mut r = vec![vec![C64::new(0.0, 0.0); d]; d];
    for col in 0..d {
        for row in 0..d {
            r[row][col] = cols[col][row];
        }
    }
    Some(r)
}

fn add(mut a: QMat, b: QMat) -> QMat {
    for i in 0..a.rows {
        for j in 0..a.cols {
            a[(i, j)] += &b[(i, j)];
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::osflag::{contravariant_gram, contravariant_pairing, singular_subspace};

    #[test]
    fn l_c_fix1() {
        let (fam, a, _) = fixtures::fix1();
        let c = &fam.circuits()[0];
        let m = l_c_matrix(&fam, &a, c);
        // L_C F_1 = F_1 - F_2, L_C F_2 = F_2 - F_1.
        assert_eq!(m[(0, 0)], CQ::from_int(1));
        assert_eq!(m[(1, 0)], CQ::from_int(-1));
        assert_eq!(m[(0, 1)], CQ::from_int(-1));
        assert_eq!(m[(1, 1)], CQ::from_int(1));
        // Row sums vanish: L_C annihilates d F^0.
        let ones = vec![CQ::one(), CQ::one()];
        assert!(m.matvec(&ones).iter().all(|c| c.is_zero()));
    }

    #[test]
    fn l_c_zero_when_intersection_small() {
        // n=4 in the plane with circuit {1,2,4} of size 3; the basis
        // element F(H_2,H_3) meets it in one element only.
        let doc = r#"{"k":2,"n":4,"B":[[1,0,1,2],[0,1,1,2]],"weights":[1,1,1,1],"x":[0,0,-1,-3]}"#;
        let (fam, a, _) = crate::arrangement::load_family(doc).unwrap();
        let circuits = fam.circuits();
        let c = circuits
            .iter()
            .find(|c| c.members == vec![0, 1, 3])
            .unwrap();
        let m = l_c_matrix(&fam, &a, c);
        let basis = StdBasis::new(&fam, 2);
        let col = basis.position(&[1, 2]).unwrap();
        for row in 0..basis.dim() {
            assert_eq!(m[(row, col)], CQ::zero());
        }
    }

    #[test]
    fn k_j_fix1_eigenvalues() {
        let (fam, a, x) = fixtures::fix1();
        let circuits = fam.circuits();
        let sing = singular_subspace(&fam, &a).unwrap();
        let k1 = k_j_matrix(&fam, &a, &circuits, &x.x, 0, Some(&sing)).unwrap();
        // f_C(x) = x_1 - x_2 = 1, so K_1 = L_C.
        assert_eq!(k1.matrix[(0, 0)], CQ::from_int(1));
        let v = vec![CQ::one(), CQ::from_int(-1)];
        let kv = k1.matrix.matvec(&v);
        assert_eq!(kv, vec![CQ::from_int(2), CQ::from_int(-2)]);
        let r1 = k1.restricted.unwrap();
        let k2 = k_j_matrix(&fam, &a, &circuits, &x.x, 1, Some(&sing)).unwrap();
        let r2 = k2.restricted.unwrap();
        // On the 1-dimensional Sing the eigenvalues are 2 and -2.
        let ratio1 = &r1[(0, 0)];
        let ratio2 = &r2[(0, 0)];
        assert_eq!(ratio1, &CQ::from_int(2));
        assert_eq!(ratio2, &CQ::from_int(-2));
    }

    #[test]
    fn k_j_fix2_decomposition() {
        let (fam, a, x) = fixtures::fix2();
        let circuits = fam.circuits();
        // K_1 = L_{12}/f_12 + L_{13}/f_13 with f_12 = 1, f_13 = 2.
        let k1 = k_j_matrix(&fam, &a, &circuits, &x.x, 0, None).unwrap().matrix;
        let l12 = l_c_matrix(&fam, &a, &circuits[0]);
        let l13 = l_c_matrix(&fam, &a, &circuits[1]);
        let expected = add(l12, l13.scale(&CQ::from_frac(1, 2)));
        assert!(k1.sub(&expected).is_zero());
    }

    #[test]
    fn k_j_on_discriminant_errors() {
        let (fam, a, _) = fixtures::fix1();
        let circuits = fam.circuits();
        let x = vec![CQ::zero(), CQ::zero()];
        assert!(matches!(
            k_j_matrix(&fam, &a, &circuits, &x, 0, None),
            Err(OperatorError::OnDiscriminant(_))
        ));
    }

    #[test]
    fn symmetry_and_preservation() {
        for (fam, a, x) in [fixtures::fix1(), fixtures::fix2(), fixtures::fix3()] {
            let circuits = fam.circuits();
            let sing = singular_subspace(&fam, &a).unwrap();
            let diag = contravariant_gram(&fam, &a, fam.k);
            let dim = diag.len();
            for j in 0..fam.n {
                // Restriction succeeds only if Sing is preserved exactly.
                let op = k_j_matrix(&fam, &a, &circuits, &x.x, j, Some(&sing)).unwrap();
                assert!(op.restricted.is_some());
                // S^(a)(K v, w) = S^(a)(v, K w) on the whole standard basis.
                for p in 0..dim {
                    for q in 0..dim {
                        let mut ep = vec![CQ::zero(); dim];
                        ep[p] = CQ::one();
                        let mut eq = vec![CQ::zero(); dim];
                        eq[q] = CQ::one();
                        let lhs =
                            contravariant_pairing(&diag, &op.matrix.matvec(&ep), &eq);
                        let rhs =
                            contravariant_pairing(&diag, &ep, &op.matrix.matvec(&eq));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn commutativity_on_sing_exact() {
        for (fam, a, x) in [fixtures::fix2(), fixtures::fix3()] {
            let circuits = fam.circuits();
            let sing = singular_subspace(&fam, &a).unwrap();
            let restricted: Vec<QMat> = (0..fam.n)
                .map(|j| {
                    k_j_matrix(&fam, &a, &circuits, &x.x, j, Some(&sing))
                        .unwrap()
                        .restricted
                        .unwrap()
                })
                .collect();
            for i in 0..fam.n {
                for j in i + 1..fam.n {
                    let ij = restricted[i].matmul(&restricted[j]);
                    let ji = restricted[j].matmul(&restricted[i]);
                    assert!(ij.sub(&ji).is_zero(), "[K_{i}, K_{j}] != 0 on Sing");
                }
            }
        }
    }

    #[test]
    fn derivative_closedness_exact() {
        // dK_i/dz_j and dK_j/dz_i agree as exact matrices, and match a
        // central finite difference of the numeric assembly.
        let doc = r#"{"k":2,"n":4,"B":[[1,0,1,2],[0,1,1,2]],"weights":[1,2,1,1],"x":[0,0,-1,-3]}"#;
        let (fam, a, x) = crate::arrangement::load_family(doc).unwrap();
        let circuits = fam.circuits();
        for i in 0..fam.n {
            for j in 0..fam.n {
                let dij = k_derivative_matrix(&fam, &a, &circuits, &x.x, i, j).unwrap();
                let dji = k_derivative_matrix(&fam, &a, &circuits, &x.x, j, i).unwrap();
                assert!(dij.sub(&dji).is_zero());
            }
        }
        // Finite-difference cross-check for one pair.
        let cache = lc_cache_c64(&fam, &a, &circuits);
        let xc: Vec<C64> = x.x.iter().map(|v| v.to_c64()).collect();
        let h = 1e-6;
        let (i, j) = (0, 2);
        let mut xp = xc.clone();
        xp[j] += C64::new(h, 0.0);
        let mut xm = xc.clone();
        xm[j] -= C64::new(h, 0.0);
        let kp = k_j_matrix_c64(&cache, &xp, i, 1e-12).unwrap();
        let km = k_j_matrix_c64(&cache, &xm, i, 1e-12).unwrap();
        let exact = k_derivative_matrix(&fam, &a, &circuits, &x.x, i, j)
            .unwrap()
            .to_c64();
        for r in 0..exact.len() {
            for c in 0..exact.len() {
                let fd = (kp[r][c] - km[r][c]) / (2.0 * h);
                assert!((fd - exact[r][c]).norm() < 1e-5);
            }
        }
    }

    #[test]
    fn marked_correspondence_conjugation() {
        // K_j applied to the projected marked elements equals the
        // standard-basis matrix pushed through the projection.
        for (fam, a, x) in [fixtures::fix1(), fixtures::fix3()] {
            let circuits = fam.circuits();
            let sing = singular_subspace(&fam, &a).unwrap();
            let marked = crate::osflag::marked_flag_elements(&fam, &sing).unwrap();
            for j in 0..fam.n {
                let op = k_j_matrix(&fam, &a, &circuits, &x.x, j, None).unwrap().matrix;
                for (idx, (_, v)) in marked.iter().enumerate() {
                    let kv = op.matvec(v);
                    // sum_T op[T, idx] v_T
                    let mut combo = vec![CQ::zero(); v.len()];
                    for (t, (_, vt)) in marked.iter().enumerate() {
                        let coeff = op[(t, idx)].clone();
                        if coeff.is_zero() {
                            continue;
                        }
                        for (c, e) in combo.iter_mut().zip(vt.iter()) {
                            let add = &coeff * e;
                            *c += &add;
                        }
                    }
                    assert_eq!(kv, combo);
                }
            }
        }
    }

    #[test]
    fn sign_oracle_tail_permutations() {
        // The circuit-order convention must not depend on the ordering of
        // the non-circuit tail: assembling L_C from any permuted tail
        // representative gives the same matrix.
        let doc = r#"{"k":2,"n":5,"B":[[1,0,1,2,1],[0,1,1,2,3]],"weights":[1,1,1,1,1],"x":[0,0,-1,-3,-4]}"#;
        let (fam, a, _) = crate::arrangement::load_family(doc).unwrap();
        let basis = StdBasis::new(&fam, 2);
        for circuit in fam.circuits() {
            let reference = l_c_matrix(&fam, &a, &circuit);
            let r = circuit.members.len();
            for (col, set) in basis.sets.iter().enumerate() {
                let inter: Vec<usize> = set
                    .iter()
                    .copied()
                    .filter(|j| circuit.members.contains(j))
                    .collect();
                if inter.len() + 1 != r {
                    continue;
                }
                let tail: Vec<usize> = set
                    .iter()
                    .copied()
                    .filter(|j| !circuit.members.contains(j))
                    .collect();
                let (m_pos, &missing) = circuit
                    .members
                    .iter()
                    .enumerate()
                    .find(|(_, e)| !set.contains(e))
                    .unwrap();
                // Try every ordering of the tail (at most 1 element here for
                // k=2, r=2 circuits give tail length 1; r=3 gives 0 — also
                // exercise k=1-style empty tails).
                for tail_perm in permutations(&tail) {
                    let mut source = Vec::new();
                    source
                        .extend(circuit.members.iter().copied().filter(|&e| e != missing));
                    source.extend(tail_perm.iter().copied());
                    let (sorted_src, eps) = sort_with_sign(&source).unwrap();
                    assert_eq!(&sorted_src, set);
                    let mut column = vec![CQ::zero(); basis.dim()];
                    for (l_pos, &il) in circuit.members.iter().enumerate() {
                        let mut target = Vec::new();
                        target.extend(
                            circuit.members.iter().copied().filter(|&e| e != il),
                        );
                        target.extend(tail_perm.iter().copied());
                        let Some((sorted_t, eps_t)) = sort_with_sign(&target) else {
                            continue;
                        };
                        let Some(row) = basis.position(&sorted_t) else {
                            continue;
                        };
                        let parity = (m_pos + 1) + (l_pos + 1);
                        let sign = (eps as i64)
                            * (eps_t as i64)
                            * if parity % 2 == 0 { 1 } else { -1 };
                        let term = a.a[il].clone() * &CQ::from_int(sign);
                        column[row] += &term;
                    }
                    for row in 0..basis.dim() {
                        assert_eq!(column[row], reference[(row, col)]);
                    }
                }
            }
        }
    }

    fn permutations(v: &[usize]) -> Vec<Vec<usize>> {
        if v.is_empty() {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for i in 0..v.len() {
            let mut rest = v.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
}
