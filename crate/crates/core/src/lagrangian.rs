//! The Lagrangian variety L_{Y,a} attached to the family: Laurent
//! generators in involution, the map Psi from the critical set, Jacobian
//! and Hessian identities on fibers, marked p-elements, the fiber residue
//! form, and the characteristic-variety comparison.

use crate::arrangement::{subsets_lex, ArrangementFamily, WeightVector};
use crate::critical::{d_minor, CriticalData, MasterContext};
use crate::laurent::Laurent;
use crate::linalg::{char_poly, cmat_matvec, cnullvec, csolve, poly_roots, QMat};
use crate::osflag::{SingularSubspace, StdBasis};
use crate::rational::{C64, CQ};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error)]
pub enum LagrangianError {
    #[error("coordinate {0} lies in no circuit: p-space degenerates")]
    Coloop(usize),
    #[error("relation space has rank {found}, expected {expected}")]
    RelationRank { found: usize, expected: usize },
    #[error("dependent column set: d_I = 0")]
    DependentChart,
    #[error("degenerate fiber point: Jacobian vanishes")]
    DegenerateFiber,
    #[error("joint spectrum extraction failed after {0} retries")]
    DefectivePencil(usize),
    #[error("marked relation residual {0:.3e} exceeds tolerance")]
    RelationResidual(f64),
}

/// Exact model of L_{Y,a}: Y spanned by the rows of B, Y-perp by the
/// circuit relation vectors reduced to a basis.
pub struct LagrangianModel {
    pub k: usize,
    pub n: usize,
    pub y_basis: Vec<Vec<CQ>>,
    pub yperp_basis: Vec<Vec<CQ>>,
    pub a: Vec<CQ>,
    b: Vec<Vec<C64>>,
}

/// A point of L_{Y,a} over the base point x.
#[derive(Clone, Debug)]
pub struct LagrangianPoint {
    pub x: Vec<C64>,
    pub p: Vec<C64>,
    pub residual: f64,
}

impl LagrangianModel {
    pub fn new(fam: &ArrangementFamily, a: &WeightVector) -> Result<Self, LagrangianError> {
        let y_basis: Vec<Vec<CQ>> = (0..fam.k).map(|i| fam.b.row(i)).collect();
        // Relation vectors from circuits (already sorted lexicographically
        // by member list), reduced by exact elimination.
        let circuits = fam.circuits();
        let mut covered = vec![false; fam.n];
        let rows: Vec<Vec<CQ>> = circuits
            .iter()
            .map(|c| {
                for &m in &c.members {
                    covered[m] = true;
                }
                c.lambda.clone()
            })
            .collect();
        if let Some(j) = covered.iter().position(|c| !c) {
            return Err(LagrangianError::Coloop(j));
        }
        let mut mat = QMat::from_rows(rows);
        let pivots = mat.rref();
        if pivots.len() != fam.n - fam.k {
            return Err(LagrangianError::RelationRank {
                found: pivots.len(),
                expected: fam.n - fam.k,
            });
        }
        let yperp_basis: Vec<Vec<CQ>> = (0..pivots.len()).map(|i| mat.row(i)).collect();
        Ok(LagrangianModel {
            k: fam.k,
            n: fam.n,
            y_basis,
            yperp_basis,
            a: a.a.clone(),
            b: fam.b.to_c64(),
        })
    }

    /// The n defining generators: F for each Y basis vector, G for each
    /// Y-perp basis vector.
    pub fn generators(&self) -> Vec<Laurent> {
        let n = self.n;
        let mut gens = Vec::with_capacity(n);
        for alpha in &self.y_basis {
            let mut f = Laurent::zero(n);
            for (j, c) in alpha.iter().enumerate() {
                f = f.add(&Laurent::p(n, j, 1).scale(c));
            }
            gens.push(f);
        }
        for beta in &self.yperp_basis {
            let mut g = Laurent::zero(n);
            for (j, c) in beta.iter().enumerate() {
                g = g.add(&Laurent::q(n, j).scale(c));
                let coef = -&(c * &self.a[j]);
                g = g.add(&Laurent::p(n, j, -1).scale(&coef));
            }
            gens.push(g);
        }
        gens
    }

    /// Image of a critical point under Psi: p_j = a_j / f_j(u), with the
    /// generator residual recorded.
    pub fn psi_map(&self, ctx: &MasterContext, x: &[C64], u: &[C64]) -> LagrangianPoint {
        let f = ctx.forms(u);
        let p: Vec<C64> = (0..self.n).map(|j| ctx.a[j] / f[j]).collect();
        let residual = self
            .generators()
            .iter()
            .map(|g| g.eval(x, &p).norm())
            .fold(0.0, f64::max);
        LagrangianPoint {
            x: x.to_vec(),
            p,
            residual,
        }
    }

    /// The fiber of L_{Y,a} over x: Psi-images of the critical set.
    pub fn fiber_points(
        &self,
        ctx: &MasterContext,
        x: &[C64],
        crit: &CriticalData,
    ) -> Vec<LagrangianPoint> {
        crit.points
            .iter()
            .map(|u| self.psi_map(ctx, x, u))
            .collect()
    }

    /// d_I^2 Jac_I at a fiber point: chart-independent by construction,
    /// evaluated through the closed sum over (n-k)-subsets.
    pub fn jacobian_i(
        &self,
        fam: &ArrangementFamily,
        point: &LagrangianPoint,
        chart: &[usize],
    ) -> Result<C64, LagrangianError> {
        if d_minor(fam, chart).is_zero() {
            return Err(LagrangianError::DependentChart);
        }
        let mut total = C64::new(0.0, 0.0);
        for m in subsets_lex(self.n, self.n - self.k) {
            let comp: Vec<usize> = (0..self.n).filter(|j| !m.contains(j)).collect();
            let d = d_minor(fam, &comp).to_c64();
            if d.norm() == 0.0 {
                continue;
            }
            let mut term = d * d;
            for &j in &m {
                term *= self.a[j].to_c64() / (point.p[j] * point.p[j]);
            }
            total += term;
        }
        if (self.n - self.k) % 2 == 1 {
            total = -total;
        }
        Ok(total)
    }

    /// Hessian as a function on L: (-1)^k sum_I d_I^2 prod_{i in I}
    /// p_i^2 / a_i.
    pub fn hessian_on_l(&self, fam: &ArrangementFamily, point: &LagrangianPoint) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for set in subsets_lex(self.n, self.k) {
            let d = d_minor(fam, &set).to_c64();
            if d.norm() == 0.0 {
                continue;
            }
            let mut term = d * d;
            for &i in &set {
                term *= point.p[i] * point.p[i] / self.a[i].to_c64();
            }
            total += term;
        }
        if self.k % 2 == 1 {
            total = -total;
        }
        total
    }

    /// Determinant of the p-derivatives of the n generators at a point:
    /// the defining-system Jacobian of the fiber.
    pub fn jac_system(&self, point: &LagrangianPoint) -> C64 {
        let n = self.n;
        let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
        for (r, alpha) in self.y_basis.iter().enumerate() {
            for j in 0..n {
                m[r][j] = alpha[j].to_c64();
            }
        }
        for (r, beta) in self.yperp_basis.iter().enumerate() {
            for j in 0..n {
                m[self.k + r][j] =
                    beta[j].to_c64() * self.a[j].to_c64() / (point.p[j] * point.p[j]);
            }
        }
        crate::linalg::cdet(&m)
    }

    /// Residue bilinear form on the fiber: at nondegenerate points the
    /// residue reduces to division by d_I^2 Jac_I; the orientation sign is
    /// the frozen constant +1 (calibrated once on a closed-form example).
    pub fn residue_form_l(
        &self,
        fam: &ArrangementFamily,
        points: &[LagrangianPoint],
        chart: &[usize],
        f: &[C64],
        g: &[C64],
    ) -> Result<C64, LagrangianError> {
        let d = d_minor(fam, chart).to_c64();
        if d.norm() == 0.0 {
            return Err(LagrangianError::DependentChart);
        }
        let sign = if self.n % 2 == 0 { 1.0 } else { -1.0 };
        let mut total = C64::new(0.0, 0.0);
        for (idx, pt) in points.iter().enumerate() {
            let dijac = self.jacobian_i(fam, pt, chart)?;
            if dijac.norm() == 0.0 {
                return Err(LagrangianError::DegenerateFiber);
            }
            let mut weight = C64::new(sign, 0.0) / dijac;
            for j in 0..self.n {
                weight *= self.a[j].to_c64() / (pt.p[j] * pt.p[j]);
            }
            total += f[idx] * g[idx] * weight;
        }
        Ok(total)
    }

    /// Marked p-elements: independent k-subset I maps to the values
    /// d_I prod_{i in I} p_i at the fiber points. Relation residuals are
    /// verified before returning.
    pub fn marked_p_elements(
        &self,
        fam: &ArrangementFamily,
        points: &[LagrangianPoint],
    ) -> Result<Vec<(Vec<usize>, Vec<C64>)>, LagrangianError> {
        let basis = StdBasis::new(fam, fam.k);
        let out: Vec<(Vec<usize>, Vec<C64>)> = basis
            .sets
            .iter()
            .map(|set| {
                let d = d_minor(fam, set).to_c64();
                let vals = points
                    .iter()
                    .map(|pt| {
                        let mut v = d;
                        for &i in set {
                            v *= pt.p[i];
                        }
                        v
                    })
                    .collect();
                (set.clone(), vals)
            })
            .collect();
        // Relations: sum_j p_{j, i_2..i_k} = 0 at every fiber point, using
        // the skew determinant convention for unsorted tuples.
        for tail in subsets_lex(self.n, self.k - 1) {
            for (pi, pt) in points.iter().enumerate() {
                let _ = pi;
                let mut total = C64::new(0.0, 0.0);
                let mut scale = 0.0f64;
                for j in 0..self.n {
                    if tail.contains(&j) {
                        continue;
                    }
                    let mut cols = vec![j];
                    cols.extend(tail.iter().copied());
                    let Some((sorted, sgn)) = crate::osflag::sort_with_sign(&cols) else {
                        continue;
                    };
                    let d = d_minor(fam, &sorted).to_c64() * (sgn as f64);
                    let mut v = d;
                    for &i in &cols {
                        v *= pt.p[i];
                    }
                    total += v;
                    scale = scale.max(v.norm());
                }
                if total.norm() > 1e-10 * (1.0 + scale) {
                    return Err(LagrangianError::RelationResidual(total.norm()));
                }
            }
        }
        Ok(out)
    }

    /// Reconstruct the chart coordinates of a point of L from (q_I,
    /// p_{bar I}); returns the remaining q-coordinates q_{bar I}. Used to
    /// differentiate the chart projection numerically.
    pub fn chart_q_bar(
        &self,
        chart: &[usize],
        q_i: &[C64],
        p_bar: &[C64],
    ) -> Option<Vec<C64>> {
        let bar: Vec<usize> = (0..self.n).filter(|j| !chart.contains(j)).collect();
        // Solve for p_I from p in Y-perp: B_I p_I = -B_bar p_bar.
        let bi: Vec<Vec<C64>> = (0..self.k)
            .map(|i| chart.iter().map(|&j| self.b[i][j]).collect())
            .collect();
        let rhs: Vec<C64> = (0..self.k)
            .map(|i| {
                -bar.iter()
                    .zip(p_bar)
                    .map(|(&j, pj)| self.b[i][j] * pj)
                    .sum::<C64>()
            })
            .collect();
        let p_i = csolve(&bi, &rhs)?;
        let mut p = vec![C64::new(0.0, 0.0); self.n];
        for (t, &j) in chart.iter().enumerate() {
            p[j] = p_i[t];
        }
        for (t, &j) in bar.iter().enumerate() {
            p[j] = p_bar[t];
        }
        // q = h(p) + B^T c with h_j = a_j/p_j; c fixed by q_I.
        let h: Vec<C64> = (0..self.n).map(|j| self.a[j].to_c64() / p[j]).collect();
        let bit: Vec<Vec<C64>> = (0..self.k)
            .map(|r| (0..self.k).map(|c| self.b[c][chart[r]]).collect())
            .collect();
        let rhs2: Vec<C64> = chart
            .iter()
            .zip(q_i)
            .map(|(&j, qj)| qj - h[j])
            .collect();
        let c = csolve(&bit, &rhs2)?;
        Some(
            bar.iter()
                .map(|&j| h[j] + (0..self.k).map(|i| self.b[i][j] * c[i]).sum::<C64>())
                .collect(),
        )
    }
}

/// Joint spectrum of the commuting restricted operators K_j(x)|_Sing:
/// eigen-tuples (y_1..y_n) read off the eigenvectors of a random rational
/// combination. Retries with fresh coefficients if the combination is
/// defective.
pub fn char_variety_fiber(
    fam: &ArrangementFamily,
    a: &WeightVector,
    x: &[CQ],
    sing: &SingularSubspace,
    seed: u64,
) -> Result<Vec<Vec<C64>>, LagrangianError> {
    let circuits = fam.circuits();
    let restricted: Vec<Vec<Vec<C64>>> = (0..fam.n)
        .map(|j| {
            crate::operators::k_j_matrix(fam, a, &circuits, x, j, Some(sing))
                .map(|op| op.restricted.unwrap().to_c64())
                .map_err(|_| LagrangianError::DegenerateFiber)
        })
        .collect::<Result<_, _>>()?;
    let dim = sing.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const RETRIES: usize = 5;
    for _ in 0..RETRIES {
        let coeffs: Vec<f64> = (0..fam.n)
            .map(|_| rng.gen_range(1..100) as f64 / rng.gen_range(1..100) as f64)
            .collect();
        let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
        for (j, r) in restricted.iter().enumerate() {
            for row in 0..dim {
                for col in 0..dim {
                    m[row][col] += r[row][col] * coeffs[j];
                }
            }
        }
        let eigs = poly_roots(&char_poly(&m));
        let scale = eigs.iter().map(|e| e.norm()).fold(1.0, f64::max);
        let mut separated = true;
        for i in 0..eigs.len() {
            for j in i + 1..eigs.len() {
                if (eigs[i] - eigs[j]).norm() < 1e-7 * scale {
                    separated = false;
                }
            }
        }
        if !separated {
            continue;
        }
        let mut tuples = Vec::with_capacity(dim);
        let mut ok = true;
        for eig in &eigs {
            let shifted: Vec<Vec<C64>> = (0..dim)
                .map(|r| {
                    (0..dim)
                        .map(|c| m[r][c] - if r == c { *eig } else { C64::new(0.0, 0.0) })
                        .collect()
                })
                .collect();
            let v = cnullvec(&shifted);
            let (pivot, vmax) = v
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                .unwrap();
            if vmax.norm() < 1e-12 {
                ok = false;
                break;
            }
            let tuple: Vec<C64> = restricted
                .iter()
                .map(|r| cmat_matvec(r, &v)[pivot] / v[pivot])
                .collect();
            tuples.push(tuple);
        }
        if ok {
            return Ok(tuples);
        }
    }
    Err(LagrangianError::DefectivePencil(RETRIES))
}

/// Greedy bipartite nearest matching of two tuple sets; returns the
/// largest matched-coordinate discrepancy.
pub fn match_tuples(lhs: &[Vec<C64>], rhs: &[Vec<C64>]) -> f64 {
    assert_eq!(lhs.len(), rhs.len());
    let mut used = vec![false; rhs.len()];
    let mut worst = 0.0f64;
    for l in lhs {
        let mut best: Option<(usize, f64)> = None;
        for (i, r) in rhs.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = l
                .iter()
                .zip(r)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((i, d));
            }
        }
        let (i, d) = best.expect("counts match");
        used[i] = true;
        worst = worst.max(d);
    }
    worst
}
