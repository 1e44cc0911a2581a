//! Critical set of the master function: gradient/Hessian evaluation, the
//! root solver, specialization vectors, and the residue bilinear form.

use crate::arrangement::{ArrangementFamily, WeightVector};
use crate::linalg::{cdet, csolve, poly_roots, QMat};
use crate::osflag::{contravariant_pairing_c64, SingularSubspace, StdBasis};
use crate::rational::{C64, CQ};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("found {found} critical points, expected {expected}")]
    CountMismatch { found: usize, expected: usize },
    #[error("degenerate critical point near ({0})")]
    Degenerate(String),
    #[error("fiber point lies on or near the discriminant")]
    OnDiscriminant,
}

/// Tunable solver knobs with the documented defaults.
#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub residual_tol: f64,
    pub dedup_tol: f64,
    pub budget_factor: usize,
    pub max_newton: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            residual_tol: 1e-11,
            dedup_tol: 1e-8,
            budget_factor: 200,
            max_newton: 60,
            seed: 0x5eed_cafe,
        }
    }
}

/// Everything the downstream layers need about the critical set.
pub struct CriticalData {
    pub points: Vec<Vec<C64>>,
    pub hessians: Vec<C64>,
    pub f_values: Vec<Vec<C64>>,
    pub chi: usize,
}

/// Numeric evaluation context: B and the weights as complex doubles.
pub struct MasterContext {
    pub k: usize,
    pub n: usize,
    pub b: Vec<Vec<C64>>,
    pub a: Vec<C64>,
    pub x: Vec<C64>,
}

impl MasterContext {
    pub fn new(fam: &ArrangementFamily, a: &WeightVector, x: &[C64]) -> Self {
        MasterContext {
            k: fam.k,
            n: fam.n,
            b: fam.b.to_c64(),
            a: a.a.iter().map(|c| c.to_c64()).collect(),
            x: x.to_vec(),
        }
    }

    /// Values f_j(u) = sum_i b^i_j u_i + x_j.
    pub fn forms(&self, u: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|j| {
                let mut v = self.x[j];
                for i in 0..self.k {
                    v += self.b[i][j] * u[i];
                }
                v
            })
            .collect()
    }

    /// Gradient of the master function: G_i = sum_j b^i_j a_j / f_j.
    pub fn gradient(&self, u: &[C64]) -> Vec<C64> {
        let f = self.forms(u);
        (0..self.k)
            .map(|i| (0..self.n).map(|j| self.b[i][j] * self.a[j] / f[j]).sum())
            .collect()
    }

    /// Second-derivative matrix H_il = -sum_j b^i_j b^l_j a_j / f_j^2.
    pub fn hessian_matrix(&self, u: &[C64]) -> Vec<Vec<C64>> {
        let f = self.forms(u);
        let mut h = vec![vec![C64::new(0.0, 0.0); self.k]; self.k];
        for j in 0..self.n {
            let w = -self.a[j] / (f[j] * f[j]);
            for i in 0..self.k {
                for l in 0..self.k {
                    h[i][l] += self.b[i][j] * self.b[l][j] * w;
                }
            }
        }
        h
    }
}

/// Exact determinant d_I of the k columns I of B.
pub fn d_minor(fam: &ArrangementFamily, cols: &[usize]) -> CQ {
    let rows: Vec<Vec<CQ>> = (0..fam.k)
        .map(|i| cols.iter().map(|&j| fam.b[(i, j)].clone()).collect())
        .collect();
    QMat::from_rows(rows).det()
}

/// Hessian of the master function via the closed combinatorial form
/// (-1)^k sum_{|I|=k} d_I^2 prod_{i in I} a_i / f_i^2.
pub fn master_hessian(
    fam: &ArrangementFamily,
    ctx: &MasterContext,
    basis: &StdBasis,
    u: &[C64],
) -> C64 {
    let f = ctx.forms(u);
    let mut total = C64::new(0.0, 0.0);
    for set in &basis.sets {
        let d = d_minor(fam, set).to_c64();
        let mut term = d * d;
        for &i in set {
            term *= ctx.a[i] / (f[i] * f[i]);
        }
        total += term;
    }
    if fam.k % 2 == 1 {
        total = -total;
    }
    total
}

/// Coordinates of the specialization vector F(u) on the standard basis:
/// the coordinate at I is d_I / prod_{i in I} f_i(u).
pub fn specialization_vector(
    fam: &ArrangementFamily,
    ctx: &MasterContext,
    basis: &StdBasis,
    u: &[C64],
) -> Vec<C64> {
    let f = ctx.forms(u);
    basis
        .sets
        .iter()
        .map(|set| {
            let mut denom = C64::new(1.0, 0.0);
            for &i in set {
                denom *= f[i];
            }
            d_minor(fam, set).to_c64() / denom
        })
        .collect()
}

/// Find the full critical set of the master function and certify the count
/// against |chi|.
pub fn solve_critical(
    fam: &ArrangementFamily,
    a: &WeightVector,
    x: &[C64],
    opts: &SolveOptions,
) -> Result<CriticalData, SolveError> {
    let ctx = MasterContext::new(fam, a, x);
    let basis = StdBasis::new(fam, fam.k);
    let chi = fam.abs_chi();
    let a_norm: f64 = ctx.a.iter().map(|c| c.norm()).sum();

    let mut points = if fam.k == 1 {
        roots_univariate(&ctx, opts, a_norm)?
    } else {
        roots_newton_multistart(fam, &ctx, chi, opts, a_norm)?
    };
    points.sort_by(|p, q| {
        for i in 0..p.len() {
            let ord = (p[i].re, p[i].im)
                .partial_cmp(&(q[i].re, q[i].im))
                .unwrap_or(std::cmp::Ordering::Equal);
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        std::cmp::Ordering::Equal
    });
    if points.len() != chi {
        return Err(SolveError::CountMismatch {
            found: points.len(),
            expected: chi,
        });
    }
    let mut hessians = Vec::with_capacity(chi);
    let mut f_values = Vec::with_capacity(chi);
    for u in &points {
        let h = master_hessian(fam, &ctx, &basis, u);
        let scale = u.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if h.norm() < 1e-10 * scale {
            return Err(SolveError::Degenerate(format!("{:?}", u)));
        }
        hessians.push(h);
        f_values.push(ctx.forms(u));
    }
    Ok(CriticalData {
        points,
        hessians,
        f_values,
        chi,
    })
}

fn residual_threshold(opts: &SolveOptions, a_norm: f64, f: &[C64]) -> f64 {
    let min_f = f.iter().map(|c| c.norm()).fold(f64::INFINITY, f64::min);
    if min_f == 0.0 {
        return 0.0;
    }
    opts.residual_tol * (1.0 + a_norm / min_f)
}

/// k = 1: the critical equation clears to the polynomial
/// sum_j a_j b_j prod_{i != j} (b_i t + x_i) = 0, solved by Aberth
/// iteration and polished by Newton on the actual gradient.
fn roots_univariate(
    ctx: &MasterContext,
    opts: &SolveOptions,
    a_norm: f64,
) -> Result<Vec<Vec<C64>>, SolveError> {
    let n = ctx.n;
    let mut poly = vec![C64::new(0.0, 0.0); n]; // degree n-1
    for j in 0..n {
        let mut factor = vec![C64::new(1.0, 0.0)];
        for i in 0..n {
            if i == j {
                continue;
            }
            // multiply by (b_i t + x_i)
            let mut next = vec![C64::new(0.0, 0.0); factor.len() + 1];
            for (d, c) in factor.iter().enumerate() {
                next[d] += *c * ctx.x[i];
                next[d + 1] += *c * ctx.b[0][i];
            }
            factor = next;
        }
        let w = ctx.a[j] * ctx.b[0][j];
        for (d, c) in factor.iter().enumerate() {
            poly[d] += w * c;
        }
    }
    while poly.last().map(|c| c.norm() < 1e-14) == Some(true) {
        poly.pop();
    }
    let mut out: Vec<Vec<C64>> = Vec::new();
    for root in poly_roots(&poly) {
        let mut u = vec![root];
        // Newton polish on the gradient itself.
        for _ in 0..opts.max_newton {
            let g = ctx.gradient(&u)[0];
            let h = ctx.hessian_matrix(&u)[0][0];
            if h.norm() == 0.0 {
                break;
            }
            let step = g / h;
            u[0] -= step;
            if step.norm() < 1e-15 * (1.0 + u[0].norm()) {
                break;
            }
        }
        let f = ctx.forms(&u);
        if ctx.gradient(&u)[0].norm() > residual_threshold(opts, a_norm, &f) {
            continue;
        }
        if !is_duplicate(&out, &u, opts.dedup_tol) {
            out.push(u);
        }
    }
    Ok(out)
}

/// k >= 2: damped Newton from a fixed-seed cloud of starting points around
/// the arrangement vertices.
fn roots_newton_multistart(
    fam: &ArrangementFamily,
    ctx: &MasterContext,
    chi: usize,
    opts: &SolveOptions,
    a_norm: f64,
) -> Result<Vec<Vec<C64>>, SolveError> {
    let basis = StdBasis::new(fam, fam.k);
    // Vertex cloud: solutions of f_i = 0 for i in an independent k-set.
    let mut lo = vec![f64::INFINITY; ctx.k];
    let mut hi = vec![f64::NEG_INFINITY; ctx.k];
    let mut vertices: Vec<Vec<C64>> = Vec::new();
    let mut any = false;
    for set in &basis.sets {
        let m: Vec<Vec<C64>> = (0..ctx.k)
            .map(|i| set.iter().map(|&j| ctx.b[i][j]).collect())
            .collect();
        let mt: Vec<Vec<C64>> = (0..ctx.k)
            .map(|r| (0..ctx.k).map(|c| m[c][r]).collect())
            .collect();
        let rhs: Vec<C64> = set.iter().map(|&j| -ctx.x[j]).collect();
        if let Some(v) = csolve(&mt, &rhs) {
            any = true;
            for i in 0..ctx.k {
                lo[i] = lo[i].min(v[i].re.min(v[i].im));
                hi[i] = hi[i].max(v[i].re.max(v[i].im));
            }
            vertices.push(v);
        }
    }
    if !any {
        return Err(SolveError::OnDiscriminant);
    }
    for i in 0..ctx.k {
        let pad = 1.0 + 0.5 * (hi[i] - lo[i]);
        lo[i] -= pad;
        hi[i] += pad;
    }
    // Runaway guard: the gradient decays like 1/|u| at infinity, so a
    // diverging Newton orbit can masquerade as a root. All true critical
    // points sit at a scale comparable to the vertex cloud.
    let cap = 1e3
        * (1.0
            + lo.iter()
                .chain(hi.iter())
                .map(|v| v.abs())
                .fold(0.0, f64::max));
    let data_real = ctx.a.iter().all(|c| c.im == 0.0) && ctx.x.iter().all(|c| c.im == 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found: Vec<Vec<C64>> = Vec::new();
    let budget = opts.budget_factor * chi.max(1);
    for _ in 0..budget {
        if found.len() == chi {
            break;
        }
        // Mix three seeding measures. Uniform box seeds cover generic
        // chambers; vertex-local seeds at random log scales reach thin
        // chambers hugging a vertex; random convex combinations of
        // vertices reach large chambers whose critical point sits far
        // from every single vertex (every bounded chamber lies in the
        // convex hull of the arrangement vertices).
        let mode = rng.gen_range(0..3u8);
        let seed_pt: Vec<C64> = if mode == 2 && vertices.len() >= 2 {
            let count = 2 + rng.gen_range(0..=ctx.k.min(vertices.len() - 1));
            let picks: Vec<&Vec<C64>> = (0..count)
                .map(|_| &vertices[rng.gen_range(0..vertices.len())])
                .collect();
            let mut weights: Vec<f64> = (0..count).map(|_| rng.gen_range(0.01..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            (0..ctx.k)
                .map(|i| {
                    let mut c = C64::new(0.0, 0.0);
                    for (v, w) in picks.iter().zip(&weights) {
                        c += v[i] * *w;
                    }
                    if data_real {
                        C64::new(c.re, 0.0)
                    } else {
                        c
                    }
                })
                .collect()
        } else if mode == 1 && !vertices.is_empty() {
            let v = &vertices[rng.gen_range(0..vertices.len())];
            let diag: f64 = (0..ctx.k)
                .map(|i| hi[i] - lo[i])
                .fold(0.0, f64::max)
                .max(1e-3);
            let radius = diag * 10f64.powf(rng.gen_range(-3.0..0.0));
            (0..ctx.k)
                .map(|i| {
                    let re = v[i].re + radius * rng.gen_range(-1.0..1.0);
                    let im = if data_real {
                        0.0
                    } else {
                        v[i].im + radius * rng.gen_range(-1.0..1.0)
                    };
                    C64::new(re, im)
                })
                .collect()
        } else {
            (0..ctx.k)
                .map(|i| {
                    let re = rng.gen_range(lo[i]..hi[i]);
                    let im = if data_real {
                        0.0
                    } else {
                        rng.gen_range(lo[i]..hi[i])
                    };
                    C64::new(re, im)
                })
                .collect()
        };
        if let Some(u) = newton_from(ctx, seed_pt, opts, a_norm, cap) {
            if !is_duplicate(&found, &u, opts.dedup_tol) {
                found.push(u);
            }
        }
    }
    Ok(found)
}

fn newton_from(
    ctx: &MasterContext,
    mut u: Vec<C64>,
    opts: &SolveOptions,
    a_norm: f64,
    cap: f64,
) -> Option<Vec<C64>> {
    let gnorm = |g: &[C64]| g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for _ in 0..opts.max_newton {
        if u.iter().any(|c| c.norm() > cap) {
            return None;
        }
        let f = ctx.forms(&u);
        if f.iter().any(|c| c.norm() < 1e-13) {
            return None;
        }
        let g = ctx.gradient(&u);
        let r0 = gnorm(&g);
        let thresh = residual_threshold(opts, a_norm, &f);
        if r0 <= thresh {
            return Some(polish(ctx, u));
        }
        let h = ctx.hessian_matrix(&u);
        let rhs: Vec<C64> = g.iter().map(|c| -c).collect();
        let step = csolve(&h, &rhs)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..opts.max_newton {
            let trial: Vec<C64> = u
                .iter()
                .zip(&step)
                .map(|(ui, si)| ui + si * C64::new(t, 0.0))
                .collect();
            let tf = ctx.forms(&trial);
            if tf.iter().all(|c| c.norm() > 1e-13) {
                let rg = gnorm(&ctx.gradient(&trial));
                if rg < r0 {
                    u = trial;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    let f = ctx.forms(&u);
    if f.iter().any(|c| c.norm() < 1e-13) {
        return None;
    }
    let thresh = residual_threshold(opts, a_norm, &f);
    if gnorm(&ctx.gradient(&u)) <= thresh {
        Some(polish(ctx, u))
    } else {
        None
    }
}

/// A few undamped Newton steps after acceptance: quadratic convergence
/// takes an already-accepted point to machine precision, which the
/// downstream identity checks rely on.
fn polish(ctx: &MasterContext, mut u: Vec<C64>) -> Vec<C64> {
    for _ in 0..4 {
        let g = ctx.gradient(&u);
        let h = ctx.hessian_matrix(&u);
        let rhs: Vec<C64> = g.iter().map(|c| -c).collect();
        let Some(step) = csolve(&h, &rhs) else {
            break;
        };
        let scale = u.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let snorm = step.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let trial: Vec<C64> = u.iter().zip(&step).map(|(ui, si)| ui + si).collect();
        if ctx.forms(&trial).iter().any(|c| c.norm() < 1e-14) {
            break;
        }
        u = trial;
        if snorm < 1e-14 * scale {
            break;
        }
    }
    u
}

fn is_duplicate(found: &[Vec<C64>], u: &[C64], tol: f64) -> bool {
    found.iter().any(|p| {
        let scale = 1.0 + u.iter().map(|c| c.norm()).fold(0.0, f64::max);
        p.iter()
            .zip(u)
            .all(|(pi, ui)| (pi - ui).norm() <= tol * scale)
    })
}

/// Values of [S^(a)] v as a function on the critical set:
/// u -> S^(a)(v, F(u)).
pub fn s_star_values(
    diag: &[C64],
    v: &[C64],
    spec_vectors: &[Vec<C64>],
) -> Vec<C64> {
    spec_vectors
        .iter()
        .map(|fu| contravariant_pairing_c64(diag, v, fu))
        .collect()
}

/// The evaluation-model inverse E: a function g on the critical set maps
/// to sum_u g(u)/Hess(u) F(u) in the flag space.
pub fn e_map(
    g: &[C64],
    crit: &CriticalData,
    spec_vectors: &[Vec<C64>],
    dim: usize,
) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (i, fu) in spec_vectors.iter().enumerate() {
        let w = g[i] / crit.hessians[i];
        for (o, c) in out.iter_mut().zip(fu) {
            *o += w * c;
        }
    }
    out
}

/// Residue bilinear form (f, g) = sum_u f(u) g(u) / Hess(u) on functions
/// given by their values at the critical points.
pub fn residue_form(crit: &CriticalData, f: &[C64], g: &[C64]) -> C64 {
    f.iter()
        .zip(g)
        .zip(&crit.hessians)
        .map(|((fu, gu), h)| fu * gu / h)
        .sum()
}

/// Values at the critical points of the marked elements w_{i_1..i_k}:
/// d_I prod_{i in I} a_i / f_i(u), indexed by the standard basis.
pub fn marked_w_values(
    fam: &ArrangementFamily,
    ctx: &MasterContext,
    basis: &StdBasis,
    crit: &CriticalData,
) -> Vec<(Vec<usize>, Vec<C64>)> {
    basis
        .sets
        .iter()
        .map(|set| {
            let d = d_minor(fam, set).to_c64();
            let vals = crit
                .f_values
                .iter()
                .map(|f| {
                    let mut v = d;
                    for &i in set {
                        v *= ctx.a[i] / f[i];
                    }
                    v
                })
                .collect();
            (set.clone(), vals)
        })
        .collect()
}

/// Numeric Sing data (basis, gram, diagonal) for evaluation-model work.
pub fn sing_c64(sing: &SingularSubspace) -> (Vec<Vec<C64>>, Vec<Vec<C64>>, Vec<C64>) {
    (
        sing.basis.to_c64(),
        sing.gram.to_c64(),
        sing.diag.iter().map(|c| c.to_c64()).collect(),
    )
}

/// Determinant of the analytic second-derivative matrix; used as a
/// cross-check of the combinatorial Hessian formula.
pub fn hessian_det(ctx: &MasterContext, u: &[C64]) -> C64 {
    cdet(&ctx.hessian_matrix(u))
}

/// Convenience: exact fiber coordinates to complex doubles.
pub fn x_to_c64(x: &[CQ]) -> Vec<C64> {
    x.iter().map(|c| c.to_c64()).collect()
}
