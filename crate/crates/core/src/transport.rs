//! Numerical transport of flat sections of kappa dI/dz_j = K_j(x) I along
//! piecewise-linear paths in the complement of the discriminant, performed
//! on the Sing-restricted system.

use crate::arrangement::{ArrangementFamily, Circuit, WeightVector};
use crate::operators::{k_j_matrix_c64, lc_cache_c64, restrict_to_sing_c64, OperatorError};
use crate::osflag::SingularSubspace;
use crate::rational::C64;

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("path segment {segment} approaches the discriminant: min |f_C| = {dist:.3e} for circuit {circuit:?}")]
    NearDiscriminant {
        segment: usize,
        circuit: Vec<usize>,
        dist: f64,
    },
    #[error("step size underflow at s = {0}")]
    StepUnderflow(f64),
    #[error("operator assembly failed: {0}")]
    Operator(#[from] OperatorError),
    #[error("path needs at least one point")]
    EmptyPath,
    #[error("restriction solve failed")]
    Restriction,
}

/// One transport problem: a path of fiber points, the parameter kappa,
/// and a start vector in Sing coordinates.
pub struct TransportTask {
    pub kappa: C64,
    pub path: Vec<Vec<C64>>,
    pub initial: Vec<C64>,
    pub ode_tol: f64,
    pub near_disc_tol: f64,
}

impl TransportTask {
    pub fn new(kappa: C64, path: Vec<Vec<C64>>, initial: Vec<C64>) -> Self {
        TransportTask {
            kappa,
            path,
            initial,
            ode_tol: 1e-9,
            near_disc_tol: 1e-6,
        }
    }
}

pub struct TransportResult {
    pub end: Vec<C64>,
    pub error_estimate: f64,
    pub steps: usize,
}

/// Precomputed x-independent data: L_C matrices and the Sing frame.
pub struct TransportSystem {
    cache: Vec<(Circuit, Vec<Vec<C64>>)>,
    circuits: Vec<Circuit>,
    sing_basis: Vec<Vec<C64>>,
    gram: Vec<Vec<C64>>,
    diag: Vec<C64>,
    n: usize,
}

impl TransportSystem {
    pub fn new(fam: &ArrangementFamily, a: &WeightVector, sing: &SingularSubspace) -> Self {
        let circuits = fam.circuits();
        TransportSystem {
            cache: lc_cache_c64(fam, a, &circuits),
            circuits,
            sing_basis: sing.basis.to_c64(),
            gram: sing.gram.to_c64(),
            diag: sing.diag.iter().map(|c| c.to_c64()).collect(),
            n: fam.n,
        }
    }

    /// Sing coordinates of a full flag vector (assumed to lie in Sing).
    pub fn coordinates(&self, v: &[C64]) -> Option<Vec<C64>> {
        let dim = self.sing_basis[0].len();
        let rhs: Vec<C64> = (0..dim)
            .map(|row| {
                let bcol: Vec<C64> = self.sing_basis.iter().map(|r| r[row]).collect();
                crate::osflag::contravariant_pairing_c64(&self.diag, &bcol, v)
            })
            .collect();
        crate::linalg::csolve(&self.gram, &rhs)
    }

    /// Restricted direction operator (1/kappa) sum_j dx_j K_j(x) on Sing.
    fn direction_operator(
        &self,
        x: &[C64],
        dx: &[C64],
        kappa: C64,
        near_tol: f64,
    ) -> Result<Vec<Vec<C64>>, TransportError> {
        let full_dim = self.cache[0].1.len();
        let mut total = vec![vec![C64::new(0.0, 0.0); full_dim]; full_dim];
        for j in 0..self.n {
            if dx[j].norm() == 0.0 {
                continue;
            }
            let kj = k_j_matrix_c64(&self.cache, x, j, near_tol)?;
            for r in 0..full_dim {
                for c in 0..full_dim {
                    total[r][c] += dx[j] * kj[r][c];
                }
            }
        }
        let restricted =
            restrict_to_sing_c64(&self.sing_basis, &self.gram, &self.diag, &total)
                .ok_or(TransportError::Restriction)?;
        let dim = restricted.len();
        let mut out = restricted;
        for row in out.iter_mut().take(dim) {
            for c in row.iter_mut() {
                *c /= kappa;
            }
        }
        Ok(out)
    }
}

/// Smallest |f_C(x(s))| over the segment x0 + s (x1 - x0), s in [0,1]:
/// point-to-segment distance in the complex f_C line.
fn segment_min_fc(c: &Circuit, x0: &[C64], x1: &[C64]) -> f64 {
    let a: C64 = c
        .members
        .iter()
        .map(|&m| c.lambda[m].to_c64() * x0[m])
        .sum();
    let b: C64 = c
        .members
        .iter()
        .map(|&m| c.lambda[m].to_c64() * (x1[m] - x0[m]))
        .sum();
    if b.norm() == 0.0 {
        return a.norm();
    }
    let t = (-(a * b.conj()).re / b.norm_sqr()).clamp(0.0, 1.0);
    (a + b * t).norm()
}

/// Transport the initial Sing vector along the whole path with an
/// embedded Dormand-Prince 4(5) integrator.
pub fn transport(
    fam: &ArrangementFamily,
    a: &WeightVector,
    sing: &SingularSubspace,
    task: &TransportTask,
) -> Result<TransportResult, TransportError> {
    let system = TransportSystem::new(fam, a, sing);
    transport_with(&system, task)
}

pub fn transport_with(
    system: &TransportSystem,
    task: &TransportTask,
) -> Result<TransportResult, TransportError> {
    if task.path.is_empty() {
        return Err(TransportError::EmptyPath);
    }
    let mut v = task.initial.clone();
    let mut err_acc = 0.0f64;
    let mut steps = 0usize;
    for (seg, win) in task.path.windows(2).enumerate() {
        let (x0, x1) = (&win[0], &win[1]);
        let scale = x0
            .iter()
            .chain(x1.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        for c in &system.circuits {
            let dist = segment_min_fc(c, x0, x1);
            if dist <= task.near_disc_tol * (1.0 + scale) {
                return Err(TransportError::NearDiscriminant {
                    segment: seg,
                    circuit: c.members.iter().map(|&m| m + 1).collect(),
                    dist,
                });
            }
        }
        let dx: Vec<C64> = x1.iter().zip(x0).map(|(b, a)| b - a).collect();
        if dx.iter().all(|c| c.norm() == 0.0) {
            continue;
        }
        let f = |s: f64, y: &[C64]| -> Result<Vec<C64>, TransportError> {
            let x: Vec<C64> = x0
                .iter()
                .zip(&dx)
                .map(|(x0j, dxj)| x0j + dxj * s)
                .collect();
            let near = task.near_disc_tol * 1e-3;
            let m = system.direction_operator(&x, &dx, task.kappa, near)?;
            Ok(crate::linalg::cmat_matvec(&m, y))
        };
        let (end, err, st) = rk45(&f, v, task.ode_tol)?;
        v = end;
        err_acc += err;
        steps += st;
    }
    Ok(TransportResult {
        end: v,
        error_estimate: err_acc,
        steps,
    })
}

/// Relative defect of transporting around a closed loop; flatness of the
/// connection makes this an integrator diagnostic.
pub fn loop_flatness(
    fam: &ArrangementFamily,
    a: &WeightVector,
    sing: &SingularSubspace,
    task: &TransportTask,
) -> Result<f64, TransportError> {
    let result = transport(fam, a, sing, task)?;
    let num: f64 = result
        .end
        .iter()
        .zip(&task.initial)
        .map(|(e, s)| (e - s).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = task
        .initial
        .iter()
        .map(|s| s.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

/// Dormand-Prince 5(4) embedded pair on s in [0,1] with adaptive steps.
fn rk45<F>(f: &F, mut y: Vec<C64>, tol: f64) -> Result<(Vec<C64>, f64, usize), TransportError>
where
    F: Fn(f64, &[C64]) -> Result<Vec<C64>, TransportError>,
{
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut s = 0.0f64;
    let mut h = 0.1f64;
    let mut err_acc = 0.0f64;
    let mut steps = 0usize;
    while s < 1.0 {
        if h < 1e-14 {
            return Err(TransportError::StepUnderflow(s));
        }
        if s + h > 1.0 {
            h = 1.0 - s;
        }
        let mut k: Vec<Vec<C64>> = Vec::with_capacity(7);
        for stage in 0..7 {
            let mut ys = y.clone();
            for (prev, kp) in k.iter().enumerate() {
                let w = A[stage][prev] * h;
                if w == 0.0 {
                    continue;
                }
                for (yi, ki) in ys.iter_mut().zip(kp) {
                    *yi += ki * w;
                }
            }
            k.push(f(s + C[stage] * h, &ys)?);
        }
        let mut y5 = y.clone();
        let mut err = 0.0f64;
        let mut ynorm = 0.0f64;
        for i in 0..y.len() {
            let mut d5 = C64::new(0.0, 0.0);
            let mut d4 = C64::new(0.0, 0.0);
            for stage in 0..7 {
                d5 += k[stage][i] * B5[stage];
                d4 += k[stage][i] * B4[stage];
            }
            y5[i] += d5 * h;
            err += ((d5 - d4) * h).norm_sqr();
            ynorm = ynorm.max(y5[i].norm());
        }
        let err = err.sqrt();
        let bound = tol * (1.0 + ynorm);
        if err <= bound {
            s += h;
            y = y5;
            err_acc += err;
            steps += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (bound / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    Ok((y, err_acc, steps))
}
