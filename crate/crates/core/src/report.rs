//! Report building for the CLI: analysis summaries, solve reports,
//! operator dumps, spectrum comparisons, and the certification pipeline.

use crate::arrangement::{
    load_family, ArrangementFamily, DiscriminantMembership, FiberPoint, WeightVector,
};
use crate::critical::{
    d_minor, e_map, marked_w_values, master_hessian, residue_form, s_star_values,
    solve_critical, specialization_vector, x_to_c64, MasterContext,
    SolveOptions,
};
use crate::lagrangian::{char_variety_fiber, match_tuples, LagrangianModel, LagrangianPoint};
use crate::laurent::poisson_bracket;
use crate::linalg::cdet;
use crate::operators::k_j_matrix;
use crate::osflag::{
    contravariant_pairing_c64, marked_flag_elements, singular_subspace, StdBasis,
};
use crate::rational::{C64, CQ};
use crate::transport::{transport, TransportTask};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: String, // pass | fail | skipped
    pub max_residual: f64,
    pub tolerance: f64,
    pub details: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub seed: u64,
    pub residual_tol: f64,
    pub dedup_tol: f64,
    pub ode_tol: f64,
    pub version: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub checks: Vec<CheckRecord>,
    pub environment: Environment,
    pub certified: bool,
}

pub struct Tolerances {
    pub solve: SolveOptions,
    pub ode_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            solve: SolveOptions::default(),
            ode_tol: 1e-9,
        }
    }
}

fn c64_json(c: C64) -> Value {
    json!([c.re, c.im])
}

fn cvec_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&c| c64_json(c)).collect())
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{0}")]
    Input(String),
    #[error("x on discriminant: circuit {0:?}")]
    OnDiscriminant(Vec<usize>),
    #[error("{0}")]
    Failed(String),
}

pub fn parse_input(doc: &str) -> Result<(ArrangementFamily, WeightVector, FiberPoint), ReportError> {
    load_family(doc).map_err(|e| ReportError::Input(e.to_string()))
}

fn require_off_discriminant(
    fam: &ArrangementFamily,
    x: &FiberPoint,
) -> Result<(), ReportError> {
    match fam.discriminant_membership(x) {
        DiscriminantMembership::Off => Ok(()),
        DiscriminantMembership::On { violating } => Err(ReportError::OnDiscriminant(
            violating.iter().map(|&m| m + 1).collect(),
        )),
    }
}

/// `analyze`: combinatorics of the family and status of the fiber point.
pub fn cmd_analyze(doc: &str) -> Result<Value, ReportError> {
    let (fam, a, x) = parse_input(doc)?;
    let circuits = fam.circuits();
    let independent: Vec<usize> = (0..=fam.k)
        .map(|p| fam.independent_subsets(p).map(|s| s.len()).unwrap_or(0))
        .collect();
    let discriminant = match fam.discriminant_membership(&x) {
        DiscriminantMembership::Off => "off".to_string(),
        DiscriminantMembership::On { violating } => format!(
            "on (circuit {:?})",
            violating.iter().map(|&m| m + 1).collect::<Vec<_>>()
        ),
    };
    Ok(json!({
        "k": fam.k,
        "n": fam.n,
        "chi": fam.euler_characteristic(),
        "abs_chi": fam.abs_chi(),
        "circuits": circuits.iter().map(|c| {
            json!({
                "members": c.members.iter().map(|&m| m + 1).collect::<Vec<_>>(),
                "lambda": c.lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
        "independent_subsets_per_degree": independent,
        "discriminant": discriminant,
        "unbalanced": match fam.is_unbalanced(&a, &x, 1 << 16) {
            Ok((ub, _)) => Value::Bool(ub),
            Err(e) => Value::String(format!("undetermined: {e}")),
        },
        "weights": a.a.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "a_infinity": a.a_infinity().to_string(),
    }))
}

/// `solve`: critical points with residuals, Hessians, Lagrangian images,
/// and an inline certificate block.
pub fn cmd_solve(doc: &str, tols: &Tolerances) -> Result<Value, ReportError> {
    let (fam, a, x) = parse_input(doc)?;
    require_off_discriminant(&fam, &x)?;
    let xc = x_to_c64(&x.x);
    let crit = solve_critical(&fam, &a, &xc, &tols.solve)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let ctx = MasterContext::new(&fam, &a, &xc);
    let model = LagrangianModel::new(&fam, &a)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let points: Vec<Value> = crit
        .points
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let g = ctx.gradient(u);
            let residual = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let lp = model.psi_map(&ctx, &xc, u);
            json!({
                "u": cvec_json(u),
                "residual": residual,
                "hessian": c64_json(crit.hessians[i]),
                "p": cvec_json(&lp.p),
                "lagrangian_residual": lp.residual,
            })
        })
        .collect();
    let cert = certify_inner(&fam, &a, &x, tols);
    Ok(json!({
        "chi": crit.chi,
        "points": points,
        "certificate": serde_json::to_value(&cert).unwrap(),
    }))
}

/// CSV rows for `solve --csv`.
pub fn solve_csv(doc: &str, tols: &Tolerances) -> Result<String, ReportError> {
    let (fam, a, x) = parse_input(doc)?;
    require_off_discriminant(&fam, &x)?;
    let xc = x_to_c64(&x.x);
    let crit = solve_critical(&fam, &a, &xc, &tols.solve)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let ctx = MasterContext::new(&fam, &a, &xc);
    let mut header = Vec::new();
    for i in 1..=fam.k {
        header.push(format!("re_u{i}"));
        header.push(format!("im_u{i}"));
    }
    header.push("hess_re".into());
    header.push("hess_im".into());
    for j in 1..=fam.n {
        header.push(format!("p{j}_re"));
        header.push(format!("p{j}_im"));
    }
    let mut out = header.join(",") + "\n";
    for (i, u) in crit.points.iter().enumerate() {
        let mut row = Vec::new();
        for c in u {
            row.push(format!("{:?}", c.re));
            row.push(format!("{:?}", c.im));
        }
        row.push(format!("{:?}", crit.hessians[i].re));
        row.push(format!("{:?}", crit.hessians[i].im));
        let f = ctx.forms(u);
        for j in 0..fam.n {
            let p = ctx.a[j] / f[j];
            row.push(format!("{:?}", p.re));
            row.push(format!("{:?}", p.im));
        }
        out += &(row.join(",") + "\n");
    }
    Ok(out)
}

/// `gm`: the operators K_j(x) as exact rational matrices, full and
/// restricted to Sing.
pub fn cmd_gm(doc: &str) -> Result<Value, ReportError> {
    let (fam, a, x) = parse_input(doc)?;
    require_off_discriminant(&fam, &x)?;
    let circuits = fam.circuits();
    let sing = singular_subspace(&fam, &a)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let qmat_json = |m: &crate::linalg::QMat| -> Value {
        Value::Array(
            (0..m.rows)
                .map(|i| {
                    Value::Array(
                        (0..m.cols)
                            .map(|j| Value::String(m[(i, j)].to_string()))
                            .collect(),
                    )
                })
                .collect(),
        )
    };
    let mut ops = Vec::new();
    for j in 0..fam.n {
        let op = k_j_matrix(&fam, &a, &circuits, &x.x, j, Some(&sing))
            .map_err(|e| ReportError::Failed(e.to_string()))?;
        ops.push(json!({
            "j": j + 1,
            "matrix": qmat_json(&op.matrix),
            "restricted": qmat_json(op.restricted.as_ref().unwrap()),
        }));
    }
    Ok(json!({
        "basis_degree": fam.k,
        "basis": StdBasis::new(&fam, fam.k).sets.iter()
            .map(|s| s.iter().map(|&i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "sing_dim": sing.dim(),
        "operators": ops,
    }))
}

/// `specvar`: joint spectrum of the restricted operators against the
/// Lagrangian fiber, with the nearest-neighbor matching summary.
pub fn cmd_specvar(doc: &str, tols: &Tolerances) -> Result<Value, ReportError> {
    let (fam, a, x) = parse_input(doc)?;
    require_off_discriminant(&fam, &x)?;
    let sing = singular_subspace(&fam, &a)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let tuples = char_variety_fiber(&fam, &a, &x.x, &sing, tols.solve.seed)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let xc = x_to_c64(&x.x);
    let crit = solve_critical(&fam, &a, &xc, &tols.solve)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let ctx = MasterContext::new(&fam, &a, &xc);
    let model = LagrangianModel::new(&fam, &a)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    let psi: Vec<Vec<C64>> = model
        .fiber_points(&ctx, &xc, &crit)
        .into_iter()
        .map(|p| p.p)
        .collect();
    let discrepancy = match_tuples(&tuples, &psi);
    let scale = psi
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(1.0, f64::max);
    Ok(json!({
        "joint_spectrum": tuples.iter().map(|t| cvec_json(t)).collect::<Vec<_>>(),
        "psi_images": psi.iter().map(|t| cvec_json(t)).collect::<Vec<_>>(),
        "max_discrepancy": discrepancy,
        "tolerance": 1e-8 * scale,
        "matched": discrepancy <= 1e-8 * scale,
    }))
}

/// `transport`: integrate the flat system along a path.
pub fn cmd_transport(
    doc: &str,
    kappa: C64,
    path: Vec<Vec<C64>>,
    initial: Vec<C64>,
    tols: &Tolerances,
) -> Result<Value, ReportError> {
    let (fam, a, _) = parse_input(doc)?;
    let sing = singular_subspace(&fam, &a)
        .map_err(|e| ReportError::Failed(e.to_string()))?;
    if initial.len() != sing.dim() {
        return Err(ReportError::Input(format!(
            "initial vector has length {}, Sing dimension is {}",
            initial.len(),
            sing.dim()
        )));
    }
    let mut task = TransportTask::new(kappa, path, initial);
    task.ode_tol = tols.ode_tol;
    let result =
        transport(&fam, &a, &sing, &task).map_err(|e| ReportError::Failed(e.to_string()))?;
    Ok(json!({
        "end": cvec_json(&result.end),
        "error_estimate": result.error_estimate,
        "steps": result.steps,
        "ode_tol": tols.ode_tol,
    }))
}

struct Checks {
    list: Vec<CheckRecord>,
}

impl Checks {
    fn push(&mut self, name: &str, residual: f64, tol: f64, details: String) {
        self.list.push(CheckRecord {
            name: name.to_string(),
            status: if residual <= tol { "pass" } else { "fail" }.to_string(),
            max_residual: residual,
            tolerance: tol,
            details,
        });
    }

    fn exact(&mut self, name: &str, ok: bool, details: String) {
        self.list.push(CheckRecord {
            name: name.to_string(),
            status: if ok { "pass" } else { "fail" }.to_string(),
            max_residual: if ok { 0.0 } else { f64::INFINITY },
            tolerance: 0.0,
            details,
        });
    }

    fn skip(&mut self, name: &str, details: String) {
        self.list.push(CheckRecord {
            name: name.to_string(),
            status: "skipped".to_string(),
            max_residual: 0.0,
            tolerance: 0.0,
            details,
        });
    }

    fn fail(&mut self, name: &str, details: String) {
        self.list.push(CheckRecord {
            name: name.to_string(),
            status: "fail".to_string(),
            max_residual: f64::INFINITY,
            tolerance: 0.0,
            details,
        });
    }
}

/// `certify`: the full ordered battery of theorem checks.
pub fn cmd_certify(doc: &str, tols: &Tolerances) -> Result<Certificate, ReportError> {
    let (fam, a, x) = parse_input(doc)?;
    require_off_discriminant(&fam, &x)?;
    Ok(certify_inner(&fam, &a, &x, tols))
}

fn certify_inner(
    fam: &ArrangementFamily,
    a: &WeightVector,
    x: &FiberPoint,
    tols: &Tolerances,
) -> Certificate {
    let mut checks = Checks { list: Vec::new() };
    let xc = x_to_c64(&x.x);
    let ctx = MasterContext::new(fam, a, &xc);
    let basis = StdBasis::new(fam, fam.k);

    // 1. Critical count against |chi|.
    let crit = match solve_critical(fam, a, &xc, &tols.solve) {
        Ok(c) => {
            checks.exact(
                "critical_count",
                true,
                format!("{} points = |chi|", c.points.len()),
            );
            Some(c)
        }
        Err(e) => {
            checks.fail("critical_count", e.to_string());
            None
        }
    };

    let diag_exact = crate::osflag::contravariant_gram(fam, a, fam.k);
    let diag: Vec<C64> = diag_exact.iter().map(|c| c.to_c64()).collect();
    let specs: Option<Vec<Vec<C64>>> = crit.as_ref().map(|c| {
        c.points
            .iter()
            .map(|u| specialization_vector(fam, &ctx, &basis, u))
            .collect()
    });

    // 2/3. Specialization norm and cross-term orthogonality.
    if let (Some(crit), Some(specs)) = (&crit, &specs) {
        let sign = if fam.k % 2 == 0 { 1.0 } else { -1.0 };
        let mut worst_norm = 0.0f64;
        let mut worst_cross = 0.0f64;
        for (i, fi) in specs.iter().enumerate() {
            for (j, fj) in specs.iter().enumerate() {
                let s = contravariant_pairing_c64(&diag, fi, fj);
                if i == j {
                    let expect = crit.hessians[i] * sign;
                    worst_norm = worst_norm.max((s - expect).norm() / expect.norm());
                } else {
                    let ni = contravariant_pairing_c64(&diag, fi, fi).norm();
                    let nj = contravariant_pairing_c64(&diag, fj, fj).norm();
                    worst_cross = worst_cross.max(s.norm() / (ni * nj).sqrt());
                }
            }
        }
        checks.push(
            "specialization_norm",
            worst_norm,
            1e-8,
            "S(F(u),F(u)) = (-1)^k Hess(u)".into(),
        );
        checks.push(
            "specialization_orthogonality",
            worst_cross,
            1e-8,
            "distinct critical points S-orthogonal".into(),
        );
    } else {
        checks.skip("specialization_norm", "no critical data".into());
        checks.skip("specialization_orthogonality", "no critical data".into());
    }

    // 4. E after [S] is (-1)^k identity on Sing.
    let sing = singular_subspace(fam, a).ok();
    match (&sing, &crit, &specs) {
        (Some(sing), Some(crit), Some(specs)) => {
            let sdiag: Vec<C64> = sing.diag.iter().map(|c| c.to_c64()).collect();
            let sb = sing.basis.to_c64();
            let sign = if fam.k % 2 == 0 { 1.0 } else { -1.0 };
            let mut worst = 0.0f64;
            for col in 0..sing.dim() {
                let v: Vec<C64> = sb.iter().map(|r| r[col]).collect();
                let g = s_star_values(&sdiag, &v, specs);
                let back = e_map(&g, crit, specs, v.len());
                let scale = v.iter().map(|c| c.norm()).fold(1e-30, f64::max);
                for (b, vi) in back.iter().zip(&v) {
                    worst = worst.max((b - vi * sign).norm() / scale);
                }
            }
            checks.push(
                "canonical_isomorphism",
                worst,
                1e-8,
                "E after [S] = (-1)^k id on Sing".into(),
            );
        }
        _ => checks.skip("canonical_isomorphism", "missing Sing or critical data".into()),
    }

    // 5/6. Operator symmetry, preservation, commutativity: exact.
    let circuits = fam.circuits();
    if let Some(sing) = &sing {
        let mut restricted = Vec::new();
        let mut ok = true;
        let mut detail = String::from("exact rational identities");
        for j in 0..fam.n {
            match k_j_matrix(fam, a, &circuits, &x.x, j, Some(sing)) {
                Ok(op) => {
                    // Symmetry: diag * K == (diag * K)^T entrywise.
                    let m = &op.matrix;
                    'sym: for p in 0..m.rows {
                        for q in 0..p {
                            let lhs = &diag_exact[p] * &m[(p, q)];
                            let rhs = &diag_exact[q] * &m[(q, p)];
                            if lhs != rhs {
                                ok = false;
                                detail = format!("K_{} not S-symmetric", j + 1);
                                break 'sym;
                            }
                        }
                    }
                    restricted.push(op.restricted.unwrap());
                }
                Err(e) => {
                    ok = false;
                    detail = e.to_string();
                }
            }
        }
        checks.exact("operator_symmetry_preservation", ok, detail);
        let mut comm_ok = true;
        for i in 0..restricted.len() {
            for j in i + 1..restricted.len() {
                let ij = restricted[i].matmul(&restricted[j]);
                let ji = restricted[j].matmul(&restricted[i]);
                if !ij.sub(&ji).is_zero() {
                    comm_ok = false;
                }
            }
        }
        checks.exact(
            "sing_commutativity",
            comm_ok && restricted.len() == fam.n,
            "[K_i, K_j] = 0 on Sing, exact".into(),
        );
    } else {
        checks.skip("operator_symmetry_preservation", "no Sing".into());
        checks.skip("sing_commutativity", "no Sing".into());
    }

    // 7. Marked relations: v (exact), w and p (numeric).
    match &sing {
        Some(sing) => match marked_flag_elements(fam, sing) {
            Ok(_) => checks.exact("marked_v_relations", true, "exact".into()),
            Err(e) => checks.fail("marked_v_relations", e.to_string()),
        },
        None => checks.skip("marked_v_relations", "no Sing".into()),
    }
    if let Some(crit) = &crit {
        let w = marked_w_values(fam, &ctx, &basis, crit);
        let mut worst = 0.0f64;
        for tail in crate::arrangement::subsets_lex(fam.n, fam.k - 1) {
            for pi in 0..crit.points.len() {
                let f = &crit.f_values[pi];
                let mut total = C64::new(0.0, 0.0);
                let mut scale = 1e-30f64;
                for j in 0..fam.n {
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
                        v *= ctx.a[i] / f[i];
                    }
                    total += v;
                    scale = scale.max(v.norm());
                }
                worst = worst.max(total.norm() / scale);
            }
        }
        let _ = w;
        checks.push("marked_w_relations", worst, 1e-10, "sum over j vanishes".into());
    } else {
        checks.skip("marked_w_relations", "no critical data".into());
    }

    // 8-12. Lagrangian-side checks.
    let model = LagrangianModel::new(fam, a).ok();
    match (&model, &crit) {
        (Some(model), Some(crit)) => {
            let gens = model.generators();
            let mut inv_ok = true;
            for f in &gens {
                for g in &gens {
                    if !poisson_bracket(f, g).is_zero() {
                        inv_ok = false;
                    }
                }
            }
            checks.exact("poisson_involution", inv_ok, "exact Laurent brackets".into());

            let pts: Vec<LagrangianPoint> = model.fiber_points(&ctx, &xc, crit);
            let psi_res = pts.iter().map(|p| p.residual).fold(0.0, f64::max);
            let scale = xc.iter().map(|c| c.norm()).fold(1.0, f64::max);
            checks.push("psi_residuals", psi_res, 1e-9 * scale, "generator values at Psi(u)".into());

            match model.marked_p_elements(fam, &pts) {
                Ok(_) => checks.push("marked_p_relations", 0.0, 1e-10, "verified".into()),
                Err(e) => checks.fail("marked_p_relations", e.to_string()),
            }

            // Chart checks and Hess/Jac identity.
            let charts: Vec<Vec<usize>> = basis.sets.iter().take(2).cloned().collect();
            let mut chart_worst = 0.0f64;
            let mut hess_worst = 0.0f64;
            let mut chart_detail = String::from("formula charts + numeric derivative");
            for pt in &pts {
                let vals: Vec<C64> = charts
                    .iter()
                    .filter_map(|c| model.jacobian_i(fam, pt, c).ok())
                    .collect();
                for w in vals.windows(2) {
                    chart_worst =
                        chart_worst.max((w[0] - w[1]).norm() / (1.0 + w[0].norm()));
                }
                // Numeric chart derivative on the first chart.
                if let Some(chart) = charts.first() {
                    let bar: Vec<usize> =
                        (0..fam.n).filter(|j| !chart.contains(j)).collect();
                    let q_i: Vec<C64> = chart.iter().map(|&j| xc[j]).collect();
                    let p0: Vec<C64> = bar.iter().map(|&j| pt.p[j]).collect();
                    let m = bar.len();
                    let h = 1e-6;
                    let mut jac = vec![vec![C64::new(0.0, 0.0); m]; m];
                    let mut ok = true;
                    for cc in 0..m {
                        let mut plus = p0.clone();
                        plus[cc] += C64::new(h, 0.0);
                        let mut minus = p0.clone();
                        minus[cc] -= C64::new(h, 0.0);
                        match (
                            model.chart_q_bar(chart, &q_i, &plus),
                            model.chart_q_bar(chart, &q_i, &minus),
                        ) {
                            (Some(qp), Some(qm)) => {
                                for r in 0..m {
                                    jac[r][cc] = (qp[r] - qm[r]) / (2.0 * h);
                                }
                            }
                            _ => ok = false,
                        }
                    }
                    if ok {
                        let numeric = cdet(&jac);
                        let d = d_minor(fam, chart).to_c64();
                        if let Ok(v) = model.jacobian_i(fam, pt, chart) {
                            let formula = v / (d * d);
                            chart_worst = chart_worst
                                .max((numeric - formula).norm() / (1.0 + formula.norm()));
                        }
                    } else {
                        chart_detail = "chart reconstruction failed".into();
                        chart_worst = f64::INFINITY;
                    }
                }
                // Hess = (-1)^n d_I^2 Jac_I prod p_j^2 / a_j.
                if let Ok(dijac) = model.jacobian_i(fam, pt, &charts[0]) {
                    let mut prod = C64::new(if fam.n % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
                    for j in 0..fam.n {
                        prod *= pt.p[j] * pt.p[j] / ctx.a[j];
                    }
                    let hess_l = model.hessian_on_l(fam, pt);
                    hess_worst =
                        hess_worst.max((dijac * prod - hess_l).norm() / hess_l.norm());
                }
            }
            checks.push("jacobian_charts", chart_worst, 1e-6, chart_detail);
            checks.push(
                "hessian_jacobian",
                hess_worst,
                1e-8,
                "Hess = (-1)^n d_I^2 Jac_I prod p_j^2/a_j".into(),
            );

            // Residue comparison across Psi.
            let ones = vec![C64::new(1.0, 0.0); pts.len()];
            let chart: Vec<usize> = charts[0].clone();
            match model.residue_form_l(fam, &pts, &chart, &ones, &ones) {
                Ok(on_l) => {
                    let on_c = residue_form(crit, &ones, &ones);
                    let rel = (on_l - on_c).norm() / (1.0 + on_c.norm());
                    checks.push("residue_comparison", rel, 1e-7, "fiber form vs critical form".into());
                }
                Err(e) => checks.fail("residue_comparison", e.to_string()),
            }

            // 13. Spectrum match.
            match &sing {
                Some(sing) => match char_variety_fiber(fam, a, &x.x, sing, tols.solve.seed) {
                    Ok(tuples) => {
                        let psi: Vec<Vec<C64>> = pts.iter().map(|p| p.p.clone()).collect();
                        if tuples.len() == psi.len() {
                            let d = match_tuples(&tuples, &psi);
                            let scale = psi
                                .iter()
                                .flatten()
                                .map(|c| c.norm())
                                .fold(1.0, f64::max);
                            checks.push("spectrum_match", d, 1e-8 * scale, "joint spectrum vs fiber".into());
                        } else {
                            checks.fail(
                                "spectrum_match",
                                format!("{} tuples vs {} fiber points", tuples.len(), psi.len()),
                            );
                        }
                    }
                    Err(e) => checks.fail("spectrum_match", e.to_string()),
                },
                None => checks.skip("spectrum_match", "no Sing".into()),
            }
        }
        _ => {
            for name in [
                "poisson_involution",
                "psi_residuals",
                "marked_p_relations",
                "jacobian_charts",
                "hessian_jacobian",
                "residue_comparison",
                "spectrum_match",
            ] {
                checks.skip(name, "missing Lagrangian model or critical data".into());
            }
        }
    }

    // 14. Reality for real-positive data.
    let real_positive = a.all_positive() && x.x.iter().all(|c| c.is_real());
    if real_positive {
        if let Some(crit) = &crit {
            let worst = crit
                .points
                .iter()
                .flatten()
                .map(|c| c.im.abs())
                .fold(0.0, f64::max);
            checks.push("reality", worst, 1e-10, "real positive data: real critical points".into());
        } else {
            checks.skip("reality", "no critical data".into());
        }
    } else {
        checks.skip("reality", "data not real-positive".into());
    }

    let hessian_cross = if let (Some(crit), true) = (&crit, true) {
        // Hessian formula against the analytic determinant.
        let mut worst = 0.0f64;
        for u in &crit.points {
            let comb = master_hessian(fam, &ctx, &basis, u);
            let det = crate::critical::hessian_det(&ctx, u);
            worst = worst.max((comb - det).norm() / (1.0 + det.norm()));
        }
        Some(worst)
    } else {
        None
    };
    match hessian_cross {
        Some(w) => checks.push("hessian_formula", w, 1e-8, "closed form vs analytic determinant".into()),
        None => checks.skip("hessian_formula", "no critical data".into()),
    }

    let certified = checks
        .list
        .iter()
        .all(|c| c.status != "fail");
    Certificate {
        checks: checks.list,
        environment: Environment {
            seed: tols.solve.seed,
            residual_tol: tols.solve.residual_tol,
            dedup_tol: tols.solve.dedup_tol,
            ode_tol: tols.ode_tol,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        certified,
    }
}

/// Parse a complex scalar written as `re`, `re,im`, or `re+imi`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    if let Some((re, im)) = s.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|_| format!("bad real part: {re}"))?;
        let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part: {im}"))?;
        return Ok(C64::new(re, im));
    }
    if let Ok(c) = CQ::parse_rational(s.trim()) {
        return Ok(c.to_c64());
    }
    s.trim()
        .parse::<f64>()
        .map(|re| C64::new(re, 0.0))
        .map_err(|_| format!("cannot parse complex number from {s:?}"))
}

/// Parse a JSON array of complex numbers: entries are numbers or
/// [re, im] pairs.
pub fn parse_cvec(v: &Value) -> Result<Vec<C64>, String> {
    let arr = v.as_array().ok_or("expected an array")?;
    arr.iter()
        .map(|e| match e {
            Value::Number(n) => Ok(C64::new(n.as_f64().unwrap(), 0.0)),
            Value::Array(pair) if pair.len() == 2 => {
                let re = pair[0].as_f64().ok_or("non-numeric entry")?;
                let im = pair[1].as_f64().ok_or("non-numeric entry")?;
                Ok(C64::new(re, im))
            }
            Value::String(s) => parse_complex(s),
            _ => Err("entry must be a number, a [re, im] pair, or a string".to_string()),
        })
        .collect()
}
