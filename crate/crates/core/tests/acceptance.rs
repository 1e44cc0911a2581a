//! End-to-end acceptance battery. Each test prints one summary line so a
//! full run reads as a checklist.

use critset::arrangement::{
    load_family, subsets_lex, ArrangementFamily, DiscriminantMembership, FiberPoint,
    WeightVector,
};
use critset::critical::{
    d_minor, e_map, residue_form, s_star_values, solve_critical, specialization_vector,
    x_to_c64, MasterContext, SolveOptions,
};
use critset::fixtures;
use critset::lagrangian::{char_variety_fiber, match_tuples, LagrangianModel};
use critset::laurent::poisson_bracket;
use critset::linalg::QMat;
use critset::operators::k_j_matrix;
use critset::osflag::{
    contravariant_gram, contravariant_pairing_c64, marked_flag_elements, singular_subspace,
    sort_with_sign, StdBasis,
};
use critset::rational::C64;
use critset::transport::{loop_flatness, transport, TransportTask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if ok { "pass" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Random family with rational B entries in [-3, 3], positive rational
/// weights, rational x. Returns None when the draw is invalid (zero
/// column, rank drop, x on the discriminant).
fn random_family(
    rng: &mut ChaCha8Rng,
    max_k: usize,
) -> Option<(ArrangementFamily, WeightVector, FiberPoint)> {
    let k = 1 + (rng.gen::<u32>() as usize) % max_k;
    let n = k + 1 + (rng.gen::<u32>() as usize) % 3;
    let frac = |rng: &mut ChaCha8Rng| {
        let p = rng.gen_range(-3i64..=3);
        let q = *[1i64, 1, 1, 2].get(rng.gen_range(0..4)).unwrap();
        format!("{p}/{q}")
    };
    let b: Vec<Vec<String>> = (0..k)
        .map(|_| (0..n).map(|_| frac(rng)).collect())
        .collect();
    let weights: Vec<String> = (0..n)
        .map(|_| format!("{}/{}", rng.gen_range(1i64..=5), rng.gen_range(1i64..=3)))
        .collect();
    let x: Vec<String> = (0..n)
        .map(|_| format!("{}/{}", rng.gen_range(-12i64..=12), rng.gen_range(1i64..=3)))
        .collect();
    let doc = serde_json::json!({"k": k, "n": n, "B": b, "weights": weights, "x": x});
    let (fam, a, x) = load_family(&doc.to_string()).ok()?;
    match fam.discriminant_membership(&x) {
        DiscriminantMembership::Off => Some((fam, a, x)),
        DiscriminantMembership::On { .. } => None,
    }
}

fn solve_with_fallback(
    fam: &ArrangementFamily,
    a: &WeightVector,
    xc: &[C64],
) -> Result<critset::critical::CriticalData, critset::critical::SolveError> {
    let mut opts = SolveOptions::default();
    match solve_critical(fam, a, xc, &opts) {
        Ok(c) => Ok(c),
        Err(_) => {
            opts.budget_factor = 4000;
            opts.seed ^= 0x9e37_79b9;
            solve_critical(fam, a, xc, &opts)
        }
    }
}

#[test]
fn criterion_01_critical_point_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut checked = 0usize;
    while checked < 100 {
        let Some((fam, a, x)) = random_family(&mut rng, 3) else {
            continue;
        };
        if fam.abs_chi() > 24 {
            continue; // keep the desk-scale runtime budget
        }
        let crit = solve_with_fallback(&fam, &a, &x_to_c64(&x.x));
        let ok = matches!(&crit, Ok(c) if c.points.len() == fam.abs_chi());
        if !ok {
            verdict(
                "1 (critical-point count)",
                false,
                &format!(
                    "k={} n={} chi={} result={:?}",
                    fam.k,
                    fam.n,
                    fam.abs_chi(),
                    crit.map(|c| c.points.len())
                ),
            );
        }
        checked += 1;
    }
    verdict(
        "1 (critical-point count)",
        true,
        "100 random fixtures, count = |chi|, all nondegenerate",
    );
}

#[test]
fn criterion_02_specialization_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst_norm = 0.0f64;
    let mut worst_cross = 0.0f64;
    let mut checked = 0usize;
    let mut cases: Vec<(ArrangementFamily, WeightVector, FiberPoint)> =
        vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    while checked < 25 {
        match random_family(&mut rng, 3) {
            Some(c) if c.0.abs_chi() <= 16 => {
                cases.push(c);
                checked += 1;
            }
            _ => continue,
        }
    }
    for (fam, a, x) in &cases {
        let xc = x_to_c64(&x.x);
        let crit = solve_with_fallback(fam, a, &xc).unwrap();
        let ctx = MasterContext::new(fam, a, &xc);
        let basis = StdBasis::new(fam, fam.k);
        let diag: Vec<C64> = contravariant_gram(fam, a, fam.k)
            .iter()
            .map(|c| c.to_c64())
            .collect();
        let specs: Vec<Vec<C64>> = crit
            .points
            .iter()
            .map(|u| specialization_vector(fam, &ctx, &basis, u))
            .collect();
        let sign = if fam.k % 2 == 0 { 1.0 } else { -1.0 };
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
    }
    verdict(
        "2 (specialization norm/orthogonality)",
        worst_norm <= 1e-8 && worst_cross <= 1e-8,
        &format!("worst norm {worst_norm:.2e}, worst cross {worst_cross:.2e}"),
    );
}

#[test]
fn criterion_03_canonical_isomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut cases = vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    let mut added = 0usize;
    while added < 10 {
        match random_family(&mut rng, 2) {
            Some(c) if c.0.abs_chi() > 0 && c.0.abs_chi() <= 12 => {
                cases.push(c);
                added += 1;
            }
            _ => continue,
        }
    }
    let mut worst = 0.0f64;
    for (fam, a, x) in &cases {
        let xc = x_to_c64(&x.x);
        let crit = solve_with_fallback(fam, a, &xc).unwrap();
        let ctx = MasterContext::new(fam, a, &xc);
        let basis = StdBasis::new(fam, fam.k);
        let sing = singular_subspace(fam, a).unwrap();
        let sdiag: Vec<C64> = sing.diag.iter().map(|c| c.to_c64()).collect();
        let specs: Vec<Vec<C64>> = crit
            .points
            .iter()
            .map(|u| specialization_vector(fam, &ctx, &basis, u))
            .collect();
        let sign = if fam.k % 2 == 0 { 1.0 } else { -1.0 };
        let sb = sing.basis.to_c64();
        for col in 0..sing.dim() {
            let v: Vec<C64> = sb.iter().map(|r| r[col]).collect();
            let g = s_star_values(&sdiag, &v, &specs);
            let back = e_map(&g, &crit, &specs, v.len());
            let scale = v.iter().map(|c| c.norm()).fold(1e-30, f64::max);
            for (b, vi) in back.iter().zip(&v) {
                worst = worst.max((b - vi * sign).norm() / scale);
            }
        }
    }
    // Hand value on the two-point family: E after [S] is exactly -id on
    // the one-dimensional Sing.
    let (fam, a, x) = fixtures::fix1();
    let xc = x_to_c64(&x.x);
    let crit = solve_critical(&fam, &a, &xc, &SolveOptions::default()).unwrap();
    let ctx = MasterContext::new(&fam, &a, &xc);
    let basis = StdBasis::new(&fam, 1);
    let sing = singular_subspace(&fam, &a).unwrap();
    let sdiag: Vec<C64> = sing.diag.iter().map(|c| c.to_c64()).collect();
    let specs: Vec<Vec<C64>> = crit
        .points
        .iter()
        .map(|u| specialization_vector(&fam, &ctx, &basis, u))
        .collect();
    let v = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
    let back = e_map(&s_star_values(&sdiag, &v, &specs), &crit, &specs, 2);
    let exact = (back[0] + v[0]).norm().max((back[1] + v[1]).norm());
    verdict(
        "3 (canonical isomorphism)",
        worst <= 1e-8 && exact <= 1e-12,
        &format!("worst {worst:.2e}, hand case {exact:.2e}"),
    );
}

#[test]
fn criterion_04_operator_symmetry_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let mut cases = vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    let mut added = 0usize;
    while added < 6 {
        match random_family(&mut rng, 2) {
            Some(c) if c.0.n <= 6 => {
                cases.push(c);
                added += 1;
            }
            _ => continue,
        }
    }
    for (fam, a, x) in &cases {
        let circuits = fam.circuits();
        let sing = singular_subspace(fam, a).unwrap();
        let diag = contravariant_gram(fam, a, fam.k);
        let mut restricted: Vec<QMat> = Vec::new();
        for j in 0..fam.n {
            let op = k_j_matrix(fam, a, &circuits, &x.x, j, Some(&sing)).unwrap();
            let m = &op.matrix;
            for p in 0..m.rows {
                for q in 0..p {
                    let lhs = &diag[p] * &m[(p, q)];
                    let rhs = &diag[q] * &m[(q, p)];
                    assert_eq!(lhs, rhs, "K_{} symmetry", j + 1);
                }
            }
            // restriction succeeded, so Sing is preserved exactly
            restricted.push(op.restricted.unwrap());
        }
        for i in 0..restricted.len() {
            for j in i + 1..restricted.len() {
                let ij = restricted[i].matmul(&restricted[j]);
                let ji = restricted[j].matmul(&restricted[i]);
                assert!(ij.sub(&ji).is_zero(), "commutator on Sing");
            }
        }
    }
    verdict(
        "4 (operator symmetry/preservation/commutativity)",
        true,
        "exact rational equalities on all fixtures",
    );
}

#[test]
fn criterion_05_hessian_jacobian_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let mut cases = vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    let mut added = 0usize;
    while added < 10 {
        match random_family(&mut rng, 3) {
            Some(c) if c.0.abs_chi() > 0 && c.0.abs_chi() <= 12 => {
                cases.push(c);
                added += 1;
            }
            _ => continue,
        }
    }
    let mut worst = 0.0f64;
    let mut chart_worst = 0.0f64;
    for (fam, a, x) in &cases {
        let xc = x_to_c64(&x.x);
        let crit = solve_with_fallback(fam, a, &xc).unwrap();
        let ctx = MasterContext::new(fam, a, &xc);
        let model = LagrangianModel::new(fam, a).unwrap();
        let pts = model.fiber_points(&ctx, &xc, &crit);
        let basis = StdBasis::new(fam, fam.k);
        let charts: Vec<Vec<usize>> = basis.sets.iter().take(2).cloned().collect();
        let sign = if fam.n % 2 == 0 { 1.0 } else { -1.0 };
        for pt in &pts {
            let vals: Vec<C64> = charts
                .iter()
                .map(|c| model.jacobian_i(fam, pt, c).unwrap())
                .collect();
            for w in vals.windows(2) {
                chart_worst = chart_worst.max((w[0] - w[1]).norm() / (1.0 + w[0].norm()));
            }
            let hess_l = model.hessian_on_l(fam, pt);
            let mut prod = C64::new(sign, 0.0);
            for j in 0..fam.n {
                prod *= pt.p[j] * pt.p[j] / ctx.a[j];
            }
            worst = worst.max((vals[0] * prod - hess_l).norm() / hess_l.norm());
        }
    }
    // Exact regression values on the two-point family.
    let (fam, a, x) = fixtures::fix1();
    let xc = x_to_c64(&x.x);
    let crit = solve_critical(&fam, &a, &xc, &SolveOptions::default()).unwrap();
    let ctx = MasterContext::new(&fam, &a, &xc);
    let model = LagrangianModel::new(&fam, &a).unwrap();
    let pts = model.fiber_points(&ctx, &xc, &crit);
    let hess = model.hessian_on_l(&fam, &pts[0]);
    let jac = model.jacobian_i(&fam, &pts[0], &[0]).unwrap();
    let reg = (hess - C64::new(-8.0, 0.0))
        .norm()
        .max((jac - C64::new(-0.5, 0.0)).norm());
    verdict(
        "5 (Hessian/Jacobian identity)",
        worst <= 1e-8 && chart_worst <= 1e-12 && reg <= 1e-12,
        &format!("identity {worst:.2e}, charts {chart_worst:.2e}, regression {reg:.2e}"),
    );
}

#[test]
fn criterion_06_poisson_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let mut cases = vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    let mut added = 0usize;
    while added < 10 {
        match random_family(&mut rng, 3) {
            Some(c) => {
                cases.push(c);
                added += 1;
            }
            None => continue,
        }
    }
    for (fam, a, _) in &cases {
        let Ok(model) = LagrangianModel::new(fam, a) else {
            continue; // coloop draws have no full relation space
        };
        let gens = model.generators();
        for f in &gens {
            for g in &gens {
                assert!(poisson_bracket(f, g).is_zero(), "nonzero bracket");
            }
        }
    }
    verdict(
        "6 (Poisson involution)",
        true,
        "all generator brackets vanish as exact Laurent forms",
    );
}

#[test]
fn criterion_07_characteristic_variety() {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut cases = vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    let mut added = 0usize;
    while added < 8 {
        match random_family(&mut rng, 2) {
            Some(c) if c.0.abs_chi() > 0 && c.0.abs_chi() <= 10 => {
                cases.push(c);
                added += 1;
            }
            _ => continue,
        }
    }
    let mut worst = 0.0f64;
    for (fam, a, x) in &cases {
        let sing = singular_subspace(fam, a).unwrap();
        let tuples = char_variety_fiber(fam, a, &x.x, &sing, 99).unwrap();
        let xc = x_to_c64(&x.x);
        let crit = solve_with_fallback(fam, a, &xc).unwrap();
        let ctx = MasterContext::new(fam, a, &xc);
        let model = LagrangianModel::new(fam, a).unwrap();
        let psi: Vec<Vec<C64>> = model
            .fiber_points(&ctx, &xc, &crit)
            .into_iter()
            .map(|p| p.p)
            .collect();
        assert_eq!(tuples.len(), psi.len());
        let scale = psi.iter().flatten().map(|c| c.norm()).fold(1.0, f64::max);
        worst = worst.max(match_tuples(&tuples, &psi) / scale);
    }
    // Regressions.
    let reg = {
        let (fam, a, x) = fixtures::fix1();
        let sing = singular_subspace(&fam, &a).unwrap();
        let t = char_variety_fiber(&fam, &a, &x.x, &sing, 99).unwrap();
        let r1 = (t[0][0] - C64::new(2.0, 0.0))
            .norm()
            .max((t[0][1] - C64::new(-2.0, 0.0)).norm());
        let (fam, a, x) = fixtures::fix3();
        let sing = singular_subspace(&fam, &a).unwrap();
        let t = char_variety_fiber(&fam, &a, &x.x, &sing, 99).unwrap();
        let expect = [3.0, 3.0, -3.0];
        let r3 = t[0]
            .iter()
            .zip(expect)
            .map(|(v, e)| (v - C64::new(e, 0.0)).norm())
            .fold(0.0, f64::max);
        r1.max(r3)
    };
    verdict(
        "7 (characteristic variety spectrum)",
        worst <= 1e-8 && reg <= 1e-8,
        &format!("worst matched discrepancy {worst:.2e}, regressions {reg:.2e}"),
    );
}

#[test]
fn criterion_08_reality() {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut checked = 0usize;
    let mut worst_im = 0.0f64;
    while checked < 50 {
        let Some((fam, a, x)) = random_family(&mut rng, 3) else {
            continue;
        };
        if fam.abs_chi() > 20 || !a.all_positive() {
            continue; // the generator always draws positive weights
        }
        let crit = solve_with_fallback(&fam, &a, &x_to_c64(&x.x)).unwrap();
        assert_eq!(crit.points.len(), fam.abs_chi());
        for u in crit.points.iter().flatten() {
            worst_im = worst_im.max(u.im.abs());
        }
        checked += 1;
    }
    verdict(
        "8 (reality for positive weights)",
        worst_im <= 1e-10,
        &format!("50 real fixtures, worst |Im| {worst_im:.2e}"),
    );
}

#[test]
fn criterion_09_marked_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    let mut cases = vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    let mut added = 0usize;
    while added < 10 {
        match random_family(&mut rng, 3) {
            Some(c) if c.0.abs_chi() > 0 && c.0.abs_chi() <= 12 => {
                cases.push(c);
                added += 1;
            }
            _ => continue,
        }
    }
    let mut worst = 0.0f64;
    for (fam, a, x) in &cases {
        // v-relations: exact inside marked_flag_elements.
        let sing = singular_subspace(fam, a).unwrap();
        marked_flag_elements(fam, &sing).unwrap();
        // w- and p-relations at the critical points.
        let xc = x_to_c64(&x.x);
        let crit = solve_with_fallback(fam, a, &xc).unwrap();
        let ctx = MasterContext::new(fam, a, &xc);
        let model = LagrangianModel::new(fam, a).unwrap();
        let pts = model.fiber_points(&ctx, &xc, &crit);
        model.marked_p_elements(fam, &pts).unwrap();
        for tail in subsets_lex(fam.n, fam.k - 1) {
            for f in &crit.f_values {
                let mut total = C64::new(0.0, 0.0);
                let mut scale = 1e-30f64;
                for j in 0..fam.n {
                    if tail.contains(&j) {
                        continue;
                    }
                    let mut cols = vec![j];
                    cols.extend(tail.iter().copied());
                    let Some((sorted, sgn)) = sort_with_sign(&cols) else {
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
    }
    // Sign-pattern regression on the triangle.
    let (fam, a, x) = fixtures::fix3();
    let xc = x_to_c64(&x.x);
    let crit = solve_critical(&fam, &a, &xc, &SolveOptions::default()).unwrap();
    let ctx = MasterContext::new(&fam, &a, &xc);
    let model = LagrangianModel::new(&fam, &a).unwrap();
    let pts = model.fiber_points(&ctx, &xc, &crit);
    let marked = model.marked_p_elements(&fam, &pts).unwrap();
    let expect = [9.0, -9.0, 9.0];
    let reg = marked
        .iter()
        .zip(expect)
        .map(|((_, v), e)| (v[0] - C64::new(e, 0.0)).norm())
        .fold(0.0, f64::max);
    verdict(
        "9 (marked element relations)",
        worst <= 1e-10 && reg <= 1e-8,
        &format!("worst relation residual {worst:.2e}, sign pattern {reg:.2e}"),
    );
}

#[test]
fn criterion_10_transport() {
    let (fam, a, _) = fixtures::fix1();
    let sing = singular_subspace(&fam, &a).unwrap();
    let path = vec![
        vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(-2.0, 0.0)],
    ];
    let mut worst = 0.0f64;
    for kappa in [C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(1.0, 1.0)] {
        let task = TransportTask::new(kappa, path.clone(), vec![C64::new(1.0, 0.0)]);
        let end = transport(&fam, &a, &sing, &task).unwrap().end[0];
        let expect = (C64::new(2.0_f64.ln(), 0.0) * C64::new(2.0, 0.0) / kappa).exp();
        worst = worst.max((end - expect).norm() / expect.norm());
    }
    let rectangle = |x: &[C64], i: usize, j: usize, side: f64| -> Vec<Vec<C64>> {
        [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side), (0.0, 0.0)]
            .iter()
            .map(|&(di, dj)| {
                let mut p = x.to_vec();
                p[i] += C64::new(di, 0.0);
                p[j] += C64::new(dj, 0.0);
                p
            })
            .collect()
    };
    let (fam2, a2, x2) = fixtures::fix2();
    let sing2 = singular_subspace(&fam2, &a2).unwrap();
    let task2 = TransportTask::new(
        C64::new(1.0, 0.0),
        rectangle(&x_to_c64(&x2.x), 0, 1, 0.1),
        vec![C64::new(1.0, 0.0), C64::new(-0.5, 0.25)],
    );
    let defect2 = loop_flatness(&fam2, &a2, &sing2, &task2).unwrap();
    let (fam3, a3, x3) = fixtures::fix3();
    let sing3 = singular_subspace(&fam3, &a3).unwrap();
    let task3 = TransportTask::new(
        C64::new(0.5, 0.0),
        rectangle(&x_to_c64(&x3.x), 0, 2, 0.05),
        vec![C64::new(1.0, 0.0)],
    );
    let defect3 = loop_flatness(&fam3, &a3, &sing3, &task3).unwrap();
    verdict(
        "10 (transport)",
        worst <= 1e-7 && defect2 <= 1e-6 && defect3 <= 1e-6,
        &format!("closed form {worst:.2e}, loop defects {defect2:.2e} / {defect3:.2e}"),
    );
}

#[test]
fn criterion_11_residue_comparison() {
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    let mut cases = vec![fixtures::fix1(), fixtures::fix2(), fixtures::fix3()];
    let mut added = 0usize;
    while added < 10 {
        match random_family(&mut rng, 3) {
            Some(c) if c.0.abs_chi() > 0 && c.0.abs_chi() <= 12 => {
                cases.push(c);
                added += 1;
            }
            _ => continue,
        }
    }
    let mut worst = 0.0f64;
    for (fam, a, x) in &cases {
        let xc = x_to_c64(&x.x);
        let crit = solve_with_fallback(fam, a, &xc).unwrap();
        let ctx = MasterContext::new(fam, a, &xc);
        let model = LagrangianModel::new(fam, a).unwrap();
        let pts = model.fiber_points(&ctx, &xc, &crit);
        let chart = StdBasis::new(fam, fam.k).sets[0].clone();
        let ones = vec![C64::new(1.0, 0.0); pts.len()];
        let on_l = model.residue_form_l(fam, &pts, &chart, &ones, &ones).unwrap();
        let on_c = residue_form(&crit, &ones, &ones);
        worst = worst.max((on_l - on_c).norm() / (1.0 + on_c.norm()));
        for j in 0..fam.n {
            let pv: Vec<C64> = pts.iter().map(|pt| pt.p[j]).collect();
            let l = model.residue_form_l(fam, &pts, &chart, &pv, &ones).unwrap();
            let c = residue_form(&crit, &pv, &ones);
            worst = worst.max((l - c).norm() / (1.0 + c.norm()));
        }
    }
    // FIX-1 regression: (1,1) = -1/8.
    let (fam, a, x) = fixtures::fix1();
    let xc = x_to_c64(&x.x);
    let crit = solve_critical(&fam, &a, &xc, &SolveOptions::default()).unwrap();
    let ctx = MasterContext::new(&fam, &a, &xc);
    let model = LagrangianModel::new(&fam, &a).unwrap();
    let pts = model.fiber_points(&ctx, &xc, &crit);
    let ones = vec![C64::new(1.0, 0.0)];
    let v = model.residue_form_l(&fam, &pts, &[0], &ones, &ones).unwrap();
    let reg = (v - C64::new(-0.125, 0.0)).norm();
    verdict(
        "11 (residue form comparison)",
        worst <= 1e-7 && reg <= 1e-12,
        &format!("worst {worst:.2e}, regression {reg:.2e}"),
    );
}
