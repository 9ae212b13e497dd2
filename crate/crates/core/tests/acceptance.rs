//! Acceptance gate: one test per criterion, each printing a pass/fail line.
//!
//! Every numeric bound here is a contract; loosening one is a behavior
//! change, not a cleanup.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ruled_minimal::catalog;
use ruled_minimal::config::Tolerances;
use ruled_minimal::family::{
    equivariance_check, forms_relation_residual, gauss_compatibility, integrate_surface_family,
    rotated_ruled_data,
};
use ruled_minimal::jets::norm;
use ruled_minimal::ruled::{
    is_singular, pencil_rank, ruled_data, second_form_invariants, shape_operators_fd,
    stacked_rank, ConePoint, RuledData,
};
use ruled_minimal::surface::{
    certify, frame_at, invariants_at, omegas_residual, ricci_residuals, sample_domain,
    SurfaceFrame,
};

const SEED: u64 = 7;

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({detail})",
        if ok { "pass" } else { "FAIL" }
    );
    assert!(ok, "{criterion}: {detail}");
}

fn slice_points(surface: &catalog::SurfaceModel, seed: u64, count: usize) -> Vec<ConePoint> {
    let n = surface.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let uv = sample_domain(&surface.domain, &mut rng);
            let s: f64 = rng.gen_range(-0.95..0.95);
            let radius = (1.0 - s * s).sqrt();
            let t = if n == 3 {
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                vec![sign * radius]
            } else {
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                vec![radius * phase.cos(), radius * phase.sin()]
            };
            ConePoint { s, uv, t }
        })
        .collect()
}

fn data_at(surface: &catalog::SurfaceModel, cp: &ConePoint, tol: &Tolerances) -> RuledData {
    let f = frame_at(surface, cp.uv, tol).unwrap();
    ruled_data(&f, cp.s, &cp.t).unwrap()
}

#[test]
fn criterion_01_surface_certification() {
    let tol = Tolerances::default();
    let torus = catalog::equilateral_torus();
    let cert = certify(&torus, SEED, 100, &tol).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_axis_gap = 0.0f64;
    let mut max_k = 0.0f64;
    let target = 0.5f64.sqrt();
    for _ in 0..100 {
        let p = sample_domain(&torus.domain, &mut rng);
        let inv = invariants_at(&torus, p).unwrap();
        max_axis_gap = max_axis_gap
            .max((inv.kappa - target).abs())
            .max((inv.mu - target).abs());
        max_k = max_k.max(inv.gauss.abs());
    }
    let clifford = catalog::clifford_control();
    let mut max_mu = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..100 {
        let p = sample_domain(&clifford.domain, &mut rng);
        max_mu = max_mu.max(invariants_at(&clifford, p).unwrap().mu);
    }
    let ok = cert.minimality_residual <= 1e-7
        && max_k <= 1e-8
        && max_axis_gap <= 1e-6
        && max_mu <= 1e-8;
    report(
        "criterion 1 (surface certification)",
        ok,
        &format!(
            "torus minimality {:.2e}, |K| {:.2e}, semi-axis gap {:.2e}; control mu {:.2e}",
            cert.minimality_residual, max_k, max_axis_gap, max_mu
        ),
    );
}

#[test]
fn criterion_02_structure_equations() {
    let tol = Tolerances::default();
    let mut max_omegas = 0.0f64;
    let mut max_ricci = 0.0f64;
    for surface in [catalog::equilateral_torus(), catalog::boruvka_sphere()] {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for _ in 0..100 {
            let p = sample_domain(&surface.domain, &mut rng);
            let f: SurfaceFrame = frame_at(&surface, p, &tol).unwrap();
            max_omegas = max_omegas.max(omegas_residual(&f));
            for r in ricci_residuals(&f) {
                max_ricci = max_ricci.max(r);
            }
        }
    }
    let ok = max_omegas <= 1e-6 && max_ricci <= 1e-5;
    report(
        "criterion 2 (structure equations)",
        ok,
        &format!("duality residual {max_omegas:.2e}, Ricci residual {max_ricci:.2e}"),
    );
}

#[test]
fn criterion_03_singular_set() {
    let tol = Tolerances::default();
    let n = 3usize;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut flagged = 0usize;
    for _ in 0..10_000 {
        let s: f64 = rng.gen_range(-1.0..1.0);
        let t = vec![(1.0 - s * s).sqrt() * if rng.gen::<bool>() { 1.0 } else { -1.0 }];
        if is_singular(n, s, &t, tol.tau_rank) {
            flagged += 1;
        }
    }
    let vertex = is_singular(n, 0.0, &[0.0], tol.tau_rank);
    let ok = flagged == 0 && vertex;
    report(
        "criterion 3 (singular set)",
        ok,
        &format!("{flagged} of 10000 slice samples singular; vertex singular = {vertex}"),
    );
}

#[test]
fn criterion_04_shape_operators_vs_oracle() {
    let tol = Tolerances::default();
    let mut max_diff = 0.0f64;
    let mut max_trace = 0.0f64;
    let mut max_radial = 0.0f64;
    let mut max_homog = 0.0f64;
    for surface in [catalog::equilateral_torus(), catalog::boruvka_sphere()] {
        let points = slice_points(&surface, SEED, 200);
        for cp in &points {
            let data = data_at(&surface, cp, &tol);
            let fd = shape_operators_fd(&surface, cp, &tol).unwrap();
            max_diff = max_diff
                .max((&data.a_xi - &fd.a_xi).abs().max())
                .max((&data.a_eta - &fd.a_eta).abs().max());
            let inv = second_form_invariants(&data);
            max_trace = max_trace.max(inv.trace_xi.abs()).max(inv.trace_eta.abs());
            max_radial = max_radial.max(inv.radial_residual);
        }
        // Cone homogeneity on a subset: scaling (s, t) by r divides the
        // squared norm by r^2.
        for cp in points.iter().take(20) {
            let f = frame_at(&surface, cp.uv, &tol).unwrap();
            let r = 1.7f64;
            let scaled: Vec<f64> = cp.t.iter().map(|x| r * x).collect();
            let base = second_form_invariants(&ruled_data(&f, cp.s, &cp.t).unwrap());
            let far = second_form_invariants(&ruled_data(&f, r * cp.s, &scaled).unwrap());
            let rel = (far.norm_sq - base.norm_sq / (r * r)).abs() / base.norm_sq.abs();
            max_homog = max_homog.max(rel);
        }
    }
    let ok = max_diff <= 1e-4 && max_trace <= 1e-10 && max_radial <= 1e-8 && max_homog <= 1e-6;
    report(
        "criterion 4 (shape operators vs oracle)",
        ok,
        &format!(
            "entrywise {max_diff:.2e}, trace {max_trace:.2e}, radial {max_radial:.2e}, homogeneity {max_homog:.2e}"
        ),
    );
}

#[test]
fn criterion_05_rank_claims() {
    let tol = Tolerances::default();
    let mut detail = String::new();
    let mut ok = true;
    for surface in [catalog::equilateral_torus(), catalog::boruvka_sphere()] {
        let n = surface.n();
        let points = slice_points(&surface, SEED, 200);
        let hits = points
            .iter()
            .filter(|cp| stacked_rank(&data_at(&surface, cp, &tol), tol.tau_rank) == n)
            .count();
        ok &= hits as f64 >= 0.99 * points.len() as f64;
        detail.push_str(&format!("{}: rank {n} at {hits}/200; ", surface.name));
        if n == 4 {
            let mut min_pencil = usize::MAX;
            for cp in points.iter().take(20) {
                let data = data_at(&surface, cp, &tol);
                for k in 0..36 {
                    let psi = k as f64 * std::f64::consts::PI / 36.0;
                    min_pencil = min_pencil.min(pencil_rank(&data, psi, tol.tau_rank));
                }
            }
            ok &= min_pencil == 4;
            detail.push_str(&format!("min pencil rank {min_pencil}; "));
        }
    }
    report("criterion 5 (rank claims)", ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_06_flat_torus_constancy() {
    let tol = Tolerances::default();
    let surface = catalog::equilateral_torus();
    let points = slice_points(&surface, SEED, 1000);
    let mut norms = Vec::with_capacity(points.len());
    let mut scalars = Vec::with_capacity(points.len());
    let mut max_h = 0.0f64;
    for cp in &points {
        let data = data_at(&surface, cp, &tol);
        let inv = second_form_invariants(&data);
        norms.push(inv.norm_sq);
        scalars.push(inv.normalized_scalar);
        max_h = max_h.max(data.h[0].abs()).max(data.h[1].abs());
    }
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let s = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt();
        (m, s)
    };
    let (norm_mean, norm_std) = stats(&norms);
    let (scalar_mean, scalar_std) = stats(&scalars);
    let ok = norm_std <= 1e-6 && scalar_std <= 1e-6 && max_h <= 1e-6;
    // The measured constant is the deliverable; the literature value 8 and
    // the normalized scalar -1/3 are recorded for comparison, not asserted.
    report(
        "criterion 6 (flat-torus constancy)",
        ok,
        &format!(
            "normSq {norm_mean:.12} (std {norm_std:.2e}; literature value 8), \
             normalized scalar {scalar_mean:.12} (std {scalar_std:.2e}; literature value -1/3), \
             max |h| {max_h:.2e}"
        ),
    );
}

#[test]
fn criterion_07_associated_family() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_forms = 0.0f64;
    let mut max_gauss = 0.0f64;
    let mut max_norm = 0.0f64;
    for surface in [catalog::equilateral_torus(), catalog::boruvka_sphere()] {
        let points = slice_points(&surface, SEED, 25);
        for cp in &points {
            let data = data_at(&surface, cp, &tol);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            max_forms = max_forms.max(forms_relation_residual(&data, theta));
            max_gauss = max_gauss.max(gauss_compatibility(&data, &[theta]));
            let rot = rotated_ruled_data(&data, theta);
            max_norm = max_norm
                .max((norm(&rot.xi) - data.omega).abs())
                .max((norm(&rot.eta) - data.omega).abs());
            // theta = 0 must be the identity exactly, not approximately.
            let id = rotated_ruled_data(&data, 0.0);
            assert_eq!((&id.a_xi - &data.a_xi).norm(), 0.0);
            assert_eq!((&id.a_eta - &data.a_eta).norm(), 0.0);
        }
    }
    let ok = max_forms <= 1e-8 && max_gauss <= 1e-8 && max_norm <= 1e-9;
    report(
        "criterion 7 (associated family)",
        ok,
        &format!(
            "forms residual {max_forms:.2e}, Gauss compatibility {max_gauss:.2e}, norm drift {max_norm:.2e}"
        ),
    );
}

#[test]
fn criterion_08_surface_family_integration() {
    let tol = Tolerances::default();
    let surface = catalog::equilateral_torus();
    let fi = integrate_surface_family(&surface, 0.7, (64, 64), 6, &tol).unwrap();
    let ok = fi.max_loop_residual <= 1e-7
        && fi.max_metric_residual <= 1e-6
        && fi.max_kappa_residual <= 1e-5;
    report(
        "criterion 8 (surface-family integration)",
        ok,
        &format!(
            "loop {:.2e}, metric {:.2e}, ellipse {:.2e} on a 64x64 grid",
            fi.max_loop_residual, fi.max_metric_residual, fi.max_kappa_residual
        ),
    );
}

#[test]
#[ignore = "optional equivariance criterion; run with --ignored"]
fn criterion_09_equivariance() {
    let tol = Tolerances::default();
    let surface = catalog::boruvka_sphere();
    let eq = equivariance_check(&surface, std::f64::consts::FRAC_PI_4, SEED, 400, &tol).unwrap();
    report(
        "criterion 9 (equivariance)",
        eq.rms <= 1e-4,
        &format!("Procrustes RMS {:.2e}, sign {}", eq.rms, eq.ruling_rotation_sign),
    );
}

#[test]
fn criterion_10_determinism() {
    use ruled_minimal::cli::{run_export, run_ruled_verify, run_surface_verify};
    use ruled_minimal::config::RunConfig;
    let dir = tempfile::tempdir().unwrap();
    let run_all = |tag: &str| {
        let mut cfg = RunConfig::default();
        cfg.samples = 25;
        let mut bytes = Vec::new();
        let mut sv = run_surface_verify(&cfg).unwrap();
        sv.finalize();
        bytes.extend_from_slice(sv.to_json().as_bytes());
        let rv = run_ruled_verify(&cfg).unwrap();
        bytes.extend_from_slice(rv.to_json().as_bytes());
        let path = dir.path().join(format!("{tag}.csv"));
        let ex = run_export(&cfg, (6, 6), Some(&path)).unwrap();
        bytes.extend_from_slice(ex.to_json().as_bytes());
        bytes.extend_from_slice(&std::fs::read(path).unwrap());
        bytes
    };
    let first = run_all("a");
    let second = run_all("b");
    report(
        "criterion 10 (determinism)",
        first == second,
        &format!("{} report+export bytes compared", first.len()),
    );
}
