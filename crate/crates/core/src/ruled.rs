//! The ruled submanifold built over a 1-isotropic minimal surface: cone map,
//! singular set, normal frame and closed-form shape operators, with an
//! independent finite-difference oracle.
//!
//! Points carry cone coordinates (s, u, v, t): the cone map is
//! G = s g(u, v) + t_1 e_5 + ... + t_{n-2} e_{n+2}, and the unit-sphere slice
//! s^2 + |t|^2 = 1 is the ruled submanifold M^n in S^{n+2}.

use crate::catalog::SurfaceModel;
use crate::config::Tolerances;
use crate::jets::{dot, norm};
use crate::surface::{frame_at, SurfaceFrame};
use crate::{Error, Result};
use nalgebra::DMatrix;
use serde::Serialize;

/// A point in cone coordinates over the base surface.
#[derive(Debug, Clone, Serialize)]
pub struct ConePoint {
    pub s: f64,
    pub uv: (f64, f64),
    /// Coordinates of the ruling vector in the basis e_5, ..., e_{n+2}.
    pub t: Vec<f64>,
}

impl ConePoint {
    pub fn radius(&self) -> f64 {
        (self.s * self.s + dot(&self.t, &self.t)).sqrt()
    }

    /// True if the point lies on the unit-sphere slice M^n.
    pub fn on_slice(&self, tol: f64) -> bool {
        (self.radius() - 1.0).abs() <= tol
    }
}

/// Singular-set predicate of the cone map, in cone coordinates.
///
/// The cone degenerates at the vertex (s = 0, t = 0) and, for s = 0, at
/// ruling vectors whose projection onto the lowest normal subbundle beyond
/// the first vanishes. That projection is carried by the first
/// min(2, n - 2) coordinates of t, so for n <= 4 only the vertex is
/// singular and the slice M^n misses the singular set entirely.
pub fn is_singular(n: usize, s: f64, t: &[f64], tau: f64) -> bool {
    assert_eq!(t.len(), n - 2, "t must have n - 2 components");
    if s.abs() > tau {
        return false;
    }
    let r2 = 2.min(n - 2);
    norm(&t[..r2]) <= tau
}

/// Cone map value from a base frame.
pub fn eval_cone(frame: &SurfaceFrame, s: f64, t: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = frame.position().iter().map(|x| s * x).collect();
    for (j, tj) in t.iter().enumerate() {
        for (o, ek) in out.iter_mut().zip(frame.e(5 + j)) {
            *o += tj * ek;
        }
    }
    out
}

/// Closed-form data of the ruled submanifold at one cone point: the scaled
/// normal pair (xi, eta), the conformal factor Omega, and the shape-operator
/// matrices in the adapted basis E_0 = d/ds, E_1, E_2 (horizontal, unit),
/// E_3, ..., E_n (ruling directions e_5, ..., e_{n+2}).
///
/// Matrix entries are the second-form pairings <alpha(E_a, E_b), xi> with
/// the non-unit normal xi (|xi| = |eta| = Omega).
#[derive(Debug, Clone)]
pub struct RuledData {
    pub n: usize,
    pub s: f64,
    pub t: Vec<f64>,
    pub omega: f64,
    pub kappa: f64,
    pub phi: [f64; 2],
    pub h: [f64; 2],
    pub position: Vec<f64>,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub a_xi: DMatrix<f64>,
    pub a_eta: DMatrix<f64>,
}

/// Assembles the two shape-operator matrices from their scalar entries.
pub(crate) fn lemma_matrices(
    n: usize,
    kappa: f64,
    phibar: [f64; 2],
    h: [f64; 2],
    r5: [f64; 2],
    r6: [f64; 2],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let dim = n + 1;
    let mut axi = DMatrix::zeros(dim, dim);
    let mut aeta = DMatrix::zeros(dim, dim);
    let set = |m: &mut DMatrix<f64>, i: usize, j: usize, v: f64| {
        m[(i, j)] = v;
        m[(j, i)] = v;
    };
    set(&mut axi, 0, 1, phibar[0]);
    set(&mut axi, 0, 2, phibar[1]);
    axi[(1, 1)] = h[0] + kappa;
    set(&mut axi, 1, 2, h[1]);
    axi[(2, 2)] = -h[0] - kappa;
    set(&mut axi, 1, 3, r5[0]);
    set(&mut axi, 2, 3, r5[1]);

    set(&mut aeta, 0, 1, phibar[1]);
    set(&mut aeta, 0, 2, -phibar[0]);
    aeta[(1, 1)] = h[1];
    set(&mut aeta, 1, 2, kappa - h[0]);
    aeta[(2, 2)] = -h[1];
    set(&mut aeta, 1, 3, r5[1]);
    set(&mut aeta, 2, 3, -r5[0]);
    if n >= 4 {
        set(&mut axi, 1, 4, r6[0]);
        set(&mut axi, 2, 4, r6[1]);
        set(&mut aeta, 1, 4, r6[1]);
        set(&mut aeta, 2, 4, -r6[0]);
    }
    (axi, aeta)
}

/// Evaluates the closed-form ruled data at (s, t) over a base frame.
/// (s, t) need not lie on the slice; off-slice points exercise the cone
/// homogeneity of the construction.
pub fn ruled_data(frame: &SurfaceFrame, s: f64, t: &[f64]) -> Result<RuledData> {
    let n = frame.n;
    if t.len() != n - 2 {
        return Err(Error::InvalidParameters(format!(
            "ruling vector needs {} coordinates, got {}",
            n - 2,
            t.len()
        )));
    }
    let d = &frame.dual;
    let t2 = if n >= 4 { t[1] } else { 0.0 };
    let phi = [
        t[0] * d.a[0] + t2 * d.b[0],
        t[0] * d.a[1] + t2 * d.b[1],
    ];
    let omega_sq = s * s + phi[0] * phi[0] + phi[1] * phi[1];
    if omega_sq <= 1e-14 {
        return Err(Error::SingularPoint);
    }
    let omega = omega_sq.sqrt();

    // h_i collects the derivative of the ruling twist along e_i.
    let mut h = [0.0; 2];
    for i in 0..2 {
        let b_i = d.omega12[i] + d.omega34[i];
        let mut acc = t[0] * (d.da[i][0] - d.a[1] * b_i - d.b[0] * d.omega56[i]);
        if n >= 4 {
            acc += t2 * (d.db[i][0] - d.b[1] * b_i + d.a[0] * d.omega56[i]);
        }
        h[i] = -(s / omega_sq) * acc;
    }

    let phibar = [phi[0] / omega, phi[1] / omega];
    let r5 = [-s * d.a[0] / omega, -s * d.a[1] / omega];
    let r6 = [-s * d.b[0] / omega, -s * d.b[1] / omega];
    let (a_xi, a_eta) = lemma_matrices(n, frame.kappa, phibar, h, r5, r6);

    // xi = phi_1 e_1 + phi_2 e_2 + s e_3, eta = phi_2 e_1 - phi_1 e_2 + s e_4.
    let combine = |c1: f64, c2: f64, cn: f64, en: usize| -> Vec<f64> {
        let (e1, e2, e3) = (frame.e(1), frame.e(2), frame.e(en));
        (0..frame.ambient)
            .map(|k| c1 * e1[k] + c2 * e2[k] + cn * e3[k])
            .collect()
    };
    let xi = combine(phi[0], phi[1], s, 3);
    let eta = combine(phi[1], -phi[0], s, 4);

    Ok(RuledData {
        n,
        s,
        t: t.to_vec(),
        omega,
        kappa: frame.kappa,
        phi,
        h,
        position: eval_cone(frame, s, t),
        xi,
        eta,
        a_xi,
        a_eta,
    })
}

/// Scalar invariants of the second fundamental form at a cone point.
#[derive(Debug, Clone, Serialize)]
pub struct SecondFormInvariants {
    /// Squared norm of the second fundamental form of the slice M^n.
    pub norm_sq: f64,
    /// Normalized scalar curvature deficit (0 for a totally geodesic slice).
    pub normalized_scalar: f64,
    pub trace_xi: f64,
    pub trace_eta: f64,
    /// Residual of the radial direction s E_0 + sum t_j E_{j + 2} under both
    /// shape operators (zero: rulings are totally geodesic).
    pub radial_residual: f64,
}

pub fn second_form_invariants(data: &RuledData) -> SecondFormInvariants {
    let o2 = data.omega * data.omega;
    let norm_sq = (data.a_xi.norm_squared() + data.a_eta.norm_squared()) / o2;
    let n = data.n as f64;
    let dim = data.n + 1;
    let mut radial = DMatrix::zeros(dim, 1);
    radial[(0, 0)] = data.s;
    for (j, tj) in data.t.iter().enumerate() {
        radial[(3 + j, 0)] = *tj;
    }
    let r1 = (&data.a_xi * &radial).norm();
    let r2 = (&data.a_eta * &radial).norm();
    SecondFormInvariants {
        norm_sq,
        normalized_scalar: (n * (n - 1.0) - norm_sq) / (n * (n - 1.0)),
        trace_xi: data.a_xi.trace(),
        trace_eta: data.a_eta.trace(),
        radial_residual: r1.max(r2),
    }
}

/// Finite-difference shape operators and diagnostics, computed from nothing
/// but point evaluations of the cone map.
#[derive(Debug, Clone)]
pub struct FdShapeOps {
    pub a_xi: DMatrix<f64>,
    pub a_eta: DMatrix<f64>,
    /// Omega recovered from the fd pushforward norm.
    pub omega: f64,
    /// Largest relative component of xi, eta along the fd tangent space
    /// (certifies the closed-form normal pair independently).
    pub normal_residual: f64,
}

/// Independent oracle: builds the shape-operator matrices by central
/// differencing of the cone map in cone coordinates, using the closed-form
/// (xi, eta) only as the normal pairing (their normality is itself measured
/// and reported in `normal_residual`).
pub fn shape_operators_fd(
    surface: &SurfaceModel,
    cp: &ConePoint,
    tol: &Tolerances,
) -> Result<FdShapeOps> {
    let n = surface.n();
    let ncoord = n + 1;
    let ambient = n + 3;
    let f0 = frame_at(surface, cp.uv, tol)?;
    let data = ruled_data(&f0, cp.s, &cp.t)?;
    let h = tol.fd_cone_step;

    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let fr = frame_at(surface, (x[1], x[2]), tol)?;
        Ok(eval_cone(&fr, x[0], &x[3..]))
    };
    let mut x0 = vec![cp.s, cp.uv.0, cp.uv.1];
    x0.extend_from_slice(&cp.t);

    let shift = |a: usize, da: f64, b: usize, db: f64| -> Result<Vec<f64>> {
        let mut x = x0.clone();
        x[a] += da;
        x[b] += db;
        eval(&x)
    };
    let center = eval(&x0)?;

    // First and second coordinate derivatives of G.
    let mut d1 = Vec::with_capacity(ncoord);
    for a in 0..ncoord {
        let p = shift(a, h, a, 0.0)?;
        let m = shift(a, -h, a, 0.0)?;
        d1.push(
            p.iter()
                .zip(&m)
                .map(|(x, y)| (x - y) / (2.0 * h))
                .collect::<Vec<f64>>(),
        );
    }
    let mut d2 = vec![vec![vec![0.0; ambient]; ncoord]; ncoord];
    for a in 0..ncoord {
        for b in a..ncoord {
            let val = if a == b {
                let p = shift(a, h, a, 0.0)?;
                let m = shift(a, -h, a, 0.0)?;
                (0..ambient)
                    .map(|k| (p[k] + m[k] - 2.0 * center[k]) / (h * h))
                    .collect::<Vec<f64>>()
            } else {
                let pp = shift(a, h, b, h)?;
                let pm = shift(a, h, b, -h)?;
                let mp = shift(a, -h, b, h)?;
                let mm = shift(a, -h, b, -h)?;
                (0..ambient)
                    .map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h))
                    .collect::<Vec<f64>>()
            };
            d2[a][b] = val.clone();
            d2[b][a] = val;
        }
    }

    // Normality of the closed-form pair against the fd tangent space.
    let mut normal_residual = 0.0f64;
    for da in &d1 {
        let nn = norm(da);
        if nn > 1e-12 {
            normal_residual = normal_residual
                .max(dot(da, &data.xi).abs() / (nn * data.omega))
                .max(dot(da, &data.eta).abs() / (nn * data.omega));
        }
    }

    // Coordinate representations of the adapted basis E_0, ..., E_n.
    // E_1, E_2 are horizontal: coordinate tangent directions corrected by
    // t-shifts that cancel the internal rotation of the ruling frame, then
    // normalized by the measured pushforward norm.
    let mut reps: Vec<Vec<f64>> = Vec::with_capacity(ncoord);
    let mut e0 = vec![0.0; ncoord];
    e0[0] = 1.0;
    reps.push(e0);
    let mut omega_fd = 0.0;
    for i in 0..2 {
        let c = f0.coords[i];
        let push: Vec<f64> = (0..ambient).map(|k| c[0] * d1[1][k] + c[1] * d1[2][k]).collect();
        let mut gamma = vec![0.0; n - 2];
        let mut corrected = push.clone();
        for (j, gj) in gamma.iter_mut().enumerate() {
            *gj = -dot(&push, &f0.e(5 + j));
            for (ck, ek) in corrected.iter_mut().zip(f0.e(5 + j)) {
                *ck += *gj * ek;
            }
        }
        let om = norm(&corrected);
        if om <= 1e-12 {
            return Err(Error::SingularPoint);
        }
        omega_fd = om;
        let mut rep = vec![0.0; ncoord];
        rep[1] = c[0] / om;
        rep[2] = c[1] / om;
        for (j, gj) in gamma.iter().enumerate() {
            rep[3 + j] = gj / om;
        }
        reps.push(rep);
    }
    for j in 0..(n - 2) {
        let mut rep = vec![0.0; ncoord];
        rep[3 + j] = 1.0;
        reps.push(rep);
    }

    // Second-form pairings <alpha(E_a, E_b), nu> = rep_a . rep_b . <d2, nu>.
    let mut a_xi = DMatrix::zeros(ncoord, ncoord);
    let mut a_eta = DMatrix::zeros(ncoord, ncoord);
    for a in 0..ncoord {
        for b in 0..ncoord {
            let mut sx = 0.0;
            let mut se = 0.0;
            for c in 0..ncoord {
                if reps[a][c] == 0.0 {
                    continue;
                }
                for d in 0..ncoord {
                    if reps[b][d] == 0.0 {
                        continue;
                    }
                    let w = reps[a][c] * reps[b][d];
                    sx += w * dot(&d2[c][d], &data.xi);
                    se += w * dot(&d2[c][d], &data.eta);
                }
            }
            a_xi[(a, b)] = sx;
            a_eta[(a, b)] = se;
        }
    }
    Ok(FdShapeOps {
        a_xi,
        a_eta,
        omega: omega_fd,
        normal_residual,
    })
}

/// Residuals of the normal-form identities at one cone point, measured with
/// the finite-difference pushforward.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormCheck {
    /// |fd pushforward of X_i - (s e_i - phi_i e_3 -/+ phi e_4)|, worst i.
    pub pushforward_residual: f64,
    /// | |xi| - Omega | and | |eta| - Omega |, worst of the two.
    pub norm_residual: f64,
    /// Components of xi, eta along the fd tangent space (relative).
    pub normal_residual: f64,
    /// | Omega_fd - Omega |.
    pub omega_residual: f64,
}

/// Verifies the closed-form normal frame against finite differences of the
/// cone map.
pub fn normal_form_check(
    surface: &SurfaceModel,
    cp: &ConePoint,
    tol: &Tolerances,
) -> Result<NormalFormCheck> {
    let f0 = frame_at(surface, cp.uv, tol)?;
    let data = ruled_data(&f0, cp.s, &cp.t)?;
    let fd = shape_operators_fd(surface, cp, tol)?;

    // Closed-form pushforwards: G_* X_1 = s e_1 - phi_1 e_3 - phi_2 e_4,
    // G_* X_2 = s e_2 - phi_2 e_3 + phi_1 e_4.
    let h = tol.fd_cone_step;
    let mut worst = 0.0f64;
    for i in 0..2 {
        let c = f0.coords[i];
        let eval_dir = |sgn: f64| -> Result<Vec<f64>> {
            let fr = frame_at(surface, (cp.uv.0 + sgn * h * c[0], cp.uv.1 + sgn * h * c[1]), tol)?;
            Ok(eval_cone(&fr, cp.s, &cp.t))
        };
        let p = eval_dir(1.0)?;
        let m = eval_dir(-1.0)?;
        let push: Vec<f64> = p.iter().zip(&m).map(|(x, y)| (x - y) / (2.0 * h)).collect();
        // Remove the internal ruling rotation, as in the horizontal lift.
        let mut corrected = push.clone();
        for j in 0..(surface.n() - 2) {
            let gj = -dot(&push, &f0.e(5 + j));
            for (ck, ek) in corrected.iter_mut().zip(f0.e(5 + j)) {
                *ck += gj * ek;
            }
        }
        let (s3, s4) = if i == 0 {
            (-data.phi[0], -data.phi[1])
        } else {
            (-data.phi[1], data.phi[0])
        };
        let expect: Vec<f64> = (0..f0.ambient)
            .map(|k| cp.s * f0.e(i + 1)[k] + s3 * f0.e(3)[k] + s4 * f0.e(4)[k])
            .collect();
        let res: Vec<f64> = corrected.iter().zip(&expect).map(|(x, y)| x - y).collect();
        worst = worst.max(norm(&res));
    }

    let norm_residual = (norm(&data.xi) - data.omega)
        .abs()
        .max((norm(&data.eta) - data.omega).abs());
    Ok(NormalFormCheck {
        pushforward_residual: worst,
        norm_residual,
        normal_residual: fd.normal_residual,
        omega_residual: (fd.omega - data.omega).abs(),
    })
}

/// Numerical rank of a matrix: singular values above tau times the largest.
fn svd_rank(m: &DMatrix<f64>, tau: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tau * top).count()
}

/// Rank of the second fundamental form: the two shape operators stacked
/// vertically into a 2(n+1) x (n+1) matrix.
pub fn stacked_rank(data: &RuledData, tau: f64) -> usize {
    let dim = data.n + 1;
    let mut stacked = DMatrix::zeros(2 * dim, dim);
    stacked.view_mut((0, 0), (dim, dim)).copy_from(&data.a_xi);
    stacked.view_mut((dim, 0), (dim, dim)).copy_from(&data.a_eta);
    svd_rank(&stacked, tau)
}

/// Rank of the shape operator along the unit-circle normal direction psi.
pub fn pencil_rank(data: &RuledData, psi: f64, tau: f64) -> usize {
    let (s, c) = psi.sin_cos();
    let m = &data.a_xi * c + &data.a_eta * s;
    svd_rank(&m, tau)
}
