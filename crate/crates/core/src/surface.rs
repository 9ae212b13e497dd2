//! Adapted frames, curvature-ellipse data and connection forms of a minimal
//! surface in a sphere, computed from exact order-4 jets.
//!
//! The whole frame construction runs in truncated Taylor arithmetic
//! ([`Jet2`]), so connection forms and their first derivatives come out at
//! machine precision with no numerical differencing of frame fields.

use crate::catalog::{Domain, SurfaceModel};
use crate::config::Tolerances;
use crate::jets::{dot, norm, Jet2, JetTable, Real};
use crate::{Error, Result};
use nalgebra::{DMatrix, Matrix3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

// ---------------------------------------------------------------------------
// Jet-vector helpers (ambient vectors with Jet2 components).

fn jdot(a: &[Jet2], b: &[Jet2]) -> Jet2 {
    let mut acc = Jet2::constant(0.0);
    for (x, y) in a.iter().zip(b) {
        acc = acc + *x * *y;
    }
    acc
}

fn jscale(a: &[Jet2], k: Jet2) -> Vec<Jet2> {
    a.iter().map(|x| *x * k).collect()
}

fn jsub(a: &[Jet2], b: &[Jet2]) -> Vec<Jet2> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

fn jadd(a: &[Jet2], b: &[Jet2]) -> Vec<Jet2> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

fn jd(a: &[Jet2], dir: usize) -> Vec<Jet2> {
    a.iter().map(|x| x.d(dir)).collect()
}

fn jvalues(a: &[Jet2]) -> Vec<f64> {
    a.iter().map(|x| x.value()).collect()
}

/// Removes the components of `v` along each (unit) jet vector in `units`.
fn jremove(v: &[Jet2], units: &[&[Jet2]]) -> Vec<Jet2> {
    let mut out = v.to_vec();
    for u in units {
        let d = jdot(&out, u);
        out = jsub(&out, &jscale(u, d));
    }
    out
}

// ---------------------------------------------------------------------------
// Value-level invariants (shared by the analytic path and the fd oracle).

/// Pointwise invariants of a surface in the unit sphere, computed from a
/// derivative table of order >= 3. Works at degenerate points (vanishing
/// curvature ellipse, non-substantial images), so it drives flag
/// verification for negative controls as well.
#[derive(Debug, Clone, Serialize)]
pub struct PointInvariants {
    pub ambient: usize,
    /// Norm of the mean curvature vector (zero for minimal surfaces).
    pub minimality: f64,
    /// Semi-axes of the (first) curvature ellipse, kappa >= mu.
    pub kappa: f64,
    pub mu: f64,
    /// Relative deviation of the first ellipse from a circle (0 = circular).
    pub ellipse_residual: f64,
    /// Semi-axes of the second ellipse (third fundamental form).
    pub kappa1: f64,
    pub mu1: f64,
    /// Relative deviation of the second ellipse from a circle.
    pub ellipse2_residual: f64,
    /// Intrinsic Gauss curvature via the Brioschi formula.
    pub gauss: f64,
    /// Smallest/largest singular-value ratio of the derivative span;
    /// positive iff the surface is substantial in its ambient space.
    pub span_ratio: f64,
}

fn ellipse_axes(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let m = DMatrix::from_fn(a.len(), 2, |r, c| if c == 0 { a[r] } else { b[r] });
    let sv = m.singular_values();
    let (s1, s2) = (sv[0], sv[1]);
    let residual = if s1 > 1e-12 { (s1 - s2) / s1 } else { 0.0 };
    (s1, s2, residual)
}

/// Brioschi formula for the Gauss curvature, from derivative values of the
/// immersion up to order 3.
fn brioschi(t: &JetTable) -> Result<f64> {
    let gu = t.partial(1, 0);
    let gv = t.partial(0, 1);
    let guu = t.partial(2, 0);
    let guv = t.partial(1, 1);
    let gvv = t.partial(0, 2);
    let guuv = t.partial(2, 1);
    let guvv = t.partial(1, 2);

    let e = dot(gu, gu);
    let f = dot(gu, gv);
    let g = dot(gv, gv);
    let det = e * g - f * f;
    if det <= 1e-12 {
        return Err(Error::DegenerateMetric);
    }
    let eu = 2.0 * dot(guu, gu);
    let ev = 2.0 * dot(guv, gu);
    let evv = 2.0 * (dot(guvv, gu) + dot(guv, guv));
    let gup = 2.0 * dot(guv, gv);
    let gvp = 2.0 * dot(gvv, gv);
    let guu2 = 2.0 * (dot(guuv, gv) + dot(guv, guv));
    let fu = dot(guu, gv) + dot(gu, guv);
    let fv = dot(guv, gv) + dot(gu, gvv);
    let fuv = dot(guuv, gv) + dot(guu, gvv) + dot(guv, guv) + dot(gu, guvv);

    let m1 = Matrix3::new(
        -0.5 * evv + fuv - 0.5 * guu2,
        0.5 * eu,
        fu - 0.5 * ev,
        fv - 0.5 * gup,
        e,
        f,
        0.5 * gvp,
        f,
        g,
    );
    let m2 = Matrix3::new(0.0, 0.5 * ev, 0.5 * gup, 0.5 * ev, e, f, 0.5 * gup, f, g);
    Ok((m1.determinant() - m2.determinant()) / (det * det))
}

/// Computes [`PointInvariants`] from a derivative table (order >= 3).
///
/// The table may come from exact jets or from the finite-difference oracle;
/// the two paths share nothing upstream of the derivative values.
pub fn invariants_from_table(t: &JetTable) -> Result<PointInvariants> {
    if t.order < 3 {
        return Err(Error::UnsupportedOrder(t.order));
    }
    let dim = t.ambient_dim();
    let g0 = t.partial(0, 0).to_vec();
    let gu = t.partial(1, 0).to_vec();
    let gv = t.partial(0, 1).to_vec();

    // Orthonormal tangent frame (Gram-Schmidt on the coordinate frame).
    let e_metric = dot(&gu, &gu);
    let f_metric = dot(&gu, &gv);
    if e_metric <= 1e-12 {
        return Err(Error::DegenerateMetric);
    }
    let c1 = [1.0 / e_metric.sqrt(), 0.0];
    let mut w2: Vec<f64> = gv
        .iter()
        .zip(&gu)
        .map(|(x, y)| x - (f_metric / e_metric) * y)
        .collect();
    let n2 = norm(&w2);
    if n2 <= 1e-12 {
        return Err(Error::DegenerateMetric);
    }
    for x in w2.iter_mut() {
        *x /= n2;
    }
    let c2 = [-f_metric / (e_metric * n2), 1.0 / n2];

    let second = |ci: [f64; 2], cj: [f64; 2]| -> Vec<f64> {
        let guu = t.partial(2, 0);
        let guv = t.partial(1, 1);
        let gvv = t.partial(0, 2);
        (0..dim)
            .map(|k| {
                ci[0] * cj[0] * guu[k]
                    + (ci[0] * cj[1] + ci[1] * cj[0]) * guv[k]
                    + ci[1] * cj[1] * gvv[k]
            })
            .collect()
    };
    let tangent_basis = [g0.clone(), gu.clone(), gv.clone()];
    let proj1 = |v: Vec<f64>| crate::jets::project_orthogonal(&v, &tangent_basis, 1e-10);
    let a11 = proj1(second(c1, c1))?;
    let a12 = proj1(second(c1, c2))?;
    let a22 = proj1(second(c2, c2))?;

    let mean: Vec<f64> = a11.iter().zip(&a22).map(|(x, y)| x + y).collect();
    let minimality = 0.5 * norm(&mean);
    let (kappa, mu, ellipse_residual) = ellipse_axes(&a11, &a12);

    // Third fundamental form: cubic derivative combinations projected off
    // position, tangent and first normal directions.
    let third = |ci: [f64; 2], cj: [f64; 2], ck: [f64; 2]| -> Vec<f64> {
        let g3 = [
            t.partial(3, 0),
            t.partial(2, 1),
            t.partial(1, 2),
            t.partial(0, 3),
        ];
        let mut out = vec![0.0; dim];
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    let w = ci[a] * cj[b] * ck[c];
                    let d3 = g3[a + b + c];
                    for k in 0..dim {
                        out[k] += w * d3[k];
                    }
                }
            }
        }
        out
    };
    let mut basis2 = tangent_basis.to_vec();
    // Include first-normal directions only if they are nondegenerate.
    if norm(&a11) > 1e-9 {
        basis2.push(a11.clone());
    }
    if norm(&a12) > 1e-9 {
        let a12p = crate::jets::project_orthogonal(&a12, &[a11.clone()], 1e-12)
            .unwrap_or_else(|_| a12.clone());
        if norm(&a12p) > 1e-9 {
            basis2.push(a12);
        }
    }
    let c111 = crate::jets::project_orthogonal(&third(c1, c1, c1), &basis2, 1e-10)?;
    let c112 = crate::jets::project_orthogonal(&third(c1, c1, c2), &basis2, 1e-10)?;
    let (kappa1, mu1, ellipse2_residual) = ellipse_axes(&c111, &c112);

    // Span of the derivatives up to order 3 decides substantiality.
    let cols: Vec<&[f64]> = vec![
        &g0,
        &gu,
        &gv,
        t.partial(2, 0),
        t.partial(1, 1),
        t.partial(0, 2),
        t.partial(3, 0),
        t.partial(2, 1),
        t.partial(1, 2),
        t.partial(0, 3),
    ];
    let m = DMatrix::from_fn(dim, cols.len(), |r, c| cols[c][r]);
    let sv = m.singular_values();
    let span_ratio = sv[dim - 1] / sv[0];

    Ok(PointInvariants {
        ambient: dim,
        minimality,
        kappa,
        mu,
        ellipse_residual,
        kappa1,
        mu1,
        ellipse2_residual,
        gauss: brioschi(t)?,
        span_ratio,
    })
}

/// Invariants at a point from the exact analytic jet.
pub fn invariants_at(surface: &SurfaceModel, point: (f64, f64)) -> Result<PointInvariants> {
    invariants_from_table(&surface.jet(point, 3)?)
}

// ---------------------------------------------------------------------------
// Adapted frame.

/// Dual fields of the relevant normal connection forms, expressed in the
/// orthonormal tangent frame, together with their exact first derivatives.
///
/// `a` is the tangent-frame coordinate vector of the field dual to the
/// (3,5) connection form, `b` of (3,6), `c` of (4,5), `d` of (4,6).
/// `da[i][j] = e_i(a_j)`; likewise `db`. Surfaces with only one second
/// normal direction have `b = d = 0`.
#[derive(Debug, Clone, Serialize, Default)]
pub struct DualFields {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: [f64; 2],
    pub da: [[f64; 2]; 2],
    pub db: [[f64; 2]; 2],
    /// omega_{12}(e_i): tangent connection form.
    pub omega12: [f64; 2],
    /// omega_{34}(e_i): first normal bundle connection form.
    pub omega34: [f64; 2],
    /// omega_{56}(e_i): second normal bundle connection form (zero if rank 1).
    pub omega56: [f64; 2],
}

/// Adapted moving frame of a 1-isotropic minimal surface at one point.
///
/// Frame indices follow the ambient splitting: e_1, e_2 span the tangent
/// plane, e_3, e_4 the first normal space (with alpha(e1, e1) = kappa e3 and
/// alpha(e1, e2) = mu e4), e_5, ..., e_{n+2} the remaining normal directions.
/// Together with the position vector they form an orthonormal basis of
/// R^{n+3}.
#[derive(Debug, Clone)]
pub struct SurfaceFrame {
    pub point: (f64, f64),
    pub ambient: usize,
    pub n: usize,
    /// Position jet (order 4).
    g: Vec<Jet2>,
    /// Frame vector jets, e[i] holds e_{i+1}.
    e: Vec<Vec<Jet2>>,
    /// Tangent frame in coordinates: e_i = coords[i][0] d_u + coords[i][1] d_v.
    pub coords: [[f64; 2]; 2],
    pub metric: [[f64; 2]; 2],
    pub gauss: f64,
    pub kappa: f64,
    pub mu: f64,
    pub kappa1: f64,
    pub mu1: f64,
    pub minimality_residual: f64,
    pub isotropy_residual: f64,
    pub dual: DualFields,
}

impl SurfaceFrame {
    /// Position vector value.
    pub fn position(&self) -> Vec<f64> {
        jvalues(&self.g)
    }

    /// Frame vector value, `i` in 1..=n+2.
    pub fn e(&self, i: usize) -> Vec<f64> {
        jvalues(&self.e[i - 1])
    }

    /// Pushforward of the coordinate vector (du, dv).
    pub fn pushforward(&self, du: f64, dv: f64) -> Vec<f64> {
        let gu = jvalues(&jd(&self.g, 0));
        let gv = jvalues(&jd(&self.g, 1));
        gu.iter().zip(&gv).map(|(x, y)| du * x + dv * y).collect()
    }

    /// Connection form omega_{ij} evaluated on the coordinate direction
    /// `dir` (0 = u, 1 = v): the ambient derivative of e_i paired with e_j.
    pub fn omega_dir(&self, i: usize, j: usize, dir: usize) -> f64 {
        let de = jd(&self.e[i - 1], dir);
        dot(&jvalues(&de), &self.e(j))
    }

    /// Connection form omega_{ij}(e_k) on a frame direction, k in {1, 2}.
    pub fn omega(&self, i: usize, j: usize, k: usize) -> f64 {
        let c = self.coords[k - 1];
        c[0] * self.omega_dir(i, j, 0) + c[1] * self.omega_dir(i, j, 1)
    }

    #[doc(hidden)]
    pub fn e_jet_partial(&self, i: usize, du: usize, dv: usize) -> Vec<f64> {
        self.e[i - 1].iter().map(|x| x.partial(du, dv)).collect()
    }

    /// Second fundamental form alpha(e_i, e_j) as an ambient vector.
    pub fn alpha(&self, i: usize, j: usize) -> Vec<f64> {
        let sign = if i == j && i == 2 { -1.0 } else { 1.0 };
        match (i, j) {
            (1, 1) | (2, 2) => self.e(3).iter().map(|x| sign * self.kappa * x).collect(),
            (1, 2) | (2, 1) => self.e(4).iter().map(|x| self.mu * x).collect(),
            _ => panic!("alpha index out of range"),
        }
    }
}

/// Scalar field given as a Jet2; returns (value, [e_1(f), e_2(f)]).
fn field_and_derivs(f: Jet2, coords: &[[f64; 2]; 2]) -> (f64, [f64; 2]) {
    let du = f.partial(1, 0);
    let dv = f.partial(0, 1);
    (
        f.value(),
        [
            coords[0][0] * du + coords[0][1] * dv,
            coords[1][0] * du + coords[1][1] * dv,
        ],
    )
}

/// Builds the adapted frame at a point. Fails if the surface is not minimal,
/// not 1-isotropic, or has a degenerate normal splitting there.
pub fn frame_at(
    surface: &SurfaceModel,
    point: (f64, f64),
    tol: &Tolerances,
) -> Result<SurfaceFrame> {
    let ambient = surface.ambient_dim();
    let n = surface.n();
    if !surface.domain.contains(point.0, point.1) {
        return Err(Error::DomainError);
    }

    let u = Jet2::variable(point.0, 0);
    let v = Jet2::variable(point.1, 1);
    let g = surface.kind.eval(u, v);
    let unit_res = (jdot(&g, &g).value() - 1.0).abs();
    if unit_res > tol.tau_jet {
        return Err(Error::PreconditionViolation(format!(
            "surface leaves the unit sphere (|1 - |g|^2| = {unit_res:.3e})"
        )));
    }

    let gu = jd(&g, 0);
    let gv = jd(&g, 1);
    let em = jdot(&gu, &gu);
    let fm = jdot(&gu, &gv);
    let gm = jdot(&gv, &gv);
    let metric = [
        [em.value(), fm.value()],
        [fm.value(), gm.value()],
    ];
    if metric[0][0] * metric[1][1] - metric[0][1] * metric[0][1] <= tol.tau_lin {
        return Err(Error::DegenerateMetric);
    }

    // Orthonormal tangent frame; orientation flips e_2.
    let inv_sqrt_e = em.sqrt().recip();
    let e1 = jscale(&gu, inv_sqrt_e);
    let c1 = [inv_sqrt_e, Jet2::constant(0.0)];
    let ratio = fm / em;
    let w2 = jsub(&gv, &jscale(&gu, ratio));
    let w2n = jdot(&w2, &w2).sqrt();
    let ori = surface.orientation;
    let e2 = jscale(&w2, w2n.recip().scale(ori));
    let c2 = [
        -(ratio * w2n.recip()).scale(ori),
        w2n.recip().scale(ori),
    ];
    let cjet = [c1, c2];
    let coords = [
        [c1[0].value(), c1[1].value()],
        [c2[0].value(), c2[1].value()],
    ];

    // Second fundamental form in the adapted frame.
    let guu = jd(&gu, 0);
    let guv = jd(&gu, 1);
    let gvv = jd(&gv, 1);
    let second = |ci: &[Jet2; 2], cj: &[Jet2; 2]| -> Vec<Jet2> {
        let t1 = jscale(&guu, ci[0] * cj[0]);
        let t2 = jscale(&guv, ci[0] * cj[1] + ci[1] * cj[0]);
        let t3 = jscale(&gvv, ci[1] * cj[1]);
        jadd(&jadd(&t1, &t2), &t3)
    };
    let a11 = jremove(&second(&c1, &c1), &[&g, &e1, &e2]);
    let a12 = jremove(&second(&c1, &c2), &[&g, &e1, &e2]);
    let a22 = jremove(&second(&c2, &c2), &[&g, &e1, &e2]);

    let mean = jadd(&a11, &a22);
    let minimality_residual = 0.5 * norm(&jvalues(&mean));
    if minimality_residual > tol.tau_min {
        return Err(Error::NotMinimal(minimality_residual));
    }

    // Check value-level norms before forming jet square roots: the Taylor
    // coefficients of sqrt blow up at a zero base value.
    let kappa = norm(&jvalues(&a11));
    if kappa <= tol.tau_rank {
        return Err(Error::DegenerateFirstNormal(kappa));
    }
    let e3 = jscale(&a11, jdot(&a11, &a11).sqrt().recip());
    let w4 = jremove(&a12, &[&e3]);
    let mu = norm(&jvalues(&w4));
    if mu <= tol.tau_rank {
        return Err(Error::IsotropyRequired);
    }
    let e4 = jscale(&w4, jdot(&w4, &w4).sqrt().recip());

    // 1-isotropy: the ellipse must be a circle, otherwise the Gram-Schmidt
    // tangent frame is not adapted and the construction below is invalid.
    let skew = dot(&jvalues(&a11), &jvalues(&a12)).abs() / (kappa * kappa);
    let isotropy_residual = skew.max((kappa - mu).abs() / kappa);
    if isotropy_residual > 1e2 * tol.tau_rank {
        return Err(Error::IsotropyRequired);
    }

    // Third fundamental form and the second normal space frame.
    let guuu = jd(&guu, 0);
    let guuv = jd(&guu, 1);
    let guvv = jd(&guv, 1);
    let gvvv = jd(&gvv, 1);
    let g3 = [&guuu, &guuv, &guvv, &gvvv];
    let third = |ci: &[Jet2; 2], cj: &[Jet2; 2], ck: &[Jet2; 2]| -> Vec<Jet2> {
        let mut out = vec![Jet2::constant(0.0); ambient];
        for a in 0..2usize {
            for b in 0..2usize {
                for c in 0..2usize {
                    let w = ci[a] * cj[b] * ck[c];
                    for k in 0..ambient {
                        out[k] = out[k] + g3[a + b + c][k] * w;
                    }
                }
            }
        }
        out
    };
    if n >= 5 {
        // Catalog surfaces stop at n = 4; higher splittings would need
        // fourth-order forms for e_7 onwards.
        return Err(Error::InvalidParameters(format!(
            "normal splitting beyond rank 2 not supported (n = {n})"
        )));
    }
    let basis: [&[Jet2]; 5] = [&g, &e1, &e2, &e3, &e4];
    let c111 = jremove(&third(&c1, &c1, &c1), &basis);
    let c112 = jremove(&third(&c1, &c1, &c2), &basis);
    let (kappa1, mu1, _) = ellipse_axes(&jvalues(&c111), &jvalues(&c112));

    // By symmetry and trace-freeness the third form is spanned by these two
    // vectors; Gram-Schmidt over them must produce the n - 2 directions of
    // the second normal space. Either vector may vanish identically (the
    // flat torus has a zero first one); degenerate candidates are skipped.
    // The fixed candidate order keeps the resulting frame smooth in p.
    let mut higher: Vec<Vec<Jet2>> = Vec::new();
    for cand in [c111, c112] {
        if higher.len() == n - 2 {
            break;
        }
        let rem: Vec<&[Jet2]> = higher.iter().map(|h| h.as_slice()).collect();
        let w = jremove(&cand, &rem);
        if norm(&jvalues(&w)) > tol.tau_rank {
            higher.push(jscale(&w, jdot(&w, &w).sqrt().recip()));
        }
    }
    if higher.len() != n - 2 {
        return Err(Error::RankDeficient(2));
    }
    let mut frames = vec![e1, e2, e3, e4];
    frames.extend(higher);

    // Connection scalars and their exact first derivatives.
    let de3 = [jd(&frames[2], 0), jd(&frames[2], 1)];
    let de4 = [jd(&frames[3], 0), jd(&frames[3], 1)];
    let om = |de: &[Vec<Jet2>; 2], target: &[Jet2], j: usize| -> Jet2 {
        cjet[j][0] * jdot(&de[0], target) + cjet[j][1] * jdot(&de[1], target)
    };

    let mut dual = DualFields::default();
    for j in 0..2 {
        let (av, dav) = field_and_derivs(om(&de3, &frames[4], j), &coords);
        dual.a[j] = av;
        dual.da[0][j] = dav[0];
        dual.da[1][j] = dav[1];
        dual.c[j] = om(&de4, &frames[4], j).value();
        if n >= 4 {
            let (bv, dbv) = field_and_derivs(om(&de3, &frames[5], j), &coords);
            dual.b[j] = bv;
            dual.db[0][j] = dbv[0];
            dual.db[1][j] = dbv[1];
            dual.d[j] = om(&de4, &frames[5], j).value();
        }
    }
    let de1 = [jd(&frames[0], 0), jd(&frames[0], 1)];
    let de5 = [jd(&frames[4], 0), jd(&frames[4], 1)];
    for j in 0..2 {
        dual.omega12[j] = om(&de1, &frames[1], j).value();
        dual.omega34[j] = om(&de3, &frames[3], j).value();
        if n >= 4 {
            dual.omega56[j] = om(&de5, &frames[5], j).value();
        }
    }

    let gauss = brioschi(&JetTable::from_jets(point, 3, &g))?;

    Ok(SurfaceFrame {
        point,
        ambient,
        n,
        g,
        e: frames,
        coords,
        metric,
        gauss,
        kappa,
        mu,
        kappa1,
        mu1,
        minimality_residual,
        isotropy_residual,
        dual,
    })
}

// ---------------------------------------------------------------------------
// Flag certification.

/// Measured surface properties over a seeded sample, compared against the
/// catalog declarations by [`crate::catalog::verify_entry`].
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceCertification {
    pub samples: usize,
    pub minimal: bool,
    pub minimality_residual: f64,
    pub substantial: bool,
    pub substantial_gap: f64,
    pub one_isotropic: bool,
    pub isotropy_residual: f64,
    pub flat: bool,
    pub curvature_spread: f64,
    pub regular: bool,
    pub rank_margin: f64,
    pub pseudoholomorphic: bool,
    pub higher_isotropy_residual: f64,
}

/// Uniform sample from the parameter domain, padded away from non-periodic
/// boundaries.
pub fn sample_domain<R: Rng>(domain: &Domain, rng: &mut R) -> (f64, f64) {
    let pad = |lo: f64, hi: f64, periodic: bool| {
        let p = if periodic { 0.0 } else { 0.02 * (hi - lo) };
        (lo + p, hi - p)
    };
    let (ulo, uhi) = pad(domain.u.0, domain.u.1, domain.periodic_u);
    let (vlo, vhi) = pad(domain.v.0, domain.v.1, domain.periodic_v);
    (rng.gen_range(ulo..uhi), rng.gen_range(vlo..vhi))
}

/// Measures every catalog flag on a seeded sample of points.
pub fn certify(
    surface: &SurfaceModel,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> Result<SurfaceCertification> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = surface.n();
    let mut max_minimality = 0.0f64;
    let mut max_ellipse = 0.0f64;
    let mut min_kappa = f64::INFINITY;
    let mut max_abs_k = 0.0f64;
    let mut min_span = f64::INFINITY;
    let mut min_rank = f64::INFINITY;
    let mut max_ellipse2 = 0.0f64;
    let mut min_kappa1 = f64::INFINITY;

    for _ in 0..samples {
        let p = sample_domain(&surface.domain, &mut rng);
        let inv = invariants_at(surface, p)?;
        max_minimality = max_minimality.max(inv.minimality);
        max_ellipse = max_ellipse.max(inv.ellipse_residual);
        min_kappa = min_kappa.min(inv.kappa);
        max_abs_k = max_abs_k.max(inv.gauss.abs());
        min_span = min_span.min(inv.span_ratio);
        max_ellipse2 = max_ellipse2.max(inv.ellipse2_residual);
        min_kappa1 = min_kappa1.min(inv.kappa1);
        let mut r = inv.kappa.min(inv.mu).min(inv.kappa1);
        if n >= 4 {
            r = r.min(inv.mu1);
        }
        min_rank = min_rank.min(r);
    }

    Ok(SurfaceCertification {
        samples,
        minimal: max_minimality <= tol.tau_min,
        minimality_residual: max_minimality,
        substantial: min_span > tol.tau_rank,
        substantial_gap: min_span,
        one_isotropic: min_kappa > tol.tau_rank && max_ellipse <= 1e2 * tol.tau_rank,
        isotropy_residual: max_ellipse,
        flat: max_abs_k <= tol.tau_lin,
        curvature_spread: max_abs_k,
        regular: min_rank > tol.tau_rank,
        rank_margin: min_rank,
        pseudoholomorphic: n >= 4
            && min_kappa1 > tol.tau_rank
            && max_ellipse2 <= 1e2 * tol.tau_rank,
        higher_isotropy_residual: if n >= 4 { max_ellipse2 } else { 1.0 },
    })
}

/// Residual of the connection-form duality: lambda c = J-rotated a and
/// lambda d = J-rotated b, with lambda = mu / kappa.
pub fn omegas_residual(f: &SurfaceFrame) -> f64 {
    let lambda = f.mu / f.kappa;
    let d = &f.dual;
    (lambda * d.c[0] - d.a[1])
        .abs()
        .max((lambda * d.c[1] + d.a[0]).abs())
        .max((lambda * d.d[0] - d.b[1]).abs())
        .max((lambda * d.d[1] + d.b[0]).abs())
}

/// The eight flat-normal-curvature identities between the first and the
/// higher normal spaces. The last four pair the dual fields with connection
/// forms into a third normal space, which is absent for n <= 4, so they
/// vanish identically here; they are kept so callers see all eight.
pub fn ricci_residuals(f: &SurfaceFrame) -> [f64; 8] {
    let d = &f.dual;
    let bi = [
        d.omega12[0] + d.omega34[0],
        d.omega12[1] + d.omega34[1],
    ];
    let w = d.omega56;
    let a = d.a;
    let b = d.b;
    let r1 = d.da[0][1] - d.da[1][0] + a[0] * bi[0] + a[1] * bi[1] - b[1] * w[0] + b[0] * w[1];
    let r2 = d.db[0][1] - d.db[1][0] + b[0] * bi[0] + b[1] * bi[1] + a[1] * w[0] - a[0] * w[1];
    let r3 = d.da[0][0] + d.da[1][1] - a[1] * bi[0] + a[0] * bi[1] - b[0] * w[0] - b[1] * w[1];
    let r4 = d.db[0][0] + d.db[1][1] - b[1] * bi[0] + b[0] * bi[1] + a[0] * w[0] + a[1] * w[1];
    [r1.abs(), r2.abs(), r3.abs(), r4.abs(), 0.0, 0.0, 0.0, 0.0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn torus_frame_invariants() {
        let t = catalog::equilateral_torus();
        let tol = Tolerances::default();
        let f = frame_at(&t, (0.7, -1.1), &tol).unwrap();
        assert!((f.metric[0][0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((f.metric[0][1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.kappa - SQRT_HALF).abs() < 1e-12);
        assert!((f.mu - SQRT_HALF).abs() < 1e-12);
        assert!((f.kappa1 - SQRT_HALF).abs() < 1e-10);
        assert!(f.gauss.abs() < 1e-10);
        assert!(f.minimality_residual < 1e-12);
    }

    #[test]
    fn torus_frame_is_orthonormal() {
        let t = catalog::equilateral_torus();
        let f = frame_at(&t, (0.3, 0.9), &Tolerances::default()).unwrap();
        let mut vecs = vec![f.position()];
        for i in 1..=5 {
            vecs.push(f.e(i));
        }
        for i in 0..vecs.len() {
            for j in 0..vecs.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (dot(&vecs[i], &vecs[j]) - expect).abs() < 1e-10,
                    "gram[{i}][{j}]"
                );
            }
        }
    }

    #[test]
    fn boruvka_frame_invariants() {
        let s = catalog::boruvka_sphere();
        let f = frame_at(&s, (1.1, 2.0), &Tolerances::default()).unwrap();
        let want = (5.0f64 / 12.0).sqrt();
        assert!((f.kappa - want).abs() < 1e-10, "kappa = {}", f.kappa);
        assert!((f.mu - want).abs() < 1e-10);
        assert!((f.gauss - 1.0 / 6.0).abs() < 1e-9, "gauss = {}", f.gauss);
        assert!(f.kappa1 > 1e-3 && (f.kappa1 - f.mu1).abs() < 1e-9);
    }

    #[test]
    fn gauss_matches_extrinsic_formula() {
        // For minimal surfaces in the unit sphere, K = 1 - kappa^2 - mu^2.
        for s in [catalog::equilateral_torus(), catalog::boruvka_sphere()] {
            let f = frame_at(&s, (0.9, 0.4), &Tolerances::default()).unwrap();
            let extrinsic = 1.0 - f.kappa * f.kappa - f.mu * f.mu;
            assert!((f.gauss - extrinsic).abs() < 1e-9, "{}", s.name);
        }
    }

    #[test]
    fn invariants_agree_with_fd_oracle() {
        let s = catalog::boruvka_sphere();
        let p = (1.3, 0.8);
        let a = invariants_from_table(&s.jet(p, 3).unwrap()).unwrap();
        let f = invariants_from_table(&s.fd_jet(p, 3, 1e-3).unwrap()).unwrap();
        assert!((a.kappa - f.kappa).abs() < 1e-5);
        assert!((a.mu - f.mu).abs() < 1e-5);
        assert!((a.gauss - f.gauss).abs() < 1e-4);
        assert!((a.kappa1 - f.kappa1).abs() < 1e-4);
    }

    #[test]
    fn dual_field_derivatives_match_differencing() {
        let s = catalog::boruvka_sphere();
        let tol = Tolerances::default();
        let p = (1.2, 0.5);
        let f = frame_at(&s, p, &tol).unwrap();
        let h = 1e-5;
        for j in 0..2 {
            // Coordinate-direction derivatives of a_j by central differences.
            let au = (frame_at(&s, (p.0 + h, p.1), &tol).unwrap().dual.a[j]
                - frame_at(&s, (p.0 - h, p.1), &tol).unwrap().dual.a[j])
                / (2.0 * h);
            let av = (frame_at(&s, (p.0, p.1 + h), &tol).unwrap().dual.a[j]
                - frame_at(&s, (p.0, p.1 - h), &tol).unwrap().dual.a[j])
                / (2.0 * h);
            for i in 0..2 {
                let fd = f.coords[i][0] * au + f.coords[i][1] * av;
                assert!(
                    (f.dual.da[i][j] - fd).abs() < 1e-7,
                    "da[{i}][{j}]: exact {} fd {}",
                    f.dual.da[i][j],
                    fd
                );
            }
        }
    }

    #[test]
    fn connection_duality_relation() {
        // The (4,5) dual coordinates are a quarter-turn of the (3,5) ones.
        for s in [catalog::equilateral_torus(), catalog::boruvka_sphere()] {
            let f = frame_at(&s, (0.8, 1.7), &Tolerances::default()).unwrap();
            let d = &f.dual;
            assert!((d.c[0] - d.a[1]).abs() < 1e-9, "{}: c1 vs a2", s.name);
            assert!((d.c[1] + d.a[0]).abs() < 1e-9, "{}: c2 vs -a1", s.name);
            if s.n() >= 4 {
                assert!((d.d[0] - d.b[1]).abs() < 1e-9);
                assert!((d.d[1] + d.b[0]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn torus_dual_field_is_unit_tangent() {
        let f = frame_at(
            &catalog::equilateral_torus(),
            (0.2, 0.6),
            &Tolerances::default(),
        )
        .unwrap();
        let n = (f.dual.a[0] * f.dual.a[0] + f.dual.a[1] * f.dual.a[1]).sqrt();
        assert!((n - 1.0).abs() < 1e-10, "|V| = {n}");
    }

    #[test]
    fn clifford_frame_rejected() {
        let r = frame_at(
            &catalog::clifford_control(),
            (0.3, 0.4),
            &Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::IsotropyRequired)));
    }

    #[test]
    fn great_sphere_frame_rejected() {
        let r = frame_at(
            &catalog::great_sphere(),
            (1.0, 1.0),
            &Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::DegenerateFirstNormal(_))));
    }

    #[test]
    fn certify_matches_declared_flags() {
        let tol = Tolerances::default();
        for s in catalog::all() {
            let c = certify(&s, 11, 40, &tol).unwrap();
            assert_eq!(c.minimal, s.flags.minimal, "{} minimal", s.name);
            assert_eq!(c.substantial, s.flags.substantial, "{} substantial", s.name);
            assert_eq!(
                c.one_isotropic, s.flags.one_isotropic,
                "{} one_isotropic",
                s.name
            );
            assert_eq!(c.flat, s.flags.flat, "{} flat", s.name);
            assert_eq!(c.regular, s.flags.regular, "{} regular", s.name);
            assert_eq!(
                c.pseudoholomorphic, s.flags.pseudoholomorphic,
                "{} pseudoholomorphic",
                s.name
            );
        }
    }
}
