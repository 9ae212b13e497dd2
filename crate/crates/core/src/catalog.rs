//! Concrete closed-form input surfaces with declared properties, plus
//! negative controls.
//!
//! Declarations are claims, not trust: `verify_entry` re-checks every flag
//! numerically on a seeded sample and a failing flag aborts catalog load.

use crate::config::Tolerances;
use crate::jets::{self, Jet2, JetTable, Real};
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::PI;

/// Rectangular parameter domain with optional periodicity per direction.
#[derive(Debug, Clone, Serialize)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl Domain {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.periodic_u || (self.u.0 <= u && u <= self.u.1))
            && (self.periodic_v || (self.v.0 <= v && v <= self.v.1))
    }

    /// Margin to the nearest non-periodic boundary (infinite if periodic).
    pub fn margin(&self, u: f64, v: f64) -> f64 {
        let mu = if self.periodic_u {
            f64::INFINITY
        } else {
            (u - self.u.0).min(self.u.1 - u)
        };
        let mv = if self.periodic_v {
            f64::INFINITY
        } else {
            (v - self.v.0).min(self.v.1 - v)
        };
        mu.min(mv)
    }
}

/// Properties a catalog entry claims for itself.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeclaredFlags {
    pub minimal: bool,
    pub substantial: bool,
    pub one_isotropic: bool,
    pub pseudoholomorphic: bool,
    pub regular: bool,
    pub flat: bool,
}

/// Closed-form immersion families. All are defined over a generic scalar so
/// one definition serves both exact jets and the fd oracle.
#[derive(Debug, Clone)]
pub enum SurfaceKind {
    /// g(u, v) = sum_j r_j e^{i (w_j . (u, v))}, packed (x1, y1, x2, y2, x3, y3).
    ExpTorus {
        radii: [f64; 3],
        freqs: [[f64; 2]; 3],
    },
    /// Degree-3 harmonic-polynomial immersion of the 2-sphere into S^6,
    /// evaluated on the chart (u, v) -> (sin u cos v, sin u sin v, cos u).
    /// Each row holds cubic monomial coefficients, pre-normalized so the
    /// image lies on the unit sphere.
    HarmonicSphere { coeffs: Vec<[f64; 10]> },
    /// Totally geodesic 2-sphere chart embedded in a larger ambient space.
    GreatSphere { ambient: usize },
}

/// Cubic monomial exponents in (x, y, z), the basis for `HarmonicSphere`.
const CUBIC_MONOMIALS: [[u32; 3]; 10] = [
    [3, 0, 0],
    [2, 1, 0],
    [2, 0, 1],
    [1, 2, 0],
    [1, 1, 1],
    [1, 0, 2],
    [0, 3, 0],
    [0, 2, 1],
    [0, 1, 2],
    [0, 0, 3],
];

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Integral of x^p y^q z^r over the unit 2-sphere (surface measure).
pub fn sphere_monomial_integral(p: [u32; 3]) -> f64 {
    if p.iter().any(|&e| e % 2 == 1) {
        return 0.0;
    }
    let num: f64 = p.iter().map(|&e| double_factorial(e as i64 - 1)).product();
    let den = double_factorial(p.iter().sum::<u32>() as i64 + 1);
    4.0 * PI * num / den
}

/// L^2 inner product over S^2 of two cubic polynomials in monomial coords.
pub fn cubic_l2_inner(a: &[f64; 10], b: &[f64; 10]) -> f64 {
    let mut acc = 0.0;
    for (i, &ca) in a.iter().enumerate() {
        if ca == 0.0 {
            continue;
        }
        for (j, &cb) in b.iter().enumerate() {
            if cb == 0.0 {
                continue;
            }
            let m = [
                CUBIC_MONOMIALS[i][0] + CUBIC_MONOMIALS[j][0],
                CUBIC_MONOMIALS[i][1] + CUBIC_MONOMIALS[j][1],
                CUBIC_MONOMIALS[i][2] + CUBIC_MONOMIALS[j][2],
            ];
            acc += ca * cb * sphere_monomial_integral(m);
        }
    }
    acc
}

/// The seven degree-3 real harmonics as integer monomial coefficients.
fn raw_harmonics() -> Vec<[f64; 10]> {
    let mut h = vec![[0.0; 10]; 7];
    // 2z^3 - 3x^2 z - 3y^2 z
    h[0][9] = 2.0;
    h[0][2] = -3.0;
    h[0][7] = -3.0;
    // 4xz^2 - x^3 - xy^2
    h[1][5] = 4.0;
    h[1][0] = -1.0;
    h[1][3] = -1.0;
    // 4yz^2 - x^2 y - y^3
    h[2][8] = 4.0;
    h[2][1] = -1.0;
    h[2][6] = -1.0;
    // x^2 z - y^2 z
    h[3][2] = 1.0;
    h[3][7] = -1.0;
    // xyz
    h[4][4] = 1.0;
    // x^3 - 3xy^2
    h[5][0] = 1.0;
    h[5][3] = -3.0;
    // 3x^2 y - y^3
    h[6][1] = 3.0;
    h[6][6] = -1.0;
    h
}

/// Normalizes the harmonic basis so that the component maps are L^2
/// orthogonal with common norm, making the pointwise sum of squares one.
/// The scale is computed from the L^2 norms at runtime, not hard-coded.
fn normalized_harmonics() -> Vec<[f64; 10]> {
    let mut h = raw_harmonics();
    let target = 4.0 * PI / 7.0;
    for row in h.iter_mut() {
        let n2 = cubic_l2_inner(row, row);
        let s = (target / n2).sqrt();
        for c in row.iter_mut() {
            *c *= s;
        }
    }
    h
}

impl SurfaceKind {
    pub fn ambient_dim(&self) -> usize {
        match self {
            SurfaceKind::ExpTorus { .. } => 6,
            SurfaceKind::HarmonicSphere { coeffs } => coeffs.len(),
            SurfaceKind::GreatSphere { ambient } => *ambient,
        }
    }

    pub fn eval<S: Real>(&self, u: S, v: S) -> Vec<S> {
        match self {
            SurfaceKind::ExpTorus { radii, freqs } => {
                let mut out = Vec::with_capacity(6);
                for (r, w) in radii.iter().zip(freqs) {
                    let phase = u.scale(w[0]) + v.scale(w[1]);
                    out.push(phase.cos().scale(*r));
                    out.push(phase.sin().scale(*r));
                }
                out
            }
            SurfaceKind::HarmonicSphere { coeffs } => {
                let (su, cu) = (u.sin(), u.cos());
                let (sv, cv) = (v.sin(), v.cos());
                let x = su * cv;
                let y = su * sv;
                let z = cu;
                let mono = [
                    x * x * x,
                    x * x * y,
                    x * x * z,
                    x * y * y,
                    x * y * z,
                    x * z * z,
                    y * y * y,
                    y * y * z,
                    y * z * z,
                    z * z * z,
                ];
                coeffs
                    .iter()
                    .map(|row| {
                        let mut acc = S::from_f64(0.0);
                        for (c, m) in row.iter().zip(&mono) {
                            acc = acc + m.scale(*c);
                        }
                        acc
                    })
                    .collect()
            }
            SurfaceKind::GreatSphere { ambient } => {
                let mut out = vec![S::from_f64(0.0); *ambient];
                let (su, cu) = (u.sin(), u.cos());
                out[0] = su * v.cos();
                out[1] = su * v.sin();
                out[2] = cu;
                out
            }
        }
    }
}

/// A parametrized immersion of a 2-domain into the unit sphere of its
/// ambient Euclidean space, exposing exact jets to order 4.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    pub name: String,
    pub kind: SurfaceKind,
    pub domain: Domain,
    /// +1.0 or -1.0; flips the orientation of the tangent frame.
    pub orientation: f64,
    pub flags: DeclaredFlags,
    pub provenance: String,
}

impl SurfaceModel {
    /// Dimension n of the ruled submanifold M^n built on this surface
    /// (ambient space is R^{n+3}).
    pub fn n(&self) -> usize {
        self.kind.ambient_dim() - 3
    }

    pub fn ambient_dim(&self) -> usize {
        self.kind.ambient_dim()
    }

    pub fn eval_point(&self, u: f64, v: f64) -> Vec<f64> {
        self.kind.eval(u, v)
    }

    /// Exact jet of the immersion at `point`, to the given order (max 4).
    pub fn jet(&self, point: (f64, f64), order: usize) -> Result<JetTable> {
        if order > jets::MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if !self.domain.contains(point.0, point.1) {
            return Err(Error::DomainError);
        }
        let u = Jet2::variable(point.0, 0);
        let v = Jet2::variable(point.1, 1);
        let comps = self.kind.eval(u, v);
        Ok(JetTable::from_jets(point, order, &comps))
    }

    /// Central-difference jet, the independent oracle for [`Self::jet`].
    pub fn fd_jet(&self, point: (f64, f64), order: usize, step: f64) -> Result<JetTable> {
        if !(step > 0.0) {
            return Err(Error::ZeroStep);
        }
        if !self.domain.contains(point.0, point.1) || self.domain.margin(point.0, point.1) < 2.0 * step
        {
            return Err(Error::DomainError);
        }
        jets::fd_jet_of(|u, v| self.kind.eval(u, v), point, order, step)
    }
}

/// The flat equilateral torus in S^5: three unit-frequency exponentials with
/// equal radii. This is the standard explicit flat 1-isotropic torus.
pub fn equilateral_torus() -> SurfaceModel {
    let r = 1.0 / 3.0f64.sqrt();
    SurfaceModel {
        name: "equilateral-torus".into(),
        kind: SurfaceKind::ExpTorus {
            radii: [r, r, r],
            freqs: [[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]],
        },
        domain: Domain {
            u: (0.0, 2.0 * PI),
            v: (0.0, 2.0 * PI),
            periodic_u: true,
            periodic_v: true,
        },
        orientation: 1.0,
        flags: DeclaredFlags {
            minimal: true,
            substantial: true,
            one_isotropic: true,
            pseudoholomorphic: false,
            regular: true,
            flat: true,
        },
        provenance: "explicit equilateral exponential torus".into(),
    }
}

/// User-parametrized family of exponential tori. Flags are computed, not
/// assumed: entries failing 1-isotropy are admitted as negative controls.
pub fn exponential_torus(radii: [f64; 3], freqs: [[f64; 2]; 3]) -> Result<SurfaceModel> {
    let sum: f64 = radii.iter().map(|r| r * r).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameters(format!(
            "squared radii must sum to 1 (got {sum})"
        )));
    }
    Ok(SurfaceModel {
        name: "exponential-torus".into(),
        kind: SurfaceKind::ExpTorus { radii, freqs },
        domain: Domain {
            u: (0.0, 2.0 * PI),
            v: (0.0, 2.0 * PI),
            periodic_u: true,
            periodic_v: true,
        },
        orientation: 1.0,
        flags: DeclaredFlags {
            minimal: true,
            substantial: true,
            one_isotropic: true,
            pseudoholomorphic: false,
            regular: true,
            flat: true,
        },
        provenance: "parametric exponential torus (flags re-verified at load)".into(),
    })
}

/// Clifford torus in S^3 c S^5, a negative control: minimal but neither
/// substantial nor 1-isotropic (its curvature ellipse degenerates).
pub fn clifford_control() -> SurfaceModel {
    let r = 1.0 / 2.0f64.sqrt();
    let s2 = 2.0f64.sqrt();
    SurfaceModel {
        name: "clifford-control".into(),
        kind: SurfaceKind::ExpTorus {
            radii: [r, r, 0.0],
            freqs: [[s2, 0.0], [0.0, s2], [0.0, 0.0]],
        },
        domain: Domain {
            u: (0.0, 2.0 * PI),
            v: (0.0, 2.0 * PI),
            periodic_u: true,
            periodic_v: true,
        },
        orientation: 1.0,
        flags: DeclaredFlags {
            minimal: true,
            substantial: false,
            one_isotropic: false,
            pseudoholomorphic: false,
            regular: false,
            flat: true,
        },
        provenance: "Clifford torus negative control".into(),
    }
}

/// Minimal 2-sphere in S^6 built from an orthonormal basis of degree-3 real
/// spherical harmonics; constant curvature 1/6, pseudoholomorphic.
pub fn boruvka_sphere() -> SurfaceModel {
    SurfaceModel {
        name: "boruvka-sphere".into(),
        kind: SurfaceKind::HarmonicSphere {
            coeffs: normalized_harmonics(),
        },
        domain: Domain {
            u: (0.5, PI - 0.5),
            v: (0.0, 2.0 * PI),
            periodic_u: false,
            periodic_v: true,
        },
        orientation: 1.0,
        flags: DeclaredFlags {
            minimal: true,
            substantial: true,
            one_isotropic: true,
            pseudoholomorphic: true,
            regular: true,
            flat: false,
        },
        provenance: "degree-3 harmonic minimal sphere, runtime-normalized".into(),
    }
}

/// Totally geodesic 2-sphere chart in S^5; trivial control (alpha = 0).
pub fn great_sphere() -> SurfaceModel {
    SurfaceModel {
        name: "great-sphere".into(),
        kind: SurfaceKind::GreatSphere { ambient: 6 },
        domain: Domain {
            u: (0.5, PI - 0.5),
            v: (0.0, 2.0 * PI),
            periodic_u: false,
            periodic_v: true,
        },
        orientation: 1.0,
        flags: DeclaredFlags {
            minimal: true,
            substantial: false,
            one_isotropic: false,
            pseudoholomorphic: false,
            regular: false,
            flat: false,
        },
        provenance: "totally geodesic control".into(),
    }
}

pub fn all() -> Vec<SurfaceModel> {
    vec![
        equilateral_torus(),
        clifford_control(),
        boruvka_sphere(),
        great_sphere(),
    ]
}

pub fn by_name(name: &str) -> Result<SurfaceModel> {
    all()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownSurface(name.to_string()))
}

/// One re-verified flag in the catalog manifest.
#[derive(Debug, Clone, Serialize)]
pub struct FlagCheck {
    pub flag: String,
    pub declared: bool,
    pub measured: bool,
    pub residual: f64,
}

/// Manifest entry: name, flags and their verification residuals.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub ambient_dim: usize,
    pub n: usize,
    pub provenance: String,
    pub checks: Vec<FlagCheck>,
}

/// Re-verifies every declared flag of an entry on a seeded sample.
/// Returns the manifest entry; any mismatch between a declared flag and its
/// measurement is an error (declarations are claims, not trust).
pub fn verify_entry(
    surface: &SurfaceModel,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> Result<ManifestEntry> {
    let report = crate::surface::certify(surface, seed, samples, tol)?;
    let checks = vec![
        FlagCheck {
            flag: "minimal".into(),
            declared: surface.flags.minimal,
            measured: report.minimal,
            residual: report.minimality_residual,
        },
        FlagCheck {
            flag: "substantial".into(),
            declared: surface.flags.substantial,
            measured: report.substantial,
            residual: report.substantial_gap,
        },
        FlagCheck {
            flag: "one_isotropic".into(),
            declared: surface.flags.one_isotropic,
            measured: report.one_isotropic,
            residual: report.isotropy_residual,
        },
        FlagCheck {
            flag: "flat".into(),
            declared: surface.flags.flat,
            measured: report.flat,
            residual: report.curvature_spread,
        },
        FlagCheck {
            flag: "regular".into(),
            declared: surface.flags.regular,
            measured: report.regular,
            residual: report.rank_margin,
        },
        FlagCheck {
            flag: "pseudoholomorphic".into(),
            declared: surface.flags.pseudoholomorphic,
            measured: report.pseudoholomorphic,
            residual: report.higher_isotropy_residual,
        },
    ];
    for c in &checks {
        if c.declared != c.measured {
            return Err(Error::PreconditionViolation(format!(
                "catalog entry '{}': declared flag {}={} but measured {} (residual {:.3e})",
                surface.name, c.flag, c.declared, c.measured, c.residual
            )));
        }
    }
    Ok(ManifestEntry {
        name: surface.name.clone(),
        ambient_dim: surface.ambient_dim(),
        n: surface.n(),
        provenance: surface.provenance.clone(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::norm;

    #[test]
    fn harmonic_basis_is_orthogonal_with_common_norm() {
        let h = normalized_harmonics();
        let target = 4.0 * PI / 7.0;
        for i in 0..7 {
            for j in 0..7 {
                let ip = cubic_l2_inner(&h[i], &h[j]);
                let expect = if i == j { target } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "gram[{i}][{j}] = {ip}");
            }
        }
    }

    #[test]
    fn catalog_images_lie_on_unit_sphere() {
        for s in all() {
            let p = s.eval_point(0.9, 1.3);
            assert!((norm(&p) - 1.0).abs() < 1e-12, "{} off sphere", s.name);
        }
    }

    #[test]
    fn torus_jet_matches_hand_values() {
        let t = equilateral_torus();
        let jet = t.jet((0.0, 0.0), 1).unwrap();
        let r = 1.0 / 3.0f64.sqrt();
        let g = jet.partial(0, 0);
        for (got, want) in g.iter().zip([r, 0.0, r, 0.0, r, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let gu = jet.partial(1, 0);
        for (got, want) in gu.iter().zip([0.0, r, 0.0, 0.0, 0.0, -r]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn fd_jet_agrees_with_analytic() {
        let t = equilateral_torus();
        let a = t.jet((0.4, -0.2), 2).unwrap();
        let f = t.fd_jet((0.4, -0.2), 2, 1e-3).unwrap();
        for i in 0..=2usize {
            for j in 0..=(2 - i) {
                let d: Vec<f64> = a
                    .partial(i, j)
                    .iter()
                    .zip(f.partial(i, j))
                    .map(|(x, y)| x - y)
                    .collect();
                let tol = if i + j <= 1 { 1e-6 } else { 1e-5 };
                assert!(norm(&d) < tol, "partial ({i},{j}) differs by {}", norm(&d));
            }
        }
    }

    #[test]
    fn exponential_torus_rejects_bad_radii() {
        assert!(exponential_torus([1.0, 1.0, 0.0], [[1.0, 0.0]; 3]).is_err());
    }

    #[test]
    fn by_name_unknown_errors() {
        assert!(matches!(by_name("nope"), Err(Error::UnknownSurface(_))));
    }
}
