//! Construction and numerical verification of minimal submanifolds of
//! spheres that are ruled by totally geodesic subspheres attached to a
//! 1-isotropic minimal surface.
//!
//! The pipeline:
//! * [`catalog`] ships closed-form input surfaces (flat tori in S^5, a
//!   degree-3 harmonic sphere in S^6, negative controls);
//! * [`surface`] computes adapted frames, curvature-ellipse data, the
//!   normal-bundle splitting and connection forms from exact order-4 jets;
//! * [`ruled`] evaluates the cone map G(s, p, v) = s g(p) + v, its singular
//!   set, normal frames and closed-form shape operators, cross-validated by
//!   a finite-difference oracle;
//! * [`family`] rotates the frame data through the associated isometric
//!   family and integrates the deformed surfaces from the moving-frame ODE;
//! * [`report`] / [`cli`] drive the whole suite and emit auditable JSON and
//!   CSV outputs.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod family;
pub mod jets;
pub mod report;
pub mod ruled;
pub mod surface;

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("derivative order {0} unsupported (max 4)")]
    UnsupportedOrder(usize),
    #[error("point outside the surface domain")]
    DomainError,
    #[error("finite-difference step must be positive")]
    ZeroStep,
    #[error("basis is rank deficient")]
    DegenerateBasis,
    #[error("induced metric is degenerate at the point")]
    DegenerateMetric,
    #[error("surface is not minimal at the point (residual {0:.3e})")]
    NotMinimal(f64),
    #[error("first normal space degenerate at the point (kappa {0:.3e})")]
    DegenerateFirstNormal(f64),
    #[error("normal subbundle N_{0} is rank deficient at the point")]
    RankDeficient(usize),
    #[error("cone point is singular")]
    SingularPoint,
    #[error("finite-difference stencil hits the singular set")]
    OracleUnavailable,
    #[error("scalar curvature is only defined for on-slice points")]
    SliceRequired,
    #[error("operation requires a 1-isotropic base surface")]
    IsotropyRequired,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown surface '{0}'")]
    UnknownSurface(String),
    #[error("frame integration diverged (residual {0:.3e}); refine the step")]
    IntegrationDiverged(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
