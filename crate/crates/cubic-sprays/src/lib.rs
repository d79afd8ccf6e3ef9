//! Geometry of smooth cubic hypersurfaces X ⊂ P^{n+1}: the third-point
//! involution, lines through a point, and machine-checkable domination
//! certificates built from rank-1 spray orbit data.
//!
//! Everything runs over one of two scalar backends: exact rationals
//! (identity-level checks, exact certificates) or complex doubles
//! (root-finding over the algebraically closed field).

pub mod corpus;
pub mod forms;
pub mod geom;
pub mod linalg;
pub mod projective;
pub mod scalar;
pub mod solve;
pub mod spray;
pub mod suite;

pub use forms::{parse_cubic, HomogeneousCubic, LineRestriction, TrilinearForm};
pub use geom::{CubicHypersurface, DivisorOnLine, LineSet};
pub use projective::{proj_equal, span_rank, ProjectiveLine, ProjectivePoint, TangentFrame};
pub use scalar::{Cx, Rat, Scalar};
pub use solve::{cluster_roots, conic_cubic_intersect, cubic_roots, PlaneIntersection, RootList};
pub use spray::{
    build_certificate, conic_orbit_check, pick_setup, verify_certificate, ConicReport,
    OrbitDatum, SprayCertificate, SpraySetup,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Decision thresholds shared by the numeric backend. The exact backend
/// ignores all of them except `retries`.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Relative tolerance for membership predicates (F(p) = 0 and friends).
    pub membership: f64,
    /// Rank threshold: singular values below `rank * sigma_max` count as zero.
    pub rank: f64,
    /// Single-linkage radius for grouping numeric roots into multiple roots.
    pub cluster_radius: f64,
    /// Resample limit for the randomized searches.
    pub retries: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            membership: 1e-10,
            rank: 1e-8,
            cluster_radius: 1e-7,
            retries: 32,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("non-cubic monomial: {0}")]
    NonCubicMonomial(String),
    #[error("zero form")]
    ZeroForm,
    #[error("dimension {0} too small (need n >= 2)")]
    DimensionTooSmall(usize),
    #[error("degenerate line: direction proportional to base point")]
    DegenerateLine,
    #[error("coincident points")]
    CoincidentPoints,
    #[error("zero coordinate vector")]
    ZeroVector,
    #[error("non-finite value in complex computation")]
    NonFinite,
    #[error("point not on the hypersurface: {0}")]
    NotOnHypersurface(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("map indeterminate: {0}")]
    Indeterminate(String),
    #[error("polynomial identically zero on the line")]
    IdenticallyZeroOnLine,
    #[error("zero input polynomial")]
    ZeroPolynomial,
    #[error("roots are not rational; use the complex backend")]
    IrrationalRoots,
    #[error("operation requires the complex backend: {0}")]
    NeedsComplexBackend(String),
    #[error("resample limit exceeded: {0}")]
    ResampleLimit(String),
    #[error("retry limit exceeded: {0}")]
    RetryLimit(String),
    #[error("Eckardt center: infinitely many lines through the point")]
    EckardtCenter,
    #[error("solver degeneracy: {0}")]
    SolverDegeneracy(String),
    #[error("rank-deficient certificate (counterexample candidate): {0}")]
    RankDeficient(String),
    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("zero orbit tangent after reduction")]
    ZeroTangent,
    #[error("use spanning_lines for n >= 4")]
    UseSpanningLines,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Splitmix64 step, used to derive independent seeds from (seed, tag) pairs
/// so nested sampling loops stay reproducible.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
