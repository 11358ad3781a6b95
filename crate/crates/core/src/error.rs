//! Crate-wide error type.

/// Errors produced by the geometry, simulation, imaging, detection and
/// estimation modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("window must satisfy a1 < a2 and b1 < b2, got [{a1}, {a2}] x [{b1}, {b2}]")]
    InvalidWindow { a1: f64, a2: f64, b1: f64, b2: f64 },

    #[error("field of view must lie in (0, pi) radians, got {0}")]
    FieldOfViewOutOfRange(f64),

    #[error("focal length must be positive and finite, got {0}")]
    InvalidFocalLength(f64),

    #[error("plane distance h must be positive and finite, got {0}")]
    InvalidPlaneDistance(f64),

    /// The ray through the given image point does not meet the oriented plane.
    #[error("inadmissible configuration: <delta, X> = {dot} >= 0 at image point ({x1}, {x2})")]
    Inadmissible { x1: f64, x2: f64, dot: f64 },

    #[error(
        "orientation (eta1 = {eta1} rad, eta2 = {eta2} rad) is not admissible over the window"
    )]
    InadmissibleOrientation { eta1: f64, eta2: f64 },

    #[error("point with X3 = {0} >= 0 cannot be projected to the image plane")]
    DegenerateRay(f64),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailed(String),

    #[error("invalid simulation parameter: {0}")]
    InvalidSimulationParameter(String),

    #[error("point ({x1}, {x2}) lies outside the window")]
    PointOutsideWindow { x1: f64, x2: f64 },

    #[error("duplicate point ({x1}, {x2}) in pattern")]
    DuplicatePoint { x1: f64, x2: f64 },

    #[error("image parse error at byte {offset}: {message}")]
    ImageParse { offset: usize, message: String },

    #[error("unsupported image format: {0}")]
    UnsupportedImageFormat(String),

    #[error("invalid image dimensions or pixel data: {0}")]
    InvalidImage(String),

    #[error("mask contains no boundary pixels")]
    EmptyMask,

    #[error("histogram is degenerate (constant image), cannot pick a threshold")]
    DegenerateHistogram,

    #[error("probability map is degenerate: {0}")]
    DegenerateMap(String),

    #[error("invalid detection parameter: {0}")]
    InvalidDetectionParameter(String),

    #[error("point pattern is empty")]
    EmptyPattern,

    #[error("invalid estimation parameter: {0}")]
    InvalidEstimationParameter(String),

    #[error("CSV parse error on line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
