use thiserror::Error;

/// Everything that can go wrong while setting up or solving a scattering problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("asymptotic channel closed at the {edge} edge (k^2 = {k_squared})")]
    AsymptoticallyClosedChannel { edge: &'static str, k_squared: f64 },

    #[error("potential does not reach its asymptotes within |x| <= {max_half_width}")]
    NoDecay { max_half_width: f64 },

    #[error("turning point near x = {x} (k^2 = {k_squared})")]
    TurningPoint { x: f64, k_squared: f64 },

    #[error("gauge degenerate at x = {x}: |phi'| = {magnitude} is below the threshold {threshold}")]
    GaugeDegenerate { x: f64, magnitude: f64, threshold: f64 },

    #[error("step size underflow at x = {x} (h = {step})")]
    StepUnderflow { x: f64, step: f64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("bounds require a real gauge, got `{gauge_id}`")]
    ComplexGaugeRejected { gauge_id: String },

    #[error("gauge `{gauge_id}` has a discontinuous phi' at x = {x}; bounds need a continuous phi'")]
    DiscontinuousGauge { gauge_id: String, x: f64 },

    #[error("gauge family is empty")]
    EmptyFamily,

    #[error("no member of the gauge family is admissible")]
    NoAdmissibleMember,

    #[error(
        "bound violated for `{gauge_id}`: T = {transmission} < t_lower = {t_lower} or R = {reflection} > r_upper = {r_upper}"
    )]
    BoundViolation {
        gauge_id: String,
        transmission: f64,
        t_lower: f64,
        reflection: f64,
        r_upper: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
