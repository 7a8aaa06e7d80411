use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expression parse error in `{input}`: {message}")]
    Expression { input: String, message: String },

    #[error("unknown parameter `{name}` in {context}")]
    UnknownParameter { name: String, context: String },

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("Jacobi identity fails for `{name}` (defect {defect:e})")]
    Jacobi { name: String, defect: f64 },

    #[error("parameter `{name}` = {value} violates admissible range `{range}`")]
    ParameterRange { name: String, value: f64, range: String },

    #[error("metric does not match the catalog shape: {0}")]
    ShapeMismatch(String),

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("metric constraint `{constraint}` violated (value {value:e})")]
    ConstraintViolated { constraint: String, value: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("2-form is not compatible with the metric (defect {0:e})")]
    Incompatible(f64),

    #[error("no admissible scale: self-dual part vanishes while the Kahler form does not")]
    NoAdmissibleKappa,

    #[error("feasible start box for `{0}` is empty")]
    EmptyFeasibleBox(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
