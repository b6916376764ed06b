use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("forms: {0}")]
    Forms(String),
    #[error("cremona: {0}")]
    Cremona(String),
    #[error("no contradiction reached; final system is {0}")]
    NoContradiction(String),
    #[error("certificate verification failed: {0}")]
    BadCertificate(String),
    #[error("glue induction identity failed ({stage}); difference polynomial: {diff}")]
    GlueIdentity { stage: String, diff: String },
    #[error("derivation rule {rule} rejected: {reason}")]
    BadDerivation { rule: String, reason: String },
    #[error("monomial: {0}")]
    Monomial(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
