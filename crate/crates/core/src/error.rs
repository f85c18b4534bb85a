use thiserror::Error;

/// Errors raised by the physics and fitting routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("flux {flux} outside the tabulated span [{lo}, {hi}]")]
    OutOfRange { flux: f64, lo: f64, hi: f64 },

    #[error("singular coupling phasor: |E~| = {0}")]
    Singularity(f64),

    #[error("charge-basis cutoff not converged (max level shift {shift:e} GHz); try n_max >= {suggested}")]
    Convergence { shift: f64, suggested: usize },

    #[error("target {target} GHz outside achievable range [{lo}, {hi}] GHz")]
    Range { target: f64, lo: f64, hi: f64 },

    #[error("steady state is not unique (constrained Liouvillian rank deficient, pivot {0:e})")]
    Degenerate(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("extraction failed at step {step}: {source}")]
    Extraction {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
