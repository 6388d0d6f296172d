use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric (max |A - A^T| = {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),

    #[error("eigenvalues are not shifted: max entry is {max} (expected 0)")]
    NotShifted { max: f64 },

    #[error("integrand factor with zero modulus at t = {t}")]
    ZeroFactor { t: f64 },

    #[error("quadrature imaginary residual too large: |Im|/|Re| = {ratio:e} in sum {sum}")]
    Instability { ratio: f64, sum: usize },

    #[error("normalized derivative dC[{index}]/C = {value} outside (0, 1)")]
    MomentOutOfRange { index: usize, value: f64 },

    #[error("sampler stalled: {accepted} accepted out of {proposed} proposals in the last window")]
    SamplerStalled { accepted: u64, proposed: u64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit diverged at iteration {iter}: {what} (theta = {theta:?})")]
    Diverged {
        iter: usize,
        what: String,
        theta: [f64; 10],
    },
}
