use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate `{name}` = {value} is not a probability")]
    RateOutOfRange { name: &'static str, value: f64 },

    #[error("rates sum to {sum}, which is not 1 within {tolerance:e}")]
    NotNormalized { sum: f64, tolerance: f64 },

    #[error("basis weights must be nonnegative and sum to 1 (got {0:?})")]
    InvalidMixture([f64; 3]),

    #[error("argument {value} is outside the entropy domain [0, 1]")]
    EntropyDomain { value: f64 },

    #[error("parity group size must be odd and positive, got {0}")]
    InvalidGroupSize(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("channel family direction must be nonnegative and nonzero (got {0:?})")]
    InvalidDirection([f64; 3]),

    #[error("scale {scale} is outside the family range [0, {max}]")]
    ScaleOutOfRange { scale: f64, max: f64 },

    #[error("no threshold in range: still distillable at the maximum scale {0}")]
    NoThresholdInRange(f64),

    #[error("not distillable at zero noise")]
    NotDistillableAtZero,

    #[error(
        "distillability is not monotone along the ray (flips back to distillable at scale {at})"
    )]
    NonMonotone { at: f64 },
}
