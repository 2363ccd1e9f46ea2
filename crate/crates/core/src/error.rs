use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain mismatch: expected {expected} outcome, found {found}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("degenerate discount: every discount factor is zero")]
    DegenerateDiscount,

    #[error("histories are not neighbors: they differ in {differing} rounds")]
    NotNeighbors { differing: usize },

    #[error("instance too large: {required} enumeration steps required, budget is {budget}")]
    InstanceTooLarge { budget: u128, required: u128 },

    #[error(
        "infeasible: horizon too short or commitment too weak (lambda = {lambda}); \
         the smallest certifying horizon is {min_horizon}"
    )]
    Infeasible { lambda: f64, min_horizon: u64 },

    #[error("commitment requires k >= 2 facilities, got k = {k}")]
    CommitmentNeedsTwoFacilities { k: usize },

    #[error("no deviation exists: every agent has a single type")]
    NoDeviation,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
