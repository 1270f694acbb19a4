//! Ground truth for validation: exact laws of the chains on diagonal
//! Gaussian targets, the closed-form `W2` between such laws, and the exact
//! `W2` between two equal-size samples.

mod laws;
mod moments;
mod transport;

pub use laws::{
    gaussian_w2, lmc_pushforward, lmco_prime_pushforward, lmco_pushforward, nlmc_pushforward, target_law,
    GaussianLaw,
};
pub use moments::{moment_report, MomentReport};
pub use transport::{assignment, empirical_w2, MAX_EMPIRICAL_SAMPLES};
