//! Tempered fractional calculus kernels.

mod integrals;
mod mittag_leffler;
mod params;
mod weights;

pub use integrals::{caputo_tempered_derivative, tempered_rl_integral};
pub use mittag_leffler::mittag_leffler;
pub use params::TemperedParams;
pub use weights::{
    grunwald_weights, lubich_weights, tempered_weights, tempering_factor, ConvolutionWeights,
    MAX_ORDER,
};
