//! Log-Gamma and quadrature kernels.

mod gamma;
mod quadrature;

pub use gamma::{gamma, ln_factorial, log_gamma};
pub use quadrature::{
    quad_halfline, quad_halfline_log, quad_interval, quad_nested, quad_piece, quad_product, Axis,
    QuadResult, QuadratureConfig, TruncationPolicy, MAX_LEVELS_ENV,
};
