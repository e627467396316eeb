//! Monte Carlo estimators of the threshold landscape: curves
//! `f(p) = P_p(‖K1‖ ≥ α)`, thresholds `p_c(α, δ)`, sharpness ratios,
//! supercriticality, typical densities, the set `Q` and sprinkling
//! sequences.

mod curve;
mod qset;
mod sprinkling;
mod supercritical;
mod threshold;

pub use curve::*;
pub use qset::*;
pub use sprinkling::*;
pub use supercritical::*;
pub use threshold::*;
