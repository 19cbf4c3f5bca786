//! Counting β-expansions and related diagnostics for Bernoulli convolutions.
//!
//! * [`numeric`]: the base β, exact `Q(β)` and tolerance-aware float backends.
//! * [`counting`]: `N_n(x; β)`, the prefix set, `f_n(x)` and growth statistics.
//! * [`density`]: the transfer operator `P` on piecewise-constant densities.
//! * [`garsia`]: the level-n measures `ν_{β,n}`, their entropy and clustering.
//! * [`random_beta`]: the random β-transformation and Monte-Carlo estimates.
//! * [`report`]: CSV writers shared by the CLI.

pub mod counting;
pub mod density;
pub mod garsia;
pub mod error;
pub mod numeric;
pub mod random_beta;
pub mod report;
pub mod cli;

pub use error::{Error, Result};
pub use numeric::{
    cmp_points, make_beta, Backend, BetaParam, BetaSpec, DigitWord, FloatBeta, Limits, Point,
    QuadBeta, QuadNum,
};
