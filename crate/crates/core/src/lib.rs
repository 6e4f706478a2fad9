//! Kantorovich–Rubinstein norms and the extremal structure of the unit ball
//! of the Lipschitz-free space over a finite pointed metric space.

pub mod attainment;
pub mod error;
pub mod extremal;
pub mod free_space;
pub mod lipschitz;
pub mod lp;
pub mod metric;
pub mod rational;

pub use error::{Error, Result};
pub use metric::{MetricSpace, PointId};
pub use rational::Rational;
