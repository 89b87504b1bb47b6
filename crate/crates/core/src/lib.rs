pub mod boolfn;
pub mod caps;
pub mod csp;
pub mod error;
pub mod lp;
pub mod poly;
pub mod rational;
pub mod restriction;
pub mod sa;
pub mod slack;

pub use error::{Error, Result};
pub use rational::Rational;
