//! Short-term forecasting of 15-minute solar irradiance from its own
//! history.
//!
//! The crate covers the whole experiment pipeline: solar geometry and the
//! transmissivity transform ([`solar`], [`data`]), the recursive
//! multi-step engine and persistence baselines ([`forecast`]), ARIMA and
//! SARIMA models ([`arima`]), nearest neighbor regression ([`nnr`]), error
//! statistics ([`evaluation`]) and reproducible hyperparameter sweeps
//! ([`search`]).

pub mod arima;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod forecast;
pub mod nnr;
pub mod optim;
pub mod search;
pub mod solar;
pub mod synth;

pub use error::{Error, Result};
