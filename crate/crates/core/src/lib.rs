//! Model comparison and risk forecasting toolkit.
//!
//! The crate bundles everything needed to run a Value-at-Risk forecasting
//! horse race end to end:
//!
//! * [`market_data`] — price/return ingestion, sample splits, descriptive
//!   statistics;
//! * [`volmodels`] — the ARCH family (GARCH, EGARCH, APARCH and its nested
//!   cases, CGARCH, IGARCH) and score-driven (GAS) models, with maximum
//!   likelihood estimation and VaR extraction;
//! * [`caviar`] — dynamic conditional quantile models estimated by tick-loss
//!   minimisation;
//! * [`lossfn`] — the loss-function catalogue and loss-matrix construction;
//! * [`mcs`] — the Model Confidence Set procedure over block-bootstrapped
//!   equal-predictive-ability tests;
//! * [`riskeval`] — rolling one-step-ahead forecasting, VaR combination and
//!   backtesting;
//! * [`pipeline`] — the declarative run configuration and the end-to-end
//!   driver used by the command line interface.

pub mod caviar;
pub mod config;
pub mod dist;
pub mod error;
pub mod lossfn;
pub mod market_data;
pub mod mcs;
pub mod numeric;
pub mod pipeline;
pub mod riskeval;
pub mod volmodels;

pub use error::{Error, Result};
