//! Clearing of multi-product supply-chain markets on a space-time graph.
//!
//! A [`MarketInstance`] declares suppliers, consumers, transport providers
//! and technology providers with bids and capacities. Clearing solves the
//! total-surplus linear program with an embedded bounded simplex; the balance
//! row duals become nodal prices. Settlement turns those prices into
//! stakeholder prices, profits and revenue streams, and the audit module
//! checks the resulting economic properties.

#![allow(clippy::needless_range_loop)]

pub mod audit;
pub mod clearing;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lp;
pub mod market;
pub mod scenario;
pub mod settlement;
pub mod simplex;
pub mod stgraph;

pub use error::{Error, Result};
pub use market::MarketInstance;
