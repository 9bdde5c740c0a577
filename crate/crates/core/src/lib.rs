//! Bhattacharyya packing quantities for fading channels.
//!
//! The crate computes packing numbers, diversity frontiers, gauge-DOF and
//! B-diversity readings for six channel classes (fixed-H, coherent MIMO,
//! block fading, fast fading, multipath and fractional-log), classifies the
//! rate/diversity tradeoff, and checks the union–Bhattacharyya error bound by
//! Monte Carlo maximum-likelihood decoding.
//!
//! All divergences are reported in bits. SNR values are carried as
//! [`Snr`], which stores `log2 ρ` so sweeps can reach `ρ = 10^300`.
//!
//! ```
//! use gauge_frontier::{divergence, packing, Snr};
//!
//! let d = divergence::bhatt_scale(std::f64::consts::E.powi(2), 1.0).unwrap();
//! assert!((d.value() - 0.625_813).abs() < 1e-6);
//!
//! let rho = Snr::from_linear(std::f64::consts::E.powi(2) - 1.0).unwrap();
//! let pack = packing::scale_pack_count(d.value() * (1.0 - 1e-12), rho, 1).unwrap();
//! assert_eq!(pack.value_lower, 2.0);
//! ```

pub mod channel;
pub mod divergence;
mod error;
pub mod gauge;
pub mod linalg;
pub mod mc;
pub mod packing;
pub mod par;
pub mod quadrature;
pub mod rng;
mod snr;

pub use channel::{ChannelKind, ChannelSpec, InputPoint};
pub use divergence::Bits;
pub use error::{Error, Result};
pub use snr::{RhoGrid, Snr};
