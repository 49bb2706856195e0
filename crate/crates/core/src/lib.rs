//! Minimum-power resource allocation for backscatter-assisted hybrid NOMA
//! uplink.
//!
//! A legacy TDMA network gives each of `M` users its own slot. On top of it,
//! every user may also modulate and reflect the carrier of any earlier
//! user's slot. Reflection is battery-free, so only each user's own-slot
//! transmit power counts toward the objective, but reflected signals interfere
//! with the users decoded before them. This crate finds allocations that meet a
//! common target rate with minimum total battery power:
//!
//! - [`two_user`]: exact two-user solutions from five analytic candidate forms,
//!   each certified through the KKT conditions, plus the conventional
//!   (battery-powered) hybrid NOMA contrast problem;
//! - [`sca`]: successive convex approximation for any number of users;
//! - [`bb`]: branch and bound over own-slot powers with either a successive
//!   water-filling or an SCA feasibility oracle;
//! - [`kernel`]: the water-filling and log-barrier solvers underneath;
//! - [`channel`] and [`experiment`]: random clustered deployments and the
//!   Monte Carlo harness that compares solvers on them.
//!
//! ```
//! use backcom_noma::{model, two_user::{self, TwoUserInstance}};
//!
//! let inst = TwoUserInstance::new(1.0, 4.0, 1.0, 2f64.ln()).unwrap();
//! let sol = two_user::solve_two_user(&inst).unwrap();
//! assert!((sol.report.objective - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
//! assert!(sol.report.objective < model::oma_total(&inst.to_system()));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bb;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod format;
pub mod kernel;
pub mod model;
pub mod sca;
pub mod tri;
pub mod two_user;

pub use error::{Error, Result};
pub use model::{OracleStats, PowerProfile, SolveReport, SolveStatus, SystemInstance};
pub use tri::TriMatrix;
