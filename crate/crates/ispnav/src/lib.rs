//! File formats, the benchmark and the command-line front end for
//! [`ispnav_core`].
//!
//! * [`field_dump`]: plain-text field dumps (`width height` header, one
//!   `tau:tau_dot` entry per cell).
//! * [`trace`]: CSV traces, one row per agent per step.
//! * [`scenario`]: TOML scenario files with a strict schema.
//! * [`mod@bench`]: timing of the safe-control computation against scene size.

pub mod bench;
pub mod field_dump;
pub mod numfmt;
pub mod scenario;
pub mod trace;

/// Environment variable consulted for the random seed when `--seed` is absent.
pub const SEED_ENV: &str = "ISP_NAV_SEED";
