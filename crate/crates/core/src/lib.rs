//! Synchronization of a direct quantum channel (polarization-maintaining
//! fiber) with a multihop classical channel.
//!
//! * [`physical`]: integer timebase, media, link geometry and transit times.
//! * [`planner`]: length-adjustment plans (shorten the classical fiber or
//!   lengthen the PMF) and the delay-replacement plan.
//! * [`optimizer`]: exact delay-subset selection plus a brute-force oracle.
//! * [`sim`]: deterministic transit simulation and the drop/continue gate.
//! * [`scenario`] and [`report`]: JSON scenario files and report output.

pub mod optimizer;
pub mod physical;
pub mod planner;
pub mod report;
pub mod scenario;
pub mod sim;

pub use physical::{Length, MediumProfile, NodeId, NodeLink, Time};
