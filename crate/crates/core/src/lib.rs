//! Solvers for precedence-constrained scheduling to minimize total weighted
//! completion time, with exact rational arithmetic throughout.
//!
//! * [`single_machine`]: a weighted round-robin rule whose list-scheduled
//!   realization is a 2-approximation for one machine.
//! * [`parallel_machine`]: processing rates from parametric maximum flows
//!   plus McNaughton's wrap-around rule, a 3-approximation for preemptive
//!   scheduling on identical machines.
//! * [`flow`]: the max-flow/min-cut engine and the discrete-Newton search
//!   for the largest breakpoint of the parametric minimum cut.
//! * [`oracle`]: brute-force optima over linear extensions and verification
//!   reports for the approximation guarantees.
//! * [`gen`]: deterministic random-instance generation (SplitMix64).

pub mod error;
pub mod flow;
pub mod gen;
pub mod instance;
pub mod oracle;
pub mod parallel_machine;
pub mod rational;
pub mod schedule;
pub mod single_machine;

pub use error::{Error, Result};
pub use instance::{Instance, Job};
pub use rational::{format_rat, parse_rat, rat, ratio, Rat};
pub use schedule::{MachineSchedule, RateVector, ScheduleEvent, Segment, VirtualSchedule};
