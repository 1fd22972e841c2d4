// SPDX-License-Identifier: Apache-2.0

//! Single-event-upset fault-injection campaigns on RTL designs, pruned by
//! backward static slicing and per-cycle dynamic slicing.
//!
//! The flow runs in four steps:
//!
//! 1. [`deps`]: build the statement dependency graph and the backward static
//!    slice of each observation point.
//! 2. [`sim`]: simulate the fault-free (golden) run, recording the observation
//!    trace and the statements executed in every clock cycle.
//! 3. [`dynslice`]: intersect the static slice with each cycle's coverage and
//!    collapse faults whose flipped value is never consumed.
//! 4. [`fault`]: inject the remaining single-bit upsets one per run and classify
//!    them against the golden trace.
//!
//! [`campaign`] wires the steps together and computes the report metrics.

pub mod bits;
pub mod campaign;
pub mod deps;
pub mod dynslice;
pub mod fault;
pub mod hdl;
pub mod sim;

pub use bits::Bits;
