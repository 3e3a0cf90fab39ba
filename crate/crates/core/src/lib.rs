//! Exact-arithmetic toolkit for adversarial lower bounds against truthful
//! scheduling mechanisms on unrelated machines.
//!
//! Costs are tiered infinitesimal values ([`exactnum::TieredValue`]); instances,
//! allocations and mechanism access live in [`schedmodel`]; weak-monotonicity
//! reasoning in [`wmon`]; exact optima in [`optcore`]; reference mechanisms in
//! [`mechlib`]; instance constructions and the bound recurrence in [`forge`]; and
//! the adaptive query strategies in [`adversary`].

pub mod adversary;
pub mod exactnum;
pub mod exec;
pub mod forge;
pub mod mechlib;
pub mod optcore;
pub mod schedmodel;
pub mod wmon;
