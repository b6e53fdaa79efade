//! Fault-attack laboratory for LESS and CROSS.
//!
//! Functional signature cores, software fault injection on the seed-tree
//! reference tree, key recovery, closed-form recovery statistics and the
//! two countermeasures.

pub mod attack_cross;
pub mod attack_less;
pub mod countermeasures;
pub mod cross;
pub mod fault;
pub mod gf;
pub mod less;
pub mod monomial;
pub mod params;
pub mod seedtree;
pub mod stats;
pub mod xof;
