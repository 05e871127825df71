//! Deciding solubility of systems of partial differential equations by prolongation.

pub mod algebra;
pub mod deriv_index;
pub mod tower;
pub mod prolongation;
pub mod dsl;
pub mod verdict;
pub mod forms;
pub mod bounds;
pub mod render;
pub mod report;
