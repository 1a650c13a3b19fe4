//! Hidden symmetries on curved spaces.

pub mod exprkit;
pub mod manifold;
pub mod catalog;
pub mod sasaki;
pub mod killing;
pub mod geodesic;
pub mod spin;
pub mod algebra;
pub mod cli;
