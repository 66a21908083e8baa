//! Experiment front end: scenario assembly, batch reports, SVG rendering and
//! parameter grid search on top of the `rtnua` simulator.

pub mod grid;
pub mod report;
pub mod scenario;
pub mod svg;
