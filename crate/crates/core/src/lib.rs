pub mod catalog;
pub mod config;
pub mod curve;
pub mod gf;
pub mod mpoly;
pub mod proj;
pub mod report;
pub mod upoly;
