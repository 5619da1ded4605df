pub mod action;
pub mod encoding;
pub mod geom;
pub mod grid;
pub mod guidance;
pub mod policy;
pub mod sim;
