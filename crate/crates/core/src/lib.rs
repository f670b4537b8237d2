pub mod analyzer;
pub mod corpus;
pub mod elaborator;
pub mod kernel;
pub mod resolution;
pub mod surface;
