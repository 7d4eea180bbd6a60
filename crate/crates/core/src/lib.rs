pub mod chart;
pub mod experiments;
pub mod expr;
pub mod fibercheck;
pub mod genericity;
pub mod geometry;
pub mod linalg;
pub mod rng;
pub mod tensor;
