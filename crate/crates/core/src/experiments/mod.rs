pub mod cases;
pub mod dot;
pub mod green_validation;
pub mod pipeline;
pub mod scan;
