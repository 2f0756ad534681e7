pub mod dataset;
pub mod evaluate;
pub mod review;
