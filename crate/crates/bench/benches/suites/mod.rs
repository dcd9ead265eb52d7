pub mod density;
pub mod engine;
pub mod fraclap;
pub mod samplers;
