pub mod demand;
pub mod experiments;
pub mod fluid;
pub mod policies;
pub mod sim;
