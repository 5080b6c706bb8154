pub mod cli;
pub mod config;
pub mod dist;
pub mod error;
pub mod eval;
pub mod init;
pub mod io;
pub mod model;
pub mod rng;
pub mod runner;
pub mod sampler;
pub mod sim;

pub use config::ModelConfig;
pub use error::Error;
pub use rng::RngStream;
