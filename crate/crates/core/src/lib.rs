pub mod amr;
pub mod baseline;
pub mod config;
pub mod dataset;
pub mod dialogue;
pub mod fixtures;
pub mod knowledge;
pub mod proxy;
pub mod rng;
pub mod semantic;
pub mod stats;
pub mod synth;
