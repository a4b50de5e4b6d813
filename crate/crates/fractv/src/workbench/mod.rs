//! Human- and script-facing surface: CLI, file formats, noise synthesis,
//! run configuration, and the runtime self-test.

pub mod cli;
pub mod config;
pub mod csvout;
pub mod noise;
pub mod pgm;
pub mod phantom;
pub mod selftest;

pub use cli::cli_main;
pub use config::ConfigMap;
pub use csvout::{table_to_csv, write_table_csv};
pub use noise::add_gaussian_noise;
pub use pgm::{read_pgm, read_pgm_bytes, write_pgm, write_pgm_bytes};
pub use phantom::{make_phantom, noisy_phantom};
pub use selftest::run_selftest;
