//! Instance generators and the instance file format.

mod format;
mod generators;

pub use format::{parse_instance, read_instance, write_instance, write_instance_string, FORMAT_VERSION};
pub use generators::{derive_seed, gen_example1, gen_layered, gen_selection, gen_tight};
