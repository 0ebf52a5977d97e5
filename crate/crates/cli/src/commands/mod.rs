//! Command implementations behind the CLI subcommands. Each takes a resolved
//! config and works purely through the filesystem, so tests can drive them
//! directly.

mod dataset;
mod evaluate;
mod reconstruct;
mod train;

pub use dataset::{cmd_phantom_gen, cmd_simulate, load_split, DatasetManifest, PhantomEntry, SimManifest};
pub use evaluate::{cmd_evaluate, cmd_trace_export};
pub use reconstruct::cmd_reconstruct;
pub use train::cmd_train_projector;
