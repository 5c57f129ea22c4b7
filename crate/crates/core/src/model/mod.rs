//! Network definitions, forward/backward over the layer graph, head
//! replacement for transfer, and the checkpoint format.

mod arch;
mod checkpoint;
mod network;

pub use arch::{
    Arch, LayerSpec, ModelSpec, Shape, DEFAULT_INPUT_LENGTH, HIDDEN_UNITS, KERNEL_SIZE,
    MODIFIED_BLOCK_FILTERS, ORIGINAL_BLOCK_FILTERS, ORIGINAL_STEM_FILTERS,
};
pub use checkpoint::{
    from_bytes, load_checkpoint, read_header, save_checkpoint, to_bytes, CheckpointHeader,
    TensorEntry, MAGIC, VERSION,
};
pub use network::{
    build, build_modified, build_original, default_label_names, Model, SampleStep,
};
