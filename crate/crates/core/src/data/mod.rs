//! Lap sequences, distance-based sampling, cross-lap registration, key/live
//! pairing, dataset splits and the synthetic world used at desk scale.

mod manifest;
mod ops;
mod records;
pub mod synth;

pub use manifest::{
    read_lap_manifest, write_lap_manifest, Dataset, DatasetLap, LAP_MANIFEST_HEADER,
};
pub use ops::{
    make_pairs, register, sample_by_spacing, split_datasets, Correspondence, SplitSpec, Splits,
};
pub use records::{FrameRecord, LapSequence, PairSample};
