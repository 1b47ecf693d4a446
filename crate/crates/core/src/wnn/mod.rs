//! VG-RAM weightless neural network for place recognition.
//!
//! Every neuron samples `S` pixels of the input image and turns them into an
//! `S`-bit pattern by chained pairwise intensity comparisons. Training
//! appends `(pattern, place-id)` to each neuron's memory; recall returns the
//! label of the Hamming-nearest stored pattern per neuron, and the committee
//! of neurons votes for the final place.

mod config;
mod index;
mod model;
mod pattern;
pub mod persist;
mod synapse;

pub use config::WnnConfig;
pub use index::{build_hamming_index, indexed_lookup, indexed_recall, HammingIndex, IndexedHit};
pub use model::{PlaceRecord, Recall, WnnModel};
pub use pattern::{neuron_recall, BitPattern, NeuronMemory};
pub use synapse::{build_synapses, extract_pattern, SynapseMap};
