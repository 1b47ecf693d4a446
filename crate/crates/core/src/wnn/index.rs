//! Multi-index hashing over each neuron's memory.
//!
//! Patterns are cut into `r + 1` disjoint bit blocks and each block is an
//! exact-match key into its own table. Any stored pattern within Hamming
//! distance `r` of a query agrees with it on at least one block, so the
//! union of the probed buckets contains every such pattern.

use std::collections::HashMap;

use super::model::{tally, Recall, WnnModel};
use super::pattern::{hamming_words, BitPattern, NeuronMemory};
use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    start: usize,
    len: usize,
}

#[derive(Debug, Clone)]
struct NeuronTables {
    tables: Vec<HashMap<u128, Vec<u32>>>,
}

#[derive(Debug, Clone)]
pub struct HammingIndex {
    radius: usize,
    bits: usize,
    blocks: Vec<Block>,
    neurons: Vec<NeuronTables>,
}

/// Result of an indexed lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexedHit {
    pub label: u32,
    pub index: usize,
    pub distance: u32,
    /// Distinct candidates examined (memory size when falling back).
    pub candidates: usize,
    pub fell_back: bool,
}

fn split_blocks(bits: usize, radius: usize) -> Result<Vec<Block>> {
    let count = radius + 1;
    if count > bits {
        return Err(Error::InvalidConfig(format!(
            "index radius {radius} needs more than {bits} bits"
        )));
    }
    let base = bits / count;
    let extra = bits % count;
    let mut blocks = Vec::with_capacity(count);
    let mut start = 0;
    for b in 0..count {
        let len = base + usize::from(b < extra);
        if len > 128 {
            return Err(Error::InvalidConfig(format!(
                "index blocks of {len} bits exceed 128; raise the radius"
            )));
        }
        blocks.push(Block { start, len });
        start += len;
    }
    Ok(blocks)
}

#[inline]
fn block_key(words: &[u64], block: Block) -> u128 {
    let mut key = 0u128;
    let mut filled = 0;
    let mut bit = block.start;
    let end = block.start + block.len;
    while bit < end {
        let w = bit / 64;
        let off = bit % 64;
        let take = (64 - off).min(end - bit);
        let chunk = (words[w] >> off) & if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
        key |= (chunk as u128) << filled;
        filled += take;
        bit += take;
    }
    key
}

impl HammingIndex {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    /// Builds the index over standalone memories.
    pub fn from_memories(memories: &[NeuronMemory], bits: usize, radius: usize) -> Result<Self> {
        let blocks = split_blocks(bits, radius)?;
        let neurons = memories
            .iter()
            .map(|mem| {
                if mem.bits() != bits {
                    return Err(Error::dims(format!("{bits}-bit memory"), mem.bits()));
                }
                let mut tables = vec![HashMap::new(); blocks.len()];
                for i in 0..mem.len() {
                    let w = mem.pattern_words(i);
                    for (table, &block) in tables.iter_mut().zip(&blocks) {
                        table
                            .entry(block_key(w, block))
                            .or_insert_with(Vec::new)
                            .push(i as u32);
                    }
                }
                Ok(NeuronTables { tables })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            radius,
            bits,
            blocks,
            neurons,
        })
    }

    fn lookup_words(&self, query: &[u64], neuron: usize, mem: &NeuronMemory) -> Result<IndexedHit> {
        if mem.is_empty() {
            return Err(Error::EmptyMemory);
        }
        let tables = &self.neurons[neuron].tables;
        let mut candidates: Vec<u32> = Vec::new();
        for (table, &block) in tables.iter().zip(&self.blocks) {
            if let Some(ids) = table.get(&block_key(query, block)) {
                candidates.extend_from_slice(ids);
            }
        }
        if candidates.is_empty() {
            let (i, d) = mem.nearest(query).ok_or(Error::EmptyMemory)?;
            return Ok(IndexedHit {
                label: mem.label(i),
                index: i,
                distance: d,
                candidates: mem.len(),
                fell_back: true,
            });
        }
        candidates.sort_unstable();
        candidates.dedup();
        let mut best = (candidates[0] as usize, u32::MAX);
        for &c in &candidates {
            let d = hamming_words(mem.pattern_words(c as usize), query);
            if d < best.1 {
                best = (c as usize, d);
            }
        }
        Ok(IndexedHit {
            label: mem.label(best.0),
            index: best.0,
            distance: best.1,
            candidates: candidates.len(),
            fell_back: false,
        })
    }

    /// Committee vote using indexed neuron lookups.
    pub fn committee_recall(&self, model: &WnnModel, image: &GrayImage) -> Result<Recall> {
        model.synapses.check_image(image)?;
        if model.places.is_empty() {
            return Err(Error::EmptyMemory);
        }
        let stride = self.bits.div_ceil(64);
        let mut buf = vec![0u64; stride];
        let mut votes = Vec::with_capacity(model.memories.len());
        for (n, mem) in model.memories.iter().enumerate() {
            model.synapses.extract_into(image, n, &mut buf);
            votes.push(self.lookup_words(&buf, n, mem)?.label);
        }
        Ok(tally(&votes, model.places.len()))
    }
}

pub fn build_hamming_index(model: &WnnModel, radius: usize) -> Result<HammingIndex> {
    HammingIndex::from_memories(&model.memories, model.config.synapses, radius)
}

/// Indexed neuron lookup with full details.
pub fn indexed_lookup(
    pattern: &BitPattern,
    idx: &HammingIndex,
    neuron: usize,
    mem: &NeuronMemory,
) -> Result<IndexedHit> {
    if pattern.len() != idx.bits {
        return Err(Error::dims(format!("{}-bit pattern", idx.bits), pattern.len()));
    }
    if neuron >= idx.neurons.len() {
        return Err(Error::dims(format!("neuron < {}", idx.neurons.len()), neuron));
    }
    idx.lookup_words(pattern.words(), neuron, mem)
}

/// Label of the nearest candidate found through the index, falling back to a
/// linear scan when no bucket matches.
pub fn indexed_recall(
    pattern: &BitPattern,
    idx: &HammingIndex,
    neuron: usize,
    mem: &NeuronMemory,
) -> Result<u32> {
    indexed_lookup(pattern, idx, neuron, mem).map(|h| h.label)
}
