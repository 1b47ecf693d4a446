use std::fmt;

use crate::error::{Error, Result};

/// Packed bit vector, bit `k` in word `k / 64` at position `k % 64`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitPattern {
    words: Vec<u64>,
    len: usize,
}

impl fmt::Debug for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|k| if self.get(k) { '1' } else { '0' })
            .collect();
        write!(f, "BitPattern({s})")
    }
}

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn hamming_words(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

impl BitPattern {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut p = Self::zeros(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            p.set(k, b);
        }
        p
    }

    /// Parses a string of `0`/`1` characters, bit 0 first.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::format("bit pattern", format!("unexpected `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bits(&bits))
    }

    pub(crate) fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        (self.words[k / 64] >> (k % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, k: usize, bit: bool) {
        let mask = 1u64 << (k % 64);
        if bit {
            self.words[k / 64] |= mask;
        } else {
            self.words[k / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, k: usize) {
        self.words[k / 64] ^= 1u64 << (k % 64);
    }

    pub fn hamming(&self, other: &BitPattern) -> u32 {
        hamming_words(&self.words, &other.words)
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

/// One neuron's append-only store of `(pattern, label)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronMemory {
    bits: usize,
    stride: usize,
    patterns: Vec<u64>,
    labels: Vec<u32>,
}

impl NeuronMemory {
    pub fn new(bits: usize) -> Self {
        Self {
            bits,
            stride: words_for(bits),
            patterns: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn push(&mut self, pattern: &BitPattern, label: u32) -> Result<()> {
        if pattern.len() != self.bits {
            return Err(Error::dims(
                format!("{}-bit pattern", self.bits),
                format!("{} bits", pattern.len()),
            ));
        }
        self.patterns.extend_from_slice(pattern.words());
        self.labels.push(label);
        Ok(())
    }

    pub(crate) fn push_words(&mut self, words: &[u64], label: u32) {
        debug_assert_eq!(words.len(), self.stride);
        self.patterns.extend_from_slice(words);
        self.labels.push(label);
    }

    pub fn pattern_words(&self, i: usize) -> &[u64] {
        &self.patterns[i * self.stride..(i + 1) * self.stride]
    }

    pub fn pattern(&self, i: usize) -> BitPattern {
        BitPattern::from_words(self.pattern_words(i).to_vec(), self.bits)
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Index and distance of the nearest stored pattern; ties go to the
    /// earliest stored.
    pub fn nearest(&self, query: &[u64]) -> Option<(usize, u32)> {
        let mut best: Option<(usize, u32)> = None;
        for (i, stored) in self.patterns.chunks_exact(self.stride).enumerate() {
            let d = hamming_words(stored, query);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
                if d == 0 {
                    break;
                }
            }
        }
        best
    }
}

/// Label of the Hamming-nearest stored pattern.
pub fn neuron_recall(pattern: &BitPattern, mem: &NeuronMemory) -> Result<u32> {
    if pattern.len() != mem.bits() {
        return Err(Error::dims(
            format!("{}-bit pattern", mem.bits()),
            format!("{} bits", pattern.len()),
        ));
    }
    mem.nearest(pattern.words())
        .map(|(i, _)| mem.label(i))
        .ok_or(Error::EmptyMemory)
}
