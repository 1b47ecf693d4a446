use super::config::WnnConfig;
use super::pattern::{words_for, NeuronMemory};
use super::synapse::{build_synapses, SynapseMap};
use crate::error::{Error, Result};
use crate::geom3d::Transform;
use crate::image::{GrayImage, Preprocess};

/// A mapped place: the keyframe it was learned from and its global pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceRecord {
    pub id: u32,
    pub image_key: String,
    pub pose: Transform,
}

/// Outcome of a committee vote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recall {
    pub place_id: u32,
    pub votes: usize,
    pub vote_fraction: f64,
}

/// Trained VG-RAM network: synapse map, one memory per neuron and the place
/// table the labels refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct WnnModel {
    pub(crate) config: WnnConfig,
    pub(crate) preprocess: Preprocess,
    pub(crate) synapses: SynapseMap,
    pub(crate) memories: Vec<NeuronMemory>,
    pub(crate) places: Vec<PlaceRecord>,
}

impl WnnModel {
    /// Creates an untrained network for images of `input_w`×`input_h`
    /// pixels (after `preprocess`).
    pub fn new(config: WnnConfig, preprocess: Preprocess, input_w: usize, input_h: usize) -> Result<Self> {
        let synapses = build_synapses(&config, input_w, input_h)?;
        let memories = (0..config.neuron_count())
            .map(|_| NeuronMemory::new(config.synapses))
            .collect();
        Ok(Self {
            config,
            preprocess,
            synapses,
            memories,
            places: Vec::new(),
        })
    }

    pub fn config(&self) -> &WnnConfig {
        &self.config
    }

    pub fn preprocess(&self) -> &Preprocess {
        &self.preprocess
    }

    pub fn synapses(&self) -> &SynapseMap {
        &self.synapses
    }

    pub fn memories(&self) -> &[NeuronMemory] {
        &self.memories
    }

    pub fn places(&self) -> &[PlaceRecord] {
        &self.places
    }

    pub fn place(&self, id: u32) -> Option<&PlaceRecord> {
        self.places.get(id as usize)
    }

    /// Applies the model's crop/resize to a raw frame.
    pub fn prepare(&self, raw: &GrayImage) -> Result<GrayImage> {
        self.preprocess.apply(raw)
    }

    fn patterns<'a>(&'a self, image: &'a GrayImage) -> impl Iterator<Item = Vec<u64>> + 'a {
        let stride = words_for(self.config.synapses);
        (0..self.memories.len()).map(move |n| {
            let mut buf = vec![0u64; stride];
            self.synapses.extract_into(image, n, &mut buf);
            buf
        })
    }

    /// Stores the image's pattern in every neuron, labelled with the place id.
    /// Place ids must be assigned densely in training order.
    pub fn train(&mut self, image: &GrayImage, place: PlaceRecord) -> Result<()> {
        self.synapses.check_image(image)?;
        if place.id as usize != self.places.len() {
            return Err(Error::InvalidConfig(format!(
                "place ids must be dense: expected {}, got {}",
                self.places.len(),
                place.id
            )));
        }
        let stride = words_for(self.config.synapses);
        let mut buf = vec![0u64; stride];
        for n in 0..self.memories.len() {
            self.synapses.extract_into(image, n, &mut buf);
            self.memories[n].push_words(&buf, place.id);
        }
        self.places.push(place);
        Ok(())
    }

    /// Per-neuron recalled labels.
    pub fn neuron_votes(&self, image: &GrayImage) -> Result<Vec<u32>> {
        self.synapses.check_image(image)?;
        if self.places.is_empty() {
            return Err(Error::EmptyMemory);
        }
        Ok(self
            .patterns(image)
            .zip(&self.memories)
            .map(|(p, mem)| {
                let (i, _) = mem.nearest(&p).expect("trained memories are non-empty");
                mem.label(i)
            })
            .collect())
    }

    /// Plurality vote over neurons; ties go to the smallest place id.
    pub fn committee_recall(&self, image: &GrayImage) -> Result<Recall> {
        let votes = self.neuron_votes(image)?;
        Ok(tally(&votes, self.places.len()))
    }
}

pub(crate) fn tally(votes: &[u32], places: usize) -> Recall {
    let mut counts = vec![0usize; places];
    for &v in votes {
        counts[v as usize] += 1;
    }
    let (best, &n) = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("at least one place");
    Recall {
        place_id: best as u32,
        votes: n,
        vote_fraction: n as f64 / votes.len() as f64,
    }
}
