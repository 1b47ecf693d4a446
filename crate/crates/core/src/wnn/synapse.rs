use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::WnnConfig;
use super::pattern::{words_for, BitPattern};
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Pixel offsets sampled by every neuron, fixed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynapseMap {
    image_width: usize,
    image_height: usize,
    synapses: usize,
    /// Linear pixel index, neuron-major.
    offsets: Vec<u32>,
}

impl SynapseMap {
    pub(crate) fn from_parts(
        image_width: usize,
        image_height: usize,
        synapses: usize,
        offsets: Vec<u32>,
    ) -> Result<Self> {
        if synapses == 0 || !offsets.len().is_multiple_of(synapses) {
            return Err(Error::format("synapse map", "offset count not a multiple of S"));
        }
        let n = (image_width * image_height) as u32;
        if offsets.iter().any(|&o| o >= n) {
            return Err(Error::format("synapse map", "synapse outside the image"));
        }
        Ok(Self {
            image_width,
            image_height,
            synapses,
            offsets,
        })
    }

    pub fn image_dims(&self) -> (usize, usize) {
        (self.image_width, self.image_height)
    }

    pub fn synapses(&self) -> usize {
        self.synapses
    }

    pub fn neuron_count(&self) -> usize {
        self.offsets.len() / self.synapses
    }

    pub(crate) fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn neuron_offsets(&self, neuron: usize) -> &[u32] {
        &self.offsets[neuron * self.synapses..(neuron + 1) * self.synapses]
    }

    /// `(u, v)` pixel coordinates of a neuron's synapses.
    pub fn coords(&self, neuron: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neuron_offsets(neuron).iter().map(move |&o| {
            let o = o as usize;
            (o % self.image_width, o / self.image_width)
        })
    }

    pub(crate) fn check_image(&self, image: &GrayImage) -> Result<()> {
        if image.dims() != (self.image_width, self.image_height) {
            return Err(Error::dims(
                format!("{}x{} image", self.image_width, self.image_height),
                format!("{}x{}", image.width(), image.height()),
            ));
        }
        Ok(())
    }

    /// Writes the packed pattern of `neuron` into `out`.
    #[inline]
    pub(crate) fn extract_into(&self, image: &GrayImage, neuron: usize, out: &mut [u64]) {
        out.iter_mut().for_each(|w| *w = 0);
        let px = image.pixels();
        let offs = self.neuron_offsets(neuron);
        let s = offs.len();
        for k in 0..s {
            let a = px[offs[k] as usize];
            let b = px[offs[(k + 1) % s] as usize];
            if a > b {
                out[k / 64] |= 1u64 << (k % 64);
            }
        }
    }
}

/// Samples each neuron's synapses from a normal distribution centered at the
/// neuron's proportional position in the image.
pub fn build_synapses(cfg: &WnnConfig, img_w: usize, img_h: usize) -> Result<SynapseMap> {
    cfg.validate()?;
    if img_w == 0 || img_h == 0 {
        return Err(Error::dims("non-empty image", format!("{img_w}x{img_h}")));
    }
    let normal = Normal::new(0.0, cfg.synapse_sigma)
        .map_err(|e| Error::InvalidConfig(format!("synapse sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut offsets = Vec::with_capacity(cfg.neuron_count() * cfg.synapses);
    for j in 0..cfg.neurons_y {
        let cy = ((j as f64 + 0.5) * img_h as f64 / cfg.neurons_y as f64).floor();
        for i in 0..cfg.neurons_x {
            let cx = ((i as f64 + 0.5) * img_w as f64 / cfg.neurons_x as f64).floor();
            for _ in 0..cfg.synapses {
                let du: f64 = normal.sample(&mut rng);
                let dv: f64 = normal.sample(&mut rng);
                let u = (cx + du).round().clamp(0.0, (img_w - 1) as f64) as usize;
                let v = (cy + dv).round().clamp(0.0, (img_h - 1) as f64) as usize;
                offsets.push((v * img_w + u) as u32);
            }
        }
    }
    SynapseMap::from_parts(img_w, img_h, cfg.synapses, offsets)
}

/// Bit `k` is set iff synapse `k` is strictly brighter than synapse `k + 1`
/// (cyclically).
pub fn extract_pattern(image: &GrayImage, neuron: usize, syn: &SynapseMap) -> Result<BitPattern> {
    syn.check_image(image)?;
    if neuron >= syn.neuron_count() {
        return Err(Error::dims(
            format!("neuron < {}", syn.neuron_count()),
            neuron,
        ));
    }
    let mut words = vec![0u64; words_for(syn.synapses)];
    syn.extract_into(image, neuron, &mut words);
    Ok(BitPattern::from_words(words, syn.synapses))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(nx: usize, ny: usize, s: usize, sigma: f64, seed: u64) -> WnnConfig {
        WnnConfig {
            neurons_x: nx,
            neurons_y: ny,
            synapses: s,
            synapse_sigma: sigma,
            rng_seed: seed,
        }
    }

    #[test]
    fn deterministic_for_same_inputs() {
        let c = cfg(8, 6, 32, 4.0, 3);
        assert_eq!(build_synapses(&c, 64, 48).unwrap(), build_synapses(&c, 64, 48).unwrap());
        let other = cfg(8, 6, 32, 4.0, 4);
        assert_ne!(build_synapses(&c, 64, 48).unwrap(), build_synapses(&other, 64, 48).unwrap());
    }

    #[test]
    fn tiny_sigma_collapses_onto_center() {
        let c = cfg(2, 1, 16, 1e-9, 0);
        let map = build_synapses(&c, 10, 4).unwrap();
        // centers: floor(0.5 * 10 / 2) = 2, floor(1.5 * 10 / 2) = 7; row floor(0.5*4) = 2
        assert!(map.coords(0).all(|p| p == (2, 2)));
        assert!(map.coords(1).all(|p| p == (7, 2)));
    }

    #[test]
    fn coordinates_stay_in_bounds() {
        let c = cfg(1, 1, 128, 10.0, 7);
        let map = build_synapses(&c, 10, 10).unwrap();
        assert!(map.coords(0).all(|(u, v)| u <= 9 && v <= 9));
        // sigma 10 on a 10 px image must hit the clamps
        assert!(map.coords(0).any(|(u, _)| u == 0 || u == 9));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(build_synapses(&cfg(1, 1, 3, 1.0, 0), 4, 4).is_err());
        assert!(build_synapses(&cfg(0, 1, 4, 1.0, 0), 4, 4).is_err());
        assert!(build_synapses(&cfg(1, 1, 4, 0.0, 0), 4, 4).is_err());
    }

    #[test]
    fn constant_image_gives_zero_pattern() {
        let map = build_synapses(&cfg(3, 2, 64, 3.0, 1), 20, 10).unwrap();
        let img = GrayImage::filled(20, 10, 77).unwrap();
        for n in 0..6 {
            assert_eq!(extract_pattern(&img, n, &map).unwrap().count_ones(), 0);
        }
    }

    #[test]
    fn brightness_shift_leaves_patterns_unchanged() {
        let map = build_synapses(&cfg(3, 2, 64, 3.0, 1), 20, 10).unwrap();
        let img = GrayImage::from_fn(20, 10, |u, v| ((u * 37 + v * 91) % 200) as u8).unwrap();
        let shifted = GrayImage::from_fn(20, 10, |u, v| img.get(u, v) + 10).unwrap();
        for n in 0..6 {
            assert_eq!(
                extract_pattern(&img, n, &map).unwrap(),
                extract_pattern(&shifted, n, &map).unwrap()
            );
        }
    }

    #[test]
    fn two_synapse_comparison_chain() {
        // synapse 0 on intensity 5, synapse 1 on intensity 9:
        // bit0 = 5 > 9 = 0, bit1 = 9 > 5 = 1
        let map = SynapseMap::from_parts(2, 1, 2, vec![0, 1]).unwrap();
        let img = GrayImage::new(2, 1, vec![5, 9]).unwrap();
        let p = extract_pattern(&img, 0, &map).unwrap();
        assert_eq!((p.get(0), p.get(1)), (false, true));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let map = build_synapses(&cfg(1, 1, 4, 1.0, 0), 4, 4).unwrap();
        let img = GrayImage::filled(5, 4, 0).unwrap();
        assert!(matches!(
            extract_pattern(&img, 0, &map),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
