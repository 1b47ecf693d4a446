use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WnnConfig {
    pub neurons_x: usize,
    pub neurons_y: usize,
    /// Synapses (pattern bits) per neuron.
    pub synapses: usize,
    /// Standard deviation, in pixels, of the synapse scatter around each
    /// neuron's receptive-field center.
    pub synapse_sigma: f64,
    pub rng_seed: u64,
}

impl Default for WnnConfig {
    fn default() -> Self {
        Self {
            neurons_x: 96,
            neurons_y: 54,
            synapses: 128,
            synapse_sigma: 10.0,
            rng_seed: 0,
        }
    }
}

impl WnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.neurons_x == 0 || self.neurons_y == 0 {
            return Err(Error::InvalidConfig("neuron grid must be non-empty".into()));
        }
        if self.synapses < 2 || !self.synapses.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "synapses per neuron must be even and >= 2, got {}",
                self.synapses
            )));
        }
        if !(self.synapse_sigma.is_finite() && self.synapse_sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "synapse sigma must be positive, got {}",
                self.synapse_sigma
            )));
        }
        Ok(())
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons_x * self.neurons_y
    }
}
