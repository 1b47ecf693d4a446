use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{LayerSpec, NetworkConfig, Shape3, OUTPUT_DIM};
use super::layers::{
    apply_mask, conv_backward, conv_forward, dropout_mask, prelu_backward, prelu_forward, ConvGeom,
};
use super::tensor::Tensor4;
use crate::error::{Error, Result};
use crate::geom3d::Pose6;
use crate::image::GrayImage;

pub const PRELU_INIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone)]
enum Layer {
    Conv {
        geom: ConvGeom,
        weight: usize,
        bias: usize,
    },
    PRelu {
        channels: usize,
        slopes: usize,
    },
    Dropout {
        p: f64,
    },
}

impl Layer {
    fn forward(
        &self,
        params: &[f64],
        x: &Tensor4,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> (Tensor4, Option<Vec<f64>>) {
        match *self {
            Layer::Conv { geom, weight, bias } => (
                conv_forward(
                    &geom,
                    &params[weight..weight + geom.weight_len()],
                    &params[bias..bias + geom.out_c],
                    x,
                ),
                None,
            ),
            Layer::PRelu { channels, slopes } => {
                (prelu_forward(&params[slopes..slopes + channels], x), None)
            }
            Layer::Dropout { p } => match mode {
                Mode::Eval => (x.clone(), None),
                Mode::Train => {
                    let mask = dropout_mask(rng, p, x.data().len());
                    (apply_mask(&mask, x), Some(mask))
                }
            },
        }
    }

    fn backward(
        &self,
        params: &[f64],
        x: &Tensor4,
        mask: Option<&Vec<f64>>,
        dy: &Tensor4,
        grads: &mut [f64],
    ) -> Tensor4 {
        match *self {
            Layer::Conv { geom, weight, bias } => {
                let (gw, gb) = grads.split_at_mut(bias);
                conv_backward(
                    &geom,
                    &params[weight..weight + geom.weight_len()],
                    x,
                    dy,
                    &mut gw[weight..weight + geom.weight_len()],
                    &mut gb[..geom.out_c],
                )
            }
            Layer::PRelu { channels, slopes } => prelu_backward(
                &params[slopes..slopes + channels],
                x,
                dy,
                &mut grads[slopes..slopes + channels],
            ),
            Layer::Dropout { .. } => apply_mask(mask.expect("train-mode mask"), dy),
        }
    }
}

/// Activations and dropout masks of one train-mode pass.
#[derive(Debug, Clone)]
struct Trace {
    inputs: Vec<Tensor4>,
    masks: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone)]
struct ForwardState {
    key: Trace,
    live: Trace,
    trunk: Trace,
    branch_channels: usize,
}

/// Siamese fully-convolutional pose regressor. Both branches read the same
/// parameter ranges, so the key and live paths share weights by
/// construction.
#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    params: Vec<f64>,
    branch: Vec<Layer>,
    trunk: Vec<Layer>,
    rng: ChaCha8Rng,
    state: Option<ForwardState>,
}

impl Network {
    /// Fan-in scaled uniform init for convs, 0.25 PReLU slopes, zero biases
    /// and a zero final layer.
    pub fn new(config: NetworkConfig) -> Result<Self> {
        let shapes = config.shapes()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
        let fuse = config.fusion_index().expect("validated");
        let last_conv = config
            .layers
            .iter()
            .rposition(|l| matches!(l, LayerSpec::Conv { .. }))
            .expect("validated");
        let mut params = Vec::new();
        let (mut branch, mut trunk) = (Vec::new(), Vec::new());
        for (i, spec) in config.layers.iter().enumerate() {
            let (c, h, w): Shape3 = shapes[i];
            let layer = match *spec {
                LayerSpec::Conv {
                    out_channels,
                    kernel_h,
                    kernel_w,
                    stride,
                    pad_h,
                    pad_w,
                    ..
                } => {
                    let geom = ConvGeom {
                        in_c: c,
                        out_c: out_channels,
                        kh: kernel_h,
                        kw: kernel_w,
                        stride,
                        pad_h,
                        pad_w,
                        in_h: h,
                        in_w: w,
                    };
                    let weight = params.len();
                    if i == last_conv {
                        params.resize(weight + geom.weight_len(), 0.0);
                    } else {
                        let fan_in = geom.patch_len() as f64;
                        let bound = (6.0 / ((1.0 + PRELU_INIT * PRELU_INIT) * fan_in)).sqrt();
                        params.extend((0..geom.weight_len()).map(|_| rng.gen_range(-bound..bound)));
                    }
                    let bias = params.len();
                    params.resize(bias + out_channels, 0.0);
                    Layer::Conv { geom, weight, bias }
                }
                LayerSpec::PRelu => {
                    let slopes = params.len();
                    params.resize(slopes + c, PRELU_INIT);
                    Layer::PRelu { channels: c, slopes }
                }
                LayerSpec::Dropout { p } => Layer::Dropout { p },
                LayerSpec::FuseConcat => continue,
            };
            if i < fuse {
                branch.push(layer);
            } else {
                trunk.push(layer);
            }
        }
        let dropout_seed = rng.gen();
        Ok(Self {
            config,
            params,
            branch,
            trunk,
            rng: ChaCha8Rng::seed_from_u64(dropout_seed),
            state: None,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters, network has {}",
                params.len(),
                self.params.len()
            )));
        }
        if !params.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Reseeds the dropout mask generator.
    pub fn reseed_dropout(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    /// Parameter ranges `(start, len)` of the shared branch.
    pub fn branch_param_range(&self) -> (usize, usize) {
        match self.trunk.iter().find_map(|l| match l {
            Layer::Conv { weight, .. } => Some(*weight),
            _ => None,
        }) {
            Some(end) => (0, end),
            None => (0, self.params.len()),
        }
    }

    fn check_input(&self, x: &Tensor4) -> Result<()> {
        let c = &self.config;
        if (x.c(), x.h(), x.w()) != (c.input_channels, c.input_h, c.input_w) {
            return Err(Error::dims(
                format!("Nx{}x{}x{}", c.input_channels, c.input_h, c.input_w),
                format!("{}x{}x{}x{}", x.n(), x.c(), x.h(), x.w()),
            ));
        }
        Ok(())
    }

    fn run(
        layers: &[Layer],
        params: &[f64],
        x: Tensor4,
        mode: Mode,
        rng: &mut ChaCha8Rng,
        mut trace: Option<&mut Trace>,
    ) -> Tensor4 {
        let mut cur = x;
        for layer in layers {
            let (y, mask) = layer.forward(params, &cur, mode, rng);
            if let Some(t) = trace.as_deref_mut() {
                t.inputs.push(cur);
                t.masks.push(mask);
            }
            cur = y;
        }
        cur
    }

    fn pass(&self, key: &Tensor4, live: &Tensor4, mode: Mode, rng: &mut ChaCha8Rng, record: bool) -> Result<(Tensor4, Option<ForwardState>)> {
        self.check_input(key)?;
        self.check_input(live)?;
        if key.n() != live.n() {
            return Err(Error::dims(key.n(), live.n()));
        }
        let empty = || Trace {
            inputs: Vec::new(),
            masks: Vec::new(),
        };
        let (mut tk, mut tl, mut tt) = (empty(), empty(), empty());
        let fk = Self::run(&self.branch, &self.params, key.clone(), mode, rng, record.then_some(&mut tk));
        let fl = Self::run(&self.branch, &self.params, live.clone(), mode, rng, record.then_some(&mut tl));
        let branch_channels = fk.c();
        let fused = Tensor4::concat_channels(&fk, &fl)?;
        let out = Self::run(&self.trunk, &self.params, fused, mode, rng, record.then_some(&mut tt));
        let state = record.then_some(ForwardState {
            key: tk,
            live: tl,
            trunk: tt,
            branch_channels,
        });
        Ok((out, state))
    }

    /// Batched forward pass returning an `N×6×1×1` tensor. Train mode draws
    /// dropout masks and records what [`Network::backward`] needs; eval mode
    /// clears any recorded state.
    pub fn forward(&mut self, key: &Tensor4, live: &Tensor4, mode: Mode) -> Result<Tensor4> {
        let mut rng = self.rng.clone();
        let (out, state) = self.pass(key, live, mode, &mut rng, mode == Mode::Train)?;
        self.rng = rng;
        self.state = state;
        Ok(out)
    }

    /// Eval-mode forward pass that leaves the network untouched.
    pub fn predict(&self, key: &Tensor4, live: &Tensor4) -> Result<Tensor4> {
        let mut rng = self.rng.clone();
        Ok(self.pass(key, live, Mode::Eval, &mut rng, false)?.0)
    }

    pub fn image_tensor(&self, image: &GrayImage) -> Result<Tensor4> {
        let c = &self.config;
        if c.input_channels != 1 || image.dims() != (c.input_w, c.input_h) {
            return Err(Error::dims(
                format!("{}x{} grayscale", c.input_w, c.input_h),
                format!("{}x{}", image.width(), image.height()),
            ));
        }
        let data = image.pixels().iter().map(|&p| p as f64 / 255.0).collect();
        Tensor4::from_vec(1, 1, c.input_h, c.input_w, data)
    }

    /// Single-pair forward on images already at the input size.
    pub fn forward_images(&mut self, key: &GrayImage, live: &GrayImage, mode: Mode) -> Result<Pose6> {
        let (k, l) = (self.image_tensor(key)?, self.image_tensor(live)?);
        let out = self.forward(&k, &l, mode)?;
        output_pose(&out, 0)
    }

    /// Back-propagates `grad` (shape of the forward output) and returns the
    /// gradient of every parameter. Consumes the recorded state.
    pub fn backward(&mut self, grad: &Tensor4) -> Result<Vec<f64>> {
        let state = self.state.take().ok_or(Error::NoForwardState)?;
        let n = state.trunk.inputs[0].n();
        if grad.shape() != (n, OUTPUT_DIM, 1, 1) {
            self.state = Some(state);
            return Err(Error::ShapeMismatch(format!(
                "upstream gradient {:?}, expected ({n}, {OUTPUT_DIM}, 1, 1)",
                grad.shape()
            )));
        }
        let mut grads = vec![0.0; self.params.len()];
        let params = &self.params;
        let back = |layers: &[Layer], trace: &Trace, dy: Tensor4, grads: &mut [f64]| {
            let mut d = dy;
            for (i, layer) in layers.iter().enumerate().rev() {
                d = layer.backward(params, &trace.inputs[i], trace.masks[i].as_ref(), &d, grads);
            }
            d
        };
        let dfused = back(&self.trunk, &state.trunk, grad.clone(), &mut grads);
        let (dk, dl) = dfused.split_channels(state.branch_channels);
        back(&self.branch, &state.key, dk, &mut grads);
        back(&self.branch, &state.live, dl, &mut grads);
        Ok(grads)
    }

    pub fn has_forward_state(&self) -> bool {
        self.state.is_some()
    }
}

/// Pose vector of sample `i` of a network output.
pub fn output_pose(out: &Tensor4, i: usize) -> Result<Pose6> {
    let s = out.sample(i);
    Pose6::from_array([s[0], s[1], s[2], s[3], s[4], s[5]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> NetworkConfig {
        NetworkConfig {
            input_channels: 1,
            input_h: 6,
            input_w: 7,
            layers: vec![
                LayerSpec::conv_same(1, 2, 3, 2),
                LayerSpec::PRelu,
                LayerSpec::FuseConcat,
                LayerSpec::Dropout { p: 0.5 },
                LayerSpec::conv(4, 3, (3, 3), 1, (0, 0)),
                LayerSpec::PRelu,
                LayerSpec::Dropout { p: 0.5 },
                LayerSpec::conv(3, 6, (1, 2), 1, (0, 0)),
            ],
            init_seed: 5,
        }
    }

    fn inputs(seed: u64, n: usize) -> (Tensor4, Tensor4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = || {
            Tensor4::from_vec(n, 1, 6, 7, (0..n * 42).map(|_| rng.gen::<f64>()).collect()).unwrap()
        };
        (t(), t())
    }

    #[test]
    fn zero_final_layer_outputs_zero() {
        let net = Network::new(toy()).unwrap();
        let (k, _) = inputs(1, 2);
        let out = net.predict(&k, &k).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eval_is_repeatable_and_clears_state() {
        let mut net = Network::new(toy()).unwrap();
        let n = net.param_count();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        net.set_params(&p).unwrap();
        let (k, l) = inputs(2, 3);
        net.forward(&k, &l, Mode::Train).unwrap();
        assert!(net.has_forward_state());
        let a = net.forward(&k, &l, Mode::Eval).unwrap();
        assert!(!net.has_forward_state());
        let b = net.forward(&k, &l, Mode::Eval).unwrap();
        assert_eq!(a, b);
        assert_eq!(net.predict(&k, &l).unwrap(), a);
        let swapped = net.predict(&l, &k).unwrap();
        assert_ne!(a, swapped);
    }

    #[test]
    fn backward_requires_train_forward() {
        let mut net = Network::new(toy()).unwrap();
        let g = Tensor4::zeros(1, 6, 1, 1).unwrap();
        assert!(matches!(net.backward(&g), Err(Error::NoForwardState)));
        let (k, l) = inputs(3, 1);
        net.forward(&k, &l, Mode::Eval).unwrap();
        assert!(matches!(net.backward(&g), Err(Error::NoForwardState)));
        net.forward(&k, &l, Mode::Train).unwrap();
        let grads = net.backward(&g).unwrap();
        assert!(grads.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_wrong_input_size() {
        let net = Network::new(toy()).unwrap();
        let x = Tensor4::zeros(1, 1, 6, 8).unwrap();
        assert!(matches!(net.predict(&x, &x), Err(Error::DimensionMismatch { .. })));
        let img = GrayImage::filled(8, 6, 0).unwrap();
        assert!(net.image_tensor(&img).is_err());
    }

    #[test]
    fn parameter_count_of_toy() {
        // conv 2*9+2, prelu 2, conv 3*36+3, prelu 3, conv 6*6+6
        assert_eq!(Network::new(toy()).unwrap().param_count(), 20 + 2 + 111 + 3 + 42);
    }
}
