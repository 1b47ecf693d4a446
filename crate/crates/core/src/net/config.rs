use super::layers::ConvGeom;
use crate::error::{Error, Result};

/// Output channels of the regressor: three rotation then three translation
/// components.
pub const OUTPUT_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Conv {
        in_channels: usize,
        out_channels: usize,
        kernel_h: usize,
        kernel_w: usize,
        stride: usize,
        pad_h: usize,
        pad_w: usize,
    },
    /// Per-channel leaky slope, sized from the preceding conv.
    PRelu,
    Dropout {
        p: f64,
    },
    /// End of the shared branch: the two branch outputs are concatenated
    /// along channels, key first.
    FuseConcat,
}

impl LayerSpec {
    pub fn conv(in_channels: usize, out_channels: usize, kernel: (usize, usize), stride: usize, pad: (usize, usize)) -> Self {
        LayerSpec::Conv {
            in_channels,
            out_channels,
            kernel_h: kernel.0,
            kernel_w: kernel.1,
            stride,
            pad_h: pad.0,
            pad_w: pad.1,
        }
    }

    /// Odd square kernel with same padding.
    pub fn conv_same(in_channels: usize, out_channels: usize, k: usize, stride: usize) -> Self {
        Self::conv(in_channels, out_channels, (k, k), stride, (k / 2, k / 2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub input_channels: usize,
    pub input_h: usize,
    pub input_w: usize,
    /// Branch layers, one [`LayerSpec::FuseConcat`], then trunk layers.
    pub layers: Vec<LayerSpec>,
    pub init_seed: u64,
}

/// Activation shape `(channels, height, width)`.
pub type Shape3 = (usize, usize, usize);

impl NetworkConfig {
    /// Three shared branch convs with large early receptive fields
    /// (11×11/4, 7×7/2, 5×5/2), fusion, 3×3/2 trunk convs until the map is
    /// at most two rows high, then two valid reducers to 1×1×6 with dropout
    /// ahead of each.
    pub fn standard(input_w: usize, input_h: usize, branch: [usize; 3], trunk: usize) -> Result<Self> {
        let mut layers = Vec::new();
        let mut c = 1;
        for (k, s, out) in [(11, 4, branch[0]), (7, 2, branch[1]), (5, 2, branch[2])] {
            layers.push(LayerSpec::conv_same(c, out, k, s));
            layers.push(LayerSpec::PRelu);
            c = out;
        }
        layers.push(LayerSpec::FuseConcat);
        c *= 2;
        let probe = Self {
            input_channels: 1,
            input_h,
            input_w,
            layers: layers.clone(),
            init_seed: 0,
        };
        let (_, mut h, mut w) = *probe.partial_shapes()?.last().expect("non-empty");
        while h > 2 {
            layers.push(LayerSpec::conv_same(c, trunk, 3, 2));
            layers.push(LayerSpec::PRelu);
            c = trunk;
            h = (h + 2 - 3) / 2 + 1;
            w = (w + 2 - 3) / 2 + 1;
        }
        if w < 2 {
            return Err(Error::InvalidConfig(format!(
                "input {input_w}x{input_h} too narrow for the reducer layers"
            )));
        }
        layers.push(LayerSpec::Dropout { p: 0.5 });
        layers.push(LayerSpec::conv(c, trunk, (h, w - 1), 1, (0, 0)));
        layers.push(LayerSpec::PRelu);
        layers.push(LayerSpec::Dropout { p: 0.5 });
        layers.push(LayerSpec::conv(trunk, OUTPUT_DIM, (1, 2), 1, (0, 0)));
        let cfg = Self {
            input_channels: 1,
            input_h,
            input_w,
            layers,
            init_seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full-size layout for 320×240 inputs.
    pub fn full_size() -> Self {
        Self::standard(320, 240, [64, 128, 256], 256).expect("valid layout")
    }

    /// Small layout used for desk-scale experiments on 80×60 inputs.
    pub fn desk() -> Self {
        Self::standard(80, 60, [8, 16, 32], 64).expect("valid layout")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.init_seed = seed;
        self
    }

    pub fn input_len(&self) -> usize {
        self.input_channels * self.input_h * self.input_w
    }

    pub fn fusion_index(&self) -> Option<usize> {
        self.layers.iter().position(|l| *l == LayerSpec::FuseConcat)
    }

    /// Input shape of every layer, plus the final output shape, without any
    /// validation beyond kernel fit and channel chaining.
    fn partial_shapes(&self) -> Result<Vec<Shape3>> {
        let mut shape = (self.input_channels, self.input_h, self.input_w);
        let mut shapes = vec![shape];
        for (i, l) in self.layers.iter().enumerate() {
            shape = match *l {
                LayerSpec::Conv {
                    in_channels,
                    out_channels,
                    kernel_h,
                    kernel_w,
                    stride,
                    pad_h,
                    pad_w,
                } => {
                    if in_channels != shape.0 {
                        return Err(Error::InvalidConfig(format!(
                            "layer {i}: expects {in_channels} input channels, gets {}",
                            shape.0
                        )));
                    }
                    let g = ConvGeom {
                        in_c: in_channels,
                        out_c: out_channels,
                        kh: kernel_h,
                        kw: kernel_w,
                        stride,
                        pad_h,
                        pad_w,
                        in_h: shape.1,
                        in_w: shape.2,
                    };
                    if out_channels == 0 || !g.fits() {
                        return Err(Error::InvalidConfig(format!(
                            "layer {i}: kernel {kernel_h}x{kernel_w}/{stride} does not fit {}x{}",
                            shape.1, shape.2
                        )));
                    }
                    (out_channels, g.out_h(), g.out_w())
                }
                LayerSpec::PRelu => shape,
                LayerSpec::Dropout { p } => {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::InvalidConfig(format!(
                            "layer {i}: dropout probability {p} outside (0, 1)"
                        )));
                    }
                    shape
                }
                LayerSpec::FuseConcat => (2 * shape.0, shape.1, shape.2),
            };
            shapes.push(shape);
        }
        Ok(shapes)
    }

    /// Validates the layout and returns the input shape of each layer
    /// followed by the output shape.
    pub fn shapes(&self) -> Result<Vec<Shape3>> {
        if self.input_channels == 0 || self.input_h == 0 || self.input_w == 0 {
            return Err(Error::InvalidConfig("input dims must be >= 1".into()));
        }
        let fusions = self.layers.iter().filter(|l| **l == LayerSpec::FuseConcat).count();
        if fusions != 1 {
            return Err(Error::InvalidConfig(format!(
                "need exactly one fusion layer, found {fusions}"
            )));
        }
        let shapes = self.partial_shapes()?;
        if *shapes.last().expect("non-empty") != (OUTPUT_DIM, 1, 1) {
            return Err(Error::InvalidConfig(format!(
                "output shape {:?}, expected ({OUTPUT_DIM}, 1, 1)",
                shapes.last()
            )));
        }
        let convs: Vec<usize> = self
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, LayerSpec::Conv { .. }))
            .map(|(i, _)| i)
            .collect();
        let drops: Vec<usize> = self
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, LayerSpec::Dropout { .. }))
            .map(|(i, _)| i)
            .collect();
        let fuse = self.fusion_index().expect("counted above");
        let ok = convs.len() >= 2 && drops.len() == 2 && {
            let (a, b) = (convs[convs.len() - 2], convs[convs.len() - 1]);
            fuse < drops[0]
                && drops[0] < a
                && a < drops[1]
                && drops[1] < b
                && !self.layers[drops[0] + 1..a]
                    .iter()
                    .any(|l| matches!(l, LayerSpec::Conv { .. }))
                && self.layers[drops[1] + 1..b].is_empty()
        };
        if !ok {
            return Err(Error::InvalidConfig(
                "exactly two dropout layers are required, directly ahead of the last two convolutions"
                    .into(),
            ));
        }
        if !matches!(self.layers.last(), Some(LayerSpec::Conv { .. })) {
            return Err(Error::InvalidConfig("the last layer must be a convolution".into()));
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        self.shapes().map(|_| ())
    }
}
