//! Weights file: magic, version, layer layout, then every parameter as a
//! little-endian f32.

use std::fs;
use std::path::Path;

use super::config::{LayerSpec, NetworkConfig};
use super::network::Network;
use crate::binio::{Decoder, Encoder};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SIAMPOSE";
const VERSION: u32 = 1;

pub fn encode_network(net: &Network) -> Vec<u8> {
    let cfg = net.config();
    let mut e = Encoder::new();
    e.bytes(MAGIC);
    e.u32(VERSION);
    e.len_u32(cfg.input_channels);
    e.len_u32(cfg.input_h);
    e.len_u32(cfg.input_w);
    e.u64(cfg.init_seed);
    e.len_u32(cfg.layers.len());
    for layer in &cfg.layers {
        match *layer {
            LayerSpec::Conv {
                in_channels,
                out_channels,
                kernel_h,
                kernel_w,
                stride,
                pad_h,
                pad_w,
            } => {
                e.u8(0);
                for v in [in_channels, out_channels, kernel_h, kernel_w, stride, pad_h, pad_w] {
                    e.len_u32(v);
                }
            }
            LayerSpec::PRelu => e.u8(1),
            LayerSpec::Dropout { p } => {
                e.u8(2);
                e.f64(p);
            }
            LayerSpec::FuseConcat => e.u8(3),
        }
    }
    e.len_u32(net.param_count());
    for &p in net.params() {
        e.f32(p as f32);
    }
    e.finish()
}

pub fn decode_network(bytes: &[u8]) -> Result<Network> {
    let mut d = Decoder::new("network weights", bytes);
    d.expect_magic(MAGIC)?;
    let version = d.u32()?;
    if version != VERSION {
        return Err(d.err(format!("unsupported version {version}")));
    }
    let input_channels = d.usize()?;
    let input_h = d.usize()?;
    let input_w = d.usize()?;
    let init_seed = d.u64()?;
    let n = d.usize()?;
    let mut layers = Vec::with_capacity(n.min(1024));
    for _ in 0..n {
        layers.push(match d.u8()? {
            0 => {
                let mut v = [0usize; 7];
                for x in &mut v {
                    *x = d.usize()?;
                }
                LayerSpec::Conv {
                    in_channels: v[0],
                    out_channels: v[1],
                    kernel_h: v[2],
                    kernel_w: v[3],
                    stride: v[4],
                    pad_h: v[5],
                    pad_w: v[6],
                }
            }
            1 => LayerSpec::PRelu,
            2 => LayerSpec::Dropout { p: d.f64()? },
            3 => LayerSpec::FuseConcat,
            t => return Err(d.err(format!("unknown layer tag {t}"))),
        });
    }
    let cfg = NetworkConfig {
        input_channels,
        input_h,
        input_w,
        layers,
        init_seed,
    };
    let mut net = Network::new(cfg).map_err(|e| Error::format("network weights", e.to_string()))?;
    let count = d.usize()?;
    if count != net.param_count() {
        return Err(d.err(format!(
            "{count} parameters stored, layout needs {}",
            net.param_count()
        )));
    }
    let params = (0..count)
        .map(|_| d.f32().map(f64::from))
        .collect::<Result<Vec<_>>>()?;
    d.finish()?;
    net.set_params(&params)?;
    Ok(net)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    fs::write(path, encode_network(net)).map_err(|e| Error::io(path, e))
}

pub fn load_network(path: &Path) -> Result<Network> {
    decode_network(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
