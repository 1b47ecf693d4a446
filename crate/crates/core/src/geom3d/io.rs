//! Depth maps as little-endian PFM and intrinsics as a four-line text file.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::camera::{CameraIntrinsics, DepthMap};
use crate::error::{Error, Result};

pub fn encode_pfm(depth: &DepthMap) -> Vec<u8> {
    let (w, h) = (depth.width(), depth.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    // PFM stores rows bottom-to-top.
    for v in (0..h).rev() {
        for u in 0..w {
            out.extend_from_slice(&(depth.get(u, v) as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8]) -> Result<DepthMap> {
    let mut reader = BufReader::new(bytes);
    let mut tokens = Vec::with_capacity(4);
    let mut line = String::new();
    while tokens.len() < 4 {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| Error::format("PFM", e.to_string()))?;
        if n == 0 {
            return Err(Error::format("PFM", "truncated header"));
        }
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    if tokens[0] != "Pf" {
        return Err(Error::format(
            "PFM",
            format!("expected single-channel `Pf`, found `{}`", tokens[0]),
        ));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::format("PFM", format!("bad dimension `{s}`")))
    };
    let w = parse_dim(&tokens[1])?;
    let h = parse_dim(&tokens[2])?;
    let scale: f64 = tokens[3]
        .parse()
        .map_err(|_| Error::format("PFM", format!("bad scale `{}`", tokens[3])))?;
    let little = scale < 0.0;
    let mut data = Vec::new();
    reader
        .read_to_end(&mut data)
        .map_err(|e| Error::format("PFM", e.to_string()))?;
    if data.len() < w * h * 4 {
        return Err(Error::format(
            "PFM",
            format!("expected {} data bytes, found {}", w * h * 4, data.len()),
        ));
    }
    let mut values = vec![0.0; w * h];
    for (i, chunk) in data.chunks_exact(4).take(w * h).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let x = if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        };
        let (row_from_bottom, u) = (i / w, i % w);
        values[(h - 1 - row_from_bottom) * w + u] = x as f64;
    }
    DepthMap::new(w, h, values)
}

pub fn write_pfm(path: &Path, depth: &DepthMap) -> Result<()> {
    fs::write(path, encode_pfm(depth)).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: &Path) -> Result<DepthMap> {
    decode_pfm(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn write_intrinsics(path: &Path, k: &CameraIntrinsics) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(f, "{}\n{}\n{}\n{}", k.fx, k.fy, k.cx, k.cy).map_err(|e| Error::io(path, e))
}

pub fn parse_intrinsics(text: &str) -> Result<CameraIntrinsics> {
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::format("intrinsics", format!("not a number: `{s}`")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != 4 {
        return Err(Error::format(
            "intrinsics",
            format!("expected 4 values (fx, fy, cx, cy), found {}", vals.len()),
        ));
    }
    CameraIntrinsics::new(vals[0], vals[1], vals[2], vals[3])
}

pub fn read_intrinsics(path: &Path) -> Result<CameraIntrinsics> {
    parse_intrinsics(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
