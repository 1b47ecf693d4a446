//! Binary model files and the CSV place table.

use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use super::config::WnnConfig;
use super::model::{PlaceRecord, WnnModel};
use super::pattern::{words_for, NeuronMemory};
use super::synapse::SynapseMap;
use crate::binio::{Decoder, Encoder};
use crate::csvio;
use crate::error::{Error, Result};
use crate::geom3d::{se3_exp, se3_log, Pose6, Transform};
use crate::image::{Preprocess, Rect};
use crate::numeric::fmt_f64;

const MAGIC: &[u8; 8] = b"VGRAMWNN";
const VERSION: u32 = 1;
pub const PLACE_HEADER: &str = "id,image_key,x,y,z,rx,ry,rz";

pub fn encode_model(model: &WnnModel) -> Vec<u8> {
    let mut e = Encoder::new();
    e.bytes(MAGIC);
    e.u32(VERSION);
    let c = &model.config;
    e.len_u32(c.neurons_x);
    e.len_u32(c.neurons_y);
    e.len_u32(c.synapses);
    e.f64(c.synapse_sigma);
    e.u64(c.rng_seed);
    encode_preprocess(&mut e, &model.preprocess);

    let (w, h) = model.synapses.image_dims();
    e.len_u32(w);
    e.len_u32(h);
    e.u64(model.synapses.offsets().len() as u64);
    for &o in model.synapses.offsets() {
        e.u32(o);
    }

    e.len_u32(model.memories.len());
    for mem in &model.memories {
        e.len_u32(mem.len());
        for i in 0..mem.len() {
            for &w in mem.pattern_words(i) {
                e.u64(w);
            }
        }
        for &l in mem.labels() {
            e.u32(l);
        }
    }

    e.len_u32(model.places.len());
    for p in &model.places {
        e.u32(p.id);
        e.str(&p.image_key);
        for v in p.pose.to_row_major() {
            e.f64(v);
        }
    }
    e.finish()
}

pub(crate) fn encode_preprocess(e: &mut Encoder, p: &Preprocess) {
    match p.crop {
        Some(r) => {
            e.u8(1);
            for v in [r.x, r.y, r.width, r.height] {
                e.len_u32(v);
            }
        }
        None => e.u8(0),
    }
    match p.resize {
        Some((w, h)) => {
            e.u8(1);
            e.len_u32(w);
            e.len_u32(h);
        }
        None => e.u8(0),
    }
}

pub(crate) fn decode_preprocess(d: &mut Decoder<'_>) -> Result<Preprocess> {
    let crop = match d.u8()? {
        0 => None,
        1 => Some(Rect::new(d.usize()?, d.usize()?, d.usize()?, d.usize()?)),
        _ => return Err(d.err("bad crop flag")),
    };
    let resize = match d.u8()? {
        0 => None,
        1 => Some((d.usize()?, d.usize()?)),
        _ => return Err(d.err("bad resize flag")),
    };
    Ok(Preprocess { crop, resize })
}

pub fn decode_model(bytes: &[u8]) -> Result<WnnModel> {
    let mut d = Decoder::new("WNN model", bytes);
    d.expect_magic(MAGIC)?;
    let version = d.u32()?;
    if version != VERSION {
        return Err(d.err(format!("unsupported version {version}")));
    }
    let config = WnnConfig {
        neurons_x: d.usize()?,
        neurons_y: d.usize()?,
        synapses: d.usize()?,
        synapse_sigma: d.f64()?,
        rng_seed: d.u64()?,
    };
    config.validate()?;
    let preprocess = decode_preprocess(&mut d)?;

    let w = d.usize()?;
    let h = d.usize()?;
    let n_offsets = d.u64()? as usize;
    if n_offsets != config.neuron_count() * config.synapses {
        return Err(d.err("synapse count does not match the configuration"));
    }
    let offsets = (0..n_offsets).map(|_| d.u32()).collect::<Result<Vec<_>>>()?;
    let synapses = SynapseMap::from_parts(w, h, config.synapses, offsets)?;

    let n_mem = d.usize()?;
    if n_mem != config.neuron_count() {
        return Err(d.err("neuron count does not match the configuration"));
    }
    let stride = words_for(config.synapses);
    let mut memories = Vec::with_capacity(n_mem);
    for _ in 0..n_mem {
        let len = d.usize()?;
        let words = (0..len * stride).map(|_| d.u64()).collect::<Result<Vec<_>>>()?;
        let labels = (0..len).map(|_| d.u32()).collect::<Result<Vec<_>>>()?;
        let mut mem = NeuronMemory::new(config.synapses);
        for (chunk, &l) in words.chunks_exact(stride).zip(&labels) {
            mem.push_words(chunk, l);
        }
        memories.push(mem);
    }

    let n_places = d.usize()?;
    let mut places = Vec::with_capacity(n_places);
    for i in 0..n_places {
        let id = d.u32()?;
        if id as usize != i {
            return Err(d.err("place ids are not dense"));
        }
        let image_key = d.str()?;
        let mut m = [0.0; 16];
        for v in &mut m {
            *v = d.f64()?;
        }
        places.push(PlaceRecord {
            id,
            image_key,
            pose: Transform::from_row_major(&m)?,
        });
    }
    if memories
        .iter()
        .any(|m| m.labels().iter().any(|&l| l as usize >= n_places))
    {
        return Err(d.err("memory label without a place record"));
    }
    d.finish()?;
    Ok(WnnModel {
        config,
        preprocess,
        synapses,
        memories,
        places,
    })
}

pub fn save_model(path: &Path, model: &WnnModel) -> Result<()> {
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<WnnModel> {
    decode_model(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn place_rows(places: &[PlaceRecord]) -> Result<Vec<Vec<String>>> {
    places
        .iter()
        .map(|p| {
            csvio::check_field("place table", &p.image_key)?;
            let t = p.pose.translation();
            let r = *se3_log(&p.pose)?.rot();
            Ok(vec![
                p.id.to_string(),
                p.image_key.clone(),
                fmt_f64(t.x),
                fmt_f64(t.y),
                fmt_f64(t.z),
                fmt_f64(r.x),
                fmt_f64(r.y),
                fmt_f64(r.z),
            ])
        })
        .collect()
}

/// Writes the place table: position and rotation vector of each keyframe.
pub fn write_place_csv(path: &Path, places: &[PlaceRecord]) -> Result<()> {
    csvio::write_table(path, PLACE_HEADER, &place_rows(places)?)
}

pub fn read_place_csv(path: &Path) -> Result<Vec<PlaceRecord>> {
    const WHAT: &str = "place table";
    csvio::read_table(WHAT, path, PLACE_HEADER)?
        .into_iter()
        .map(|row| {
            let id: u32 = row[0]
                .parse()
                .map_err(|_| Error::format(WHAT, format!("bad id `{}`", row[0])))?;
            let v: Vec<f64> = row[2..]
                .iter()
                .map(|s| csvio::parse_f64(WHAT, s))
                .collect::<Result<_>>()?;
            let rot = se3_exp(&Pose6::new([v[3], v[4], v[5]], [0.0; 3])?).rotation();
            Ok(PlaceRecord {
                id,
                image_key: row[1].clone(),
                pose: Transform::from_parts(rot, Vector3::new(v[0], v[1], v[2]))?,
            })
        })
        .collect()
}
