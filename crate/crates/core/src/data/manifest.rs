//! On-disk dataset layout:
//!
//! ```text
//! root/intrinsics.txt        fx fy cx cy
//! root/dataset.txt           laps = ...; test/valid/registration = ...
//! root/<lap>/manifest.csv    one row per frame
//! root/<lap>/img_*.pgm       grayscale images
//! root/<lap>/depth_*.pfm     depth maps
//! ```
//!
//! Image and depth paths in a manifest are relative to the dataset root.

use std::fs;
use std::path::{Path, PathBuf};

use super::ops::{split_datasets, SplitSpec, Splits};
use super::records::{FrameRecord, LapSequence};
use super::synth::SynthLap;
use crate::csvio;
use crate::error::{Error, Result};
use crate::geom3d::io::{read_intrinsics, read_pfm, write_intrinsics, write_pfm};
use crate::geom3d::{se3_exp, se3_log, CameraIntrinsics, DepthMap, Pose6};
use crate::image::GrayImage;
use crate::numeric::fmt_f64;

pub const LAP_MANIFEST_HEADER: &str = "timestamp,image_path,depth_path,x,y,z,rx,ry,rz";

fn manifest_rows(seq: &LapSequence) -> Result<Vec<Vec<String>>> {
    seq.frames()
        .iter()
        .map(|f| {
            csvio::check_field("lap manifest", &f.image_key)?;
            let depth = f.depth_key.clone().unwrap_or_default();
            csvio::check_field("lap manifest", &depth)?;
            let twist = se3_log(&f.pose)?;
            let mut row = vec![fmt_f64(f.timestamp), f.image_key.clone(), depth];
            let [rx, ry, rz, x, y, z] = twist.to_array();
            row.extend([x, y, z, rx, ry, rz].iter().map(|&v| fmt_f64(v)));
            Ok(row)
        })
        .collect()
}

pub fn write_lap_manifest(path: &Path, seq: &LapSequence) -> Result<()> {
    csvio::write_table(path, LAP_MANIFEST_HEADER, &manifest_rows(seq)?)
}

pub fn read_lap_manifest(path: &Path, name: &str) -> Result<LapSequence> {
    const WHAT: &str = "lap manifest";
    let rows = csvio::read_table(WHAT, path, LAP_MANIFEST_HEADER)?;
    let frames = rows
        .iter()
        .map(|r| {
            let n: Vec<f64> = r[3..]
                .iter()
                .map(|s| csvio::parse_f64(WHAT, s))
                .collect::<Result<_>>()?;
            let twist = Pose6::from_array([n[3], n[4], n[5], n[0], n[1], n[2]])?;
            Ok(FrameRecord {
                timestamp: csvio::parse_f64(WHAT, &r[0])?,
                image_key: r[1].clone(),
                depth_key: (!r[2].is_empty()).then(|| r[2].clone()),
                pose: se3_exp(&twist),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LapSequence::new(name, frames)
}

/// One lap together with where its files live.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetLap {
    pub sequence: LapSequence,
    pub manifest: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    root: PathBuf,
    intrinsics: CameraIntrinsics,
    spec: SplitSpec,
    laps: Vec<DatasetLap>,
}

impl Dataset {
    /// Starts an empty dataset directory, writing the intrinsics file.
    pub fn create(root: &Path, intrinsics: CameraIntrinsics, spec: SplitSpec) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        write_intrinsics(&root.join("intrinsics.txt"), &intrinsics)?;
        let ds = Self {
            root: root.to_owned(),
            intrinsics,
            spec,
            laps: Vec::new(),
        };
        ds.write_spec()?;
        Ok(ds)
    }

    fn write_spec(&self) -> Result<()> {
        let names: Vec<&str> = self.laps.iter().map(|l| l.sequence.name()).collect();
        let text = format!("laps = {}\n{}", names.join(", "), self.spec.render());
        let path = self.root.join("dataset.txt");
        fs::write(&path, text).map_err(|e| Error::io(path, e))
    }

    /// Writes a rendered lap's images, depth maps and manifest.
    pub fn add_lap(&mut self, lap: &SynthLap) -> Result<()> {
        let name = lap.sequence.name();
        if self.laps.iter().any(|l| l.sequence.name() == name) {
            return Err(Error::OverlapError(name.to_owned()));
        }
        let dir = self.root.join(name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (i, f) in lap.sequence.frames().iter().enumerate() {
            lap.images[i].save(&self.root.join(&f.image_key))?;
            if let Some(d) = &f.depth_key {
                write_pfm(&self.root.join(d), &lap.depths[i])?;
            }
        }
        let manifest = dir.join("manifest.csv");
        write_lap_manifest(&manifest, &lap.sequence)?;
        // Reload so in-memory poses match what a later reader sees.
        let sequence = read_lap_manifest(&manifest, name)?;
        self.laps.push(DatasetLap { sequence, manifest });
        self.write_spec()
    }

    pub fn open(root: &Path) -> Result<Self> {
        let intrinsics = read_intrinsics(&root.join("intrinsics.txt"))?;
        let spec_path = root.join("dataset.txt");
        let text = fs::read_to_string(&spec_path).map_err(|e| Error::io(&spec_path, e))?;
        let mut names = Vec::new();
        let mut rest = String::new();
        for line in text.lines() {
            match line.split_once('=') {
                Some((k, v)) if k.trim() == "laps" => names.extend(
                    v.split(',')
                        .map(|s| s.trim().to_owned())
                        .filter(|s| !s.is_empty()),
                ),
                _ => {
                    rest.push_str(line);
                    rest.push('\n');
                }
            }
        }
        let spec = SplitSpec::parse(&rest)?;
        let laps = names
            .iter()
            .map(|n| {
                let manifest = root.join(n).join("manifest.csv");
                Ok(DatasetLap {
                    sequence: read_lap_manifest(&manifest, n)?,
                    manifest,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            root: root.to_owned(),
            intrinsics,
            spec,
            laps,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }

    pub fn spec(&self) -> &SplitSpec {
        &self.spec
    }

    pub fn laps(&self) -> &[DatasetLap] {
        &self.laps
    }

    pub fn lap(&self, name: &str) -> Result<&LapSequence> {
        self.laps
            .iter()
            .map(|l| &l.sequence)
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownLap(name.to_owned()))
    }

    pub fn splits(&self) -> Result<Splits> {
        let seqs: Vec<LapSequence> = self.laps.iter().map(|l| l.sequence.clone()).collect();
        split_datasets(&seqs, &self.spec)
    }

    pub fn image(&self, frame: &FrameRecord) -> Result<GrayImage> {
        GrayImage::load(&self.root.join(&frame.image_key))
    }

    pub fn depth(&self, frame: &FrameRecord) -> Result<DepthMap> {
        match &frame.depth_key {
            Some(d) => read_pfm(&self.root.join(d)),
            None => Err(Error::format(
                "dataset",
                format!("frame `{}` has no depth map", frame.image_key),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{LapSpec, SynthWorld, WorldConfig};

    #[test]
    fn dataset_roundtrip_preserves_frames() {
        let k = CameraIntrinsics::new(20.0, 20.0, 15.5, 11.5).unwrap();
        let world = SynthWorld::new(WorldConfig::new(9, 120.0, k)).unwrap();
        let lap = world.render_lap(&LapSpec::new("lap", 24)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let spec = SplitSpec {
            test: vec!["lap".into()],
            ..Default::default()
        };
        let mut ds = Dataset::create(dir.path(), k, spec.clone()).unwrap();
        ds.add_lap(&lap).unwrap();
        assert!(matches!(ds.add_lap(&lap), Err(Error::OverlapError(_))));

        let back = Dataset::open(dir.path()).unwrap();
        assert_eq!(back.spec(), &spec);
        assert_eq!(back.intrinsics(), &k);
        let seq = back.lap("lap").unwrap();
        assert_eq!(seq.len(), 24);
        for (i, (a, b)) in seq.frames().iter().zip(lap.sequence.frames()).enumerate() {
            assert_eq!(a.timestamp, b.timestamp);
            assert_eq!(a.image_key, b.image_key);
            assert!(a.pose.max_abs_diff(&b.pose) < 1e-9, "frame {i}");
            assert_eq!(back.image(a).unwrap(), lap.images[i]);
            let d = back.depth(a).unwrap();
            for (x, y) in d.values().iter().zip(lap.depths[i].values()) {
                assert!((*x as f32 - *y as f32).abs() == 0.0);
            }
        }
        assert_eq!(back.splits().unwrap().test.len(), 1);
    }

    #[test]
    fn manifest_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "timestamp,image\n").unwrap();
        assert!(matches!(read_lap_manifest(&p, "x"), Err(Error::Format { .. })));
    }
}
