use std::collections::{BTreeMap, HashSet};

use super::records::{FrameRecord, LapSequence, PairSample};
use crate::error::{Error, Result};
use crate::globaloc::relative_pose;

/// Greedy thinning: keeps the first frame, then every frame at least
/// `spacing` meters from the last kept one.
pub fn sample_by_spacing(seq: &LapSequence, spacing: f64) -> Result<LapSequence> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::InvalidConfig(format!("spacing must be positive, got {spacing}")));
    }
    let mut kept: Vec<FrameRecord> = Vec::new();
    for f in seq.frames() {
        match kept.last() {
            Some(last) if f.distance_to(last) < spacing => {}
            _ => kept.push(f.clone()),
        }
    }
    LapSequence::new(seq.name(), kept)
}

/// Nearest reference frame for one query frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub query_index: usize,
    pub reference_index: usize,
    pub distance: f64,
}

fn nearest(frame: &FrameRecord, reference: &LapSequence) -> (usize, f64) {
    let p = frame.position();
    let mut best = (0, f64::INFINITY);
    for (i, r) in reference.frames().iter().enumerate() {
        let d = (r.position() - p).norm();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Matches every query frame to its Euclidean-nearest reference frame
/// (lowest index on ties).
pub fn register(query: &LapSequence, reference: &LapSequence) -> Result<Vec<Correspondence>> {
    if query.is_empty() {
        return Err(Error::EmptySequence(query.name().into()));
    }
    if reference.is_empty() {
        return Err(Error::EmptySequence(reference.name().into()));
    }
    Ok(query
        .frames()
        .iter()
        .enumerate()
        .map(|(qi, f)| {
            let (ri, d) = nearest(f, reference);
            Correspondence {
                query_index: qi,
                reference_index: ri,
                distance: d,
            }
        })
        .collect())
}

/// Pairs each live frame with its closest keyframe when within `d_max`;
/// farther live frames are dropped.
pub fn make_pairs(live: &LapSequence, keys: &LapSequence, d_max: f64) -> Result<Vec<PairSample>> {
    if !(d_max.is_finite() && d_max > 0.0) {
        return Err(Error::InvalidConfig(format!("d_max must be positive, got {d_max}")));
    }
    register(live, keys)?
        .into_iter()
        .filter(|c| c.distance <= d_max)
        .map(|c| {
            let key = &keys.frames()[c.reference_index];
            let l = &live.frames()[c.query_index];
            Ok(PairSample {
                key: key.clone(),
                live: l.clone(),
                key_index: c.reference_index,
                live_index: c.query_index,
                delta_gt: relative_pose(&key.pose, &l.pose)?,
            })
        })
        .collect()
}

/// Lap names assigned to the held-out splits; everything else trains.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitSpec {
    pub test: Vec<String>,
    pub valid: Vec<String>,
    pub registration: Vec<String>,
}

impl SplitSpec {
    /// Parses `key = lap, lap` lines (`test`, `valid`, `registration`);
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SplitSpec::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", n + 1), "expected `key = value`")
            })?;
            let names: Vec<String> = v
                .split(',')
                .map(|s| s.trim().to_owned())
                .filter(|s| !s.is_empty())
                .collect();
            match k.trim() {
                "test" => spec.test = names,
                "valid" => spec.valid = names,
                "registration" => spec.registration = names,
                other => return Err(Error::config(other, "unknown split name")),
            }
        }
        Ok(spec)
    }

    pub fn render(&self) -> String {
        format!(
            "test = {}\nvalid = {}\nregistration = {}\n",
            self.test.join(", "),
            self.valid.join(", "),
            self.registration.join(", ")
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Splits {
    pub train: Vec<LapSequence>,
    pub valid: Vec<LapSequence>,
    pub test: Vec<LapSequence>,
    pub registration: Vec<LapSequence>,
}

pub fn split_datasets(laps: &[LapSequence], spec: &SplitSpec) -> Result<Splits> {
    let known: HashSet<&str> = laps.iter().map(|l| l.name()).collect();
    let mut assigned: BTreeMap<&str, &str> = BTreeMap::new();
    for (split, names) in [
        ("test", &spec.test),
        ("valid", &spec.valid),
        ("registration", &spec.registration),
    ] {
        for name in names {
            if !known.contains(name.as_str()) {
                return Err(Error::UnknownLap(name.clone()));
            }
            if assigned.insert(name.as_str(), split).is_some() {
                return Err(Error::OverlapError(name.clone()));
            }
        }
    }
    let mut out = Splits::default();
    for lap in laps {
        let bucket = match assigned.get(lap.name()) {
            Some(&"test") => &mut out.test,
            Some(&"valid") => &mut out.valid,
            Some(&"registration") => &mut out.registration,
            _ => &mut out.train,
        };
        bucket.push(lap.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom3d::{se3_exp, Transform};

    fn line(name: &str, xs: &[f64]) -> LapSequence {
        LapSequence::new(
            name,
            xs.iter()
                .enumerate()
                .map(|(i, &x)| FrameRecord {
                    timestamp: i as f64,
                    image_key: format!("{name}_{i}"),
                    depth_key: None,
                    pose: Transform::from_translation([x, 0.0, 0.0]),
                })
                .collect(),
        )
        .unwrap()
    }

    fn xs(seq: &LapSequence) -> Vec<f64> {
        seq.frames().iter().map(|f| f.position().x).collect()
    }

    #[test]
    fn every_fifth_meter_is_kept() {
        let seq = line("a", &(0..21).map(f64::from).collect::<Vec<_>>());
        assert_eq!(xs(&sample_by_spacing(&seq, 5.0).unwrap()), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
    }

    #[test]
    fn small_spacing_keeps_everything() {
        let seq = line("a", &[0.0, 1.0, 2.5, 4.0]);
        assert_eq!(sample_by_spacing(&seq, 0.5).unwrap(), seq);
        assert!(sample_by_spacing(&seq, 0.0).is_err());
    }

    #[test]
    fn greedy_measures_from_last_kept_frame() {
        let seq = line("a", &[0.0, 3.0, 6.0, 9.0, 12.0]);
        assert_eq!(xs(&sample_by_spacing(&seq, 5.0).unwrap()), vec![0.0, 6.0, 12.0]);
    }

    #[test]
    fn registration_picks_nearest_with_distance() {
        let q = line("q", &[0.4, 1.6, 2.5]);
        let r = line("r", &[0.0, 1.0, 2.0, 3.0]);
        let c = register(&q, &r).unwrap();
        assert_eq!(c[0].reference_index, 0);
        assert!((c[0].distance - 0.4).abs() < 1e-12);
        assert_eq!(c[1].reference_index, 2);
        // 2.5 is equidistant from 2 and 3
        assert_eq!(c[2].reference_index, 2);
        let same = register(&r, &r).unwrap();
        assert!(same.iter().all(|c| c.query_index == c.reference_index && c.distance == 0.0));
    }

    #[test]
    fn pairs_respect_dmax_and_recover_live_pose() {
        let live = line("l", &(0..16).map(f64::from).chain([40.0]).collect::<Vec<_>>());
        let keys = line("k", &[0.0, 5.0, 10.0, 15.0]);
        let pairs = make_pairs(&live, &keys, 5.0).unwrap();
        assert_eq!(pairs.len(), 16);
        for p in &pairs {
            assert!(p.key.distance_to(&p.live) <= 2.5);
            let recovered = p.key.pose.compose(&se3_exp(&p.delta_gt));
            assert!(recovered.max_abs_diff(&p.live.pose) < 1e-9);
        }
    }

    #[test]
    fn split_assignment() {
        let laps: Vec<_> = ["01", "02", "03", "04", "05", "06", "07"]
            .iter()
            .map(|n| line(n, &[0.0]))
            .collect();
        let spec = SplitSpec::parse("test = 07\nvalid = 04, 06\nregistration = 05\n").unwrap();
        let s = split_datasets(&laps, &spec).unwrap();
        let names = |v: &[LapSequence]| v.iter().map(|l| l.name().to_owned()).collect::<Vec<_>>();
        assert_eq!(names(&s.test), ["07"]);
        assert_eq!(names(&s.valid), ["04", "06"]);
        assert_eq!(names(&s.registration), ["05"]);
        assert_eq!(names(&s.train), ["01", "02", "03"]);

        let overlap = SplitSpec::parse("test = 01\nvalid = 01").unwrap();
        assert!(matches!(split_datasets(&laps, &overlap), Err(Error::OverlapError(_))));
        let unknown = SplitSpec::parse("test = 99").unwrap();
        assert!(matches!(split_datasets(&laps, &unknown), Err(Error::UnknownLap(_))));
        let all = split_datasets(&laps, &SplitSpec::default()).unwrap();
        assert_eq!(all.train.len(), 7);
        assert_eq!(SplitSpec::parse(&spec.render()).unwrap(), spec);
    }
}
