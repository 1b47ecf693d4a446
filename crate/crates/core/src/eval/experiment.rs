//! Config-driven pipeline: synthesize a dataset, train the place memory and
//! the pose regressor, localize the test laps and score the fixes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use super::metrics::{error_stats, mae_accuracy, write_error_stats, write_mae_curve, ErrorStats, MaeCurve};
use crate::csvio;
use crate::data::synth::{LapSpec, SynthWorld, WorldConfig};
use crate::data::{make_pairs, register, sample_by_spacing, Dataset, LapSequence, SplitSpec};
use crate::error::{Error, Result};
use crate::globaloc::{read_fix_log, write_fix_log, GlobalFix, Localizer};
use crate::image::{GrayImage, Preprocess, Rect};
use crate::net::persist::{load_network, save_network};
use crate::net::{train_loop, write_history, Network, NetworkConfig, TrainConfig, TrainPair, TrainReport};
use crate::numeric::fmt_f64;
use crate::wnn::persist::{load_model, save_model, write_place_csv};
use crate::wnn::{PlaceRecord, WnnConfig, WnnModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Synth,
    TrainWnn,
    TrainCnn,
    Localize,
    Eval,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Synth,
        Stage::TrainWnn,
        Stage::TrainCnn,
        Stage::Localize,
        Stage::Eval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::TrainWnn => "train-wnn",
            Stage::TrainCnn => "train-cnn",
            Stage::Localize => "localize",
            Stage::Eval => "eval",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }
}

/// Every knob of a run. Parsed from `key = value` lines; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub out_dir: PathBuf,
    pub stages: Vec<Stage>,
    /// Master seed; world, place memory, network init and training draw
    /// from fixed offsets of it.
    pub seed: u64,
    pub lap_length_m: f64,
    pub frames_per_lap: usize,
    pub train_offsets_m: Vec<f64>,
    pub valid_offset_m: f64,
    pub test_offset_m: f64,
    pub key_lap: String,
    pub key_spacing_m: f64,
    pub live_spacing_m: f64,
    pub dmax_m: f64,
    pub wnn_neurons_x: usize,
    pub wnn_neurons_y: usize,
    pub wnn_synapses: usize,
    pub wnn_sigma: f64,
    /// `x, y, width, height` of the place-recognition crop.
    pub wnn_crop: Option<Rect>,
    pub net_input_w: usize,
    pub net_input_h: usize,
    pub net_channels: [usize; 4],
    pub cnn_lr: f64,
    pub cnn_halve_every: usize,
    pub cnn_epochs: usize,
    pub cnn_patience: usize,
    pub cnn_batch: usize,
    pub depth_step: usize,
    pub max_mae: usize,
    pub wnn_model: Option<PathBuf>,
    pub net_weights: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            stages: Stage::ALL.to_vec(),
            seed: 7,
            lap_length_m: 400.0,
            frames_per_lap: 390,
            train_offsets_m: vec![0.0, 0.4, -0.4],
            valid_offset_m: -0.2,
            test_offset_m: 0.3,
            key_lap: "train0".into(),
            key_spacing_m: 5.0,
            live_spacing_m: 1.0,
            dmax_m: 5.0,
            wnn_neurons_x: 96,
            wnn_neurons_y: 54,
            wnn_synapses: 128,
            wnn_sigma: 10.0,
            wnn_crop: Some(Rect::new(0, 0, 160, 90)),
            net_input_w: 80,
            net_input_h: 60,
            net_channels: [8, 16, 32, 64],
            cnn_lr: 5e-4,
            cnn_halve_every: 20,
            cnn_epochs: 30,
            cnn_patience: 20,
            cnn_batch: 24,
            depth_step: 4,
            max_mae: 10,
            wnn_model: None,
            net_weights: None,
        }
    }
}

fn parse_list<T>(key: &str, v: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).ok_or_else(|| Error::config(key, format!("bad list item `{s}`"))))
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{v}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", n + 1), "expected `key = value`"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        match key {
            "dataset" => self.dataset = PathBuf::from(v),
            "out_dir" => self.out_dir = PathBuf::from(v),
            "stages" => self.stages = parse_list(key, v, Stage::parse)?,
            "seed" => self.seed = parse_num(key, v)?,
            "lap_length_m" => self.lap_length_m = parse_num(key, v)?,
            "frames_per_lap" => self.frames_per_lap = parse_num(key, v)?,
            "train_offsets_m" => self.train_offsets_m = parse_list(key, v, |s| s.parse().ok())?,
            "valid_offset_m" => self.valid_offset_m = parse_num(key, v)?,
            "test_offset_m" => self.test_offset_m = parse_num(key, v)?,
            "key_lap" => self.key_lap = v.to_owned(),
            "key_spacing_m" => self.key_spacing_m = parse_num(key, v)?,
            "live_spacing_m" => self.live_spacing_m = parse_num(key, v)?,
            "dmax_m" => self.dmax_m = parse_num(key, v)?,
            "wnn_neurons_x" => self.wnn_neurons_x = parse_num(key, v)?,
            "wnn_neurons_y" => self.wnn_neurons_y = parse_num(key, v)?,
            "wnn_synapses" => self.wnn_synapses = parse_num(key, v)?,
            "wnn_sigma" => self.wnn_sigma = parse_num(key, v)?,
            "wnn_crop" => {
                self.wnn_crop = if v.is_empty() || v == "none" {
                    None
                } else {
                    let r: Vec<usize> = parse_list(key, v, |s| s.parse().ok())?;
                    if r.len() != 4 {
                        return Err(Error::config(key, "expected x, y, width, height"));
                    }
                    Some(Rect::new(r[0], r[1], r[2], r[3]))
                }
            }
            "net_input_w" => self.net_input_w = parse_num(key, v)?,
            "net_input_h" => self.net_input_h = parse_num(key, v)?,
            "net_channels" => {
                let c: Vec<usize> = parse_list(key, v, |s| s.parse().ok())?;
                self.net_channels = c
                    .try_into()
                    .map_err(|_| Error::config(key, "expected four channel counts"))?;
            }
            "cnn_lr" => self.cnn_lr = parse_num(key, v)?,
            "cnn_halve_every" => self.cnn_halve_every = parse_num(key, v)?,
            "cnn_epochs" => self.cnn_epochs = parse_num(key, v)?,
            "cnn_patience" => self.cnn_patience = parse_num(key, v)?,
            "cnn_batch" => self.cnn_batch = parse_num(key, v)?,
            "depth_step" => self.depth_step = parse_num(key, v)?,
            "max_mae" => self.max_mae = parse_num(key, v)?,
            "wnn_model" => self.wnn_model = path(v),
            "net_weights" => self.net_weights = path(v),
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lap_length_m", self.lap_length_m),
            ("key_spacing_m", self.key_spacing_m),
            ("live_spacing_m", self.live_spacing_m),
            ("dmax_m", self.dmax_m),
            ("wnn_sigma", self.wnn_sigma),
            ("cnn_lr", self.cnn_lr),
        ];
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(k, format!("must be positive, got {v}")));
            }
        }
        if self.frames_per_lap < 2 {
            return Err(Error::config("frames_per_lap", "need at least two frames"));
        }
        if self.train_offsets_m.is_empty() {
            return Err(Error::config("train_offsets_m", "need at least one training lap"));
        }
        if self.stages.is_empty() {
            return Err(Error::config("stages", "no stages requested"));
        }
        for (k, v) in [
            ("cnn_batch", self.cnn_batch),
            ("cnn_epochs", self.cnn_epochs),
            ("cnn_halve_every", self.cnn_halve_every),
            ("depth_step", self.depth_step),
        ] {
            if v == 0 {
                return Err(Error::config(k, "must be >= 1"));
            }
        }
        Ok(())
    }

    /// Canonical `key = value` text; its hash identifies the run.
    pub fn render(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(", ");
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let stages: Vec<&str> = self.stages.iter().map(|s| s.name()).collect();
        let crop = self
            .wnn_crop
            .map(|r| format!("{}, {}, {}, {}", r.x, r.y, r.width, r.height))
            .unwrap_or_else(|| "none".into());
        let c = self.net_channels;
        let mut s = String::new();
        for (k, v) in [
            ("dataset", self.dataset.display().to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("stages", stages.join(", ")),
            ("seed", self.seed.to_string()),
            ("lap_length_m", fmt_f64(self.lap_length_m)),
            ("frames_per_lap", self.frames_per_lap.to_string()),
            ("train_offsets_m", list(&self.train_offsets_m)),
            ("valid_offset_m", fmt_f64(self.valid_offset_m)),
            ("test_offset_m", fmt_f64(self.test_offset_m)),
            ("key_lap", self.key_lap.clone()),
            ("key_spacing_m", fmt_f64(self.key_spacing_m)),
            ("live_spacing_m", fmt_f64(self.live_spacing_m)),
            ("dmax_m", fmt_f64(self.dmax_m)),
            ("wnn_neurons_x", self.wnn_neurons_x.to_string()),
            ("wnn_neurons_y", self.wnn_neurons_y.to_string()),
            ("wnn_synapses", self.wnn_synapses.to_string()),
            ("wnn_sigma", fmt_f64(self.wnn_sigma)),
            ("wnn_crop", crop),
            ("net_input_w", self.net_input_w.to_string()),
            ("net_input_h", self.net_input_h.to_string()),
            ("net_channels", format!("{}, {}, {}, {}", c[0], c[1], c[2], c[3])),
            ("cnn_lr", fmt_f64(self.cnn_lr)),
            ("cnn_halve_every", self.cnn_halve_every.to_string()),
            ("cnn_epochs", self.cnn_epochs.to_string()),
            ("cnn_patience", self.cnn_patience.to_string()),
            ("cnn_batch", self.cnn_batch.to_string()),
            ("depth_step", self.depth_step.to_string()),
            ("max_mae", self.max_mae.to_string()),
            ("wnn_model", opt(&self.wnn_model)),
            ("net_weights", opt(&self.net_weights)),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn config_hash(&self) -> String {
        Sha256::digest(self.render().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn world_seed(&self) -> u64 {
        self.seed
    }

    pub fn wnn_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    pub fn net_seed(&self) -> u64 {
        self.seed.wrapping_add(2)
    }

    pub fn train_seed(&self) -> u64 {
        self.seed.wrapping_add(3)
    }

    pub fn wnn_model_path(&self) -> PathBuf {
        self.wnn_model.clone().unwrap_or_else(|| self.out_dir.join("wnn.bin"))
    }

    pub fn net_weights_path(&self) -> PathBuf {
        self.net_weights.clone().unwrap_or_else(|| self.out_dir.join("net.bin"))
    }

    pub fn fix_log_path(&self) -> PathBuf {
        self.out_dir.join("fixes.csv")
    }

    pub fn network_config(&self) -> Result<NetworkConfig> {
        let c = self.net_channels;
        NetworkConfig::standard(self.net_input_w, self.net_input_h, [c[0], c[1], c[2]], c[3])
            .map(|n| n.with_seed(self.net_seed()))
            .map_err(|e| Error::config("net_input_w", e.to_string()))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.cnn_lr,
            halve_every_epochs: self.cnn_halve_every,
            batch_size: self.cnn_batch,
            max_epochs: self.cnn_epochs,
            patience: self.cnn_patience,
            rng_seed: self.train_seed(),
            ..TrainConfig::default()
        }
    }

    pub fn wnn_config(&self) -> WnnConfig {
        WnnConfig {
            neurons_x: self.wnn_neurons_x,
            neurons_y: self.wnn_neurons_y,
            synapses: self.wnn_synapses,
            synapse_sigma: self.wnn_sigma,
            rng_seed: self.wnn_seed(),
        }
    }
}

/// What a run produced, for callers that want numbers rather than files.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub train_report: Option<TrainReport>,
    pub fixes: usize,
    pub mae: Option<MaeCurve>,
    pub stats: Vec<(String, ErrorStats)>,
    /// Fraction of fixes whose position error is below half the key spacing.
    pub under_half_spacing: Option<f64>,
}

fn require(path: &Path, key: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::config(key, format!("file not found: {}", path.display())))
    }
}

fn lap_specs(cfg: &ExperimentConfig) -> Vec<LapSpec> {
    let step = cfg.lap_length_m / cfg.frames_per_lap as f64;
    let mut laps: Vec<(String, f64)> = cfg
        .train_offsets_m
        .iter()
        .enumerate()
        .map(|(i, &o)| (format!("train{i}"), o))
        .collect();
    laps.push(("valid".into(), cfg.valid_offset_m));
    laps.push(("test".into(), cfg.test_offset_m));
    laps.into_iter()
        .enumerate()
        .map(|(j, (name, offset))| {
            let mut spec = LapSpec::new(name, cfg.frames_per_lap).with_offset(offset);
            // stagger the laps so their frames do not coincide along the route
            spec.start_arc = (j as f64 * 0.618_033_988_75).fract() * step;
            spec
        })
        .collect()
}

fn stage_synth(cfg: &ExperimentConfig) -> Result<()> {
    let world = SynthWorld::new(WorldConfig::desk_default(cfg.world_seed(), cfg.lap_length_m))
        .map_err(|e| Error::config("lap_length_m", e.to_string()))?;
    let spec = SplitSpec {
        test: vec!["test".into()],
        valid: vec!["valid".into()],
        registration: vec![],
    };
    let mut ds = Dataset::create(&cfg.dataset, world.config().intrinsics, spec)?;
    for lap in lap_specs(cfg) {
        ds.add_lap(&world.render_lap(&lap)?)?;
    }
    Ok(())
}

fn open_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    require(&cfg.dataset.join("dataset.txt"), "dataset")?;
    Dataset::open(&cfg.dataset)
}

fn keyframes(cfg: &ExperimentConfig, ds: &Dataset) -> Result<LapSequence> {
    let lap = ds
        .lap(&cfg.key_lap)
        .map_err(|_| Error::config("key_lap", format!("no lap named `{}`", cfg.key_lap)))?;
    sample_by_spacing(lap, cfg.key_spacing_m)
}

fn stage_train_wnn(cfg: &ExperimentConfig) -> Result<()> {
    let ds = open_dataset(cfg)?;
    let keys = keyframes(cfg, &ds)?;
    let first = ds.image(&keys.frames()[0])?;
    let pre = Preprocess {
        crop: cfg.wnn_crop,
        resize: None,
    };
    let mut model = WnnModel::new(cfg.wnn_config(), pre, first.width(), first.height())
        .map_err(|e| Error::config("wnn_neurons_x", e.to_string()))?;
    for (id, f) in keys.frames().iter().enumerate() {
        model.train(
            &ds.image(f)?,
            PlaceRecord {
                id: id as u32,
                image_key: f.image_key.clone(),
                pose: f.pose,
            },
        )?;
    }
    let path = cfg.wnn_model_path();
    save_model(&path, &model)?;
    write_place_csv(&cfg.out_dir.join("places.csv"), model.places())
}

fn build_pairs(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    net_cfg: &NetworkConfig,
    keys: &LapSequence,
    key_images: &[GrayImage],
    laps: &[LapSequence],
) -> Result<Vec<TrainPair>> {
    let mut out = Vec::new();
    for lap in laps {
        let live = sample_by_spacing(lap, cfg.live_spacing_m)?;
        for p in make_pairs(&live, keys, cfg.dmax_m)? {
            out.push(TrainPair::new(
                net_cfg,
                &key_images[p.key_index],
                &ds.image(&p.live)?,
                &ds.depth(&p.live)?,
                ds.intrinsics(),
                p.delta_gt,
                p.key.pose,
                cfg.depth_step,
            )?);
        }
    }
    Ok(out)
}

fn stage_train_cnn(cfg: &ExperimentConfig) -> Result<TrainReport> {
    let ds = open_dataset(cfg)?;
    let keys = keyframes(cfg, &ds)?;
    let key_images = keys.frames().iter().map(|f| ds.image(f)).collect::<Result<Vec<_>>>()?;
    let splits = ds.splits()?;
    let net_cfg = cfg.network_config()?;
    let train = build_pairs(cfg, &ds, &net_cfg, &keys, &key_images, &splits.train)?;
    let valid = build_pairs(cfg, &ds, &net_cfg, &keys, &key_images, &splits.valid)?;
    log::info!("training on {} pairs, validating on {}", train.len(), valid.len());
    let mut net = Network::new(net_cfg)?;
    let report = train_loop(&mut net, &train, &valid, &cfg.train_config())?;
    save_network(&cfg.net_weights_path(), &net)?;
    write_history(&cfg.out_dir.join("history.csv"), &report.history)?;
    Ok(report)
}

fn stage_localize(cfg: &ExperimentConfig) -> Result<usize> {
    let (wnn_path, net_path) = (cfg.wnn_model_path(), cfg.net_weights_path());
    require(&wnn_path, "wnn_model")?;
    require(&net_path, "net_weights")?;
    let ds = open_dataset(cfg)?;
    let wnn = load_model(&wnn_path)?;
    let net = load_network(&net_path)?;
    let key_images = wnn
        .places()
        .iter()
        .map(|p| GrayImage::load(&ds.root().join(&p.image_key)))
        .collect::<Result<Vec<_>>>()?;
    let loc = Localizer::new(wnn, net, &key_images)?;
    let mut fixes: Vec<GlobalFix> = Vec::new();
    for lap in ds.splits()?.test {
        let live = sample_by_spacing(&lap, cfg.live_spacing_m)?;
        for f in live.frames() {
            fixes.push(loc.localize(&ds.image(f)?, &f.image_key)?);
        }
    }
    write_fix_log(&cfg.fix_log_path(), &fixes)?;
    Ok(fixes.len())
}

fn stage_eval(cfg: &ExperimentConfig, summary: &mut RunSummary) -> Result<()> {
    let wnn_path = cfg.wnn_model_path();
    require(&wnn_path, "wnn_model")?;
    require(&cfg.net_weights_path(), "net_weights")?;
    require(&cfg.fix_log_path(), "out_dir")?;
    let ds = open_dataset(cfg)?;
    let places = load_model(&wnn_path)?.places().to_vec();
    let keys = keyframes(cfg, &ds)?;
    let fixes = read_fix_log(&cfg.fix_log_path())?;
    let frames: HashMap<String, _> = ds
        .laps()
        .iter()
        .flat_map(|l| l.sequence.frames().iter())
        .map(|f| (f.image_key.clone(), f.clone()))
        .collect();
    let (mut predicted, mut truth) = (Vec::new(), Vec::new());
    let (mut fix_err, mut key_err) = (Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for fix in &fixes {
        let frame = frames
            .get(&fix.live_key)
            .ok_or_else(|| Error::format("fix log", format!("unknown frame `{}`", fix.live_key)))?;
        let one = LapSequence::new("query", vec![frame.clone()])?;
        truth.push(register(&one, &keys)?[0].reference_index);
        predicted.push(fix.place_id as usize);
        let gt = frame.position();
        let place = places
            .get(fix.place_id as usize)
            .ok_or_else(|| Error::format("fix log", format!("unknown place {}", fix.place_id)))?;
        let ek = (place.pose.translation() - gt).norm();
        let p = fix.position;
        let ef = ((p[0] - gt.x).powi(2) + (p[1] - gt.y).powi(2) + (p[2] - gt.z).powi(2)).sqrt();
        key_err.push(ek);
        fix_err.push(ef);
        rows.push(vec![fix.live_key.clone(), fmt_f64(ek), fmt_f64(ef)]);
    }
    let curve = mae_accuracy(&predicted, &truth, cfg.max_mae)?;
    write_mae_curve(&cfg.out_dir.join("mae.csv"), &curve)?;
    let stats = vec![
        ("wnn_cnn".to_owned(), error_stats(&fix_err)?),
        ("wnn_keyframe".to_owned(), error_stats(&key_err)?),
    ];
    write_error_stats(&cfg.out_dir.join("error_stats.csv"), &stats)?;
    csvio::write_table(&cfg.out_dir.join("errors.csv"), "live_key,keyframe_err_m,fix_err_m", &rows)?;
    let half = cfg.key_spacing_m / 2.0;
    summary.under_half_spacing =
        Some(fix_err.iter().filter(|&&e| e < half).count() as f64 / fix_err.len() as f64);
    summary.mae = Some(curve);
    summary.stats = stats;
    Ok(())
}

/// Runs the configured stages in pipeline order and writes the run manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let mut summary = RunSummary::default();
    for stage in Stage::ALL.into_iter().filter(|s| cfg.stages.contains(s)) {
        let t0 = Instant::now();
        match stage {
            Stage::Synth => stage_synth(cfg)?,
            Stage::TrainWnn => stage_train_wnn(cfg)?,
            Stage::TrainCnn => summary.train_report = Some(stage_train_cnn(cfg)?),
            Stage::Localize => summary.fixes = stage_localize(cfg)?,
            Stage::Eval => stage_eval(cfg, &mut summary)?,
        }
        log::info!("stage {} done in {:.1?}", stage.name(), t0.elapsed());
    }
    let stages: Vec<&str> = cfg.stages.iter().map(|s| s.name()).collect();
    let manifest = format!(
        "config_sha256 = {}\nseed = {}\nworld_seed = {}\nwnn_seed = {}\nnet_seed = {}\ntrain_seed = {}\nstages = {}\n\n{}",
        cfg.config_hash(),
        cfg.seed,
        cfg.world_seed(),
        cfg.wnn_seed(),
        cfg.net_seed(),
        cfg.train_seed(),
        stages.join(", "),
        cfg.render()
    );
    let path = cfg.out_dir.join("run_manifest.txt");
    fs::write(&path, manifest).map_err(|e| Error::io(path, e))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_overrides_and_rejects_unknown_keys() {
        let cfg = ExperimentConfig::parse("seed = 3 # master\nstages = eval\nkey_spacing_m = 4.5\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.stages, vec![Stage::Eval]);
        assert_eq!(cfg.key_spacing_m, 4.5);
        match ExperimentConfig::parse("bogus = 1") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "bogus"),
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::parse("dmax_m = -1") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "dmax_m"),
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::parse("stages = fly").is_err());
    }

    #[test]
    fn render_parses_back() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("wnn_crop", "none").unwrap();
        cfg.set("net_weights", "x/net.bin").unwrap();
        let back = ExperimentConfig::parse(&cfg.render()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.config_hash(), cfg.config_hash());
        assert_eq!(cfg.config_hash().len(), 64);
    }

    #[test]
    fn eval_without_models_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            out_dir: dir.path().join("out"),
            dataset: dir.path().join("data"),
            stages: vec![Stage::Eval],
            ..ExperimentConfig::default()
        };
        match run_experiment(&cfg) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "wnn_model"),
            other => panic!("{other:?}"),
        }
    }
}
