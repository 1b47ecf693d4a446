use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState, TrainConfig};
use super::config::{NetworkConfig, OUTPUT_DIM};
use super::network::{output_pose, Mode, Network};
use super::tensor::Tensor4;
use crate::csvio;
use crate::error::{Error, Result};
use crate::geom3d::{loss_and_subgradient, se3_exp, CameraIntrinsics, DepthMap, LossPoints, Pose6, Transform};
use crate::image::GrayImage;
use crate::numeric::{fmt_f64, CompensatedSum};

pub const HISTORY_HEADER: &str = "iteration,loss_m,train_err_m,valid_err_m";

/// One training example: both images resampled to the network input, the
/// live frame's scene points, and the ground truth.
#[derive(Debug, Clone)]
pub struct TrainPair {
    pub key: Vec<f32>,
    pub live: Vec<f32>,
    pub points: LossPoints,
    pub delta_gt: Pose6,
    pub key_pose: Transform,
}

impl TrainPair {
    /// `depth_step` thins the live depth map before back-projection.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config: &NetworkConfig,
        key: &GrayImage,
        live: &GrayImage,
        live_depth: &DepthMap,
        intrinsics: &CameraIntrinsics,
        delta_gt: Pose6,
        key_pose: Transform,
        depth_step: usize,
    ) -> Result<Self> {
        if live_depth.width() != live.width() || live_depth.height() != live.height() {
            return Err(Error::dims(
                format!("{}x{} depth", live.width(), live.height()),
                format!("{}x{}", live_depth.width(), live_depth.height()),
            ));
        }
        let step = depth_step.max(1);
        let depth = live_depth.decimated(step, 0);
        let k = intrinsics.decimated(step, 0);
        Ok(Self {
            key: key.resize_normalized(config.input_w, config.input_h),
            live: live.resize_normalized(config.input_w, config.input_h),
            points: LossPoints::from_depth(&depth, &k)?,
            delta_gt,
            key_pose,
        })
    }
}

/// Distance between the camera positions obtained by applying the predicted
/// and the true relative pose to the keyframe pose.
pub fn positioning_error(delta_pred: &Pose6, delta_gt: &Pose6, key_pose: &Transform) -> f64 {
    let a = key_pose.compose(&se3_exp(delta_pred)).translation();
    let b = key_pose.compose(&se3_exp(delta_gt)).translation();
    (a - b).norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iteration: u64,
    pub loss_m: f64,
    pub train_err_m: f64,
    /// Filled on the last iteration of each epoch.
    pub valid_err_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub history: Vec<HistoryRow>,
    /// Validation error of the network before training.
    pub initial_valid_err: f64,
    pub best_valid_err: f64,
    /// `None` when no epoch beat the untrained network.
    pub best_epoch: Option<usize>,
    pub epochs_run: usize,
    pub stopped_early: bool,
}

fn batch_tensors(pairs: &[&TrainPair], cfg: &NetworkConfig) -> Result<(Tensor4, Tensor4)> {
    let keys: Vec<&[f32]> = pairs.iter().map(|p| p.key.as_slice()).collect();
    let lives: Vec<&[f32]> = pairs.iter().map(|p| p.live.as_slice()).collect();
    let (c, h, w) = (cfg.input_channels, cfg.input_h, cfg.input_w);
    Ok((Tensor4::stack(&keys, c, h, w)?, Tensor4::stack(&lives, c, h, w)?))
}

/// Eval-mode predictions for every pair, in order.
pub fn predict_pairs(net: &Network, pairs: &[TrainPair]) -> Result<Vec<Pose6>> {
    let mut out = Vec::with_capacity(pairs.len());
    for chunk in pairs.chunks(32) {
        let refs: Vec<&TrainPair> = chunk.iter().collect();
        let (k, l) = batch_tensors(&refs, net.config())?;
        let y = net.predict(&k, &l)?;
        for i in 0..chunk.len() {
            out.push(output_pose(&y, i)?);
        }
    }
    Ok(out)
}

/// Mean positioning error over `pairs`.
pub fn evaluate(net: &Network, pairs: &[TrainPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset("evaluation pairs".into()));
    }
    let preds = predict_pairs(net, pairs)?;
    let sum: CompensatedSum = preds
        .iter()
        .zip(pairs)
        .map(|(d, p)| positioning_error(d, &p.delta_gt, &p.key_pose))
        .collect();
    Ok(sum.value() / pairs.len() as f64)
}

/// One Adam iteration on a mini-batch; returns (mean loss, mean position
/// error) measured before the update.
pub fn train_step(
    net: &mut Network,
    batch: &[&TrainPair],
    adam: &mut AdamState,
    t: u64,
    epoch: usize,
    cfg: &TrainConfig,
) -> Result<(f64, f64)> {
    let (k, l) = batch_tensors(batch, net.config())?;
    let out = net.forward(&k, &l, Mode::Train)?;
    let n = batch.len() as f64;
    let mut grad = vec![0.0; batch.len() * OUTPUT_DIM];
    let (mut loss, mut err) = (CompensatedSum::new(), CompensatedSum::new());
    for (i, pair) in batch.iter().enumerate() {
        let pred = output_pose(&out, i)?;
        let (li, gi) = loss_and_subgradient(&pair.points, &pred, &pair.delta_gt);
        loss.add(li);
        err.add(positioning_error(&pred, &pair.delta_gt, &pair.key_pose));
        for (g, v) in grad[i * OUTPUT_DIM..(i + 1) * OUTPUT_DIM].iter_mut().zip(gi.to_array()) {
            *g = v / n;
        }
    }
    let grads = net.backward(&Tensor4::from_vec(batch.len(), OUTPUT_DIM, 1, 1, grad)?)?;
    let mut params = net.params().to_vec();
    adam_step(&mut params, &grads, adam, t, epoch, cfg)?;
    net.set_params(&params)?;
    Ok((loss.value() / n, err.value() / n))
}

/// Mini-batch Adam under the projection loss with per-epoch validation and
/// early stopping. On return `net` holds the parameters with the lowest
/// validation error seen, including the starting point.
pub fn train_loop(
    net: &mut Network,
    train: &[TrainPair],
    valid: &[TrainPair],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset("training pairs".into()));
    }
    if valid.is_empty() {
        return Err(Error::EmptyDataset("validation pairs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    net.reseed_dropout(cfg.rng_seed ^ 0xD20F_0A7E);
    let mut adam = AdamState::new(net.param_count());
    let initial = evaluate(net, valid)?;
    let mut best = (initial, net.params().to_vec(), None);
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut t = 0u64;
    let mut stale = 0;
    let mut epochs_run = 0;
    let mut stopped_early = false;
    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            t += 1;
            let batch: Vec<&TrainPair> = chunk.iter().map(|&i| &train[i]).collect();
            let (loss_m, train_err_m) = train_step(net, &batch, &mut adam, t, epoch, cfg)?;
            history.push(HistoryRow {
                iteration: t,
                loss_m,
                train_err_m,
                valid_err_m: None,
            });
        }
        let v = evaluate(net, valid)?;
        history.last_mut().expect("non-empty epoch").valid_err_m = Some(v);
        epochs_run = epoch + 1;
        log::debug!("epoch {epoch}: valid {v:.4} m");
        if v < best.0 {
            best = (v, net.params().to_vec(), Some(epoch));
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                stopped_early = epoch + 1 < cfg.max_epochs;
                break;
            }
        }
    }
    net.set_params(&best.1)?;
    Ok(TrainReport {
        history,
        initial_valid_err: initial,
        best_valid_err: best.0,
        best_epoch: best.2,
        epochs_run,
        stopped_early,
    })
}

pub fn history_rows(history: &[HistoryRow]) -> Vec<Vec<String>> {
    history
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                fmt_f64(r.loss_m),
                fmt_f64(r.train_err_m),
                r.valid_err_m.map(fmt_f64).unwrap_or_default(),
            ]
        })
        .collect()
}

pub fn write_history(path: &Path, history: &[HistoryRow]) -> Result<()> {
    csvio::write_table(path, HISTORY_HEADER, &history_rows(history))
}

pub fn read_history(path: &Path) -> Result<Vec<HistoryRow>> {
    const WHAT: &str = "training history";
    csvio::read_table(WHAT, path, HISTORY_HEADER)?
        .iter()
        .map(|r| {
            Ok(HistoryRow {
                iteration: csvio::parse_usize(WHAT, &r[0])? as u64,
                loss_m: csvio::parse_f64(WHAT, &r[1])?,
                train_err_m: csvio::parse_f64(WHAT, &r[2])?,
                valid_err_m: csvio::parse_opt_f64(WHAT, &r[3])?,
            })
        })
        .collect()
}
