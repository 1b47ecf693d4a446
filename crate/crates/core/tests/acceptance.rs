//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hybridloc::data::synth::{SynthWorld, WorldConfig};
use hybridloc::eval::{run_experiment, ExperimentConfig};
use hybridloc::geom3d::{
    projection_loss, projection_loss_grad, se3_compose, se3_exp, se3_inverse, se3_log, CameraIntrinsics,
    DepthMap, Pose6,
};
use hybridloc::image::{Preprocess, Rect};
use hybridloc::net::{
    conv_backward, conv_forward, predict_pairs, prelu_backward, prelu_forward, train_step, AdamState, ConvGeom,
    LayerSpec, Mode, Network, NetworkConfig, Tensor4, TrainConfig, TrainPair,
};
use hybridloc::wnn::{
    indexed_recall, neuron_recall, BitPattern, HammingIndex, NeuronMemory, PlaceRecord, WnnConfig, WnnModel,
};
use nalgebra::{Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_pose(rng: &mut impl Rng, max_angle: f64, max_trans: f64) -> Pose6 {
    loop {
        let r: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-max_angle..max_angle));
        let t: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-max_trans..max_trans));
        if let Ok(p) = Pose6::new(r, t) {
            return p;
        }
    }
}

fn random_depth(rng: &mut impl Rng, w: usize, h: usize) -> DepthMap {
    DepthMap::new(w, h, (0..w * h).map(|_| rng.gen_range(0.5..20.0)).collect()).unwrap()
}

fn random_k(rng: &mut impl Rng) -> CameraIntrinsics {
    CameraIntrinsics::new(
        rng.gen_range(2.0..200.0),
        rng.gen_range(2.0..200.0),
        rng.gen_range(-2.0..6.0),
        rng.gen_range(-2.0..6.0),
    )
    .unwrap()
}

fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

// ---------------------------------------------------------------- 1

fn loss_oracle(pred: &Pose6, gt: &Pose6, depth: &DepthMap, k: &CameraIntrinsics) -> f64 {
    let (tp, tg) = (*se3_exp(pred).matrix(), *se3_exp(gt).matrix());
    let kinv = k.inverse_matrix();
    let (mut total, mut n) = (0.0, 0usize);
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            let d = depth.get(u, v);
            let ray = kinv * Vector3::new(u as f64, v as f64, 1.0) * d;
            let p = Vector4::new(ray.x, ray.y, ray.z, 1.0);
            total += (tp * p - tg * p).norm();
            n += 1;
        }
    }
    total / n as f64
}

fn geometry_suite() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let eye = Matrix4::<f64>::identity();
    let mut worst_group: f64 = 0.0;
    for _ in 0..1000 {
        let da = random_pose(&mut rng, 3.0, 10.0);
        let a = se3_exp(&da);
        let b = se3_exp(&random_pose(&mut rng, 3.0, 10.0));
        let c = se3_exp(&random_pose(&mut rng, 3.0, 10.0));
        let inv = se3_inverse(&a).unwrap();
        let ab_c = se3_compose(&se3_compose(&a, &b).unwrap(), &c).unwrap();
        let a_bc = se3_compose(&a, &se3_compose(&b, &c).unwrap()).unwrap();
        let round = se3_exp(&se3_log(&a).unwrap());
        let inv_exp = se3_exp(&Pose6::from_array(da.to_array().map(|v| -v)).unwrap());
        for e in [
            (se3_compose(&a, &inv).unwrap().matrix() - eye).amax(),
            (se3_compose(&inv, &a).unwrap().matrix() - eye).amax(),
            (ab_c.matrix() - a_bc.matrix()).amax(),
            (round.matrix() - a.matrix()).amax(),
            (inv_exp.matrix() - inv.matrix()).amax(),
            (se3_compose(&a, &b).unwrap().matrix() - a.matrix() * b.matrix()).amax(),
        ] {
            worst_group = worst_group.max(e);
        }
    }
    let mut worst_loss: f64 = 0.0;
    for _ in 0..100 {
        let pred = random_pose(&mut rng, 1.5, 3.0);
        let gt = random_pose(&mut rng, 1.5, 3.0);
        let (w, h) = (rng.gen_range(1..7), rng.gen_range(1..7));
        let depth = random_depth(&mut rng, w, h);
        let k = random_k(&mut rng);
        let a = projection_loss(&pred, &gt, &depth, &k).unwrap();
        worst_loss = worst_loss.max((a - loss_oracle(&pred, &gt, &depth, &k)).abs());
    }
    let dt = t0.elapsed();
    ensure(
        worst_group < 1e-9 && worst_loss < 1e-9 && dt < Duration::from_secs(10),
        format!("group laws max err {worst_group:.1e}, loss oracle max err {worst_loss:.1e}, {dt:.2?}"),
    )
}

// ---------------------------------------------------------------- 2

const FD_STEP: f64 = 1e-4;

/// Worst relative error between `analytic` and central differences of `f`.
fn fd_check(x: &[f64], analytic: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + FD_STEP;
        let up = f(&xp);
        xp[i] = x[i] - FD_STEP;
        let down = f(&xp);
        xp[i] = x[i];
        worst = worst.max(rel_err(analytic[i], (up - down) / (2.0 * FD_STEP), 1e-3));
    }
    worst
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &Tensor4, r: &[f64]) -> f64 {
    a.data().iter().zip(r).map(|(x, y)| x * y).sum()
}

fn loss_gradient_worst(rng: &mut ChaCha8Rng, cases: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let pred = match case % 3 {
            0 => random_pose(rng, 1.5, 3.0),
            1 => random_pose(rng, 0.01, 3.0),
            _ => Pose6::translation_only([rng.gen_range(-1.0..1.0), 0.3, -0.2]).unwrap(),
        };
        let gt = random_pose(rng, 1.0, 3.0);
        let depth = random_depth(rng, 4, 4);
        let k = random_k(rng);
        let g = projection_loss_grad(&pred, &gt, &depth, &k).unwrap().to_array();
        let h = 1e-5;
        for i in 0..6 {
            let (mut p, mut m) = (pred.to_array(), pred.to_array());
            p[i] += h;
            m[i] -= h;
            let lp = projection_loss(&Pose6::from_array(p).unwrap(), &gt, &depth, &k).unwrap();
            let lm = projection_loss(&Pose6::from_array(m).unwrap(), &gt, &depth, &k).unwrap();
            worst = worst.max(rel_err(g[i], (lp - lm) / (2.0 * h), 1e-8));
        }
    }
    worst
}

fn conv_worst(rng: &mut ChaCha8Rng, cases: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let (kh, kw) = (rng.gen_range(1..4), rng.gen_range(1..4));
        let g = ConvGeom {
            in_c: rng.gen_range(1..3),
            out_c: rng.gen_range(1..4),
            kh,
            kw,
            stride: rng.gen_range(1..3),
            pad_h: rng.gen_range(0..=kh / 2),
            pad_w: rng.gen_range(0..=kw / 2),
            in_h: rng.gen_range(kh..6),
            in_w: rng.gen_range(kw..6),
        };
        let n = rng.gen_range(1..3);
        let x = Tensor4::from_vec(n, g.in_c, g.in_h, g.in_w, random_vec(rng, n * g.in_c * g.in_h * g.in_w)).unwrap();
        let w = random_vec(rng, g.weight_len());
        let b = random_vec(rng, g.out_c);
        let r = random_vec(rng, n * g.out_c * g.out_h() * g.out_w());
        let dy = Tensor4::from_vec(n, g.out_c, g.out_h(), g.out_w(), r.clone()).unwrap();
        let (mut dw, mut db) = (vec![0.0; w.len()], vec![0.0; b.len()]);
        let dx = conv_backward(&g, &w, &x, &dy, &mut dw, &mut db);
        worst = worst
            .max(fd_check(&w, &dw, |wp| dot(&conv_forward(&g, wp, &b, &x), &r)))
            .max(fd_check(&b, &db, |bp| dot(&conv_forward(&g, &w, bp, &x), &r)))
            .max(fd_check(x.data(), dx.data(), |xp| {
                let xt = Tensor4::from_vec(n, g.in_c, g.in_h, g.in_w, xp.to_vec()).unwrap();
                dot(&conv_forward(&g, &w, &b, &xt), &r)
            }));
    }
    worst
}

fn prelu_worst(rng: &mut ChaCha8Rng, cases: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let c = rng.gen_range(1..4);
        // away from the kink
        let data: Vec<f64> = (0..2 * c * 9)
            .map(|_| rng.gen_range(0.01..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let x = Tensor4::from_vec(2, c, 3, 3, data).unwrap();
        let a = random_vec(rng, c);
        let r = random_vec(rng, x.data().len());
        let dy = Tensor4::from_vec(2, c, 3, 3, r.clone()).unwrap();
        let mut da = vec![0.0; c];
        let dx = prelu_backward(&a, &x, &dy, &mut da);
        worst = worst
            .max(fd_check(&a, &da, |ap| dot(&prelu_forward(ap, &x), &r)))
            .max(fd_check(x.data(), dx.data(), |xp| {
                dot(&prelu_forward(&a, &Tensor4::from_vec(2, c, 3, 3, xp.to_vec()).unwrap()), &r)
            }));
    }
    worst
}

fn toy_network(seed: u64) -> NetworkConfig {
    NetworkConfig {
        input_channels: 1,
        input_h: 7,
        input_w: 10,
        layers: vec![
            LayerSpec::conv_same(1, 3, 3, 2),
            LayerSpec::PRelu,
            LayerSpec::FuseConcat,
            LayerSpec::conv_same(6, 4, 3, 2),
            LayerSpec::PRelu,
            LayerSpec::Dropout { p: 0.3 },
            LayerSpec::conv(4, 3, (2, 2), 1, (0, 0)),
            LayerSpec::PRelu,
            LayerSpec::Dropout { p: 0.3 },
            LayerSpec::conv(3, 6, (1, 2), 1, (0, 0)),
        ],
        init_seed: seed,
    }
}

fn network_worst(rng: &mut ChaCha8Rng, cases: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let mut net = Network::new(toy_network(case as u64)).unwrap();
        let params: Vec<f64> = net.params().iter().map(|&p| p + rng.gen_range(-0.3..0.3)).collect();
        net.set_params(&params).unwrap();
        let key = Tensor4::from_vec(2, 1, 7, 10, random_vec(rng, 140)).unwrap();
        let live = Tensor4::from_vec(2, 1, 7, 10, random_vec(rng, 140)).unwrap();
        let r = random_vec(rng, 12);
        let seed = rng.gen();
        net.reseed_dropout(seed);
        net.forward(&key, &live, Mode::Train).unwrap();
        let grads = net.backward(&Tensor4::from_vec(2, 6, 1, 1, r.clone()).unwrap()).unwrap();
        worst = worst.max(fd_check(&params, &grads, |p| {
            let mut probe = net.clone();
            probe.set_params(p).unwrap();
            probe.reseed_dropout(seed);
            dot(&probe.forward(&key, &live, Mode::Train).unwrap(), &r)
        }));
    }
    worst
}

fn gradient_suite() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let loss = loss_gradient_worst(&mut rng, 120);
    let conv = conv_worst(&mut rng, 40);
    let prelu = prelu_worst(&mut rng, 40);
    let net = network_worst(&mut rng, 20);
    let dt = t0.elapsed();
    let layers = conv.max(prelu).max(net);
    ensure(
        loss < 1e-4 && layers < 1e-3 && dt < Duration::from_secs(60),
        format!(
            "loss grad max rel err {loss:.1e} (120 cases), layers conv {conv:.1e} / prelu {prelu:.1e} / network {net:.1e} (100 cases), {dt:.2?}"
        ),
    )
}

// ---------------------------------------------------------------- 3

fn depth_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_ratio, mut worst_trans): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let k = random_k(&mut rng);
        let depth = random_depth(&mut rng, 5, 4);
        let far = depth.map_values(|d| 2.0 * d);
        let rot = Pose6::new(std::array::from_fn(|_| rng.gen_range(-0.1..0.1)), [0.0; 3]).unwrap();
        let trans = Pose6::translation_only(std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).unwrap();
        let gr1 = projection_loss_grad(&rot, &Pose6::zero(), &depth, &k).unwrap();
        let gr2 = projection_loss_grad(&rot, &Pose6::zero(), &far, &k).unwrap();
        let gt1 = projection_loss_grad(&trans, &Pose6::zero(), &depth, &k).unwrap();
        let gt2 = projection_loss_grad(&trans, &Pose6::zero(), &far, &k).unwrap();
        worst_ratio = worst_ratio.max((gr2.rot.norm() / gr1.rot.norm() - 2.0).abs());
        worst_trans = worst_trans
            .max((gr2.trans - gr1.trans).amax())
            .max((gt2.trans - gt1.trans).amax());
    }
    ensure(
        worst_ratio < 1e-6 && worst_trans < 1e-9,
        format!("rotational gradient ratio off 2 by {worst_ratio:.1e}, translational change {worst_trans:.1e}"),
    )
}

// ---------------------------------------------------------------- 4

fn wnn_exact_recall() -> Outcome {
    let world = SynthWorld::new(WorldConfig::desk_default(7, 400.0)).unwrap();
    let pre = Preprocess { crop: Some(Rect::new(0, 0, 160, 90)), resize: None };
    let mut model = WnnModel::new(WnnConfig::default(), pre, 160, 120).unwrap();
    let images: Vec<_> = (0..200)
        .map(|i| world.render(&world.camera_pose(2.0 * i as f64, 0.0)).0)
        .collect();
    for (i, img) in images.iter().enumerate() {
        let pose = world.camera_pose(2.0 * i as f64, 0.0);
        model.train(img, PlaceRecord { id: i as u32, image_key: format!("k{i}"), pose }).unwrap();
    }
    let mut exact = 0;
    for (i, img) in images.iter().enumerate() {
        let r = model.committee_recall(img).unwrap();
        if r.place_id == i as u32 && r.vote_fraction == 1.0 {
            exact += 1;
        }
    }
    ensure(exact == 200, format!("{exact}/200 keyframes recalled with vote fraction 1.0"))
}

// ---------------------------------------------------------------- 6

fn random_pattern(rng: &mut ChaCha8Rng, bits: usize) -> BitPattern {
    BitPattern::from_bits(&(0..bits).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>())
}

fn index_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // exhaustive over every 16-bit query
    let mut exhaustive = (0usize, 0usize);
    for radius in 1..=3 {
        for n_patterns in [1, 7, 64] {
            let mut mem = NeuronMemory::new(16);
            for i in 0..n_patterns {
                mem.push(&random_pattern(&mut rng, 16), (i % 5) as u32).unwrap();
            }
            let idx = HammingIndex::from_memories(std::slice::from_ref(&mem), 16, radius).unwrap();
            for q in 0u32..1 << 16 {
                let query = BitPattern::from_bits(&(0..16).map(|b| q >> b & 1 == 1).collect::<Vec<_>>());
                let (_, d) = mem.nearest(query.words()).unwrap();
                if d as usize > radius {
                    continue;
                }
                exhaustive.1 += 1;
                if indexed_recall(&query, &idx, 0, &mem).unwrap() == neuron_recall(&query, &mem).unwrap() {
                    exhaustive.0 += 1;
                }
            }
        }
    }
    // perturbed stored patterns at 128 bits
    let radius = 7;
    let mut mem = NeuronMemory::new(128);
    let stored: Vec<BitPattern> = (0..500).map(|_| random_pattern(&mut rng, 128)).collect();
    for (i, p) in stored.iter().enumerate() {
        mem.push(p, (i % 37) as u32).unwrap();
    }
    let idx = HammingIndex::from_memories(std::slice::from_ref(&mem), 128, radius).unwrap();
    let mut sampled = (0usize, 0usize);
    for _ in 0..100_000 {
        let mut q = stored[rng.gen_range(0..stored.len())].clone();
        for _ in 0..rng.gen_range(0..=2 * radius) {
            q.flip(rng.gen_range(0..128));
        }
        let (_, d) = mem.nearest(q.words()).unwrap();
        if d as usize > radius {
            continue;
        }
        sampled.1 += 1;
        if indexed_recall(&q, &idx, 0, &mem).unwrap() == neuron_recall(&q, &mem).unwrap() {
            sampled.0 += 1;
        }
    }
    ensure(
        exhaustive.0 == exhaustive.1 && sampled.0 == sampled.1 && sampled.1 > 10_000,
        format!(
            "S=16 exhaustive {}/{} agree, S=128 sampled {}/{} in-radius queries agree",
            exhaustive.0, exhaustive.1, sampled.0, sampled.1
        ),
    )
}

// ---------------------------------------------------------------- 7

fn mean_loss(net: &Network, pairs: &[TrainPair]) -> f64 {
    let preds = predict_pairs(net, pairs).unwrap();
    preds.iter().zip(pairs).map(|(p, t)| t.points.loss(p, &t.delta_gt)).sum::<f64>() / pairs.len() as f64
}

fn overfit_sanity() -> Outcome {
    let world = SynthWorld::new(WorldConfig::desk_default(7, 400.0)).unwrap();
    let k = world.config().intrinsics;
    let cfg = NetworkConfig::desk().with_seed(11);
    let pairs: Vec<TrainPair> = (0..8)
        .map(|i| {
            let s = 12.0 * i as f64;
            let key_pose = world.camera_pose(s, 0.0);
            let live_pose = world.camera_pose(s + 1.0 + 0.4 * i as f64, 0.4 - 0.1 * i as f64);
            let (key_img, _) = world.render(&key_pose);
            let (live_img, live_depth) = world.render(&live_pose);
            let delta = se3_log(&se3_compose(&se3_inverse(&key_pose).unwrap(), &live_pose).unwrap()).unwrap();
            TrainPair::new(&cfg, &key_img, &live_img, &live_depth, &k, delta, key_pose, 4).unwrap()
        })
        .collect();
    let tc = TrainConfig {
        lr: 1e-3,
        halve_every_epochs: 1000,
        batch_size: 8,
        rng_seed: 5,
        ..TrainConfig::default()
    };
    let mut net = Network::new(cfg).unwrap();
    net.reseed_dropout(6);
    let initial = mean_loss(&net, &pairs);
    let batch: Vec<&TrainPair> = pairs.iter().collect();
    let mut adam = AdamState::new(net.param_count());
    let mut reached = None;
    for t in 1..=500u64 {
        train_step(&mut net, &batch, &mut adam, t, 0, &tc).unwrap();
        if t % 10 == 0 && mean_loss(&net, &pairs) < 0.1 * initial {
            reached = Some(t);
            break;
        }
    }
    let last = mean_loss(&net, &pairs);
    ensure(
        reached.is_some(),
        format!(
            "loss {initial:.4} -> {last:.4} m ({:.1}%), below 10% at iteration {}",
            100.0 * last / initial,
            reached.map_or("never".into(), |t| t.to_string())
        ),
    )
}

// ---------------------------------------------------------------- 5, 8

struct EndToEnd {
    summary: hybridloc::eval::RunSummary,
    elapsed: Duration,
    spacing: f64,
}

fn end_to_end(root: &Path) -> Result<EndToEnd, String> {
    let cfg = ExperimentConfig {
        dataset: root.join("data"),
        out_dir: root.join("out"),
        ..ExperimentConfig::default()
    };
    let t0 = Instant::now();
    let summary = run_experiment(&cfg).map_err(|e| format!("pipeline failed: {e}"))?;
    Ok(EndToEnd { summary, elapsed: t0.elapsed(), spacing: cfg.key_spacing_m })
}

fn wnn_proximity(e2e: &Result<EndToEnd, String>) -> Outcome {
    let e = e2e.as_ref().map_err(Clone::clone)?;
    let curve = e.summary.mae.as_ref().ok_or("no MAE curve")?;
    let (a0, a1) = (curve.accuracy(0).unwrap_or(0.0), curve.accuracy(1).unwrap_or(0.0));
    ensure(
        a0 >= 0.90 && a1 >= 0.97 && curve.is_monotone(),
        format!(
            "accuracy {a0:.3} at MAE 0, {a1:.3} at MAE 1, non-decreasing: {}",
            curve.is_monotone()
        ),
    )
}

fn refinement(e2e: &Result<EndToEnd, String>) -> Outcome {
    let e = e2e.as_ref().map_err(Clone::clone)?;
    let stat = |name: &str| e.summary.stats.iter().find(|(n, _)| n == name).map(|(_, s)| *s);
    let (fix, key) = (stat("wnn_cnn").ok_or("no stats")?, stat("wnn_keyframe").ok_or("no stats")?);
    let under = e.summary.under_half_spacing.unwrap_or(0.0);
    ensure(
        fix.median < key.median && under >= 0.5 && e.elapsed < Duration::from_secs(600),
        format!(
            "median fix error {:.3} m vs keyframe {:.3} m, {:.1}% under {} m, pipeline {:.0?}",
            fix.median,
            key.median,
            100.0 * under,
            e.spacing / 2.0,
            e.elapsed
        ),
    )
}

// ---------------------------------------------------------------- 9

const SMALL_RUN: &str = "\
lap_length_m = 120
frames_per_lap = 100
train_offsets_m = 0, 0.4
cnn_epochs = 2
cnn_batch = 16
";

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            if p.extension()? != "csv" {
                return None;
            }
            Some((p.file_name()?.to_string_lossy().into_owned(), fs::read(&p).ok()?))
        })
        .collect();
    out.sort();
    out
}

fn determinism(root: &Path) -> Outcome {
    fs::create_dir_all(root).map_err(|e| e.to_string())?;
    let cfg = root.join("small.cfg");
    fs::write(&cfg, SMALL_RUN).unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let status = Command::new(env!("CARGO_BIN_EXE_hybridloc"))
            .arg("run")
            .arg("--config")
            .arg(&cfg)
            .arg("--dataset")
            .arg(root.join(run).join("data"))
            .arg("--out")
            .arg(root.join(run).join("out"))
            .env("RUST_LOG", "warn")
            .output()
            .map_err(|e| format!("cannot start cli: {e}"))?;
        if !status.status.success() {
            return Err(format!("run {run} failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        outputs.push(csv_files(&root.join(run).join("out")));
    }
    let names: Vec<&str> = outputs[0].iter().map(|(n, _)| n.as_str()).collect();
    ensure(
        outputs[0] == outputs[1] && names.len() >= 6,
        format!("{} CSV files compared ({}), identical: {}", names.len(), names.join(" "), outputs[0] == outputs[1]),
    )
}

fn report(n: u32, name: &str, outcome: Outcome) -> bool {
    match outcome {
        Ok(msg) => {
            println!("PASS criterion {n} ({name}): {msg}");
            true
        }
        Err(msg) => {
            println!("FAIL criterion {n} ({name}): {msg}");
            false
        }
    }
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut ok = true;
    ok &= report(1, "geometry suite", geometry_suite());
    ok &= report(2, "gradient suite", gradient_suite());
    ok &= report(3, "depth scaling", depth_scaling());
    ok &= report(4, "WNN exact recall", wnn_exact_recall());
    let e2e = end_to_end(&tmp.path().join("e2e"));
    ok &= report(5, "WNN proximity recall", wnn_proximity(&e2e));
    ok &= report(6, "index soundness", index_soundness());
    ok &= report(7, "overfit sanity", overfit_sanity());
    ok &= report(8, "end-to-end refinement", refinement(&e2e));
    ok &= report(9, "pipeline determinism", determinism(&tmp.path().join("det")));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
