//! Round trips through the C ABI with models saved by the core crate.

use std::ffi::CString;
use std::process::Command;
use std::ptr;

use hybridloc::geom3d::{Pose6, Transform};
use hybridloc::image::{GrayImage, Preprocess};
use hybridloc::net::persist::save_network;
use hybridloc::net::{Network, NetworkConfig, Tensor4};
use hybridloc::wnn::persist::save_model;
use hybridloc::wnn::{PlaceRecord, WnnConfig, WnnModel};
use hybridloc_ffi::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

#[test]
fn wnn_handle_recalls_trained_places() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = WnnConfig {
        neurons_x: 8,
        neurons_y: 6,
        synapses: 32,
        synapse_sigma: 4.0,
        rng_seed: 3,
    };
    let pre = Preprocess { crop: None, resize: None };
    let mut model = WnnModel::new(cfg, pre, 32, 24).unwrap();
    let images: Vec<GrayImage> = (0..5).map(|_| noise_image(&mut rng, 32, 24)).collect();
    for (i, img) in images.iter().enumerate() {
        let pose = Transform::from_row_major(&[
            1.0, 0.0, 0.0, i as f64, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        ])
        .unwrap();
        let place = PlaceRecord { id: i as u32, image_key: format!("k{i}"), pose };
        model.train(img, place).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wnn.bin");
    save_model(&path, &model).unwrap();

    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(hl_wnn_load(cpath.as_ptr(), &mut h), HlStatus::Ok);
        assert_eq!(hl_wnn_place_count(h), 5);
        for (i, img) in images.iter().enumerate() {
            let (mut id, mut frac) = (u32::MAX, 0.0);
            let s = hl_wnn_recall(h, img.pixels().as_ptr(), 32, 24, &mut id, &mut frac);
            assert_eq!(s, HlStatus::Ok);
            assert_eq!((id, frac), (i as u32, 1.0));
            let mut m = [0.0; 16];
            assert_eq!(hl_wnn_place_pose(h, id, m.as_mut_ptr()), HlStatus::Ok);
            assert_eq!(m[3], i as f64);
        }
        let (mut id, mut frac) = (0, 0.0);
        let s = hl_wnn_recall(h, images[0].pixels().as_ptr(), 16, 24, &mut id, &mut frac);
        assert_eq!(s, HlStatus::DimensionMismatch);
        assert_eq!(hl_wnn_place_pose(h, 99, [0.0; 16].as_mut_ptr()), HlStatus::InvalidArgument);
        hl_wnn_free(h);
    }
}

#[test]
fn net_handle_matches_core_prediction() {
    let cfg = NetworkConfig::standard(40, 30, [2, 3, 4], 6).unwrap().with_seed(5);
    let mut net = Network::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p: Vec<f64> = net.params().iter().map(|&v| v + rng.gen_range(-0.1..0.1)).collect();
    net.set_params(&p).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.bin");
    save_network(&path, &net).unwrap();
    let reloaded = hybridloc::net::persist::load_network(&path).unwrap();

    let key = noise_image(&mut rng, 64, 48);
    let live = noise_image(&mut rng, 64, 48);
    let expected: Pose6 = {
        let k = Tensor4::stack(&[key.resize_normalized(40, 30).as_slice()], 1, 30, 40).unwrap();
        let l = Tensor4::stack(&[live.resize_normalized(40, 30).as_slice()], 1, 30, 40).unwrap();
        hybridloc::net::output_pose(&reloaded.predict(&k, &l).unwrap(), 0).unwrap()
    };
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    let mut out = [0.0; 6];
    unsafe {
        assert_eq!(hl_net_load(cpath.as_ptr(), &mut h), HlStatus::Ok);
        let s = hl_net_predict(h, key.pixels().as_ptr(), live.pixels().as_ptr(), 64, 48, out.as_mut_ptr());
        assert_eq!(s, HlStatus::Ok);
        assert_eq!(hl_net_predict(h, ptr::null(), live.pixels().as_ptr(), 64, 48, out.as_mut_ptr()), HlStatus::NullPointer);
        hl_net_free(h);
    }
    assert_eq!(out, expected.to_array());
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/hybridloc.h");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(
        &src,
        format!("#include \"{header}\"\nint main(void) {{ double m[16]; return (int)hl_se3_exp(m, m); }}\n"),
    )
    .unwrap();
    let Ok(out) = Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg(&src).output() else {
        eprintln!("no C compiler available; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
