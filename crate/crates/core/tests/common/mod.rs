#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ami_ids::mlp::{cross_entropy, ActivationKind, MlpModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ami_ids::dataset::{build_encoding, encode_all, parse_nslkdd_str, EncodedRecord, EncodingTable, RawRecord};

pub fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/nslkdd_sample.txt")
}

pub fn fixture_text() -> String {
    std::fs::read_to_string(fixture_path()).expect("bundled fixture")
}

pub fn fixture_raw() -> Vec<RawRecord> {
    parse_nslkdd_str(&fixture_text()).expect("fixture parses")
}

pub fn fixture_encoded() -> (EncodingTable, Vec<EncodedRecord>) {
    let raw = fixture_raw();
    let table = build_encoding(&raw).unwrap();
    let data = encode_all(&raw, &table).unwrap();
    (table, data)
}

pub const STEP: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;

fn loss(model: &MlpModel, x: &[f64], y: u8) -> f64 {
    cross_entropy(y, model.probabilities(x).unwrap()[1])
}

/// Worst relative error between backprop and central differences.
fn worst_error(model: &mut MlpModel, x: &[f64], y: u8) -> f64 {
    let grads = model.backward(&model.forward(x).unwrap(), y).unwrap();
    let mut worst: f64 = 0.0;
    let mut check = |analytic: f64, numeric: f64| {
        let scale = analytic.abs().max(numeric.abs());
        // both effectively zero: nothing to compare
        if scale > 1e-7 {
            worst = worst.max((analytic - numeric).abs() / scale);
        }
    };
    for l in 0..model.weights().len() {
        for k in 0..model.weights()[l].data().len() {
            let orig = model.weights()[l].data()[k];
            model.weights_mut()[l].data_mut()[k] = orig + STEP;
            let up = loss(model, x, y);
            model.weights_mut()[l].data_mut()[k] = orig - STEP;
            let down = loss(model, x, y);
            model.weights_mut()[l].data_mut()[k] = orig;
            check(grads.weights[l].data()[k], (up - down) / (2.0 * STEP));
        }
        for k in 0..model.biases()[l].len() {
            let orig = model.biases()[l][k];
            model.biases_mut()[l][k] = orig + STEP;
            let up = loss(model, x, y);
            model.biases_mut()[l][k] = orig - STEP;
            let down = loss(model, x, y);
            model.biases_mut()[l][k] = orig;
            check(grads.biases[l][k], (up - down) / (2.0 * STEP));
        }
    }
    worst
}

/// True when some hidden pre-activation sits close enough to the relu kink
/// for a finite difference to straddle it.
fn near_kink(model: &MlpModel, x: &[f64]) -> bool {
    let cache = model.forward(x).unwrap();
    let hidden = &cache.pre_activations[..cache.pre_activations.len() - 1];
    hidden.iter().flatten().any(|z| z.abs() < 1e-4)
}

/// Worst error over `count` random small networks, all below `REL_TOL` or a panic.
pub fn check_activation(kind: ActivationKind, seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut overall: f64 = 0.0;
    while checked < count {
        let inputs = rng.gen_range(1..=5);
        let depth = rng.gen_range(1..=3);
        let mut sizes = vec![inputs];
        sizes.extend((0..depth).map(|_| rng.gen_range(1..=6)));
        sizes.push(2);
        let mut model = MlpModel::init(&sizes, kind, &mut rng).unwrap();
        let x: Vec<f64> = (0..inputs).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let y = rng.gen_range(0..=1u8);
        if kind == ActivationKind::Relu && near_kink(&model, &x) {
            continue;
        }
        let err = worst_error(&mut model, &x, y);
        assert!(err <= REL_TOL, "{kind:?} net {sizes:?}: relative error {err:e}");
        overall = overall.max(err);
        checked += 1;
    }
    overall
}
