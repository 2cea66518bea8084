//! Central finite-difference verification of the analytic gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::{BackwardFault, QNetworkParams, Sample};
use super::{Architecture, ConvSpec, StateTensor};

const STEP: f64 = 1e-5;
/// Minimum distance of every ReLU pre-activation from zero in a check
/// instance, so that `STEP` perturbations never cross a kink.
const KINK_MARGIN: f64 = 1e-3;
const BATCH: usize = 4;

/// Small network on a 10x10 input. Conv1 leaves one trailing pixel
/// uncovered, so the cropping path is exercised too.
pub fn reduced_architecture() -> Architecture {
    Architecture {
        input_rows: 10,
        input_cols: 10,
        conv1: ConvSpec {
            filters: 4,
            kernel: 3,
            stride: 2,
        },
        conv2: ConvSpec {
            filters: 6,
            kernel: 2,
            stride: 1,
        },
        hidden: 16,
        actions: 9,
    }
}

/// Max relative error between analytic and numeric gradients on a random
/// reduced instance: `|a - n| / max(|a|, |n|, 1e-8)` over all parameters.
pub fn gradient_check(seed: u64) -> f64 {
    gradient_check_with(seed, None)
}

/// Same as [`gradient_check`], optionally with a fault injected into the
/// backward pass.
pub fn gradient_check_with(seed: u64, fault: Option<BackwardFault>) -> f64 {
    let arch = reduced_architecture();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut params, inputs) = loop {
        let candidate = random_instance(&arch, &mut rng);
        let margin = candidate
            .1
            .iter()
            .map(|x| candidate.0.relu_margin(x))
            .fold(f64::INFINITY, f64::min);
        if margin >= KINK_MARGIN {
            break candidate;
        }
    };
    let batch: Vec<Sample> = inputs
        .iter()
        .map(|x| Sample {
            state: x,
            action: rng.random_range(0..arch.actions),
            target: rng.random_range(-1.0..1.0),
        })
        .collect();

    let (_, analytic) = params
        .backward_with(&batch, fault)
        .expect("batch matches architecture");
    let analytic: Vec<f64> = analytic.values().collect();

    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let original = params.values().nth(i).expect("index in range");
        let loss_at = |params: &mut QNetworkParams, v: f64| {
            *params.values_mut().nth(i).expect("index in range") = v;
            params.loss(&batch).expect("batch matches architecture")
        };
        let plus = loss_at(&mut params, original + STEP);
        let minus = loss_at(&mut params, original - STEP);
        loss_at(&mut params, original);
        let numeric = (plus - minus) / (2.0 * STEP);
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    worst
}

fn random_instance(
    arch: &Architecture,
    rng: &mut ChaCha8Rng,
) -> (QNetworkParams, Vec<StateTensor>) {
    let mut params =
        QNetworkParams::init(*arch, rng.random()).expect("reduced architecture is valid");
    for layer in params.layers_mut() {
        for b in &mut layer.bias {
            *b = rng.random_range(-0.1..0.1);
        }
    }
    let inputs = (0..BATCH)
        .map(|_| {
            let data = (0..arch.input_len()).map(|_| rng.random::<f64>()).collect();
            StateTensor::new(arch.input_rows, arch.input_cols, data).expect("sized to architecture")
        })
        .collect();
    (params, inputs)
}
