//! Acceptance suite: fast property checks first, then one full training run
//! per jammer type (20,000 epochs each, default hyper-parameters, seed 1).

use std::time::Instant;

use antijam::darla::{evaluate, Policy};
use antijam::harness::{
    run_experiment, ExperimentConfig, RunSummary, CHECKPOINT_FILE, METRICS_FILE,
};
use antijam::jammer::{JammerConfig, JammerKind};
use antijam::qnet::NetworkConfig;
use antijam::qnet::{gradient_check, gradient_check_with, BackwardFault};
use antijam::spectrum::{
    compute_sinr, epoch_reward, raised_cosine_psd, Action, Emission, EnvConfig, RewardConfig,
    WaveformSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 1;
const WINDOW: usize = 2000;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn gradients() -> Verdict {
    let healthy = (0..20).map(gradient_check).fold(0.0, f64::max);
    let weakest_fault = BackwardFault::ALL
        .iter()
        .flat_map(|&f| (0..20).map(move |s| gradient_check_with(s, Some(f))))
        .fold(f64::INFINITY, f64::min);
    verdict(
        healthy <= 1e-4 && weakest_fault > 1e-2,
        format!(
            "max rel. error {healthy:.2e} over 20 seeds (<= 1e-4); smallest error with a \
             mutated layer {weakest_fault:.2e} over 4 layers x 20 seeds (> 1e-2)"
        ),
    )
}

/// Midpoint rule at 1 kHz over the user's occupied band.
fn quadrature_sinr(user: &Emission, jammers: &[Emission], reward: &RewardConfig) -> f64 {
    let (lo, hi) = user.occupied();
    let df = 1e-3;
    let n = ((hi - lo) / df).round() as usize;
    let mut interference = 0.0;
    for k in 0..n {
        let f = lo + (k as f64 + 0.5) * df;
        for j in jammers {
            interference += raised_cosine_psd(f - j.center_mhz, &j.waveform).unwrap() * df;
        }
    }
    let db = |mw: f64| 10.0 * mw.log10();
    db(user.waveform.power_mw()) - db(reward.noise_mw() + interference)
}

fn sinr_oracle() -> Verdict {
    let reward = RewardConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut jammed = 0;
    for _ in 0..1000 {
        let user = Emission::new(
            rng.random_range(2.0..18.0),
            WaveformSpec::new(
                4.0,
                rng.random_range(0.05..0.95),
                rng.random_range(-10.0..10.0),
            )
            .unwrap(),
        );
        let jammers: Vec<Emission> = (0..rng.random_range(1..=3))
            .map(|_| {
                Emission::new(
                    rng.random_range(0.0..20.0),
                    WaveformSpec::new(
                        rng.random_range(1.0..8.0),
                        rng.random_range(0.05..0.95),
                        rng.random_range(-20.0..40.0),
                    )
                    .unwrap(),
                )
            })
            .collect();
        let closed = compute_sinr(&user, &jammers, &reward);
        let numeric = quadrature_sinr(&user, &jammers, &reward);
        if numeric < reward.sinr_threshold_db {
            jammed += 1;
        }
        worst = worst.max((closed - numeric).abs());
    }
    verdict(
        worst <= 0.1,
        format!("max |SINR closed - SINR quadrature| = {worst:.2e} dB over 1000 placements ({jammed} below threshold)"),
    )
}

fn rewards() -> Verdict {
    let cfg = RewardConfig::default();
    let r =
        |a, prev, sinr: f64| epoch_reward(Action(a), Action(prev), &[sinr; 10], 10, &cfg).unwrap();
    let got = [r(3, 3, 100.0), r(3, 4, 100.0), r(3, 3, -20.0)];
    verdict(
        got == [1.0, 0.8, 0.0],
        format!(
            "no switch {} (1.0), switch {} (0.8), jammed {} (0)",
            got[0], got[1], got[2]
        ),
    )
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let mut cfg = ExperimentConfig {
            seed: 42,
            out_dir: tmp.path().join(name),
            eval_epochs: 50,
            ..ExperimentConfig::default()
        };
        cfg.jammer.kind = JammerKind::Random;
        cfg.training.epochs = 800;
        run_experiment(&cfg).unwrap();
        let read = |f| std::fs::read(cfg.out_dir.join(f)).unwrap();
        (read(METRICS_FILE), read(CHECKPOINT_FILE))
    };
    let (a, b) = (run("a"), run("b"));
    verdict(
        a == b,
        format!(
            "two 800-epoch runs: metrics.csv {} ({} bytes), checkpoint {} ({} bytes)",
            if a.0 == b.0 { "identical" } else { "DIFFER" },
            a.0.len(),
            if a.1 == b.1 { "identical" } else { "DIFFER" },
            a.1.len()
        ),
    )
}

fn train(kind: JammerKind) -> RunSummary {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig {
        seed: SEED,
        out_dir: tmp.path().to_path_buf(),
        eval_epochs: WINDOW,
        ..ExperimentConfig::default()
    };
    cfg.jammer.kind = kind;
    run_experiment(&cfg).unwrap()
}

/// Throughput of a uniformly random channel choice, by enumerating which
/// channels a static comb leaves usable.
fn comb_random_oracle() -> f64 {
    let env = EnvConfig::with_jammer(JammerConfig::of_kind(JammerKind::Comb));
    let jammer = JammerConfig::of_kind(JammerKind::Comb);
    let teeth: Vec<Emission> = jammer
        .comb_centers_mhz
        .iter()
        .map(|&c| Emission::new(c, jammer.waveform().unwrap()))
        .collect();
    let space = env.action_space().unwrap();
    let clear = space
        .iter()
        .filter(|&a| {
            let user = Emission::new(space.center_mhz(a), env.user.waveform().unwrap());
            compute_sinr(&user, &teeth, &env.reward) >= env.reward.sinr_threshold_db
        })
        .count();
    clear as f64 / space.count as f64
}

fn comb() -> Verdict {
    let s = train(JammerKind::Comb);
    let oracle = comb_random_oracle();
    let baseline_ok = (s.random_throughput - oracle).abs() <= 0.05;
    verdict(
        s.train_throughput >= 0.90 && baseline_ok,
        format!(
            "trailing-{WINDOW} throughput {:.4} (>= 0.90); random baseline {:.4} vs overlap \
             enumeration {oracle:.4} +/- 0.05 [{}]",
            s.train_throughput,
            s.random_throughput,
            if baseline_ok { "ok" } else { "off" }
        ),
    )
}

/// Expected throughput of a uniformly random channel choice: the mean of
/// the fixed-channel throughputs over whole sweep periods.
fn random_expectation(kind: JammerKind) -> f64 {
    let env = EnvConfig::with_jammer(JammerConfig::of_kind(kind));
    let actions = env.action_space().unwrap().count;
    let net = NetworkConfig::default();
    (0..actions)
        .map(|a| {
            evaluate(None, &env, &net, WINDOW, Policy::Fixed(Action(a)), SEED)
                .unwrap()
                .throughput
        })
        .sum::<f64>()
        / actions as f64
}

fn sweep() -> Verdict {
    let s = train(JammerKind::Sweep);
    let ratio = s.greedy_throughput / s.random_throughput;
    let expected = random_expectation(JammerKind::Sweep);
    verdict(
        s.greedy_throughput >= 0.75 && ratio >= 1.5,
        format!(
            "greedy throughput {:.4} (>= 0.75), random {:.4}, ratio {ratio:.4} (>= 1.5); \
             training tail {:.4}; expected random baseline {expected:.4}, so even throughput \
             1.0 gives a ratio of {:.4} on average",
            s.greedy_throughput,
            s.random_throughput,
            s.train_throughput,
            1.0 / expected
        ),
    )
}

fn random() -> Verdict {
    let s = train(JammerKind::Random);
    let gap = s.greedy_throughput - s.random_throughput;
    verdict(
        gap >= 0.15,
        format!(
            "greedy throughput {:.4}, random {:.4}, gap {gap:.4} (>= 0.15); training tail {:.4}",
            s.greedy_throughput, s.random_throughput, s.train_throughput
        ),
    )
}

fn intelligent() -> Verdict {
    let s = train(JammerKind::Intelligent);
    let h_min = 0.90 * (s.action_probs.len() as f64).ln();
    let probs: Vec<String> = s.action_probs.iter().map(|p| format!("{p:.3}")).collect();
    verdict(
        s.max_action_prob <= 0.25
            && s.action_entropy >= h_min
            && s.greedy_throughput >= s.random_throughput,
        format!(
            "final-{WINDOW} max action prob {:.4} (<= 0.25), entropy {:.4} (>= {h_min:.4}); \
             greedy {:.4} vs random {:.4}; histogram [{}]",
            s.max_action_prob,
            s.action_entropy,
            s.greedy_throughput,
            s.random_throughput,
            probs.join(" ")
        ),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Verdict); 8] = [
        (5, "gradient correctness", gradients),
        (6, "SINR oracle equivalence", sinr_oracle),
        (7, "reward unit suite", rewards),
        (8, "determinism", determinism),
        (1, "comb jamming convergence", comb),
        (2, "sweep jamming", sweep),
        (3, "random jamming", random),
        (4, "intelligent jamming", intelligent),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {id} ({name}): {} [{:.1}s]",
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("acceptance: criteria {failed:?} failed");
        std::process::exit(1);
    }
}
