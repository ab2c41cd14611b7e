//! Trains the toy FHT network and the conv-only baseline on the synthetic
//! vanishing-point benchmark and prints 8×8 grid errors next to the classical
//! baseline.
//!
//! ```text
//! cargo run --release --example vp_experiment -- [train] [test] [epochs]
//! ```
//!
//! Environment overrides: `LR`, `SIGMA` (target width in output pixels),
//! `GAP=min,max` (0,0 draws full lines), `LINES=min,max`, `DISTRACT=min,max`,
//! `CH` (channels), `STRIDE`, `SKIP_CONV` (train only the FHT network).

use std::time::Instant;

use fhtnet::nn::{build_conv_only_arch, build_fht_arch, train, ArchScale};
use fhtnet::vp::{
    evaluate, heatmap_samples, ClassicalPredictor, NetworkPredictor, VpBenchmark, VpPredictor,
};

fn env<T: std::str::FromStr>(key: &str, default: T) -> T {
    std::env::var(key)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

fn env_pair<T: std::str::FromStr + Copy>(key: &str, default: (T, T)) -> (T, T) {
    let Ok(raw) = std::env::var(key) else {
        return default;
    };
    let v: Vec<T> = raw.split(',').filter_map(|x| x.parse().ok()).collect();
    match v.as_slice() {
        [a, b] => (*a, *b),
        _ => panic!("{key} expects min,max"),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    let n_train = args.first().copied().unwrap_or(2000);
    let n_test = args.get(1).copied().unwrap_or(400);

    let mut bench = VpBenchmark::default();
    bench.train.epochs = args.get(2).copied().unwrap_or(bench.train.epochs);
    bench.train.learning_rate = env("LR", bench.train.learning_rate);
    bench.heatmap_sigma = env("SIGMA", bench.heatmap_sigma);
    bench.synth.vp_gap = env_pair("GAP", bench.synth.vp_gap);
    bench.synth.rays = bench.synth.vp_gap.1 > 0.0;
    bench.synth.convergent_lines = env_pair("LINES", bench.synth.convergent_lines);
    bench.synth.distractors = env_pair("DISTRACT", bench.synth.distractors);
    bench.arch.channels = env("CH", bench.arch.channels);
    bench.arch.stride = env("STRIDE", bench.arch.stride);

    let train_set = bench.train_set(n_train)?;
    let test_set = bench.test_set(n_test)?;
    let truths: Vec<_> = test_set.samples.iter().map(|s| s.vp).collect();
    let side = bench.synth.image_side;
    let score = |name: &str, p: &dyn VpPredictor| -> Result<(), Box<dyn std::error::Error>> {
        let preds = test_set
            .samples
            .iter()
            .map(|s| p.rank(&s.image))
            .collect::<Result<Vec<_>, _>>()?;
        let r = evaluate(&preds, &truths, side, 8)?;
        println!(
            "{name:>12}: top1 {:.3} top5 {:.3}",
            r.top1_error, r.top5_error
        );
        let n = preds.len() as f64;
        let (mut ax, mut ay) = (0.0, 0.0);
        for (p, t) in preds.iter().zip(&truths) {
            ax += (p[0].0 - t.0).abs() / n;
            ay += (p[0].1 - t.1).abs() / n;
        }
        println!("{:>12}  mean abs error ({ax:.2}, {ay:.2}) px", "");
        Ok(())
    };
    score("classical", &ClassicalPredictor::default())?;

    let mut archs = vec![("fht", build_fht_arch(&ArchScale::Toy(bench.arch.clone()))?)];
    if std::env::var("SKIP_CONV").is_err() {
        archs.push(("conv-only", build_conv_only_arch(&bench.arch)?));
    }
    for (name, spec) in archs {
        let data = heatmap_samples(&spec, &train_set.samples, bench.heatmap_sigma)?;
        let t = Instant::now();
        let out = train(&spec, &data, &bench.train)?;
        let losses: Vec<f64> = out
            .history
            .iter()
            .map(|m| (m.mean_loss * 100.0).round() / 100.0)
            .collect();
        println!(
            "{name}: {} params, {:.0}s, losses {losses:?}",
            out.network.param_count(),
            t.elapsed().as_secs_f64()
        );
        score(name, &NetworkPredictor::new(out.network)?)?;
    }
    Ok(())
}
