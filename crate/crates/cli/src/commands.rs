//! Implementations of the subcommands.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fhtnet::fht::{fht_forward, fht_quadrant, fht_transposed, GrayImage, Quadrant};
use fhtnet::fsutil::write_atomic;
use fhtnet::nn::{load_model, save_model, train_network, Network, NnError, Shape, TrainConfig};
use fhtnet::oracle::{build_fht_matrix, verify_lemmas, verify_matrix, LemmaReport, MAX_LEMMA_P};
use fhtnet::pgm::{self, PgmError, PgmImage};
use fhtnet::vp::{
    corruption_sweep, heatmap_samples, image_tensor, read_dataset, synth_generate, write_dataset,
    ClassicalPredictor, Dataset, NetworkPredictor, SweepRow, VpError, VpPredictor,
};

use crate::config::{Arch, RunConfig};
use crate::{CliError, RunArgs};

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e.root() {
            NnError::Divergence { .. } => CliError::numeric(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<VpError> for CliError {
    fn from(e: VpError) -> Self {
        match e {
            VpError::Nn(e) => e.into(),
            e => CliError::usage(e.to_string()),
        }
    }
}

impl From<PgmError> for CliError {
    fn from(e: PgmError) -> Self {
        CliError::usage(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::usage(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| io_err(path, e))
}

fn read_pgm(path: &Path) -> Result<PgmImage, CliError> {
    pgm::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn raw_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn fht(
    input: &Path,
    output: &Path,
    transposed: bool,
    quadrant: &str,
    pad: bool,
    raw: Option<&Path>,
) -> Result<(), CliError> {
    let q = Quadrant::parse(quadrant).ok_or_else(|| {
        let names: Vec<_> = Quadrant::ALL.iter().map(|q| q.name()).collect();
        CliError::usage(format!(
            "unknown quadrant {quadrant:?}; expected one of {}",
            names.join(", ")
        ))
    })?;
    let mut img = read_pgm(input)?;
    let square_pow2 = img.width == img.height && img.width.is_power_of_two();
    if !square_pow2 {
        if !pad {
            return Err(CliError::usage(format!(
                "{} is {}x{}; the transform needs a square power-of-two image (use --pad-to-pow2)",
                input.display(),
                img.width,
                img.height
            )));
        }
        img = img.pad_to_pow2();
    }
    let values: Vec<f64> = img.pixels.iter().map(|&v| v as f64).collect();
    let gray =
        GrayImage::from_vec(img.width, values).map_err(|e| CliError::usage(e.to_string()))?;
    let out = fht_quadrant(&gray, q, transposed);
    let n = out.side();
    write_file(
        output,
        &pgm::encode(&PgmImage::normalized(n, n, out.data())),
    )?;
    if let Some(raw) = raw {
        write_file(raw, &raw_bytes(out.data()))?;
    }
    Ok(())
}

const EQUIVALENCE_IMAGES: usize = 20;

/// Compares the fast transforms with the explicit matrix on random integer images.
fn equivalence(p: u32, seed: u64) -> bool {
    let Ok(a) = build_fht_matrix(p) else {
        return false;
    };
    let n = 1usize << p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..EQUIVALENCE_IMAGES).all(|_| {
        let v: Vec<i64> = (0..n * n).map(|_| rng.gen_range(-100..=100)).collect();
        let img = GrayImage::from_vec(n, v.clone()).expect("power of two");
        fht_forward(&img).data() == a.apply(&v).as_slice()
            && fht_transposed(&img).data() == a.apply_transposed(&v).as_slice()
    })
}

fn faulty_report(p: u32) -> Result<LemmaReport, CliError> {
    let mut a = build_fht_matrix(p).map_err(|e| CliError::usage(e.to_string()))?;
    let dim = a.dim();
    for q in 0..dim {
        let mut trial = a.clone();
        trial.toggle(0, q);
        let report = verify_matrix(&trial);
        if !report.t1 {
            return Ok(report);
        }
    }
    a.toggle(0, 0);
    Ok(verify_matrix(&a))
}

pub fn verify(p_max: u32, inject_fault: bool) -> Result<(), CliError> {
    if p_max == 0 || p_max > MAX_LEMMA_P {
        return Err(CliError::usage(format!(
            "--p-max must be between 1 and {MAX_LEMMA_P} (the explicit matrix has 16^p entries)"
        )));
    }
    let mut table = String::from("p   L1   L2   L3   L4   T1   fast=matrix\n");
    let mut failures = Vec::new();
    let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
    for p in 1..=p_max {
        let report = if inject_fault {
            faulty_report(p)?
        } else {
            verify_lemmas(p).map_err(|e| CliError::usage(e.to_string()))?
        };
        let eq = equivalence(p, p as u64);
        let _ = write!(table, "{p:<3}");
        for (name, ok) in report.checks() {
            let _ = write!(table, " {:<4}", mark(ok));
            if !ok {
                failures.push(format!("{name} at p={p}"));
            }
        }
        let _ = writeln!(table, " {}", mark(eq));
        if !eq {
            failures.push(format!("fast/matrix equivalence at p={p}"));
        }
    }
    print!("{table}");
    if failures.is_empty() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::failed(format!("failed: {}", failures.join(", "))))
    }
}

fn require<'a>(
    value: &'a Option<std::path::PathBuf>,
    key: &str,
    cmd: &str,
) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| {
        CliError::usage(format!(
            "{cmd} needs `{key}` in the config or via --set {key}=..."
        ))
    })
}

pub fn synth(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    let dir = require(&cfg.data_dir, "data_dir", "synth")?;
    let dataset = synth_generate(&cfg.synth)?;
    write_dataset(dir, &dataset)?;
    println!(
        "wrote {} samples to {}",
        dataset.samples.len(),
        dir.display()
    );
    Ok(())
}

fn load_data(dir: &Path) -> Result<Dataset, CliError> {
    if !dir.join("annotations.csv").is_file() {
        return Err(CliError::usage(format!(
            "{} is not a dataset directory (no annotations.csv)",
            dir.display()
        )));
    }
    Ok(read_dataset(dir)?)
}

fn dataset_side(data: &Dataset) -> Result<usize, CliError> {
    data.samples
        .first()
        .map(|s| s.image.side())
        .ok_or_else(|| CliError::usage("dataset is empty"))
}

pub fn train(args: &RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    let dir = require(&cfg.data_dir, "data_dir", "train")?;
    let model = require(&cfg.model, "model", "train")?;
    if cfg.arch == Arch::Classical {
        return Err(CliError::usage(
            "the classical baseline has nothing to train",
        ));
    }
    let data = load_data(dir)?;
    let spec = cfg.network_spec(dataset_side(&data)?)?;
    let samples = heatmap_samples(&spec, &data.samples, cfg.heatmap_sigma)?;
    let net = Network::init(spec, cfg.train.seed)?;
    let tc: &TrainConfig = &cfg.train;
    let outcome = train_network(net, &samples, tc, |m| {
        println!("epoch {} loss {}", m.epoch, m.mean_loss)
    })?;
    save_model(model, outcome.network.params())
        .map_err(|e| CliError::usage(format!("{}: {e}", model.display())))?;
    if let Some(path) = &cfg.loss_csv {
        let mut csv = String::from("epoch,mean_loss\n");
        for m in &outcome.history {
            let _ = writeln!(csv, "{},{}", m.epoch, m.mean_loss);
        }
        write_file(path, csv.as_bytes())?;
    }
    println!(
        "saved {} parameters to {}",
        outcome.network.param_count(),
        model.display()
    );
    Ok(())
}

/// The configured network. Without a `model` key it keeps its seeded
/// initialization.
fn load_network(cfg: &RunConfig, side: usize) -> Result<Network, CliError> {
    let spec = cfg.network_spec(side)?;
    let mut net = Network::init(spec, cfg.train.seed)?;
    if let Some(path) = &cfg.model {
        if !path.is_file() {
            return Err(CliError::usage(format!(
                "model file {} not found",
                path.display()
            )));
        }
        let params =
            load_model(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        net.set_params(params)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    Ok(net)
}

fn predictor(cfg: &RunConfig, side: usize) -> Result<Box<dyn VpPredictor>, CliError> {
    if cfg.arch == Arch::Classical {
        return Ok(Box::new(ClassicalPredictor::default()));
    }
    Ok(Box::new(NetworkPredictor::new(load_network(cfg, side)?)?))
}

fn report_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from("grid,k,rect_side,error\n");
    for r in rows {
        let _ = writeln!(csv, "{},{},{},{}", r.grid, r.k, r.rect_side, r.error);
    }
    csv
}

pub fn eval(args: &RunArgs, sweep: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    let cmd = if sweep { "sweep" } else { "eval" };
    let dir = cfg
        .test_dir
        .as_deref()
        .or(cfg.data_dir.as_deref())
        .ok_or_else(|| CliError::usage(format!("{cmd} needs `test_dir` (or `data_dir`)")))?;
    let report = require(&cfg.report, "report", cmd)?;
    let data = load_data(dir)?;
    let side = dataset_side(&data)?;
    let predictor = predictor(&cfg, side)?;
    let sides = if sweep {
        cfg.sweep_sides.clone()
    } else {
        vec![0]
    };
    if cfg.grids.iter().any(|&g| g == 0) {
        return Err(CliError::usage("grid sizes must be positive"));
    }
    let rows = corruption_sweep(predictor.as_ref(), &data.samples, &sides, &cfg.grids)?;
    let csv = report_csv(&rows);
    print!("{csv}");
    write_file(report, csv.as_bytes())
}

pub fn infer(
    image: &Path,
    args: &RunArgs,
    dump: Option<&Path>,
    channels: &[usize],
) -> Result<(), CliError> {
    let cfg = RunConfig::load(args.config.as_deref(), &args.overrides)?;
    let img = read_pgm(image)?;
    let gray = img
        .to_gray()
        .map_err(|e| CliError::usage(format!("{}: {e}", image.display())))?;
    if cfg.arch == Arch::Classical {
        if dump.is_some() {
            return Err(CliError::usage(
                "--dump-intermediate needs a network architecture",
            ));
        }
        let best = ClassicalPredictor::default().rank(&gray)?[0];
        println!("{} {}", best.0, best.1);
        return Ok(());
    }
    let predictor = NetworkPredictor::new(load_network(&cfg, gray.side())?)?;
    let best = predictor.rank(&gray)?[0];
    println!("{} {}", best.0, best.1);
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let net = &predictor.network;
        let layers = net.intermediate(&image_tensor(&gray))?;
        let mut written = 0;
        for (i, t) in layers.iter().enumerate() {
            let kind = net.spec().layers[i].kind();
            let (c, h, w) = match t.shape() {
                Shape::Image { c, h, w } => (c, h, w),
                Shape::Flat(n) => (1, 1, n),
            };
            let selected: Vec<usize> = if channels.is_empty() {
                (0..c).collect()
            } else {
                channels.iter().copied().filter(|&ch| ch < c).collect()
            };
            for ch in selected {
                let values = &t.data()[ch * h * w..(ch + 1) * h * w];
                let path = dir.join(format!("layer{i:02}-{kind}-c{ch:02}.pgm"));
                write_file(&path, &pgm::encode(&PgmImage::normalized(w, h, values)))?;
                written += 1;
            }
        }
        println!("wrote {written} layer images to {}", dir.display());
    }
    Ok(())
}
