//! Synthetic vanishing-point scenes and their on-disk format.
//!
//! A dataset directory holds one binary PGM per sample, `annotations.csv`
//! (`filename,x,y`, pixel coordinates) and `manifest.txt` with the generator
//! settings as `key=value` lines.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::VpError;
use crate::fht::GrayImage;
use crate::fsutil::write_atomic;
use crate::oracle::LineParams;
use crate::pgm::{self, PgmImage};

/// Generator settings. Ranges are inclusive `(min, max)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub image_side: usize,
    pub samples: usize,
    pub convergent_lines: (usize, usize),
    pub distractors: (usize, usize),
    pub intensity: (f64, f64),
    pub width: (f64, f64),
    pub noise_sigma: f64,
    /// Box `(x0, y0, x1, y1)` the vanishing point is drawn from; may extend
    /// beyond the image.
    pub vp_region: (f64, f64, f64, f64),
    /// Convergent lines are left undrawn within this distance of the
    /// vanishing point; the radius is drawn per sample from this range.
    pub vp_gap: (f64, f64),
    /// Draw convergent lines as rays leaving the vanishing point instead of
    /// full lines through it.
    pub rays: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            image_side: 64,
            samples: 100,
            convergent_lines: (3, 5),
            distractors: (1, 3),
            intensity: (0.6, 1.0),
            width: (1.0, 2.0),
            noise_sigma: 0.05,
            vp_region: (12.8, 12.8, 51.2, 51.2),
            vp_gap: (0.0, 0.0),
            rays: false,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// VP box covering the central `fraction` of an image of side `n`.
    pub fn inner_region(n: usize, fraction: f64) -> (f64, f64, f64, f64) {
        let margin = n as f64 * (1.0 - fraction) / 2.0;
        (margin, margin, n as f64 - margin, n as f64 - margin)
    }

    pub fn validate(&self) -> Result<(), VpError> {
        let bad = |m: String| Err(VpError::Config(m));
        if self.image_side == 0 {
            return bad("image_side must be positive".into());
        }
        if self.convergent_lines.1 == 0 || self.convergent_lines.0 > self.convergent_lines.1 {
            return bad(format!(
                "convergent line range {:?} must allow at least one line",
                self.convergent_lines
            ));
        }
        if self.distractors.0 > self.distractors.1 {
            return bad(format!("distractor range {:?} is empty", self.distractors));
        }
        for (name, (lo, hi)) in [
            ("intensity", self.intensity),
            ("width", self.width),
            ("vp_gap", self.vp_gap),
        ] {
            if !(lo <= hi) || lo < 0.0 {
                return bad(format!("{name} range ({lo}, {hi}) is invalid"));
            }
        }
        let (x0, y0, x1, y1) = self.vp_region;
        if !(x0 <= x1 && y0 <= y1) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return bad(format!("vp_region {:?} is invalid", self.vp_region));
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be non-negative".into());
        }
        Ok(())
    }

    pub fn to_manifest(&self) -> String {
        let r = |(a, b): (f64, f64)| format!("{a},{b}");
        let u = |(a, b): (usize, usize)| format!("{a},{b}");
        let (x0, y0, x1, y1) = self.vp_region;
        let mut s = String::new();
        let _ = writeln!(s, "image_side={}", self.image_side);
        let _ = writeln!(s, "samples={}", self.samples);
        let _ = writeln!(s, "convergent_lines={}", u(self.convergent_lines));
        let _ = writeln!(s, "distractors={}", u(self.distractors));
        let _ = writeln!(s, "intensity={}", r(self.intensity));
        let _ = writeln!(s, "width={}", r(self.width));
        let _ = writeln!(s, "noise_sigma={}", self.noise_sigma);
        let _ = writeln!(s, "vp_region={x0},{y0},{x1},{y1}");
        let _ = writeln!(s, "vp_gap={}", r(self.vp_gap));
        let _ = writeln!(s, "rays={}", self.rays);
        let _ = writeln!(s, "seed={}", self.seed);
        s
    }

    pub fn from_manifest(text: &str) -> Result<SynthConfig, VpError> {
        let mut cfg = SynthConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| VpError::Format {
                file: "manifest.txt".into(),
                line: lineno + 1,
                message: m.into(),
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value"))?;
            let nums = |n: usize| -> Result<Vec<f64>, VpError> {
                let v: Result<Vec<f64>, _> =
                    value.split(',').map(|s| s.trim().parse::<f64>()).collect();
                match v {
                    Ok(v) if v.len() == n => Ok(v),
                    _ => Err(err(&format!("{key} needs {n} numbers"))),
                }
            };
            let int = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| err(&format!("{key} needs an integer")))
            };
            let pair_u = || -> Result<(usize, usize), VpError> {
                let (a, b) = value
                    .split_once(',')
                    .ok_or_else(|| err("expected min,max"))?;
                Ok((int(a)?, int(b)?))
            };
            match key.trim() {
                "image_side" => cfg.image_side = int(value)?,
                "samples" => cfg.samples = int(value)?,
                "convergent_lines" => cfg.convergent_lines = pair_u()?,
                "distractors" => cfg.distractors = pair_u()?,
                "intensity" => {
                    let v = nums(2)?;
                    cfg.intensity = (v[0], v[1]);
                }
                "width" => {
                    let v = nums(2)?;
                    cfg.width = (v[0], v[1]);
                }
                "noise_sigma" => cfg.noise_sigma = nums(1)?[0],
                "vp_region" => {
                    let v = nums(4)?;
                    cfg.vp_region = (v[0], v[1], v[2], v[3]);
                }
                "vp_gap" => {
                    let v = nums(2)?;
                    cfg.vp_gap = (v[0], v[1]);
                }
                "rays" => {
                    cfg.rays = value
                        .trim()
                        .parse()
                        .map_err(|_| err("rays needs true/false"))?
                }
                "seed" => {
                    cfg.seed = value
                        .trim()
                        .parse()
                        .map_err(|_| err("seed needs an integer"))?
                }
                other => return Err(err(&format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }
}

/// How a sample was generated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SampleMeta {
    /// Lines through the vanishing point.
    pub convergent: Vec<LineParams>,
    pub distractors: Vec<LineParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub image: GrayImage<f64>,
    /// `(x, y)` in pixel coordinates, pixel centres at integers.
    pub vp: (f64, f64),
    pub meta: SampleMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub config: SynthConfig,
    pub samples: Vec<Sample>,
}

struct Stroke {
    line: LineParams,
    /// Unit direction and anchor used to measure the position along the line.
    dir: (f64, f64),
    anchor: (f64, f64),
    /// Drawn only where the signed position along `dir` satisfies this.
    min_along: f64,
    symmetric: bool,
    intensity: f64,
    width: f64,
}

fn render(side: usize, strokes: &[Stroke]) -> Vec<f64> {
    let mut data = vec![0.0; side * side];
    for y in 0..side {
        for x in 0..side {
            let p = (x as f64, y as f64);
            let mut v: f64 = 0.0;
            for s in strokes {
                let along = (p.0 - s.anchor.0) * s.dir.0 + (p.1 - s.anchor.1) * s.dir.1;
                let along = if s.symmetric { along.abs() } else { along };
                if along < s.min_along {
                    continue;
                }
                let coverage = (s.width / 2.0 + 0.5 - s.line.distance(p)).clamp(0.0, 1.0);
                v = v.max(s.intensity * coverage);
            }
            data[y * side + x] = v;
        }
    }
    data
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn generate_one(cfg: &SynthConfig, index: u64) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let n = cfg.image_side;
    let (x0, y0, x1, y1) = cfg.vp_region;
    let vp = (uniform(&mut rng, (x0, x1)), uniform(&mut rng, (y0, y1)));
    let gap = uniform(&mut rng, cfg.vp_gap);

    let count = rng.gen_range(cfg.convergent_lines.0.max(1)..=cfg.convergent_lines.1);
    // Rays may point anywhere; full lines only need half a turn.
    let span = if cfg.rays { 2.0 * PI } else { PI };
    let min_sep = span / (3.0 * count as f64);
    let mut angles: Vec<f64> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut theta = rng.gen_range(0.0..span);
        for _ in 0..64 {
            let clear = angles.iter().all(|&a| {
                let d = (theta - a).rem_euclid(span);
                d.min(span - d) >= min_sep
            });
            if clear {
                break;
            }
            theta = rng.gen_range(0.0..span);
        }
        angles.push(theta);
    }

    let mut strokes = Vec::new();
    let mut meta = SampleMeta::default();
    for &theta in &angles {
        let line = LineParams::through(vp, theta);
        meta.convergent.push(line);
        strokes.push(Stroke {
            line,
            dir: (theta.cos(), theta.sin()),
            anchor: vp,
            min_along: gap,
            symmetric: !cfg.rays,
            intensity: uniform(&mut rng, cfg.intensity),
            width: uniform(&mut rng, cfg.width),
        });
    }

    let distractors = rng.gen_range(cfg.distractors.0..=cfg.distractors.1);
    for _ in 0..distractors {
        let width = uniform(&mut rng, cfg.width);
        let mut start = (n as f64 / 2.0, n as f64 / 2.0);
        let mut theta = 0.0;
        let mut line = LineParams::through(start, theta);
        for _ in 0..64 {
            start = (rng.gen_range(0.0..n as f64), rng.gen_range(0.0..n as f64));
            theta = rng.gen_range(0.0..span);
            line = LineParams::through(start, theta);
            if line.distance(vp) > 3.0 + width {
                break;
            }
        }
        meta.distractors.push(line);
        // in ray scenes distractors are rays too, starting at a random point
        strokes.push(Stroke {
            line,
            dir: (theta.cos(), theta.sin()),
            anchor: start,
            min_along: if cfg.rays { 0.0 } else { f64::NEG_INFINITY },
            symmetric: false,
            intensity: uniform(&mut rng, cfg.intensity),
            width,
        });
    }

    let mut data = render(n, &strokes);
    if cfg.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
        for v in &mut data {
            *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    let image = GrayImage::from_vec(n, data).expect("image_side is a power of two");
    Sample { image, vp, meta }
}

/// Generates `cfg.samples` scenes. Sample `i` depends only on `(cfg, i)`.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Dataset, VpError> {
    cfg.validate()?;
    if !cfg.image_side.is_power_of_two() {
        return Err(VpError::Config(format!(
            "image_side {} must be a power of two",
            cfg.image_side
        )));
    }
    let samples = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| generate_one(cfg, i))
        .collect();
    Ok(Dataset {
        config: cfg.clone(),
        samples,
    })
}

pub fn sample_filename(index: usize) -> String {
    format!("{index:06}.pgm")
}

/// Writes images, `annotations.csv` and `manifest.txt` into `dir` (created if needed).
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<(), VpError> {
    std::fs::create_dir_all(dir)?;
    let mut csv = String::from("filename,x,y\n");
    for (i, s) in dataset.samples.iter().enumerate() {
        let name = sample_filename(i);
        let n = s.image.side();
        write_atomic(
            &dir.join(&name),
            &pgm::encode(&PgmImage::from_unit(n, n, s.image.data())),
        )?;
        let _ = writeln!(csv, "{name},{},{}", s.vp.0, s.vp.1);
    }
    write_atomic(&dir.join("annotations.csv"), csv.as_bytes())?;
    write_atomic(
        &dir.join("manifest.txt"),
        dataset.config.to_manifest().as_bytes(),
    )?;
    Ok(())
}

/// Reads a dataset directory. Images come back quantized to 8 bits and
/// generator metadata is not stored, so `meta` is empty.
pub fn read_dataset(dir: &Path) -> Result<Dataset, VpError> {
    let config = SynthConfig::from_manifest(&std::fs::read_to_string(dir.join("manifest.txt"))?)?;
    let text = std::fs::read_to_string(dir.join("annotations.csv"))?;
    let mut lines = text.lines();
    if lines.next() != Some("filename,x,y") {
        return Err(VpError::Format {
            file: "annotations.csv".into(),
            line: 1,
            message: "expected header filename,x,y".into(),
        });
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let err = |m: &str| VpError::Format {
            file: "annotations.csv".into(),
            line: i + 2,
            message: m.into(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(err("expected 3 fields"));
        }
        let x: f64 = fields[1].parse().map_err(|_| err("bad x"))?;
        let y: f64 = fields[2].parse().map_err(|_| err("bad y"))?;
        let image = pgm::read(&dir.join(fields[0]))?.to_gray()?;
        samples.push(Sample {
            image,
            vp: (x, y),
            meta: SampleMeta::default(),
        });
    }
    Ok(Dataset { config, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ls_intersection;

    #[test]
    fn noiseless_lines_reproduce_annotation() {
        let cfg = SynthConfig {
            samples: 20,
            convergent_lines: (3, 3),
            distractors: (0, 0),
            noise_sigma: 0.0,
            seed: 11,
            ..SynthConfig::default()
        };
        let data = synth_generate(&cfg).unwrap();
        for s in &data.samples {
            let (x, y) = ls_intersection(&s.meta.convergent).unwrap();
            assert!((x - s.vp.0).abs() < 1e-9 && (y - s.vp.1).abs() < 1e-9);
            assert_eq!(s.meta.convergent.len(), 3);
        }
    }

    #[test]
    fn zero_convergent_lines_is_a_config_error() {
        let cfg = SynthConfig {
            convergent_lines: (0, 0),
            ..SynthConfig::default()
        };
        assert!(matches!(synth_generate(&cfg), Err(VpError::Config(_))));
        let cfg = SynthConfig {
            image_side: 48,
            ..SynthConfig::default()
        };
        assert!(synth_generate(&cfg).is_err());
    }

    #[test]
    fn vps_stay_in_region() {
        let region = SynthConfig::inner_region(64, 0.6);
        let cfg = SynthConfig {
            samples: 1000,
            vp_region: region,
            noise_sigma: 0.0,
            image_side: 16,
            ..SynthConfig::default()
        };
        let data = synth_generate(&cfg).unwrap();
        for s in &data.samples {
            assert!(s.vp.0 >= region.0 && s.vp.0 <= region.2);
            assert!(s.vp.1 >= region.1 && s.vp.1 <= region.3);
        }
    }

    #[test]
    fn distractors_avoid_the_vp() {
        let cfg = SynthConfig {
            samples: 50,
            distractors: (3, 3),
            seed: 2,
            ..SynthConfig::default()
        };
        for s in synth_generate(&cfg).unwrap().samples {
            for d in &s.meta.distractors {
                assert!(d.distance(s.vp) > 3.0);
            }
        }
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = SynthConfig {
            rays: true,
            vp_gap: (2.0, 6.5),
            seed: 42,
            ..SynthConfig::default()
        };
        assert_eq!(SynthConfig::from_manifest(&cfg.to_manifest()).unwrap(), cfg);
        assert!(SynthConfig::from_manifest("colour=red\n").is_err());
    }

    #[test]
    fn disk_round_trip_is_deterministic() {
        let cfg = SynthConfig {
            samples: 4,
            seed: 7,
            ..SynthConfig::default()
        };
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_dataset(a.path(), &synth_generate(&cfg).unwrap()).unwrap();
        write_dataset(b.path(), &synth_generate(&cfg).unwrap()).unwrap();
        for name in [
            "annotations.csv",
            "manifest.txt",
            "000000.pgm",
            "000003.pgm",
        ] {
            assert_eq!(
                std::fs::read(a.path().join(name)).unwrap(),
                std::fs::read(b.path().join(name)).unwrap()
            );
        }
        let back = read_dataset(a.path()).unwrap();
        let orig = synth_generate(&cfg).unwrap();
        assert_eq!(back.config, cfg);
        for (r, o) in back.samples.iter().zip(&orig.samples) {
            assert_eq!(r.vp, o.vp);
            for (x, y) in r.image.data().iter().zip(o.image.data()) {
                assert!((x - y).abs() <= 0.5 / 255.0 + 1e-12);
            }
        }
    }
}
