//! Grid-cell evaluation of point predictions.

use super::VpError;
use crate::nn::{AffineMap, Tensor};

/// Cell of an `g × g` grid over an `n × n` image containing `vp`. Points
/// outside the image land in the nearest edge cell.
pub fn grid_cell(vp: (f64, f64), image_side: usize, g: usize) -> (usize, usize) {
    let axis = |c: f64| {
        let cell = (c * g as f64 / image_side as f64).floor();
        if cell.is_nan() || cell < 0.0 {
            0
        } else {
            (cell as usize).min(g - 1)
        }
    };
    (axis(vp.0), axis(vp.1))
}

/// Pixel indices of channel 0 sorted by descending value, ties by row-major
/// index.
pub fn rank_pixels(heatmap: &Tensor) -> Vec<usize> {
    let values = heatmap.channel(0);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// The `k` brightest pixels of channel 0 of a heat map, as `(x, y)` points in
/// the input frame given by `map`.
pub fn predict_vp(heatmap: &Tensor, k: usize, map: &AffineMap) -> Vec<(f64, f64)> {
    let (_, _, w) = heatmap.chw();
    rank_pixels(heatmap)
        .into_iter()
        .take(k)
        .map(|i| map.apply(((i % w) as f64, (i / w) as f64)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    /// Up to five distinct cells, in prediction order.
    pub predicted: Vec<(usize, usize)>,
    pub truth: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub grid: usize,
    pub top1_error: f64,
    pub top5_error: f64,
    pub records: Vec<EvalRecord>,
}

impl EvalReport {
    pub fn error(&self, k: usize) -> f64 {
        if k == 1 {
            self.top1_error
        } else {
            self.top5_error
        }
    }
}

/// Scores ranked predictions against true points on a `g × g` grid.
///
/// Each prediction list is walked in order and reduced to its first five
/// distinct cells; a sample counts as a top-k hit when the true cell is among
/// the first `k` of them.
pub fn evaluate(
    predictions: &[Vec<(f64, f64)>],
    truths: &[(f64, f64)],
    image_side: usize,
    g: usize,
) -> Result<EvalReport, VpError> {
    if predictions.len() != truths.len() {
        return Err(VpError::Usage(format!(
            "{} predictions for {} ground-truth points",
            predictions.len(),
            truths.len()
        )));
    }
    if g == 0 || image_side == 0 {
        return Err(VpError::Usage(
            "grid and image side must be positive".into(),
        ));
    }
    let mut records = Vec::with_capacity(truths.len());
    let (mut miss1, mut miss5) = (0usize, 0usize);
    for (pred, &truth) in predictions.iter().zip(truths) {
        let mut cells: Vec<(usize, usize)> = Vec::with_capacity(5);
        for &p in pred {
            let c = grid_cell(p, image_side, g);
            if !cells.contains(&c) {
                cells.push(c);
                if cells.len() == 5 {
                    break;
                }
            }
        }
        let truth = grid_cell(truth, image_side, g);
        if cells.first() != Some(&truth) {
            miss1 += 1;
        }
        if !cells.contains(&truth) {
            miss5 += 1;
        }
        records.push(EvalRecord {
            predicted: cells,
            truth,
        });
    }
    let n = truths.len().max(1) as f64;
    Ok(EvalReport {
        grid: g,
        top1_error: miss1 as f64 / n,
        top5_error: miss5 as f64 / n,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Shape;
    use rand::{Rng, SeedableRng};

    #[test]
    fn grid_cell_examples() {
        assert_eq!(grid_cell((150.0, 150.0), 300, 10), (5, 5));
        assert_eq!(grid_cell((0.0, 0.0), 64, 8), (0, 0));
        assert_eq!(grid_cell((299.9, 0.0), 300, 10), (9, 0));
        assert_eq!(grid_cell((-40.0, 900.0), 300, 10), (0, 9));
    }

    #[test]
    fn grid_cell_monotone_and_surjective() {
        let (n, g) = (64, 8);
        let mut seen = vec![false; g];
        let mut last = 0;
        for i in 0..n * 10 {
            let (c, _) = grid_cell((i as f64 / 10.0, 0.0), n, g);
            assert!(c >= last);
            last = c;
            seen[c] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn predict_single_max_and_ties() {
        let mut t = Tensor::zeros(Shape::image(1, 32, 32));
        t.data_mut()[20 * 32 + 10] = 5.0;
        assert_eq!(predict_vp(&t, 1, &AffineMap::IDENTITY), vec![(10.0, 20.0)]);
        let flat = Tensor::zeros(Shape::image(1, 4, 4));
        assert_eq!(predict_vp(&flat, 1, &AffineMap::IDENTITY), vec![(0.0, 0.0)]);
        let map = AffineMap {
            scale_x: 2.0,
            offset_x: 3.0,
            scale_y: 2.0,
            offset_y: 3.0,
        };
        assert_eq!(predict_vp(&t, 1, &map), vec![(23.0, 43.0)]);
    }

    #[test]
    fn top_k_matches_full_sort() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..100).map(|_| rng.gen_range(0..20) as f64).collect();
        let t = Tensor::from_vec(Shape::image(1, 10, 10), data.clone()).unwrap();
        let mut oracle: Vec<(f64, usize)> = data.iter().copied().zip(0..).collect();
        // bubble sort keeps equal values in index order
        for i in 0..oracle.len() {
            for j in 0..oracle.len() - 1 - i {
                if oracle[j].0 < oracle[j + 1].0 {
                    oracle.swap(j, j + 1);
                }
            }
        }
        let got = predict_vp(&t, 5, &AffineMap::IDENTITY);
        let want: Vec<(f64, f64)> = oracle[..5]
            .iter()
            .map(|&(_, i)| ((i % 10) as f64, (i / 10) as f64))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn exact_and_wrong_predictions() {
        let truths = vec![(5.0, 5.0), (60.0, 10.0)];
        let exact: Vec<Vec<(f64, f64)>> = truths.iter().map(|&t| vec![t]).collect();
        let r = evaluate(&exact, &truths, 64, 8).unwrap();
        assert_eq!((r.top1_error, r.top5_error), (0.0, 0.0));
        let wrong = vec![vec![(40.0, 40.0)], vec![(1.0, 60.0)]];
        let r = evaluate(&wrong, &truths, 64, 8).unwrap();
        assert_eq!((r.top1_error, r.top5_error), (1.0, 1.0));
        assert!(matches!(
            evaluate(&wrong, &truths[..1], 64, 8),
            Err(VpError::Usage(_))
        ));
    }

    #[test]
    fn hand_counted_fixture() {
        // 64×64 image, 4×4 grid of 16-pixel cells; truths all in cell (1, 1)
        let t = (20.0, 20.0);
        let hit = (17.0, 30.0);
        let near = [
            (0.0, 0.0),
            (40.0, 0.0),
            (0.0, 40.0),
            (40.0, 40.0),
            (63.0, 63.0),
            (63.0, 0.0),
        ];
        let cases: Vec<Vec<(f64, f64)>> = vec![
            vec![hit],                                              // top1 hit
            vec![near[0], hit],                                     // top5 hit
            vec![near[0], near[0], near[0], hit],                   // repeats collapse: top5 hit
            vec![near[0], near[1], near[2], near[3], hit],          // fifth distinct cell: top5 hit
            vec![near[0], near[1], near[2], near[3], near[4], hit], // sixth distinct: miss
            vec![near[5]],                                          // miss
            vec![],                                                 // no prediction: miss
            vec![(31.9, 16.0)],                                     // top1 hit on cell edge
            vec![(32.0, 16.0), hit],                                // top5 hit
            vec![(16.0, 15.99)],                                    // miss
        ];
        let truths = vec![t; cases.len()];
        let r = evaluate(&cases, &truths, 64, 4).unwrap();
        assert!((r.top1_error - 8.0 / 10.0).abs() < 1e-12);
        assert!((r.top5_error - 4.0 / 10.0).abs() < 1e-12);
        assert!(r.top5_error <= r.top1_error);
    }
}
