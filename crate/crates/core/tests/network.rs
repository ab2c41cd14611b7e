use fhtnet::fht::Quadrant;
use fhtnet::nn::{
    build_conv_only_arch, build_fht_arch, decode_model, gradient_check, heatmap_target,
    layer_forward, load_model, save_model, train, ArchScale, GradCheckConfig, LayerSpec, LossKind,
    Network, NnError, Optimizer, Shape, Target, Tensor, ToyArch, TrainConfig, TrainSample,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(shape: Shape, rng: &mut ChaCha8Rng) -> Tensor {
    let data = (0..shape.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Tensor::from_vec(shape, data).unwrap()
}

fn small_toy() -> ToyArch {
    ToyArch {
        input_side: 32,
        channels: 2,
        ..ToyArch::default()
    }
}

fn toy_samples(spec: &fhtnet::nn::NetworkSpec, count: usize, seed: u64) -> Vec<TrainSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = spec.spatial_map().unwrap();
    let out = spec.output_shape().unwrap();
    (0..count)
        .map(|_| {
            let vp = (rng.gen_range(8.0..24.0), rng.gen_range(8.0..24.0));
            TrainSample {
                input: random_tensor(spec.input_shape, &mut rng),
                target: Target::Heatmap(heatmap_target(out, &map, vp, 2.0)),
            }
        })
        .collect()
}

#[test]
fn hough_layers_are_adjoint_per_quadrant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let shape = Shape::image(3, 16, 16);
    for q in Quadrant::ALL {
        let x = random_tensor(shape, &mut rng);
        let y = random_tensor(shape, &mut rng);
        let fx = layer_forward(&LayerSpec::fht(&[q]), &x, &[]).unwrap();
        let fty = layer_forward(&LayerSpec::fht_transposed(&[q]), &y, &[]).unwrap();
        let (lhs, rhs) = (fx.dot(&y), x.dot(&fty));
        assert!(
            (lhs - rhs).abs() <= 1e-9 * lhs.abs(),
            "{q:?}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn hough_layers_carry_no_parameters() {
    let toy = ToyArch {
        quadrants: Quadrant::ALL.to_vec(),
        ..ToyArch::default()
    };
    for spec in [
        build_fht_arch(&ArchScale::Toy(toy)).unwrap(),
        build_fht_arch(&ArchScale::Paper).unwrap(),
    ] {
        let shapes = spec.shapes().unwrap();
        let mut hough = 0;
        for (layer, &input) in spec.layers.iter().zip(&shapes) {
            if let LayerSpec::Fht { .. } = layer {
                hough += 1;
                assert!(layer.param_dims(input).is_empty());
            }
        }
        assert_eq!(hough, 2);
    }
}

#[test]
fn output_maps_back_to_input_pixels() {
    for toy in [
        ToyArch::default(),
        ToyArch {
            stride: 1,
            ..ToyArch::default()
        },
    ] {
        for spec in [
            build_fht_arch(&ArchScale::Toy(toy.clone())).unwrap(),
            build_conv_only_arch(&toy).unwrap(),
        ] {
            let map = spec.spatial_map().unwrap();
            assert!(map.is_invertible());
            let Shape::Image { h, w, .. } = spec.output_shape().unwrap() else {
                panic!("image output expected")
            };
            let (x0, y0) = map.apply((0.0, 0.0));
            let (x1, y1) = map.apply(((w - 1) as f64, (h - 1) as f64));
            assert!(x0 >= 0.0 && y0 >= 0.0 && x1 < 64.0 && y1 < 64.0);
        }
    }
}

#[test]
fn conv_only_baseline_is_parameter_matched() {
    for toy in [
        ToyArch::default(),
        ToyArch {
            channels: 2,
            stride: 1,
            quadrants: Quadrant::ALL.to_vec(),
            ..ToyArch::default()
        },
    ] {
        let fht = Network::init(build_fht_arch(&ArchScale::Toy(toy.clone())).unwrap(), 0).unwrap();
        let conv = Network::init(build_conv_only_arch(&toy).unwrap(), 0).unwrap();
        let (a, b) = (fht.param_count() as f64, conv.param_count() as f64);
        assert!((a - b).abs() / a < 0.05, "{a} vs {b}");
        assert_eq!(
            fht.spec().output_shape().unwrap(),
            conv.spec().output_shape().unwrap()
        );
    }
}

#[test]
fn whole_network_gradients_match_finite_differences() {
    let toy = ToyArch {
        quadrants: Quadrant::ALL.to_vec(),
        ..small_toy()
    };
    let spec = build_fht_arch(&ArchScale::Toy(toy)).unwrap();
    let net = Network::init(spec.clone(), 3).unwrap();
    let sample = toy_samples(&spec, 1, 4).remove(0);
    let report = gradient_check(
        &net,
        &sample,
        LossKind::HeatmapSse,
        &GradCheckConfig::default(),
    )
    .unwrap();
    assert!(report.max_rel_error < 1e-5, "{report:?}");
}

#[test]
fn training_is_deterministic_across_thread_counts() {
    let spec = build_fht_arch(&ArchScale::Toy(small_toy())).unwrap();
    let data = toy_samples(&spec, 12, 9);
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 4,
        learning_rate: 0.005,
        optimizer: Optimizer::Adam,
        ..TrainConfig::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| train(&spec, &data, &cfg).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.network.params(), b.network.params());
    assert_eq!(a.history, b.history);
}

#[test]
fn model_files_round_trip_bit_exactly() {
    let spec = build_fht_arch(&ArchScale::Toy(small_toy())).unwrap();
    let net = Network::init(spec.clone(), 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.bin");
    save_model(&path, net.params()).unwrap();
    let loaded = load_model(&path).unwrap();
    for (a, b) in net.params().iter().zip(&loaded) {
        assert_eq!(a.dims, b.dims);
        assert!(a
            .data
            .iter()
            .zip(&b.data)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert!(Network::with_params(spec, loaded).is_ok());

    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    match decode_model(&bytes) {
        Err(NnError::ModelFormat { message, .. }) => assert!(message.contains("FHTNN1")),
        other => panic!("expected a format error, got {other:?}"),
    }
}
