//! Radar chain properties on desk-scale scenes.

use nalgebra::DMatrix;
use psl_core::radar::*;
use psl_core::*;
use std::sync::OnceLock;

fn quick_designed_set() -> &'static SequenceSet {
    static SET: OnceLock<SequenceSet> = OnceLock::new();
    SET.get_or_init(|| {
        let mut cfg = SolverConfig::new(4, 64);
        cfg.max_outer_iters = 60;
        let initial = init_random(4, 64, 0).unwrap();
        design(&cfg, &initial).unwrap().final_set
    })
}

#[test]
fn received_data_superposes() {
    let set = SequenceSet::random(4, 16, 2).unwrap();
    let geom = ArrayGeometry::default();
    let theta: Vec<f64> = (0..6).map(|i| -35.0 + 14.0 * i as f64).collect();
    let a = RadarScene::random_sparse(5, 6, -35.0, 35.0, 0.3, 0.0, 7).unwrap();
    let b = RadarScene::random_sparse(5, 6, -35.0, 35.0, 0.3, 0.0, 8).unwrap();
    let sum_beta = &a.beta + &b.beta;
    let a = RadarScene::new(a.beta.clone(), theta.clone(), 0.0).unwrap();
    let b = RadarScene::new(b.beta.clone(), theta.clone(), 0.0).unwrap();
    let ab = RadarScene::new(sum_beta, theta, 0.0).unwrap();

    let rec_a = simulate_received(&a, &geom, &set, 0).unwrap();
    let rec_b = simulate_received(&b, &geom, &set, 0).unwrap();
    let rec_ab = simulate_received(&ab, &geom, &set, 0).unwrap();
    for ((x, y), z) in rec_a.b_h.iter().zip(rec_b.b_h.iter()).zip(rec_ab.b_h.iter()) {
        assert!((x + y - z).norm() < 1e-10);
    }
}

#[test]
fn noise_power_matches_configured_variance() {
    let set = SequenceSet::random(4, 64, 3).unwrap();
    let geom = ArrayGeometry::default();
    let sigma2 = 0.01;
    let scene = RadarScene::new(
        DMatrix::zeros(8, 5),
        (0..5).map(|i| -40.0 + 20.0 * i as f64).collect(),
        sigma2,
    )
    .unwrap();
    let rec = simulate_received(&scene, &geom, &set, 42).unwrap();
    let n = (rec.b_h.nrows() * rec.b_h.ncols()) as f64;
    let avg_power: f64 = rec.b_h.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
    assert!((avg_power - sigma2).abs() < 0.25 * sigma2, "avg power {avg_power}");
}

#[test]
fn adaptive_estimate_improves_on_least_squares() {
    let designed = quick_designed_set();
    let geom = ArrayGeometry::default();
    let mut wins = 0;
    for seed in 0..4u64 {
        let scene = RadarScene::random_sparse(20, 21, -40.0, 40.0, 0.1, 1e-3, 600 + seed).unwrap();
        let rec = simulate_received(&scene, &geom, designed, 700 + seed).unwrap();
        let compressed = compress(&rec, designed, 20).unwrap();
        let ls = estimate_ls(&compressed, &geom, &scene.theta_deg);
        let capon = estimate_capon(&compressed, &geom, &scene.theta_deg).unwrap();
        if image_mse(&capon, &scene.beta) <= image_mse(&ls, &scene.beta) {
            wins += 1;
        }
    }
    assert!(wins >= 3, "adaptive estimate won only {wins}/4");
}

#[test]
fn magnitude_image_shape_matches_scene() {
    let designed = quick_designed_set();
    let geom = ArrayGeometry::default();
    let scene = RadarScene::random_sparse(9, 7, -40.0, 40.0, 0.15, 1e-3, 77).unwrap();
    let rec = simulate_received(&scene, &geom, designed, 78).unwrap();
    let compressed = compress(&rec, designed, 9).unwrap();
    let ls = estimate_ls(&compressed, &geom, &scene.theta_deg);
    let img = magnitude_image(&ls);
    assert_eq!(img.nrows(), 9);
    assert_eq!(img.ncols(), 7);
    assert!(img.iter().all(|v| v.is_finite() && *v >= 0.0));
}

#[test]
fn matched_filter_rejects_out_of_range_bin() {
    let set = SequenceSet::random(2, 8, 4).unwrap();
    assert!(matched_filter(&set, 3, 3).is_err());
}
