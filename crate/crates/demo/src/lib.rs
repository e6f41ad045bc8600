//! Browser demo bindings: generate a 2-D point cloud, partition it
//! archetypally, and compare the split against seeded random baselines.
//!
//! The `*_impl` functions hold the logic and run on any target; the
//! `#[wasm_bindgen]` exports wrap them for the browser. Build with
//! `wasm-pack build --target web` and serve `index.html` next to the
//! generated `pkg/` directory.

use ndarray::Array2;
use serde::Serialize;

use benchmake::assign::PartitionOptions;
use benchmake::harness;
use benchmake::metrics::MetricVector;
use benchmake::synth;

#[cfg(target_arch = "wasm32")]
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct PartitionResponse {
    k: usize,
    iterations: usize,
    converged: bool,
    error_trace: Vec<f64>,
    test_indices: Vec<usize>,
}

#[derive(Serialize)]
struct CompareResponse {
    fraction: f64,
    k: usize,
    archetypal: MetricVector,
    random_mean: MetricVector,
    random_std: MetricVector,
    archetypal_test: Vec<usize>,
    random_example_test: Vec<usize>,
}

fn points_matrix(points: &[f32]) -> Result<Array2<f32>, String> {
    if points.len() % 2 != 0 {
        return Err("points must be interleaved (x, y) pairs".into());
    }
    let n = points.len() / 2;
    if n < 2 {
        return Err(format!("need at least 2 points, got {n}"));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err("points must be finite".into());
    }
    Ok(Array2::from_shape_vec((n, 2), points.to_vec()).expect("pair layout"))
}

fn options(seed: u64, max_iterations: usize) -> PartitionOptions {
    PartitionOptions {
        seed,
        max_iterations,
        ..PartitionOptions::default()
    }
}

pub fn generate_dataset_impl(
    n_core: usize,
    n_outliers: usize,
    radius: f64,
    seed: u64,
) -> Result<Vec<f32>, String> {
    if n_core + n_outliers < 2 {
        return Err("need at least 2 points".into());
    }
    let m = synth::gaussian_with_hull_outliers(n_core, n_outliers, radius, seed);
    Ok(m.into_raw_vec_and_offset().0)
}

pub fn partition_dataset_impl(
    points: &[f32],
    fraction: f64,
    seed: u64,
    max_iterations: usize,
) -> Result<String, String> {
    let matrix = points_matrix(points)?;
    let opts = options(seed, max_iterations);
    let factors_and_part = (|| -> benchmake::Result<_> {
        let part = benchmake::partition_matrix(&matrix, fraction, &opts)?;
        let scaled = benchmake::canonical::min_max_scale(
            &benchmake::canonical::canonical_order(&matrix).apply(&matrix),
        )?;
        let factors = benchmake::factorize(&scaled.values, &opts.nmf_config(part.k))?;
        Ok((part, factors))
    })()
    .map_err(|e| e.to_string())?;
    let (part, factors) = factors_and_part;
    let response = PartitionResponse {
        k: part.k,
        iterations: factors.iterations_run,
        converged: factors.converged,
        error_trace: factors.error_trace,
        test_indices: part.test_indices,
    };
    serde_json::to_string(&response).map_err(|e| e.to_string())
}

pub fn compare_splits_impl(
    points: &[f32],
    fraction: f64,
    n_seeds: usize,
    seed: u64,
) -> Result<String, String> {
    let matrix = points_matrix(points)?;
    let opts = options(seed, 300);
    let report = harness::compare_encoded(&matrix, fraction, n_seeds, &opts)
        .map_err(|e| e.to_string())?;
    let part =
        benchmake::partition_matrix(&matrix, fraction, &opts).map_err(|e| e.to_string())?;
    let random_example = harness::random_split(matrix.nrows(), fraction, 0)
        .map_err(|e| e.to_string())?;
    let response = CompareResponse {
        fraction,
        k: part.k,
        archetypal: report.benchmake.aggregate(),
        random_mean: report.random_mean,
        random_std: report.random_std,
        archetypal_test: part.test_indices,
        random_example_test: random_example.test_indices,
    };
    serde_json::to_string(&response).map_err(|e| e.to_string())
}

/// Interleaved (x, y) pairs: `n_core` Gaussian points then `n_outliers`
/// planted on the circle of the given radius.
#[cfg(target_arch = "wasm32")]
#[wasm_bindgen]
pub fn generate_dataset(
    n_core: usize,
    n_outliers: usize,
    radius: f64,
    seed: u32,
) -> Result<Vec<f32>, JsValue> {
    generate_dataset_impl(n_core, n_outliers, radius, seed as u64)
        .map_err(|e| JsValue::from_str(&e))
}

/// Archetypal partition of interleaved points; returns JSON with the test
/// indices, iteration count and factorisation error trace.
#[cfg(target_arch = "wasm32")]
#[wasm_bindgen]
pub fn partition_dataset(
    points: &[f32],
    fraction: f64,
    seed: u32,
    max_iterations: usize,
) -> Result<String, JsValue> {
    partition_dataset_impl(points, fraction, seed as u64, max_iterations)
        .map_err(|e| JsValue::from_str(&e))
}

/// Archetypal-vs-random comparison; returns JSON with the seven metrics
/// for both methods plus example index sets for drawing.
#[cfg(target_arch = "wasm32")]
#[wasm_bindgen]
pub fn compare_splits(
    points: &[f32],
    fraction: f64,
    n_seeds: usize,
    seed: u32,
) -> Result<String, JsValue> {
    compare_splits_impl(points, fraction, n_seeds, seed as u64)
        .map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_points_are_deterministic_pairs() {
        let a = generate_dataset_impl(30, 5, 5.0, 7).unwrap();
        let b = generate_dataset_impl(30, 5, 5.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 70);
    }

    #[test]
    fn partition_response_is_valid_json() {
        let points = generate_dataset_impl(40, 4, 5.0, 1).unwrap();
        let json = partition_dataset_impl(&points, 0.2, 42, 300).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["k"], 8);
        let indices: Vec<usize> = v["test_indices"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap() as usize)
            .collect();
        assert_eq!(indices.len(), 8);
        let unique: std::collections::HashSet<_> = indices.iter().collect();
        assert_eq!(unique.len(), 8);
        assert!(indices.iter().all(|&i| i < 44));
        assert!(v["error_trace"].as_array().unwrap().len() >= 2);
    }

    #[test]
    fn compare_response_has_both_methods() {
        let points = generate_dataset_impl(50, 5, 5.0, 3).unwrap();
        let json = compare_splits_impl(&points, 0.2, 5, 42).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["archetypal", "random_mean", "random_std"] {
            for metric in ["t_p", "ks_p", "mi", "kl", "js", "wasserstein", "mmd"] {
                assert!(v[key][metric].is_number(), "{key}.{metric}");
            }
        }
        assert_eq!(v["k"], 11);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(points_matrix(&[1.0, 2.0, 3.0]).is_err());
        assert!(points_matrix(&[1.0, 2.0]).is_err());
        assert!(points_matrix(&[1.0, f32::NAN, 0.0, 1.0]).is_err());
        let points = generate_dataset_impl(10, 0, 5.0, 1).unwrap();
        assert!(partition_dataset_impl(&points, 1.5, 42, 300).is_err());
        assert!(compare_splits_impl(&points, 0.2, 1, 42).is_err());
    }
}
