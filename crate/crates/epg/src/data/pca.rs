//! Weighted principal component analysis via singular value decomposition
//! of the centered data matrix (stable for wide matrices, m >> N).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// A fitted PCA model: weighted mean, orthonormal components in descending
/// explained-variance order, and the weighted variance along each component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Fits a `c`-component PCA. Rows are centered by the weighted mean and
/// scaled by sqrt(weight), so components diagonalize the weighted covariance
/// and `explained_variance[k]` is the weighted variance along component `k`.
pub fn pca_fit(dataset: &Dataset, c: usize) -> Result<PcaModel, DataError> {
    let n = dataset.n_points();
    let m = dataset.dim();
    let max_c = n.min(m);
    if c == 0 || c > max_c {
        return Err(DataError::ComponentsOutOfRange(c, max_c));
    }
    let sw = dataset.total_weight();

    let mut mean = vec![0.0; m];
    for i in 0..n {
        let w = dataset.weight(i);
        for (j, &x) in dataset.point(i).iter().enumerate() {
            mean[j] += w * x;
        }
    }
    for v in &mut mean {
        *v /= sw;
    }

    let mut centered = DMatrix::<f64>::zeros(n, m);
    for i in 0..n {
        let s = dataset.weight(i).sqrt();
        for (j, &x) in dataset.point(i).iter().enumerate() {
            centered[(i, j)] = s * (x - mean[j]);
        }
    }

    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .expect("svd requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(c);
    let mut explained = Vec::with_capacity(c);
    for &k in order.iter().take(c) {
        let mut comp: Vec<f64> = (0..m).map(|j| v_t[(k, j)]).collect();
        // Deterministic sign: the entry of largest magnitude is positive.
        let lead = comp
            .iter()
            .cloned()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap().then(b.0.cmp(&a.0)))
            .map(|(_, v)| v)
            .unwrap_or(1.0);
        if lead < 0.0 {
            for v in &mut comp {
                *v = -*v;
            }
        }
        components.push(comp);
        let sigma = svd.singular_values[k];
        explained.push(sigma * sigma / sw);
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
    })
}

/// Projects a dataset onto the model's components; weights and labels carry
/// over unchanged.
pub fn pca_project(model: &PcaModel, dataset: &Dataset) -> Result<Dataset, DataError> {
    let m = model.dim();
    if dataset.dim() != m {
        return Err(DataError::RaggedPoint(0, dataset.dim(), m));
    }
    let rows: Vec<Vec<f64>> = dataset
        .rows()
        .map(|point| {
            model
                .components
                .iter()
                .map(|comp| {
                    point
                        .iter()
                        .zip(comp.iter())
                        .zip(model.mean.iter())
                        .map(|((&x, &v), &mu)| (x - mu) * v)
                        .sum()
                })
                .collect()
        })
        .collect();
    Dataset::new(
        rows,
        dataset.weights().to_vec(),
        dataset.labels().map(|l| l.to_vec()),
    )
}

/// Reconstructs points from their projections: mean + Σ_k t_k · v_k.
pub fn pca_reconstruct(model: &PcaModel, projected: &Dataset) -> Result<Dataset, DataError> {
    if projected.dim() != model.n_components() {
        return Err(DataError::RaggedPoint(
            0,
            projected.dim(),
            model.n_components(),
        ));
    }
    let rows: Vec<Vec<f64>> = projected
        .rows()
        .map(|t| {
            let mut out = model.mean.clone();
            for (k, &tk) in t.iter().enumerate() {
                for (j, &v) in model.components[k].iter().enumerate() {
                    out[j] += tk * v;
                }
            }
            out
        })
        .collect();
    Dataset::new(
        rows,
        projected.weights().to_vec(),
        projected.labels().map(|l| l.to_vec()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn collinear_data_is_rank_one() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let ds = Dataset::from_rows(rows).unwrap();
        let model = pca_fit(&ds, 2).unwrap();
        let total: f64 = model.explained_variance.iter().sum();
        assert!(model.explained_variance[0] / total > 1.0 - 1e-12);
    }

    #[test]
    fn projecting_the_mean_gives_zero() {
        let ds = Dataset::from_rows(vec![
            vec![1.0, 0.0, 3.0],
            vec![3.0, 4.0, -1.0],
            vec![2.0, 2.0, 1.0],
        ])
        .unwrap();
        let model = pca_fit(&ds, 2).unwrap();
        let mean_ds = Dataset::from_rows(vec![model.mean.clone()]).unwrap();
        let proj = pca_project(&model, &mean_ds).unwrap();
        for &v in proj.point(0) {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn full_rank_reconstruction_recovers_data() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..5).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let ds = Dataset::from_rows(rows).unwrap();
        let model = pca_fit(&ds, 5).unwrap();
        let proj = pca_project(&model, &ds).unwrap();
        let back = pca_reconstruct(&model, &proj).unwrap();
        for i in 0..ds.n_points() {
            for (a, b) in ds.point(i).iter().zip(back.point(i)) {
                assert!((a - b).abs() < 1e-8, "point {i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn out_of_range_component_count_errors() {
        let ds = Dataset::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(pca_fit(&ds, 3).is_err());
        assert!(pca_fit(&ds, 0).is_err());
    }

    #[test]
    fn components_are_orthonormal_and_variances_match() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let t: f64 = rng.random_range(-3.0..3.0);
                vec![
                    t + rng.random_range(-0.1..0.1),
                    0.5 * t + rng.random_range(-0.1..0.1),
                    rng.random_range(-0.2..0.2),
                ]
            })
            .collect();
        let weights: Vec<f64> = (0..40).map(|_| rng.random_range(0.5..2.0)).collect();
        let ds = Dataset::new(rows, weights, None).unwrap();
        let model = pca_fit(&ds, 3).unwrap();

        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = model.components[a]
                    .iter()
                    .zip(&model.components[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10);
            }
        }

        // Projected weighted variance along each axis equals explained_variance.
        let proj = pca_project(&model, &ds).unwrap();
        let sw = ds.total_weight();
        for k in 0..3 {
            let mean_k: f64 = (0..proj.n_points())
                .map(|i| proj.weight(i) * proj.point(i)[k])
                .sum::<f64>()
                / sw;
            let var_k: f64 = (0..proj.n_points())
                .map(|i| {
                    let d = proj.point(i)[k] - mean_k;
                    proj.weight(i) * d * d
                })
                .sum::<f64>()
                / sw;
            let expected = model.explained_variance[k];
            assert!(
                (var_k - expected).abs() <= 1e-8 * expected.max(1e-12),
                "component {k}: {var_k} vs {expected}"
            );
        }

        // Non-increasing explained variance.
        for pair in model.explained_variance.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }
}
