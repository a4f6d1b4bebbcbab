//! Synthetic 2-D test patterns: spiral, kappa-like, Y-branch and segment,
//! with optional Gaussian jitter and uniform background noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// Pattern family for [`generate_pattern`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    /// Archimedean spiral r = theta over theta in [0.5 pi, 3.5 pi].
    Spiral,
    /// Letter-kappa strokes: a vertical bar plus two diagonal arms.
    Kappa,
    /// Three straight branches meeting at the origin.
    YBranch,
    /// A single straight segment.
    Segment,
}

/// Parameters of one synthetic dataset. Deterministic per seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub n_points: usize,
    /// Fraction of points drawn as uniform background noise, in [0, 1).
    pub noise_fraction: f64,
    /// Standard deviation of the Gaussian jitter applied to pattern points.
    pub jitter: f64,
    /// Bounding box `[[x_min, y_min], [x_max, y_max]]` for noise points.
    /// Absent → the pattern's bounding box inflated by 20% per side.
    #[serde(default)]
    pub bbox: Option<[[f64; 2]; 2]>,
    pub seed: u64,
}

impl PatternSpec {
    pub fn new(kind: PatternKind, n_points: usize, seed: u64) -> Self {
        PatternSpec {
            kind,
            n_points,
            noise_fraction: 0.0,
            jitter: 0.0,
            bbox: None,
            seed,
        }
    }

    fn validate(&self) -> Result<(), DataError> {
        if self.n_points == 0 {
            return Err(DataError::Empty);
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(DataError::BadColumn(
                "noise_fraction".into(),
                format!("{} outside [0, 1)", self.noise_fraction),
            ));
        }
        if !self.jitter.is_finite() || self.jitter < 0.0 {
            return Err(DataError::BadColumn(
                "jitter".into(),
                format!("{} is negative or non-finite", self.jitter),
            ));
        }
        Ok(())
    }
}

const SPIRAL_THETA: (f64, f64) = (0.5 * std::f64::consts::PI, 3.5 * std::f64::consts::PI);

fn segments(kind: PatternKind) -> Vec<([f64; 2], [f64; 2])> {
    match kind {
        PatternKind::Kappa => vec![
            ([0.0, -5.0], [0.0, 5.0]),
            ([0.0, 0.0], [4.5, 4.5]),
            ([0.0, 0.0], [4.5, -4.5]),
        ],
        PatternKind::YBranch => {
            let angles = [90.0_f64, 210.0, 330.0];
            angles
                .iter()
                .map(|deg| {
                    let rad = deg.to_radians();
                    ([0.0, 0.0], [5.0 * rad.cos(), 5.0 * rad.sin()])
                })
                .collect()
        }
        PatternKind::Segment => vec![([-5.0, 0.0], [5.0, 0.0])],
        PatternKind::Spiral => Vec::new(),
    }
}

fn spiral_point(theta: f64) -> [f64; 2] {
    [theta * theta.cos(), theta * theta.sin()]
}

/// `count` points exactly on the noise-free curve, approximately uniform by
/// arc length. Used for initialization-free distance checks.
pub fn sample_curve(kind: PatternKind, count: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(count);
    match kind {
        PatternKind::Spiral => {
            let (t0, t1) = SPIRAL_THETA;
            for i in 0..count {
                let u = i as f64 / (count.max(2) - 1) as f64;
                // Inverse CDF of ds ~ theta d theta: uniform in theta^2.
                let theta = (t0 * t0 + u * (t1 * t1 - t0 * t0)).sqrt();
                out.push(spiral_point(theta));
            }
        }
        _ => {
            let segs = segments(kind);
            let lengths: Vec<f64> = segs
                .iter()
                .map(|(a, b)| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt())
                .collect();
            let total: f64 = lengths.iter().sum();
            for (seg, len) in segs.iter().zip(&lengths) {
                let k = ((count as f64) * len / total).round().max(2.0) as usize;
                for i in 0..k {
                    let t = i as f64 / (k - 1) as f64;
                    out.push([
                        seg.0[0] + t * (seg.1[0] - seg.0[0]),
                        seg.0[1] + t * (seg.1[1] - seg.0[1]),
                    ]);
                }
            }
        }
    }
    out
}

fn natural_bbox(kind: PatternKind) -> [[f64; 2]; 2] {
    let samples = sample_curve(kind, 256);
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in &samples {
        for ax in 0..2 {
            min[ax] = min[ax].min(p[ax]);
            max[ax] = max[ax].max(p[ax]);
        }
    }
    for ax in 0..2 {
        let pad = 0.2 * (max[ax] - min[ax]).max(1.0);
        min[ax] -= pad;
        max[ax] += pad;
    }
    [min, max]
}

/// Draws `n_points * (1 - noise_fraction)` jittered points along the pattern
/// plus `n_points * noise_fraction` uniform points inside the bounding box.
/// Labels mark `pattern` vs `noise`.
pub fn generate_pattern(spec: &PatternSpec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_noise = (spec.n_points as f64 * spec.noise_fraction).round() as usize;
    let n_pattern = spec.n_points - n_noise;

    let segs = segments(spec.kind);
    let lengths: Vec<f64> = segs
        .iter()
        .map(|(a, b)| ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt())
        .collect();
    let total_len: f64 = lengths.iter().sum();

    let mut rows = Vec::with_capacity(spec.n_points);
    let mut labels = Vec::with_capacity(spec.n_points);

    for _ in 0..n_pattern {
        let base = match spec.kind {
            PatternKind::Spiral => {
                let (t0, t1) = SPIRAL_THETA;
                let u: f64 = rng.random_range(0.0..1.0);
                let theta = (t0 * t0 + u * (t1 * t1 - t0 * t0)).sqrt();
                spiral_point(theta)
            }
            _ => {
                let mut pick: f64 = rng.random_range(0.0..total_len);
                let mut idx = 0;
                for (i, len) in lengths.iter().enumerate() {
                    if pick < *len || i == lengths.len() - 1 {
                        idx = i;
                        break;
                    }
                    pick -= len;
                }
                let t: f64 = rng.random_range(0.0..1.0);
                let (a, b) = segs[idx];
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            }
        };
        let jx: f64 = StandardNormal.sample(&mut rng);
        let jy: f64 = StandardNormal.sample(&mut rng);
        rows.push(vec![base[0] + spec.jitter * jx, base[1] + spec.jitter * jy]);
        labels.push("pattern".to_string());
    }

    let bbox = spec.bbox.unwrap_or_else(|| natural_bbox(spec.kind));
    for _ in 0..n_noise {
        let x: f64 = rng.random_range(bbox[0][0]..bbox[1][0]);
        let y: f64 = rng.random_range(bbox[0][1]..bbox[1][1]);
        rows.push(vec![x, y]);
        labels.push("noise".to_string());
    }

    Dataset::new(rows, vec![1.0; spec.n_points], Some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_labels_everything_pattern() {
        let spec = PatternSpec::new(PatternKind::Segment, 50, 3);
        let ds = generate_pattern(&spec).unwrap();
        assert!(ds.labels().unwrap().iter().all(|l| l == "pattern"));
    }

    #[test]
    fn ten_percent_noise_of_thousand_is_one_hundred() {
        let spec = PatternSpec {
            noise_fraction: 0.1,
            ..PatternSpec::new(PatternKind::Spiral, 1000, 3)
        };
        let ds = generate_pattern(&spec).unwrap();
        let noise = ds.labels().unwrap().iter().filter(|l| *l == "noise").count();
        assert_eq!(noise, 100);
    }

    #[test]
    fn same_seed_gives_identical_datasets() {
        let spec = PatternSpec {
            noise_fraction: 0.2,
            jitter: 0.3,
            ..PatternSpec::new(PatternKind::Kappa, 200, 11)
        };
        let a = generate_pattern(&spec).unwrap();
        let b = generate_pattern(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_jitter_points_lie_on_the_curve() {
        for kind in [
            PatternKind::Spiral,
            PatternKind::Kappa,
            PatternKind::YBranch,
            PatternKind::Segment,
        ] {
            let spec = PatternSpec::new(kind, 64, 5);
            let ds = generate_pattern(&spec).unwrap();
            let curve = sample_curve(kind, 4096);
            for row in ds.rows() {
                let d = curve
                    .iter()
                    .map(|c| ((row[0] - c[0]).powi(2) + (row[1] - c[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                // Dense curve sampling bounds the gap between samples.
                assert!(d < 0.02, "{kind:?}: point {row:?} is {d} off-curve");
            }
        }
    }
}
