use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::topics::group_by_topic;
use super::Result;
use crate::embed::{cosine, mean_vector};
use crate::store::{CorpusSnapshot, TopicPath};

/// Two-dimensional embedding of high-dimensional vectors.
pub trait Reducer: Send + Sync {
    fn name(&self) -> &'static str;

    /// One 2D point per input vector, deterministic for a fixed seed.
    fn reduce(&self, vectors: &[Vec<f32>], seed: u64) -> std::result::Result<Vec<[f64; 2]>, String>;
}

fn cosine_distances(vectors: &[Vec<f32>]) -> DMatrix<f64> {
    let n = vectors.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (1.0 - cosine(&vectors[i], &vectors[j])).max(0.0)
        }
    })
}

/// Classical (Torgerson) MDS on pairwise cosine distances.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClassicalMds;

impl Reducer for ClassicalMds {
    fn name(&self) -> &'static str {
        "classical_mds"
    }

    fn reduce(&self, vectors: &[Vec<f32>], _seed: u64) -> std::result::Result<Vec<[f64; 2]>, String> {
        let n = vectors.len();
        if n <= 1 {
            return Ok(vec![[0.0, 0.0]; n]);
        }
        let d = cosine_distances(vectors);
        let d2 = d.component_mul(&d);
        let row_means: Vec<f64> = (0..n).map(|i| d2.row(i).mean()).collect();
        let grand = d2.mean();
        let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + grand));
        let eig = SymmetricEigen::new(b);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let mut coords = vec![[0.0; 2]; n];
        for (axis, &k) in order.iter().take(2).enumerate() {
            let lambda = eig.eigenvalues[k].max(0.0);
            let v = eig.eigenvectors.column(k);
            // Fix the sign: the entry of largest magnitude is positive.
            let pivot = (0..n).fold(0, |best, i| if v[i].abs() > v[best].abs() + 1e-12 { i } else { best });
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                coords[i][axis] = sign * v[i] * lambda.sqrt();
            }
        }
        if coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err("non-finite MDS coordinates".into());
        }
        Ok(coords)
    }
}

/// Exact t-SNE with a seeded Gaussian initialisation.
#[derive(Clone, Copy, Debug)]
pub struct Tsne {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for Tsne {
    fn default() -> Self {
        Tsne {
            perplexity: 30.0,
            iterations: 500,
            learning_rate: 100.0,
        }
    }
}

impl Tsne {
    /// Conditional probabilities of row `i` at precision `beta`.
    fn row_affinities(d2: &DMatrix<f64>, i: usize, beta: f64) -> (Vec<f64>, f64) {
        let n = d2.nrows();
        let mut p: Vec<f64> = (0..n)
            .map(|j| if j == i { 0.0 } else { (-beta * d2[(i, j)]).exp() })
            .collect();
        let sum: f64 = p.iter().sum::<f64>().max(1e-300);
        p.iter_mut().for_each(|x| *x /= sum);
        let entropy = -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>();
        (p, entropy)
    }

    fn joint_affinities(&self, d2: &DMatrix<f64>) -> DMatrix<f64> {
        let n = d2.nrows();
        let target = self.perplexity.min((n - 1) as f64 / 3.0).max(1.0).ln();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            let (mut lo, mut hi, mut beta) = (0.0f64, f64::INFINITY, 1.0f64);
            let mut row = Vec::new();
            for _ in 0..64 {
                let (r, h) = Self::row_affinities(d2, i, beta);
                row = r;
                if (h - target).abs() < 1e-6 {
                    break;
                }
                if h > target {
                    lo = beta;
                    beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
                } else {
                    hi = beta;
                    beta = (beta + lo) / 2.0;
                }
            }
            for j in 0..n {
                p[(i, j)] = row[j];
            }
        }
        let sym = (&p + p.transpose()) / (2.0 * n as f64);
        sym.map(|x| x.max(1e-12))
    }
}

impl Reducer for Tsne {
    fn name(&self) -> &'static str {
        "tsne"
    }

    fn reduce(&self, vectors: &[Vec<f32>], seed: u64) -> std::result::Result<Vec<[f64; 2]>, String> {
        let n = vectors.len();
        if n <= 1 {
            return Ok(vec![[0.0, 0.0]; n]);
        }
        if n < 4 {
            return Err(format!("t-SNE needs at least 4 points, got {n}"));
        }
        let d = cosine_distances(vectors);
        let p = self.joint_affinities(&d.component_mul(&d));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut y: Vec<[f64; 2]> = (0..n)
            .map(|_| [1e-4 * rng.sample::<f64, _>(StandardNormal), 1e-4 * rng.sample::<f64, _>(StandardNormal)])
            .collect();
        let mut velocity = vec![[0.0f64; 2]; n];
        for it in 0..self.iterations {
            let exaggeration = if it < 100 { 12.0 } else { 1.0 };
            let momentum = if it < 250 { 0.5 } else { 0.8 };
            let mut num = DMatrix::zeros(n, n);
            let mut z = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let dx = y[i][0] - y[j][0];
                    let dy = y[i][1] - y[j][1];
                    let q = 1.0 / (1.0 + dx * dx + dy * dy);
                    num[(i, j)] = q;
                    num[(j, i)] = q;
                    z += 2.0 * q;
                }
            }
            for i in 0..n {
                let mut grad = [0.0; 2];
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let w = (exaggeration * p[(i, j)] - num[(i, j)] / z) * num[(i, j)];
                    grad[0] += 4.0 * w * (y[i][0] - y[j][0]);
                    grad[1] += 4.0 * w * (y[i][1] - y[j][1]);
                }
                for k in 0..2 {
                    velocity[i][k] = momentum * velocity[i][k] - self.learning_rate * grad[k];
                }
            }
            for i in 0..n {
                y[i][0] += velocity[i][0];
                y[i][1] += velocity[i][1];
            }
            let mean = [
                y.iter().map(|p| p[0]).sum::<f64>() / n as f64,
                y.iter().map(|p| p[1]).sum::<f64>() / n as f64,
            ];
            y.iter_mut().for_each(|p| {
                p[0] -= mean[0];
                p[1] -= mean[1];
            });
        }
        if y.iter().flatten().any(|x| !x.is_finite()) {
            return Err("t-SNE diverged".into());
        }
        Ok(y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleConfig {
    /// Field-path depth of a bubble.
    pub level: usize,
    /// Largest distance of a bubble center from the origin.
    pub extent: f64,
    pub radius_floor: f64,
    /// Radius per square root of funding.
    pub radius_scale: f64,
}

impl Default for BubbleConfig {
    fn default() -> Self {
        BubbleConfig {
            level: 1,
            extent: 100.0,
            radius_floor: 1.0,
            radius_scale: 0.01,
        }
    }
}

/// One grant field placed by the similarity of its abstracts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldBubble {
    pub field_path: TopicPath,
    pub position: [f64; 2],
    pub radius: f64,
    pub grant_count: u64,
    pub total_funding: f64,
    /// Reducer that produced the positions (`circular` after a fallback).
    pub layout: String,
}

fn circular(n: usize, extent: f64) -> Vec<[f64; 2]> {
    if n == 1 {
        return vec![[0.0, 0.0]];
    }
    (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            [extent * a.sin(), extent * a.cos()]
        })
        .collect()
}

/// Field bubbles of `grants` (snapshot indices); `embeddings` is indexed
/// like [`CorpusSnapshot::grants`]. Reducer failures fall back to a
/// circular arrangement.
pub fn grant_field_bubbles(
    snapshot: &CorpusSnapshot,
    embeddings: &[Vec<f32>],
    grants: &[usize],
    config: &BubbleConfig,
    reducer: &dyn Reducer,
    seed: u64,
) -> Result<Vec<FieldBubble>> {
    let all = snapshot.grants();
    let groups = group_by_topic(grants.iter().map(|&g| (g, Some(&all[g].field_path))), config.level)?;
    let dim = embeddings.first().map_or(0, Vec::len);
    let means: Vec<Vec<f32>> = groups
        .values()
        .map(|members| mean_vector(members.iter().map(|&g| embeddings[g].as_slice()), dim))
        .collect();
    let (positions, layout) = match reducer.reduce(&means, seed) {
        Ok(p) if p.len() == means.len() => {
            let max = p.iter().map(|q| q[0].hypot(q[1])).fold(0.0, f64::max);
            let scale = if max > 0.0 { config.extent / max } else { 0.0 };
            (p.iter().map(|q| [q[0] * scale, q[1] * scale]).collect(), reducer.name())
        }
        Ok(_) => {
            log::warn!("{} returned the wrong number of points; using a circular layout", reducer.name());
            (circular(means.len(), config.extent), "circular")
        }
        Err(e) => {
            log::warn!("{} failed ({e}); using a circular layout", reducer.name());
            (circular(means.len(), config.extent), "circular")
        }
    };
    Ok(groups
        .into_iter()
        .zip(positions)
        .map(|((field_path, members), position)| {
            let total_funding: f64 = members.iter().map(|&g| all[g].funding_amount).sum();
            FieldBubble {
                field_path,
                position,
                radius: config.radius_floor + config.radius_scale * total_funding.max(0.0).sqrt(),
                grant_count: members.len() as u64,
                total_funding,
                layout: layout.to_string(),
            }
        })
        .collect())
}
