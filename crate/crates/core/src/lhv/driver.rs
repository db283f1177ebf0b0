//! Deterministic Monte Carlo driver.
//!
//! Stream layout: the generator is `ChaCha8Rng::seed_from_u64(seed)` and
//! sample `i` draws from stream `i` starting at word 0. Samples are grouped
//! into fixed chunks of [`CHUNK`]; each chunk is accumulated sequentially
//! and chunk results are merged in chunk order, so the output depends only
//! on `(seed, n)` and not on how many workers run the chunks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SampleRng = ChaCha8Rng;

pub const CHUNK: u64 = 8192;

/// Stream reserved for drawing measurement settings, never used by a
/// sample index.
pub const CHOICE_STREAM: u64 = u64::MAX;

/// Generator for random measurement settings tied to `seed`, independent
/// of the sample streams.
pub fn choice_rng(seed: u64) -> SampleRng {
    let mut rng = SampleRng::seed_from_u64(seed);
    rng.set_stream(CHOICE_STREAM);
    rng
}

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "NONLOCAL_LAB_THREADS";

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        let stderr = if self.n > 1 {
            (self.m2.max(0.0) / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr,
            n: self.n,
            seed,
        }
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|mean − target| / stderr`; zero-variance estimates count as exact
    /// when they agree to 1e-12.
    pub fn sigma_ratio(&self, target: f64) -> f64 {
        sigma_ratio(self.mean - target, self.stderr)
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.sigma_ratio(target) <= sigmas
    }
}

pub fn sigma_ratio(diff: f64, stderr: f64) -> f64 {
    let diff = diff.abs();
    if stderr > 0.0 {
        diff / stderr
    } else if diff <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn configured_workers() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// Draws `n` samples; each call of `sample` fills `width` values which are
/// averaged independently.
pub fn run_samples<F>(n: u64, seed: u64, width: usize, sample: F) -> Result<Vec<Welford>>
where
    F: Fn(&mut SampleRng, &mut [f64]) + Sync,
{
    if n == 0 {
        return Err(Error::param("n", "sample count must be at least 1"));
    }
    let base = SampleRng::seed_from_u64(seed);
    let chunks = n.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = base.clone();
                let mut acc = vec![Welford::default(); width];
                let mut buf = vec![0.0; width];
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    rng.set_stream(i);
                    rng.set_word_pos(0);
                    buf.fill(0.0);
                    sample(&mut rng, &mut buf);
                    for (a, &v) in acc.iter_mut().zip(&buf) {
                        a.push(v);
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
    };
    let per_chunk = match configured_workers() {
        Some(w) if rayon::current_thread_index().is_none() => with_workers(w, work),
        _ => work(),
    };
    let mut total = vec![Welford::default(); width];
    for chunk in &per_chunk {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    Ok(total)
}

/// Like [`run_samples`] but returns estimates directly.
pub fn estimate<F>(n: u64, seed: u64, width: usize, sample: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut SampleRng, &mut [f64]) + Sync,
{
    Ok(run_samples(n, seed, width, sample)?.iter().map(|w| w.estimate(seed)).collect())
}

/// One cell of a [`JointTable`] compared with an exact value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub a: i64,
    pub b: i64,
    pub mean: f64,
    pub stderr: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub sigma_ratio: f64,
}

/// Estimated `p(a, b)` over outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    labels_a: Vec<i64>,
    labels_b: Vec<i64>,
    cells: Vec<McEstimate>,
    n: u64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct CellJson {
    a: i64,
    b: i64,
    mean: f64,
    stderr: f64,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    cells: Vec<CellJson>,
    n: u64,
    seed: u64,
}

impl JointTable {
    /// `cells` is row-major over `labels_a × labels_b`.
    pub fn new(labels_a: Vec<i64>, labels_b: Vec<i64>, cells: Vec<McEstimate>) -> Result<Self> {
        if cells.len() != labels_a.len() * labels_b.len() || cells.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: labels_a.len() * labels_b.len(),
                found: cells.len(),
            });
        }
        let (n, seed) = (cells[0].n, cells[0].seed);
        Ok(Self {
            labels_a,
            labels_b,
            cells,
            n,
            seed,
        })
    }

    pub fn labels_a(&self) -> &[i64] {
        &self.labels_a
    }

    pub fn labels_b(&self) -> &[i64] {
        &self.labels_b
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Cell by outcome indices (not labels).
    pub fn get(&self, ia: usize, ib: usize) -> &McEstimate {
        &self.cells[ia * self.labels_b.len() + ib]
    }

    pub fn cells(&self) -> &[McEstimate] {
        &self.cells
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        (0..self.labels_a.len())
            .map(|ia| (0..self.labels_b.len()).map(|ib| self.get(ia, ib).mean).sum())
            .collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.labels_b.len())
            .map(|ib| (0..self.labels_a.len()).map(|ia| self.get(ia, ib).mean).sum())
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().map(|c| c.mean).sum()
    }

    /// `oracle[ia][ib]` must match the table shape.
    pub fn compare(&self, oracle: &[Vec<f64>]) -> Result<Vec<CellComparison>> {
        if oracle.len() != self.labels_a.len() || oracle.iter().any(|r| r.len() != self.labels_b.len()) {
            return Err(Error::param("oracle", "shape does not match the table"));
        }
        let mut out = Vec::with_capacity(self.cells.len());
        for (ia, &a) in self.labels_a.iter().enumerate() {
            for (ib, &b) in self.labels_b.iter().enumerate() {
                let c = self.get(ia, ib);
                let exact = oracle[ia][ib];
                out.push(CellComparison {
                    a,
                    b,
                    mean: c.mean,
                    stderr: c.stderr,
                    oracle: exact,
                    abs_diff: (c.mean - exact).abs(),
                    sigma_ratio: c.sigma_ratio(exact),
                });
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

impl Serialize for JointTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut cells = Vec::with_capacity(self.cells.len());
        for (ia, &a) in self.labels_a.iter().enumerate() {
            for (ib, &b) in self.labels_b.iter().enumerate() {
                let c = self.get(ia, ib);
                cells.push(CellJson {
                    a,
                    b,
                    mean: c.mean,
                    stderr: c.stderr,
                });
            }
        }
        TableJson {
            cells,
            n: self.n,
            seed: self.seed,
        }
        .serialize(serializer)
    }
}

/// Largest σ-ratio in a comparison.
pub fn max_sigma_ratio(rows: &[CellComparison]) -> f64 {
    rows.iter().map(|r| r.sigma_ratio).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut w = Welford::default();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let e = w.estimate(0);
        assert!((e.mean - mean).abs() < 1e-12);
        assert!((e.stderr - (var / xs.len() as f64).sqrt()).abs() < 1e-12);

        let mut a = Welford::default();
        let mut b = Welford::default();
        xs[..300].iter().for_each(|&x| a.push(x));
        xs[300..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.estimate(0).mean - mean).abs() < 1e-12);
        assert!((a.estimate(0).stderr - e.stderr).abs() < 1e-12);
    }

    #[test]
    fn uniform_mean() {
        let est = estimate(100_000, 3, 1, |rng, out| out[0] = rng.random::<f64>()).unwrap();
        assert!(est[0].within(0.5, 5.0));
        assert_eq!(est[0].n, 100_000);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let f = |rng: &mut SampleRng, out: &mut [f64]| {
            out[0] = rng.random::<f64>();
            out[1] = rng.random::<f64>().powi(2);
        };
        let one = with_workers(1, || estimate(50_000, 9, 2, f).unwrap());
        let four = with_workers(4, || estimate(50_000, 9, 2, f).unwrap());
        assert_eq!(one, four);
        let again = estimate(50_000, 9, 2, f).unwrap();
        assert_eq!(one, again);
        let other = estimate(50_000, 10, 2, f).unwrap();
        assert_ne!(one, other);
    }

    #[test]
    fn prefix_samples_are_shared() {
        // Sample i depends only on (seed, i).
        let f = |rng: &mut SampleRng, out: &mut [f64]| out[0] = rng.random::<f64>();
        let short = run_samples(10, 1, 1, f).unwrap();
        let first: Vec<f64> = (0..10u64)
            .map(|i| {
                let mut rng = SampleRng::seed_from_u64(1);
                rng.set_stream(i);
                rng.random::<f64>()
            })
            .collect();
        let mean = first.iter().sum::<f64>() / 10.0;
        assert!((short[0].estimate(1).mean - mean).abs() < 1e-15);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(run_samples(0, 0, 1, |_, _| {}).is_err());
    }

    #[test]
    fn sigma_ratio_edge_cases() {
        assert_eq!(sigma_ratio(0.0, 0.0), 0.0);
        assert!(sigma_ratio(1e-6, 0.0).is_infinite());
        assert_eq!(sigma_ratio(-2.0, 1.0), 2.0);
    }

    #[test]
    fn table_json_and_compare() {
        let cell = |m| McEstimate {
            mean: m,
            stderr: 0.01,
            n: 10,
            seed: 4,
        };
        let t = JointTable::new(vec![1, -1], vec![0], vec![cell(0.3), cell(0.7)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["n"], 10);
        assert_eq!(v["cells"][1]["a"], -1);
        let rows = t.compare(&[vec![0.31], vec![0.69]]).unwrap();
        assert!((rows[0].sigma_ratio - 1.0).abs() < 1e-9);
        assert!(t.compare(&[vec![0.3]]).is_err());
        assert!((t.total() - 1.0).abs() < 1e-15);
    }
}
