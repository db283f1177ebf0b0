//! Local hidden-variable models and their Monte Carlo simulators.
//!
//! Every simulator returns estimates that are meant to be compared against
//! Born-rule probabilities of the state the model claims to reproduce.

pub mod barrett;
pub mod driver;
pub mod gd;
pub mod hirsch;
pub mod lift;
pub mod werner;

use rand::Rng;

use crate::error::Result;
use crate::measure::BlochVector;
use crate::qmat::Ket;
use crate::states::{random, DensityMatrix};

pub use driver::{
    choice_rng, max_sigma_ratio, with_workers, CellComparison, JointTable, McEstimate, SampleRng, THREADS_ENV,
};

/// Shared randomness of the models.
#[derive(Debug, Clone, PartialEq)]
pub enum HiddenVar {
    /// Haar-random unit vector in `C^d`.
    ComplexVec(Ket),
    /// Uniform point on S².
    RealVec(BlochVector),
    /// Two independent points on S² (choice method).
    RealPair(BlochVector, BlochVector),
    /// A point on S² plus a shared uniform `r ∈ [0, 1)`.
    RealVecWithUniform(BlochVector, f64),
}

impl HiddenVar {
    pub fn is_valid(&self) -> bool {
        let unit = |v: &BlochVector| (v.dot(v) - 1.0).abs() <= 1e-12;
        match self {
            HiddenVar::ComplexVec(k) => k.is_unit(),
            HiddenVar::RealVec(v) => unit(v),
            HiddenVar::RealPair(a, b) => unit(a) && unit(b),
            HiddenVar::RealVecWithUniform(v, r) => unit(v) && (0.0..=1.0).contains(r),
        }
    }
}

/// `+1` for `z ≥ 0`, `−1` otherwise.
pub fn sign(z: f64) -> i8 {
    if z >= 0.0 {
        1
    } else {
        -1
    }
}

/// Uniform point on S².
pub fn sample_sphere_r3(rng: &mut (impl Rng + ?Sized)) -> BlochVector {
    BlochVector::sample(rng)
}

/// Haar-uniform unit vector in `C^d`.
pub fn sample_sphere_cd(rng: &mut (impl Rng + ?Sized), d: usize) -> Ket {
    random::pure_state(rng, d)
}

/// A local model for a two-qubit state and dichotomic projective
/// measurements `x·σ`, `y·σ` with outcomes `±1`.
pub trait DichotomicModel: Sync {
    /// The state whose statistics the model reproduces.
    fn target_state(&self) -> Result<DensityMatrix>;

    fn sample_hidden(&self, rng: &mut SampleRng) -> HiddenVar;

    /// Alice's outcome; may use private randomness from `rng`.
    fn alice(&self, lambda: &HiddenVar, x: &BlochVector, rng: &mut SampleRng) -> i8;

    /// Bob's outcome; may use private randomness from `rng`.
    fn bob(&self, lambda: &HiddenVar, y: &BlochVector, rng: &mut SampleRng) -> i8;
}

/// Moments and joint table of a dichotomic simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicReport {
    /// Outcomes ordered `+1, −1` on both sides.
    pub joint: JointTable,
    pub e_a: McEstimate,
    pub e_b: McEstimate,
    pub e_ab: McEstimate,
}

impl DichotomicReport {
    /// Exact table `(1 + a E_A + b E_B + ab E_AB)/4` for given moments.
    pub fn table_from_moments(e_a: f64, e_b: f64, e_ab: f64) -> Vec<Vec<f64>> {
        [1.0, -1.0]
            .iter()
            .map(|a| [1.0, -1.0].iter().map(|b| (1.0 + a * e_a + b * e_b + a * b * e_ab) / 4.0).collect())
            .collect()
    }
}

/// Cell index of `(a, b)` in a `+1, −1` ordered 2×2 table.
pub(crate) fn pm_cell(a: i8, b: i8) -> usize {
    let ia = usize::from(a < 0);
    let ib = usize::from(b < 0);
    ia * 2 + ib
}

/// Runs any [`DichotomicModel`] with fixed settings.
pub fn simulate_dichotomic(
    model: &impl DichotomicModel,
    x: &BlochVector,
    y: &BlochVector,
    n: u64,
    seed: u64,
) -> Result<DichotomicReport> {
    let est = driver::estimate(n, seed, 7, |rng, out| {
        let lambda = model.sample_hidden(rng);
        let a = model.alice(&lambda, x, rng);
        let b = model.bob(&lambda, y, rng);
        out[pm_cell(a, b)] = 1.0;
        out[4] = f64::from(a);
        out[5] = f64::from(b);
        out[6] = f64::from(a * b);
    })?;
    Ok(DichotomicReport {
        joint: JointTable::new(vec![1, -1], vec![1, -1], est[..4].to_vec())?,
        e_a: est[4],
        e_b: est[5],
        e_ab: est[6],
    })
}
