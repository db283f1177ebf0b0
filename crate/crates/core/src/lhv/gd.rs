//! Choice-method models: the local model for `W₂ₓ₂(1/2)` and the one-bit
//! simulation of singlet correlations.

use crate::error::Result;
use crate::measure::BlochVector;
use crate::states::{werner2x2, DensityMatrix};

use super::driver::{self, JointTable, McEstimate, SampleRng};
use super::{pm_cell, sample_sphere_r3, sign, DichotomicModel, DichotomicReport, HiddenVar};

/// Keeps `λ₀` if `|x·λ₀| > |x·λ₁|`, otherwise `λ₁`. Returns the chosen
/// vector and its index (the communicated bit).
pub fn gd_choice(lambda0: &BlochVector, lambda1: &BlochVector, x: &BlochVector) -> (BlochVector, usize) {
    if x.dot(lambda0).abs() > x.dot(lambda1).abs() {
        (*lambda0, 0)
    } else {
        (*lambda1, 1)
    }
}

/// Alice outputs `−sign(x·λ_s)`, Bob `sign(y·λ₀)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GdW2x2Model;

fn pair(lambda: &HiddenVar) -> (&BlochVector, &BlochVector) {
    match lambda {
        HiddenVar::RealPair(a, b) => (a, b),
        other => panic!("choice-method model needs a vector pair, got {other:?}"),
    }
}

impl DichotomicModel for GdW2x2Model {
    fn target_state(&self) -> Result<DensityMatrix> {
        werner2x2(0.5)
    }

    fn sample_hidden(&self, rng: &mut SampleRng) -> HiddenVar {
        let l0 = sample_sphere_r3(rng);
        let l1 = sample_sphere_r3(rng);
        HiddenVar::RealPair(l0, l1)
    }

    fn alice(&self, lambda: &HiddenVar, x: &BlochVector, _rng: &mut SampleRng) -> i8 {
        let (l0, l1) = pair(lambda);
        -sign(x.dot(&gd_choice(l0, l1, x).0))
    }

    fn bob(&self, lambda: &HiddenVar, y: &BlochVector, _rng: &mut SampleRng) -> i8 {
        sign(y.dot(pair(lambda).0))
    }
}

/// Statistics of a choice-method run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceReport {
    pub report: DichotomicReport,
    /// Fraction of samples where `λ_s = λ₀`.
    pub first_chosen: McEstimate,
    /// Fraction of samples where `−sign(x·(λ₀ + λ₁))` differs from
    /// Alice's output.
    pub rewrite_mismatch: McEstimate,
}

impl ChoiceReport {
    pub fn rewrite_always_agrees(&self) -> bool {
        self.rewrite_mismatch.mean == 0.0
    }
}

fn simulate_choice(x: &BlochVector, y: &BlochVector, n: u64, seed: u64, one_bit: bool) -> Result<ChoiceReport> {
    let est = driver::estimate(n, seed, 9, |rng, out| {
        let l0 = sample_sphere_r3(rng);
        let l1 = sample_sphere_r3(rng);
        let (ls, s) = gd_choice(&l0, &l1, x);
        let a = -sign(x.dot(&ls));
        let b = if one_bit { sign(y.dot(&ls)) } else { sign(y.dot(&l0)) };
        let sum = BlochVector { x: l0.x + l1.x, y: l0.y + l1.y, z: l0.z + l1.z };
        let rewritten = -sign(x.dot(&sum));
        out[pm_cell(a, b)] = 1.0;
        out[4] = f64::from(a);
        out[5] = f64::from(b);
        out[6] = f64::from(a * b);
        out[7] = if s == 0 { 1.0 } else { 0.0 };
        out[8] = if rewritten == a { 0.0 } else { 1.0 };
    })?;
    Ok(ChoiceReport {
        report: DichotomicReport {
            joint: JointTable::new(vec![1, -1], vec![1, -1], est[..4].to_vec())?,
            e_a: est[4],
            e_b: est[5],
            e_ab: est[6],
        },
        first_chosen: est[7],
        rewrite_mismatch: est[8],
    })
}

/// Local model: `E(AB) → −(x·y)/2`.
pub fn simulate_gd_w2x2(x: &BlochVector, y: &BlochVector, n: u64, seed: u64) -> Result<ChoiceReport> {
    simulate_choice(x, y, n, seed, false)
}

/// Alice sends the index of `λ_s` and Bob outputs `sign(y·λ_s)`:
/// `E(AB) → −x·y`.
pub fn simulate_epr_one_bit(x: &BlochVector, y: &BlochVector, n: u64, seed: u64) -> Result<ChoiceReport> {
    simulate_choice(x, y, n, seed, true)
}
