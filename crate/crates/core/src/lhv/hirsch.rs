//! Local model for `ρ_G(q) = q|Ψ₋⟩⟨Ψ₋| + (1 − q)|0⟩⟨0| ⊗ I/2`, valid for
//! projective measurements when `q ≤ 1/2`.
//!
//! Shared randomness is `λ ∈ S²` and `r ∈ [0, 1)`. With `p = 2q`, Alice
//! runs the acceptance step only when `r < p`: she accepts `λ` with
//! probability `|x·λ|` and then answers `−sign(x·λ)`. Otherwise she
//! answers `±1` with probability `(1 ± x_z)/2`. Bob always answers
//! `sign(y·λ)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::BlochVector;
use crate::states::{rho_g, DensityMatrix};

use super::driver::{self, JointTable, McEstimate, SampleRng};
use super::{pm_cell, sample_sphere_r3, sign, DichotomicModel, DichotomicReport, HiddenVar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HirschModel {
    q: f64,
}

impl HirschModel {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&q) {
            return Err(Error::param("q", format!("{q} is outside [0, 1/2], where the model is valid")));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Alice's outcome and whether the acceptance test on `λ` passed.
    /// Both private uniforms are drawn on every call so the stream layout
    /// does not depend on the branch taken.
    fn alice_detail(&self, lambda: &BlochVector, r: f64, x: &BlochVector, rng: &mut SampleRng) -> (i8, bool) {
        let u: f64 = rng.random();
        let coin: f64 = rng.random();
        let overlap = x.dot(lambda);
        let accepted = u < overlap.abs();
        if r < 2.0 * self.q && accepted {
            (-sign(overlap), accepted)
        } else if coin < (1.0 + x.z) / 2.0 {
            (1, accepted)
        } else {
            (-1, accepted)
        }
    }
}

fn unpack(lambda: &HiddenVar) -> (&BlochVector, f64) {
    match lambda {
        HiddenVar::RealVecWithUniform(v, r) => (v, *r),
        other => panic!("mixing model needs a vector and a uniform, got {other:?}"),
    }
}

impl DichotomicModel for HirschModel {
    fn target_state(&self) -> Result<DensityMatrix> {
        rho_g(self.q)
    }

    fn sample_hidden(&self, rng: &mut SampleRng) -> HiddenVar {
        let lambda = sample_sphere_r3(rng);
        let r: f64 = rng.random();
        HiddenVar::RealVecWithUniform(lambda, r)
    }

    fn alice(&self, lambda: &HiddenVar, x: &BlochVector, rng: &mut SampleRng) -> i8 {
        let (v, r) = unpack(lambda);
        self.alice_detail(v, r, x, rng).0
    }

    fn bob(&self, lambda: &HiddenVar, y: &BlochVector, _rng: &mut SampleRng) -> i8 {
        sign(y.dot(unpack(lambda).0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HirschReport {
    pub report: DichotomicReport,
    /// Rate at which the `|x·λ|` acceptance test passes, tallied on every
    /// sample regardless of `r`.
    pub acceptance: McEstimate,
}

/// Exact moments `(E_A, E_B, E_AB) = ((1 − q)x_z, 0, −q x·y)`.
pub fn hirsch_moments(q: f64, x: &BlochVector, y: &BlochVector) -> (f64, f64, f64) {
    ((1.0 - q) * x.z, 0.0, -q * x.dot(y))
}

pub fn simulate_hirsch_projective(q: f64, x: &BlochVector, y: &BlochVector, n: u64, seed: u64) -> Result<HirschReport> {
    let model = HirschModel::new(q)?;
    let est = driver::estimate(n, seed, 8, |rng, out| {
        let hidden = model.sample_hidden(rng);
        let (lambda, r) = unpack(&hidden);
        let (a, accepted) = model.alice_detail(lambda, r, x, rng);
        let b = model.bob(&hidden, y, rng);
        out[pm_cell(a, b)] = 1.0;
        out[4] = f64::from(a);
        out[5] = f64::from(b);
        out[6] = f64::from(a * b);
        out[7] = if accepted { 1.0 } else { 0.0 };
    })?;
    Ok(HirschReport {
        report: DichotomicReport {
            joint: JointTable::new(vec![1, -1], vec![1, -1], est[..4].to_vec())?,
            e_a: est[4],
            e_b: est[5],
            e_ab: est[6],
        },
        acceptance: est[7],
    })
}
