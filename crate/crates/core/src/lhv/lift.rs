//! Extends a dichotomic projective model for `ρ₀` to arbitrary POVMs on
//! the lifted state `ρ′ = lift_state(ρ₀, σ_A, σ_B)`.
//!
//! Each party refines its POVM into weighted rank-1 elements `α_k P_k`,
//! picks `k` with probability `α_k/d`, and runs the base model on the
//! dichotomic measurement `{P_k, I − P_k}`. On outcome `P_k` (a hit) it
//! reports the coarse outcome of `k`; otherwise it samples a coarse outcome
//! `a′` with probability `tr(M_a′ σ)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::{born_table, povm_refine, BlochVector, Povm, RefinedPovm};
use crate::qmat::{is_density, CMatrix};
use crate::states::{lift_state, DensityMatrix};

use super::driver::{self, JointTable, McEstimate, SampleRng};
use super::{DichotomicModel, HiddenVar};

/// One party's precomputed sampling data.
struct Party {
    refined: RefinedPovm,
    directions: Vec<BlochVector>,
    /// Cumulative `α_k/d`.
    choice_cdf: Vec<f64>,
    /// Cumulative `tr(M_a σ)`.
    fallback_cdf: Vec<f64>,
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// Index of the first cumulative value above `u`; the last index absorbs
/// rounding.
fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl Party {
    fn new(povm: &Povm, sigma: &CMatrix) -> Result<Self> {
        let d = povm.dim();
        if d != 2 || sigma.dim() != 2 {
            return Err(Error::param("povm", "the lift runs qubit base models, so d must be 2"));
        }
        let check = is_density(sigma);
        if !check.is_density {
            return Err(Error::InvalidState(format!("σ is not a state: {check:?}")));
        }
        let refined = povm_refine(povm)?;
        let directions = refined
            .vectors
            .iter()
            .map(|v| BlochVector::from_projector(&v.projector()))
            .collect::<Result<Vec<_>>>()?;
        let choice_cdf = cumulative(refined.weights.iter().map(|w| w / d as f64));
        let fallback_cdf = cumulative(povm.elements().iter().map(|m| m.trace_product(sigma).re.max(0.0)));
        Ok(Self {
            refined,
            directions,
            choice_cdf,
            fallback_cdf,
        })
    }

    /// Returns `(coarse outcome, hit)`.
    fn respond(
        &self,
        rng: &mut SampleRng,
        lambda: &HiddenVar,
        run: impl Fn(&HiddenVar, &BlochVector, &mut SampleRng) -> i8,
    ) -> (usize, bool) {
        let k = pick(&self.choice_cdf, rng.random());
        let hit = run(lambda, &self.directions[k], rng) == 1;
        let fallback = pick(&self.fallback_cdf, rng.random());
        if hit {
            (self.refined.back_map[k], true)
        } else {
            (fallback, false)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftReport {
    /// Coarse outcome table `p(a, b)`.
    pub joint: JointTable,
    /// Rate at which each party falls back to sampling from `σ`.
    pub miss_a: McEstimate,
    pub miss_b: McEstimate,
    /// Probability that both parties hit and output `(a, b)`.
    pub both_hit: JointTable,
}

/// Row-major probability table `p[a][b]`.
pub type ProbTable = Vec<Vec<f64>>;

/// Exact tables for the lifted state: `(p(a,b), both-hit(a,b))`.
pub fn lift_oracle(
    rho0: &DensityMatrix,
    sigma_a: &CMatrix,
    sigma_b: &CMatrix,
    povm_a: &Povm,
    povm_b: &Povm,
) -> Result<(ProbTable, ProbTable)> {
    let lifted = lift_state(rho0, sigma_a, sigma_b)?;
    let joint = born_table(&lifted, povm_a.elements(), povm_b.elements())?;
    let d2 = (rho0.dim_a() * rho0.dim_a()) as f64;
    let both = born_table(rho0, povm_a.elements(), povm_b.elements())?
        .into_iter()
        .map(|row| row.into_iter().map(|p| p / d2).collect())
        .collect();
    Ok((joint, both))
}

pub fn simulate_povm_lift(
    base: &impl DichotomicModel,
    sigma_a: &CMatrix,
    sigma_b: &CMatrix,
    povm_a: &Povm,
    povm_b: &Povm,
    n: u64,
    seed: u64,
) -> Result<LiftReport> {
    let alice = Party::new(povm_a, sigma_a)?;
    let bob = Party::new(povm_b, sigma_b)?;
    let (ka, kb) = (povm_a.len(), povm_b.len());
    let cells = ka * kb;
    let est = driver::estimate(n, seed, 2 * cells + 2, |rng, out| {
        let lambda = base.sample_hidden(rng);
        let (a, hit_a) = alice.respond(rng, &lambda, |l, v, r| base.alice(l, v, r));
        let (b, hit_b) = bob.respond(rng, &lambda, |l, v, r| base.bob(l, v, r));
        out[a * kb + b] = 1.0;
        if hit_a && hit_b {
            out[cells + a * kb + b] = 1.0;
        }
        out[2 * cells] = if hit_a { 0.0 } else { 1.0 };
        out[2 * cells + 1] = if hit_b { 0.0 } else { 1.0 };
    })?;
    let labels_a: Vec<i64> = (0..ka as i64).collect();
    let labels_b: Vec<i64> = (0..kb as i64).collect();
    Ok(LiftReport {
        joint: JointTable::new(labels_a.clone(), labels_b.clone(), est[..cells].to_vec())?,
        both_hit: JointTable::new(labels_a, labels_b, est[cells..2 * cells].to_vec())?,
        miss_a: est[2 * cells],
        miss_b: est[2 * cells + 1],
    })
}
