//! Barrett's model for POVMs on `α P_anti + (1 − α) I/d²`.
//!
//! POVMs are refined into rank-1 elements `x_i P_i` (Alice) and `y_j Q_j`
//! (Bob) first; responses are then summed back into coarse outcomes.

use crate::error::{Error, Result};
use crate::measure::{povm_refine, Povm, RefinedPovm};
use crate::qmat::Ket;

use super::driver::{self, JointTable};
use super::sample_sphere_cd;

fn check_dim(d: usize, povm: &Povm) -> Result<()> {
    if d < 2 {
        return Err(Error::param("d", "need d >= 2"));
    }
    if povm.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: povm.dim(),
        });
    }
    Ok(())
}

/// Alice's refined response
/// `p_A(i) = x_i⟨λ|P_i|λ⟩ χ(⟨λ|P_i|λ⟩ ≥ 1/d) + (1 − S) x_i/d`, where `S` is
/// the sum of the first term over all `i`.
pub fn barrett_response_a(lambda: &Ket, refined: &RefinedPovm) -> Vec<f64> {
    let d = refined.dim() as f64;
    let first: Vec<f64> = refined
        .vectors
        .iter()
        .zip(&refined.weights)
        .map(|(v, &x)| {
            let overlap = v.inner(lambda).norm_sqr();
            if overlap >= 1.0 / d {
                x * overlap
            } else {
                0.0
            }
        })
        .collect();
    let s: f64 = first.iter().sum();
    first
        .iter()
        .zip(&refined.weights)
        .map(|(f, &x)| f + (1.0 - s) * x / d)
        .collect()
}

/// Bob's refined response `p_B(j) = y_j (1 − ⟨λ|Q_j|λ⟩)/(d − 1)`.
pub fn barrett_response_b(lambda: &Ket, refined: &RefinedPovm) -> Vec<f64> {
    let d = refined.dim() as f64;
    refined
        .vectors
        .iter()
        .zip(&refined.weights)
        .map(|(v, &y)| y * (1.0 - v.inner(lambda).norm_sqr()) / (d - 1.0))
        .collect()
}

/// Coarse-grained `p(a, b)`; each sample contributes `p_A(a|λ) p_B(b|λ)`.
pub fn simulate_barrett(d: usize, povm_a: &Povm, povm_b: &Povm, n: u64, seed: u64) -> Result<JointTable> {
    check_dim(d, povm_a)?;
    check_dim(d, povm_b)?;
    let ra = povm_refine(povm_a)?;
    let rb = povm_refine(povm_b)?;
    let (ka, kb) = (povm_a.len(), povm_b.len());
    let est = driver::estimate(n, seed, ka * kb, |rng, out| {
        let lambda = sample_sphere_cd(rng, d);
        let pa = ra.coarse_grain(&barrett_response_a(&lambda, &ra));
        let pb = rb.coarse_grain(&barrett_response_b(&lambda, &rb));
        for a in 0..ka {
            for b in 0..kb {
                out[a * kb + b] = pa[a] * pb[b];
            }
        }
    })?;
    JointTable::new((0..ka as i64).collect(), (0..kb as i64).collect(), est)
}
