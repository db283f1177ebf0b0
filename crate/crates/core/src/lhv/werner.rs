//! Werner's model for projective measurements on the entangled Werner state
//! with `φ = −1 + (1 + d)/d²`.

use crate::error::{Error, Result};
use crate::measure::ProjectiveMeasurement;
use crate::qmat::Ket;

use super::driver::{self, JointTable, McEstimate};
use super::sample_sphere_cd;

fn check(d: usize, m: &ProjectiveMeasurement) -> Result<()> {
    if m.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.dim(),
        });
    }
    Ok(())
}

/// Outcome whose projector has the smallest overlap with `λ`; ties go to
/// the lowest index.
pub fn werner_alice_outcome(lambda: &Ket, proj: &ProjectiveMeasurement) -> usize {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (k, p) in proj.projectors().iter().enumerate() {
        let v = p.expectation(lambda);
        if v < best_value {
            best = k;
            best_value = v;
        }
    }
    best
}

/// Alice's deterministic response: 1 iff `a` minimizes `⟨λ|P_k|λ⟩`.
pub fn werner_response_a(a: usize, lambda: &Ket, proj: &ProjectiveMeasurement) -> f64 {
    if werner_alice_outcome(lambda, proj) == a {
        1.0
    } else {
        0.0
    }
}

/// Bob answers quantum mechanically: `⟨λ|Q_b|λ⟩`.
pub fn werner_response_b(b: usize, lambda: &Ket, proj: &ProjectiveMeasurement) -> f64 {
    proj.projectors()[b].expectation(lambda)
}

/// Estimates `p(a, b)`; each sample contributes `p_A(a|λ) p_B(b|λ)`.
pub fn simulate_werner(
    d: usize,
    proj_a: &ProjectiveMeasurement,
    proj_b: &ProjectiveMeasurement,
    n: u64,
    seed: u64,
) -> Result<JointTable> {
    check(d, proj_a)?;
    check(d, proj_b)?;
    let (ka, kb) = (proj_a.len(), proj_b.len());
    let est = driver::estimate(n, seed, ka * kb, |rng, out| {
        let lambda = sample_sphere_cd(rng, d);
        let a = werner_alice_outcome(&lambda, proj_a);
        for b in 0..kb {
            out[a * kb + b] = werner_response_b(b, &lambda, proj_b);
        }
    })?;
    JointTable::new((0..ka as i64).collect(), (0..kb as i64).collect(), est)
}

/// Estimates `∫ 1{a wins} ⟨λ|P_a|λ⟩ dλ`, which equals `1/d³`.
pub fn simplex_integral_mc(d: usize, a: usize, proj: &ProjectiveMeasurement, n: u64, seed: u64) -> Result<McEstimate> {
    check(d, proj)?;
    if a >= proj.len() {
        return Err(Error::param("a", format!("outcome {a} out of range")));
    }
    let est = driver::estimate(n, seed, 1, |rng, out| {
        let lambda = sample_sphere_cd(rng, d);
        if werner_alice_outcome(&lambda, proj) == a {
            out[0] = proj.projectors()[a].expectation(&lambda);
        }
    })?;
    Ok(est[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::driver::SampleRng;
    use crate::qmat::tensor;
    use crate::states::{random, werner_local_phi};
    use rand::SeedableRng;

    /// Closed-form joint probability for the Werner family and projectors.
    fn oracle(d: usize, pa: &ProjectiveMeasurement, qb: &ProjectiveMeasurement) -> Vec<Vec<f64>> {
        let df = d as f64;
        let phi = werner_local_phi(d);
        pa.projectors()
            .iter()
            .map(|p| {
                qb.projectors()
                    .iter()
                    .map(|q| {
                        let (tp, tq, tpq) = (p.trace().re, q.trace().re, p.trace_product(q).re);
                        ((df - phi) * tp * tq + (df * phi - 1.0) * tpq) / (df * df * df - df)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn eigenvector_of_projector_loses() {
        let m = ProjectiveMeasurement::computational(2);
        assert_eq!(werner_response_a(0, &Ket::basis(2, 0), &m), 0.0);
        assert_eq!(werner_response_a(1, &Ket::basis(2, 0), &m), 1.0);
        assert_eq!(werner_response_b(0, &Ket::basis(2, 0), &m), 1.0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let m = ProjectiveMeasurement::computational(3);
        let lambda = Ket::from_real(&[0.0, 0.0, 1.0]);
        assert_eq!(werner_alice_outcome(&lambda, &m), 0);
    }

    #[test]
    fn responses_are_normalized() {
        let mut rng = SampleRng::seed_from_u64(1);
        let m = ProjectiveMeasurement::random_basis(&mut rng, 3);
        for _ in 0..100_000 {
            let lambda = sample_sphere_cd(&mut rng, 3);
            let sa: f64 = (0..3).map(|a| werner_response_a(a, &lambda, &m)).sum();
            let sb: f64 = (0..3).map(|b| werner_response_b(b, &lambda, &m)).sum();
            assert_eq!(sa, 1.0);
            assert!((sb - 1.0).abs() < 1e-12);
            assert!((0..3).all(|b| werner_response_b(b, &lambda, &m) >= -1e-15));
        }
    }

    #[test]
    fn bob_response_is_covariant() {
        let mut rng = SampleRng::seed_from_u64(2);
        let u = random::unitary(&mut rng, 3);
        let lambda = sample_sphere_cd(&mut rng, 3);
        let q = random::pure_state(&mut rng, 3).projector();
        let rotated = &(&u.dagger() * &q) * &u;
        let lhs = rotated.expectation(&lambda);
        let rhs = q.expectation(&u.mul_ket(&lambda));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn equal_projectors_d2() {
        let m = ProjectiveMeasurement::computational(2);
        let t = simulate_werner(2, &m, &m, 1_000_000, 3).unwrap();
        assert!(t.get(0, 0).within(0.125, 5.0));
        assert!(t.get(1, 1).within(0.125, 5.0));
    }

    #[test]
    fn random_pairs_match_closed_form() {
        let mut rng = SampleRng::seed_from_u64(4);
        for d in [2, 3] {
            let pa = ProjectiveMeasurement::random_basis(&mut rng, d);
            let qb = ProjectiveMeasurement::random_basis(&mut rng, d);
            let t = simulate_werner(d, &pa, &qb, 400_000, 5).unwrap();
            let rows = t.compare(&oracle(d, &pa, &qb)).unwrap();
            assert!(driver::max_sigma_ratio(&rows) <= 5.0, "{rows:?}");
            for m in t.marginal_a().iter().chain(t.marginal_b().iter()) {
                assert!((m - 1.0 / d as f64).abs() < 0.01);
            }
            assert!((t.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_agrees_with_born_rule() {
        let mut rng = SampleRng::seed_from_u64(6);
        let w = crate::states::werner_local(3).unwrap();
        let pa = ProjectiveMeasurement::random_basis(&mut rng, 3);
        let qb = ProjectiveMeasurement::random_basis(&mut rng, 3);
        let o = oracle(3, &pa, &qb);
        for (i, p) in pa.projectors().iter().enumerate() {
            for (j, q) in qb.projectors().iter().enumerate() {
                let born = w.matrix().trace_product(&tensor(p, q)).re;
                assert!((born - o[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simplex_integral_values() {
        let m2 = ProjectiveMeasurement::computational(2);
        assert!(simplex_integral_mc(2, 0, &m2, 400_000, 7).unwrap().within(0.125, 5.0));
        let mut rng = SampleRng::seed_from_u64(8);
        for k in 0..5 {
            let m = ProjectiveMeasurement::random_basis(&mut rng, 3);
            let est = simplex_integral_mc(3, k % 3, &m, 200_000, 9 + k as u64).unwrap();
            assert!(est.within(1.0 / 27.0, 5.0), "{est:?}");
        }
        assert!(simplex_integral_mc(3, 3, &ProjectiveMeasurement::computational(3), 10, 0).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = ProjectiveMeasurement::computational(2);
        assert!(simulate_werner(3, &m, &m, 10, 0).is_err());
    }

    /// Two-sample Kolmogorov–Smirnov statistic.
    fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    #[test]
    fn haar_overlap_is_unitarily_invariant() {
        let mut rng = SampleRng::seed_from_u64(10);
        let d = 3;
        let p = random::pure_state(&mut rng, d).projector();
        let u = random::unitary(&mut rng, d);
        let rotated = &(&u * &p) * &u.dagger();
        let n = 100_000;
        let a: Vec<f64> = (0..n).map(|_| p.expectation(&sample_sphere_cd(&mut rng, d))).collect();
        let b: Vec<f64> = (0..n).map(|_| rotated.expectation(&sample_sphere_cd(&mut rng, d))).collect();
        let nf = n as f64;
        let critical = 1.949 * ((2.0 * nf) / (nf * nf)).sqrt();
        assert!(ks_statistic(a, b) < critical);
    }
}
