//! Named bipartite states, the flip-operator witness, analytic twirling and
//! the state-lifting map used to extend projective models to POVMs.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qmat::{
    flip, is_density, partial_trace, tensor, CMatrix, DensityCheck, Ket, Side, C64, ZERO,
};

/// A positive unit-trace operator on `C^dA ⊗ C^dB`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    da: usize,
    db: usize,
}

impl DensityMatrix {
    /// Validates `matrix` with [`is_density`] and the dimension split.
    pub fn new(matrix: CMatrix, da: usize, db: usize) -> Result<Self> {
        if da == 0 || db == 0 || matrix.dim() != da * db {
            return Err(Error::DimensionMismatch {
                expected: da * db,
                found: matrix.dim(),
            });
        }
        let check = is_density(&matrix);
        if !check.is_density {
            return Err(Error::InvalidState(describe(&check)));
        }
        Ok(Self { matrix, da, db })
    }

    /// Single-system state, stored as `C^d ⊗ C^1`.
    pub fn local(matrix: CMatrix) -> Result<Self> {
        let d = matrix.dim();
        Self::new(matrix, d, 1)
    }

    pub fn from_pure(psi: &Ket, da: usize, db: usize) -> Result<Self> {
        Self::new(psi.normalized().projector(), da, db)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim_a(&self) -> usize {
        self.da
    }

    pub fn dim_b(&self) -> usize {
        self.db
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Alice's reduced state `tr_B ρ`.
    pub fn reduced_a(&self) -> CMatrix {
        partial_trace(&self.matrix, self.da, self.db, Side::B).expect("dims checked on construction")
    }

    /// Bob's reduced state `tr_A ρ`.
    pub fn reduced_b(&self) -> CMatrix {
        partial_trace(&self.matrix, self.da, self.db, Side::A).expect("dims checked on construction")
    }

    /// Keeps the block spanned by `keep_a ⊗ keep_b`. The block must carry
    /// the whole trace (within 1e-10).
    pub fn restrict(&self, keep_a: &[usize], keep_b: &[usize]) -> Result<DensityMatrix> {
        if keep_a.iter().any(|&i| i >= self.da) || keep_b.iter().any(|&i| i >= self.db) {
            return Err(Error::param("keep", "basis index out of range"));
        }
        let indices: Vec<usize> = keep_a
            .iter()
            .flat_map(|&a| keep_b.iter().map(move |&b| a * self.db + b))
            .collect();
        let block = self.matrix.submatrix(&indices);
        let weight = block.trace().re;
        if (weight - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "block carries trace {weight}, not the full state"
            )));
        }
        DensityMatrix::new(block, keep_a.len(), keep_b.len())
    }

    /// Embeds the state into larger local spaces; the old basis vectors
    /// keep their labels.
    pub fn embed(&self, new_da: usize, new_db: usize) -> Result<DensityMatrix> {
        if new_da < self.da || new_db < self.db {
            return Err(Error::param("embed", "target dimensions must not shrink"));
        }
        let mut out = CMatrix::zeros(new_da * new_db);
        for a in 0..self.da {
            for b in 0..self.db {
                for a2 in 0..self.da {
                    for b2 in 0..self.db {
                        out[(a * new_db + b, a2 * new_db + b2)] =
                            self.matrix[(a * self.db + b, a2 * self.db + b2)];
                    }
                }
            }
        }
        DensityMatrix::new(out, new_da, new_db)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn describe(check: &DensityCheck) -> String {
    format!(
        "hermitian deviation {:.3e}, min eigenvalue {:.3e}, trace {:.12}",
        check.hermitian_deviation, check.min_eigenvalue, check.trace
    )
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    #[serde(rename = "dA")]
    da: usize,
    #[serde(rename = "dB")]
    db: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DensityMatrixJson {
            da: self.da,
            db: self.db,
            entries: self.matrix.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = DensityMatrixJson::deserialize(deserializer)?;
        let entries = raw.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        let matrix = CMatrix::from_entries(entries).map_err(serde::de::Error::custom)?;
        DensityMatrix::new(matrix, raw.da, raw.db).map_err(serde::de::Error::custom)
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&value) {
        return Err(Error::param(name, format!("{value} is outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::param("d", format!("local dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// `|Ψ₋⟩ = (|01⟩ − |10⟩)/√2`.
pub fn singlet_ket() -> Ket {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ket::from_real(&[0.0, s, -s, 0.0])
}

/// Antisymmetric pair state `(|ij⟩ − |ji⟩)/√2` in `C^d ⊗ C^d`.
pub fn antisymmetric_pair(d: usize, i: usize, j: usize) -> Ket {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![ZERO; d * d];
    amps[i * d + j] += C64::new(s, 0.0);
    amps[j * d + i] -= C64::new(s, 0.0);
    Ket::new(amps)
}

pub fn singlet() -> DensityMatrix {
    DensityMatrix::from_pure(&singlet_ket(), 2, 2).expect("singlet is a valid state")
}

/// `I/(dA dB)`.
pub fn maximally_mixed(da: usize, db: usize) -> DensityMatrix {
    let n = da * db;
    DensityMatrix::new(CMatrix::identity(n).scale(1.0 / n as f64), da, db)
        .expect("maximally mixed state is valid")
}

/// Product state `ρ_A ⊗ ρ_B`.
pub fn product(rho_a: &CMatrix, rho_b: &CMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(tensor(rho_a, rho_b), rho_a.dim(), rho_b.dim())
}

/// Werner state with flip expectation `φ`:
/// `W = ((d − φ) I + (dφ − 1) V) / (d³ − d)`.
pub fn werner_phi(d: usize, phi: f64) -> Result<DensityMatrix> {
    check_dim(d)?;
    check_range("phi", phi, -1.0, 1.0)?;
    let df = d as f64;
    let norm = df * df * df - df;
    let w = &CMatrix::identity(d * d).scale((df - phi) / norm) + &flip(d)?.scale((df * phi - 1.0) / norm);
    DensityMatrix::new(w, d, d)
}

/// Flip parameter of the entangled Werner state that admits the
/// projective local model: `φ = −1 + (1 + d)/d²`.
pub fn werner_local_phi(d: usize) -> f64 {
    let df = d as f64;
    -1.0 + (1.0 + df) / (df * df)
}

/// `W_local = ((d + 1)/d³) I − (1/d²) V`.
pub fn werner_local(d: usize) -> Result<DensityMatrix> {
    check_dim(d)?;
    let df = d as f64;
    let w = &CMatrix::identity(d * d).scale((df + 1.0) / (df * df * df))
        - &flip(d)?.scale(1.0 / (df * df));
    DensityMatrix::new(w, d, d)
}

/// `α|Ψ₋⟩⟨Ψ₋| + (1 − α) I₄/4`.
pub fn werner2x2(alpha: f64) -> Result<DensityMatrix> {
    check_range("alpha", alpha, 0.0, 1.0)?;
    let m = &singlet().matrix.scale(alpha) + &CMatrix::identity(4).scale((1.0 - alpha) / 4.0);
    DensityMatrix::new(m, 2, 2)
}

/// Mixing weight of the POVM-local state:
/// `α = (d − 1)^(d−1) (3d − 1) / ((d + 1) d^d)`.
pub fn barrett_alpha(d: usize) -> f64 {
    let df = d as f64;
    (df - 1.0).powi(d as i32 - 1) * (3.0 * df - 1.0) / ((df + 1.0) * df.powi(d as i32))
}

/// Normalized projector onto the antisymmetric subspace of `C^d ⊗ C^d`.
pub fn antisymmetric_projector(d: usize) -> CMatrix {
    let mut p = CMatrix::zeros(d * d);
    for i in 0..d {
        for j in (i + 1)..d {
            p = &p + &antisymmetric_pair(d, i, j).projector();
        }
    }
    let df = d as f64;
    p.scale(2.0 / (df * (df - 1.0)))
}

/// `α · P_anti + (1 − α) I/d²` with `α` from [`barrett_alpha`].
pub fn barrett_state(d: usize) -> Result<DensityMatrix> {
    check_dim(d)?;
    let alpha = barrett_alpha(d);
    let n = d * d;
    let m = &antisymmetric_projector(d).scale(alpha) + &CMatrix::identity(n).scale((1.0 - alpha) / n as f64);
    DensityMatrix::new(m, d, d)
}

/// `q|Ψ₋⟩⟨Ψ₋| + (1 − q)|0⟩⟨0| ⊗ I/2`.
pub fn rho_g(q: f64) -> Result<DensityMatrix> {
    check_range("q", q, 0.0, 1.0)?;
    let flag = tensor(&Ket::basis(2, 0).projector(), &CMatrix::identity(2).scale(0.5));
    let m = &singlet().matrix.scale(q) + &flag.scale(1.0 - q);
    DensityMatrix::new(m, 2, 2)
}

/// [`rho_g`] lifted with `σ_A = σ_B = |0⟩⟨0|`.
pub fn rho_g_prime(q: f64) -> Result<DensityMatrix> {
    let zero = Ket::basis(2, 0).projector();
    lift_state(&rho_g(q)?, &zero, &zero)
}

/// `q|Ψ₋⟩⟨Ψ₋| + (1 − q)|2⟩⟨2| ⊗ I₂/2` on `C³ ⊗ C²`; the singlet lives in
/// `span{|0⟩, |1⟩}` of the qutrit.
pub fn rho_e(q: f64) -> Result<DensityMatrix> {
    check_range("q", q, 0.0, 1.0)?;
    let embedded = singlet().embed(3, 2)?;
    let flag = tensor(&Ket::basis(3, 2).projector(), &CMatrix::identity(2).scale(0.5));
    let m = &embedded.matrix.scale(q) + &flag.scale(1.0 - q);
    DensityMatrix::new(m, 3, 2)
}

/// [`rho_e`] with Bob's qubit embedded in `C³`, lifted with
/// `σ_A = σ_B = |2⟩⟨2|`.
pub fn rho_e_lifted(q: f64) -> Result<DensityMatrix> {
    let flag = Ket::basis(3, 2).projector();
    lift_state(&rho_e(q)?.embed(3, 3)?, &flag, &flag)
}

/// `tr(V ρ)`.
pub fn flip_witness(rho: &DensityMatrix) -> Result<f64> {
    if rho.da != rho.db {
        return Err(Error::DimensionMismatch {
            expected: rho.da,
            found: rho.db,
        });
    }
    Ok(flip(rho.da)?.trace_product(&rho.matrix).re)
}

/// Projection onto the `U ⊗ U`-invariant family: the Werner state with the
/// same flip expectation as `a`.
pub fn twirl(a: &CMatrix, d: usize) -> Result<DensityMatrix> {
    let state = DensityMatrix::new(a.clone(), d, d)?;
    let phi = flip_witness(&state)?.clamp(-1.0, 1.0);
    werner_phi(d, phi)
}

/// `ρ′ = [ρ₀ + (d−1)(ρ_A⊗σ_B + σ_A⊗ρ_B) + (d−1)² σ_A⊗σ_B] / d²`.
pub fn lift_state(rho0: &DensityMatrix, sigma_a: &CMatrix, sigma_b: &CMatrix) -> Result<DensityMatrix> {
    let d = rho0.da;
    if rho0.db != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.db,
        });
    }
    for sigma in [sigma_a, sigma_b] {
        if sigma.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: sigma.dim(),
            });
        }
        let check = is_density(sigma);
        if !check.is_density {
            return Err(Error::InvalidState(describe(&check)));
        }
    }
    let k = (d - 1) as f64;
    let rho_a = rho0.reduced_a();
    let rho_b = rho0.reduced_b();
    let cross = &tensor(&rho_a, sigma_b) + &tensor(sigma_a, &rho_b);
    let m = &(&rho0.matrix + &cross.scale(k)) + &tensor(sigma_a, sigma_b).scale(k * k);
    DensityMatrix::new(m.scale(1.0 / (d * d) as f64), d, d)
}

/// Random states used as test inputs and in the CLI.
pub mod random {
    use rand::Rng;
    use rand_distr::StandardNormal;

    use super::*;

    pub fn gaussian_complex(rng: &mut (impl Rng + ?Sized)) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    /// Haar-random unit vector in `C^d`.
    pub fn pure_state(rng: &mut (impl Rng + ?Sized), d: usize) -> Ket {
        Ket::new((0..d).map(|_| gaussian_complex(rng)).collect()).normalized()
    }

    /// Haar-random unitary; its columns form a random orthonormal basis.
    pub fn unitary(rng: &mut (impl Rng + ?Sized), d: usize) -> CMatrix {
        let columns = orthonormal_basis(rng, d);
        let mut u = CMatrix::zeros(d);
        for (j, col) in columns.iter().enumerate() {
            for i in 0..d {
                u[(i, j)] = col.amplitudes()[i];
            }
        }
        u
    }

    /// Gram–Schmidt on complex Gaussian vectors.
    pub fn orthonormal_basis(rng: &mut (impl Rng + ?Sized), d: usize) -> Vec<Ket> {
        let mut basis: Vec<Ket> = Vec::with_capacity(d);
        while basis.len() < d {
            let mut v = Ket::new((0..d).map(|_| gaussian_complex(rng)).collect());
            for _ in 0..2 {
                for b in &basis {
                    v = v.sub(&b.scale(b.inner(&v)));
                }
            }
            if v.norm() > 1e-8 {
                basis.push(v.normalized());
            }
        }
        basis
    }

    /// Ginibre-distributed full-rank mixed state.
    pub fn density(rng: &mut (impl Rng + ?Sized), da: usize, db: usize) -> DensityMatrix {
        let n = da * db;
        let g = CMatrix::from_entries((0..n * n).map(|_| gaussian_complex(rng)).collect())
            .expect("square");
        let m = &g * &g.dagger();
        let t = m.trace().re;
        DensityMatrix::new(m.scale(1.0 / t), da, db).expect("Ginibre states are valid")
    }

    /// Pure product state `|a⟩⟨a| ⊗ |b⟩⟨b|` with Haar-random factors.
    pub fn pure_product(rng: &mut (impl Rng + ?Sized), da: usize, db: usize) -> DensityMatrix {
        let psi = pure_state(rng, da).tensor(&pure_state(rng, db));
        DensityMatrix::from_pure(&psi, da, db).expect("product of unit vectors")
    }

    /// Convex mixture of between 1 and `max_terms` random pure product
    /// states with uniformly drawn (then normalized) weights.
    pub fn separable(rng: &mut (impl Rng + ?Sized), da: usize, db: usize, max_terms: usize) -> DensityMatrix {
        let terms = rng.random_range(1..=max_terms.max(1));
        let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let mut m = CMatrix::zeros(da * db);
        for w in weights {
            m = &m + &pure_product(rng, da, db).matrix.scale(w / total);
        }
        DensityMatrix::new(m, da, db).expect("mixture of states")
    }

    /// Local-unitary conjugation `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn local_unitary_conjugate(rho: &DensityMatrix, ua: &CMatrix, ub: &CMatrix) -> DensityMatrix {
        let u = tensor(ua, ub);
        let m = &(&u * &rho.matrix) * &u.dagger();
        DensityMatrix::new(m, rho.da, rho.db).expect("unitary conjugation preserves states")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{hermitian_eig, partial_transpose};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-12;

    #[test]
    fn singlet_properties() {
        let s = singlet();
        assert!((s.matrix().trace().re - 1.0).abs() < TOL);
        assert!((flip_witness(&s).unwrap() + 1.0).abs() < TOL);
        assert!(s.reduced_a().max_abs_diff(&CMatrix::identity(2).scale(0.5)) < TOL);
    }

    #[test]
    fn werner_phi_has_requested_flip_expectation() {
        let w1 = werner_phi(2, 1.0).unwrap();
        assert!((flip_witness(&w1).unwrap() - 1.0).abs() < TOL);
        assert!(werner_phi(2, 1.5).is_err());
        assert!(werner_phi(1, 0.0).is_err());
    }

    #[test]
    fn werner_joint_probability_for_equal_rank_one_projectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=5 {
            for &phi in &[-1.0, -0.3, 0.0, 0.7] {
                let w = werner_phi(d, phi).unwrap();
                let p = random::pure_state(&mut rng, d).projector();
                let joint = w.matrix().trace_product(&tensor(&p, &p)).re;
                let df = d as f64;
                assert!((joint - (1.0 + phi) / (df * (df + 1.0))).abs() < TOL);
            }
        }
    }

    #[test]
    fn werner_phi_quarter_is_werner2x2_half() {
        let a = werner_phi(2, -0.25).unwrap();
        let b = werner2x2(0.5).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < TOL);
    }

    #[test]
    fn werner_local_parameters() {
        assert!((werner_local_phi(2) + 0.25).abs() < TOL);
        assert!((werner_local_phi(3) + 5.0 / 9.0).abs() < TOL);
        for d in 2..=6 {
            let closed = werner_local(d).unwrap();
            let param = werner_phi(d, werner_local_phi(d)).unwrap();
            assert!(closed.matrix().max_abs_diff(param.matrix()) < TOL, "d={d}");
        }
        let w5 = werner_local(5).unwrap();
        assert!((flip_witness(&w5).unwrap() + 0.76).abs() < TOL);
        assert!(is_density(werner_phi(3, -5.0 / 9.0).unwrap().matrix()).is_density);
    }

    #[test]
    fn werner2x2_endpoints() {
        let w0 = werner2x2(0.0).unwrap();
        assert!(w0.matrix().max_abs_diff(&CMatrix::identity(4).scale(0.25)) < TOL);
        let w1 = werner2x2(1.0).unwrap();
        assert!(w1.matrix().max_abs_diff(singlet().matrix()) < TOL);
    }

    #[test]
    fn barrett_state_properties() {
        assert!((barrett_alpha(2) - 5.0 / 12.0).abs() < TOL);
        assert!(antisymmetric_projector(2).max_abs_diff(singlet().matrix()) < TOL);
        for d in 2..=6 {
            assert!(barrett_state(d).is_ok());
            assert!(barrett_alpha(d) > 1.0 / (1.0 + d as f64));
        }
    }

    #[test]
    fn rho_g_witness_and_endpoints() {
        let r0 = rho_g(0.0).unwrap();
        let expected = tensor(&Ket::basis(2, 0).projector(), &CMatrix::identity(2).scale(0.5));
        assert!(r0.matrix().max_abs_diff(&expected) < TOL);
        for &q in &[0.0, 0.1, 0.25, 0.5, 0.9, 1.0] {
            let w = flip_witness(&rho_g(q).unwrap()).unwrap();
            assert!((w - (-q + (1.0 - q) / 2.0)).abs() < TOL);
        }
        assert!(flip_witness(&rho_g(1.0 / 3.0).unwrap()).unwrap().abs() < TOL);
    }

    #[test]
    fn rho_g_is_npt_for_positive_q() {
        let pt = partial_transpose(rho_g(0.2).unwrap().matrix(), 2, 2, Side::B).unwrap();
        assert!(hermitian_eig(&pt).unwrap().min_eigenvalue() < 0.0);
    }

    #[test]
    fn rho_g_prime_matches_explicit_mixture() {
        let zero = Ket::basis(2, 0).projector();
        let half = CMatrix::identity(2).scale(0.5);
        for &q in &[0.0, 0.2, 0.4, 0.5] {
            let explicit = &(&(&singlet().matrix().scale(q)
                + &tensor(&zero, &half).scale(2.0 - q))
                + &tensor(&half, &zero).scale(q))
                + &tensor(&zero, &zero).scale(2.0 - q);
            let lifted = rho_g_prime(q).unwrap();
            assert!(lifted.matrix().max_abs_diff(&explicit.scale(0.25)) < TOL);
        }
    }

    #[test]
    fn rho_e_shapes_and_lift() {
        let e1 = rho_e(1.0).unwrap();
        assert_eq!((e1.dim_a(), e1.dim_b()), (3, 2));
        assert!(e1.restrict(&[0, 1], &[0, 1]).unwrap().matrix().max_abs_diff(singlet().matrix()) < TOL);
        let e0 = rho_e(0.0).unwrap();
        let flag = tensor(&Ket::basis(3, 2).projector(), &CMatrix::identity(2).scale(0.5));
        assert!(e0.matrix().max_abs_diff(&flag) < TOL);

        let q = 0.3;
        let two = Ket::basis(3, 2).projector();
        let block_id = CMatrix::diagonal(&[0.5, 0.5, 0.0]);
        let singlet3 = singlet().embed(3, 3).unwrap();
        let explicit = &(&(&singlet3.matrix().scale(q) + &tensor(&two, &block_id).scale(3.0 - q))
            + &tensor(&block_id, &two).scale(2.0 * q))
            + &tensor(&two, &two).scale(6.0 - 2.0 * q);
        let lifted = rho_e_lifted(q).unwrap();
        assert!(lifted.matrix().max_abs_diff(&explicit.scale(1.0 / 9.0)) < TOL);
    }

    #[test]
    fn witness_on_product_basis_states() {
        let a = Ket::basis(3, 0);
        let b = Ket::basis(3, 1);
        let orth = DensityMatrix::from_pure(&a.tensor(&b), 3, 3).unwrap();
        assert!(flip_witness(&orth).unwrap().abs() < TOL);
        let same = DensityMatrix::from_pure(&a.tensor(&a), 3, 3).unwrap();
        assert!((flip_witness(&same).unwrap() - 1.0).abs() < TOL);
        assert!(flip_witness(&rho_e(0.5).unwrap()).is_err());
    }

    #[test]
    fn twirl_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = 3;
        // Orthogonal local factors give W₀.
        let rho = tensor(&Ket::basis(d, 0).projector(), &Ket::basis(d, 1).projector());
        let t = twirl(&rho, d).unwrap();
        assert!(t.matrix().max_abs_diff(werner_phi(d, 0.0).unwrap().matrix()) < TOL);
        // Identical pure factors give W₁.
        let psi = random::pure_state(&mut rng, d);
        let t = twirl(&tensor(&psi.projector(), &psi.projector()), d).unwrap();
        assert!(t.matrix().max_abs_diff(werner_phi(d, 1.0).unwrap().matrix()) < TOL);
        // Idempotent on Werner states.
        let w = werner_local(d).unwrap();
        let t = twirl(w.matrix(), d).unwrap();
        assert!(t.matrix().max_abs_diff(w.matrix()) < TOL);
        assert!(twirl(&CMatrix::identity(9), 3).is_err());
    }

    #[test]
    fn twirl_preserves_flip_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for d in 2..=4 {
            for _ in 0..10 {
                let rho = random::density(&mut rng, d, d);
                let t = twirl(rho.matrix(), d).unwrap();
                assert!((flip_witness(&t).unwrap() - flip_witness(&rho).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lift_rejects_mismatched_dims() {
        let zero3 = Ket::basis(3, 0).projector();
        let zero2 = Ket::basis(2, 0).projector();
        assert!(lift_state(&rho_g(0.3).unwrap(), &zero3, &zero2).is_err());
        assert!(lift_state(&rho_e(0.3).unwrap(), &zero3, &zero3).is_err());
    }

    #[test]
    fn lift_of_product_is_separable_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random::pure_product(&mut rng, 2, 2);
        let sa = random::pure_state(&mut rng, 2).projector();
        let sb = random::pure_state(&mut rng, 2).projector();
        let lifted = lift_state(&rho, &sa, &sb).unwrap();
        assert!(flip_witness(&lifted).unwrap() >= -1e-12);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let w = werner_local(3).unwrap();
        let text = w.to_json();
        assert!(text.contains("\"dA\":3"));
        let back = DensityMatrix::from_json(&text).unwrap();
        assert_eq!(back, w);
        let bad = r#"{"dA":1,"dB":2,"entries":[[1,0],[0,0],[0,0],[1,0]]}"#;
        assert!(DensityMatrix::from_json(bad).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(50))]

            #[test]
            fn werner_flip_expectation(d in 2usize..7, phi in -1.0f64..=1.0) {
                let w = werner_phi(d, phi).unwrap();
                prop_assert!((flip_witness(&w).unwrap() - phi).abs() < 1e-12);
            }

            #[test]
            fn lift_output_is_a_state(seed in any::<u64>(), d in 2usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random::density(&mut rng, d, d);
                let sa = random::density(&mut rng, d, 1).into_matrix();
                let sb = random::density(&mut rng, d, 1).into_matrix();
                let lifted = lift_state(&rho, &sa, &sb).unwrap();
                prop_assert!((lifted.matrix().trace().re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flip_witness_is_nonnegative_on_separable_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..100 {
            let d = 2 + i % 3;
            let rho = random::separable(&mut rng, d, d, 8);
            assert!(flip_witness(&rho).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn every_constructor_yields_a_density_matrix() {
        let states = [
            singlet(),
            werner_phi(4, -0.6).unwrap(),
            werner_local(6).unwrap(),
            werner2x2(0.3).unwrap(),
            barrett_state(4).unwrap(),
            rho_g(0.45).unwrap(),
            rho_g_prime(0.45).unwrap(),
            rho_e(0.7).unwrap(),
            rho_e_lifted(0.7).unwrap(),
        ];
        for s in &states {
            assert!(is_density(s.matrix()).is_density);
        }
    }
}
