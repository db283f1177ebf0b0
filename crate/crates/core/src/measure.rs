//! Bloch-vector observables, projective measurements, POVMs, Born-rule
//! probabilities, measurement update and rank-1 POVM refinement.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{hermitian_eig, hermitian_fn, paulis, tensor, CMatrix, Ket, HERMITIAN_TOL, PSD_TOL};
use crate::states::{random, DensityMatrix};

/// Probabilities outside `[-PROB_TOL, 1 + PROB_TOL]` indicate a bug or
/// invalid input rather than rounding.
pub const PROB_TOL: f64 = 1e-10;

/// Eigenvalues of POVM elements below this are treated as zero.
pub const DROP_TOL: f64 = 1e-12;

/// Unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: BlochVector = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

    /// Checked constructor: the norm must be 1 within 1e-12.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::param("bloch", format!("norm {norm} is not 1")));
        }
        Ok(Self { x, y, z })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::param("bloch", "cannot normalize a zero vector"));
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Uniform on S² (normalized Gaussian triple).
    pub fn sample(rng: &mut (impl Rng + ?Sized)) -> Self {
        loop {
            let (x, y, z): (f64, f64, f64) =
                (rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
            if let Ok(v) = Self::normalized(x, y, z) {
                return v;
            }
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn dot_array(&self, v: &[f64; 3]) -> f64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }

    /// `v·σ`.
    pub fn sigma(&self) -> CMatrix {
        let [sx, sy, sz] = paulis();
        &(&sx.scale(self.x) + &sy.scale(self.y)) + &sz.scale(self.z)
    }

    /// Bloch vector `tr(Pσ)` of a rank-1 qubit projector.
    pub fn from_projector(p: &CMatrix) -> Result<Self> {
        let r = bloch_components(p)?;
        Self::normalized(r[0], r[1], r[2])
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> Self {
        v.to_array()
    }
}

impl std::ops::Neg for BlochVector {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// `(tr(Aσ_x), tr(Aσ_y), tr(Aσ_z))` for a 2×2 operator.
pub fn bloch_components(a: &CMatrix) -> Result<[f64; 3]> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: a.dim(),
        });
    }
    let [sx, sy, sz] = paulis();
    Ok([
        a.trace_product(&sx).re,
        a.trace_product(&sy).re,
        a.trace_product(&sz).re,
    ])
}

fn sum(ms: &[CMatrix]) -> CMatrix {
    let mut total = CMatrix::zeros(ms[0].dim());
    for m in ms {
        total = &total + m;
    }
    total
}

/// Orthogonal projectors summing to the identity, one real label each.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    projectors: Vec<CMatrix>,
    labels: Vec<f64>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<CMatrix>, labels: Vec<f64>) -> Result<Self> {
        if projectors.is_empty() || projectors.len() != labels.len() {
            return Err(Error::InvalidMeasurement(
                "need one label per projector and at least one projector".into(),
            ));
        }
        let d = projectors[0].dim();
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
            for (j, q) in projectors.iter().enumerate() {
                let prod = p * q;
                let target = if i == j { p.clone() } else { CMatrix::zeros(d) };
                if prod.max_abs_diff(&target) > HERMITIAN_TOL {
                    return Err(Error::InvalidMeasurement(format!(
                        "projectors {i} and {j} violate P_i P_j = δ_ij P_i"
                    )));
                }
            }
        }
        if sum(&projectors).max_abs_diff(&CMatrix::identity(d)) > HERMITIAN_TOL {
            return Err(Error::InvalidMeasurement("projectors do not sum to I".into()));
        }
        Ok(Self { projectors, labels })
    }

    /// Rank-1 projectors onto an orthonormal basis, labelled `0, 1, ...`.
    pub fn from_basis(basis: &[Ket]) -> Result<Self> {
        let projectors = basis.iter().map(Ket::projector).collect();
        Self::new(projectors, (0..basis.len()).map(|i| i as f64).collect())
    }

    pub fn computational(d: usize) -> Self {
        let basis: Vec<Ket> = (0..d).map(|i| Ket::basis(d, i)).collect();
        Self::from_basis(&basis).expect("computational basis is orthonormal")
    }

    /// Rank-1 measurement in a Haar-random basis.
    pub fn random_basis(rng: &mut (impl Rng + ?Sized), d: usize) -> Self {
        Self::from_basis(&random::orthonormal_basis(rng, d)).expect("orthonormal basis")
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            elements: self.projectors.clone(),
            labels: (0..self.len()).collect(),
        }
    }
}

/// Positive operators summing to the identity. Labels are opaque.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
    labels: Vec<usize>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidMeasurement("empty POVM".into()));
        }
        let d = elements[0].dim();
        for (i, m) in elements.iter().enumerate() {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
            let min = hermitian_eig(m)
                .map_err(|e| Error::InvalidMeasurement(format!("element {i}: {e}")))?
                .min_eigenvalue();
            if min < -PSD_TOL {
                return Err(Error::InvalidMeasurement(format!(
                    "element {i} has eigenvalue {min:.3e}"
                )));
            }
        }
        if sum(&elements).max_abs_diff(&CMatrix::identity(d)) > HERMITIAN_TOL {
            return Err(Error::InvalidMeasurement("elements do not sum to I".into()));
        }
        let labels = (0..elements.len()).collect();
        Ok(Self { elements, labels })
    }

    /// `k` elements `S^{-1/2} |v_i⟩⟨v_i| S^{-1/2}` from Gaussian vectors
    /// `v_i`, with `S = Σ |v_i⟩⟨v_i|`. Requires `k ≥ d`.
    pub fn random(rng: &mut (impl Rng + ?Sized), d: usize, k: usize) -> Result<Self> {
        if k < d {
            return Err(Error::param("k", format!("need at least {d} elements, got {k}")));
        }
        loop {
            let raw: Vec<CMatrix> = (0..k)
                .map(|_| {
                    Ket::new((0..d).map(|_| random::gaussian_complex(rng)).collect()).projector()
                })
                .collect();
            let s = sum(&raw);
            if hermitian_eig(&s)?.min_eigenvalue() < 1e-6 {
                continue;
            }
            let root = hermitian_fn(&s, |e| 1.0 / e.sqrt())?;
            let mut elements: Vec<CMatrix> = raw.iter().map(|a| &(&root * a) * &root).collect();
            for m in &mut elements {
                *m = (&*m + &m.dagger()).scale(0.5);
            }
            return Self::new(elements);
        }
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }
}

/// A Hermitian operator with its spectral measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
    measurement: ProjectiveMeasurement,
}

impl Observable {
    /// Groups eigenvalues that agree within 1e-9 into one projector.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let eig = hermitian_eig(&matrix)?;
        let d = matrix.dim();
        let mut projectors: Vec<CMatrix> = Vec::new();
        let mut labels: Vec<f64> = Vec::new();
        for (&e, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
            match labels.last() {
                Some(&last) if (last - e).abs() <= 1e-9 => {
                    let p = projectors.last_mut().expect("paired with label");
                    *p = &*p + &v.projector();
                }
                _ => {
                    projectors.push(v.projector());
                    labels.push(e);
                }
            }
        }
        debug_assert_eq!(projectors.iter().map(|p| p.trace().re).sum::<f64>().round() as usize, d);
        let measurement = ProjectiveMeasurement::new(projectors, labels)?;
        Ok(Self { matrix, measurement })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn measurement(&self) -> &ProjectiveMeasurement {
        &self.measurement
    }
}

/// `v·σ` with outcomes `+1, −1` and projectors `(I ± v·σ)/2`.
pub fn obs_from_bloch(v: &BlochVector) -> Observable {
    let s = v.sigma();
    let id = CMatrix::identity(2);
    let plus = (&id + &s).scale(0.5);
    let minus = (&id - &s).scale(0.5);
    let measurement =
        ProjectiveMeasurement::new(vec![plus, minus], vec![1.0, -1.0]).expect("v is a unit vector");
    Observable { matrix: s, measurement }
}

/// Clamps a probability after checking it is within [`PROB_TOL`] of [0, 1].
pub fn clamp_probability(p: f64) -> Result<f64> {
    if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
        return Err(Error::InvalidMeasurement(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `tr(ρ M_a ⊗ N_b)`.
pub fn born_joint(rho: &DensityMatrix, ma: &CMatrix, nb: &CMatrix) -> Result<f64> {
    if ma.dim() != rho.dim_a() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim_a(),
            found: ma.dim(),
        });
    }
    if nb.dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim_b(),
            found: nb.dim(),
        });
    }
    clamp_probability(rho.matrix().trace_product(&tensor(ma, nb)).re)
}

/// Full table `p[a][b] = tr(ρ M_a ⊗ N_b)`.
pub fn born_table(rho: &DensityMatrix, a: &[CMatrix], b: &[CMatrix]) -> Result<Vec<Vec<f64>>> {
    a.iter()
        .map(|ma| b.iter().map(|nb| born_joint(rho, ma, nb)).collect())
        .collect()
}

/// `Σ_{a,b} a·b·p(a,b)`, cross-checked against `tr(ρ A⊗B)`.
pub fn expectation_joint(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    let ma = a.measurement();
    let mb = b.measurement();
    let mut total = 0.0;
    for (pa, la) in ma.projectors().iter().zip(ma.labels()) {
        for (qb, lb) in mb.projectors().iter().zip(mb.labels()) {
            total += la * lb * born_joint(rho, pa, qb)?;
        }
    }
    let direct = rho.matrix().trace_product(&tensor(a.matrix(), b.matrix())).re;
    if (total - direct).abs() > 1e-9 {
        return Err(Error::InvalidMeasurement(format!(
            "probability sum {total} disagrees with trace formula {direct}"
        )));
    }
    Ok(total)
}

/// State after outcome `M_i`, or `None` when the outcome has probability 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PostMeasurement {
    pub state: Option<DensityMatrix>,
    pub probability: f64,
}

/// `M ρ M† / tr(M ρ M†)` for an operator on the full bipartite space.
pub fn post_measurement_state(rho: &DensityMatrix, m: &CMatrix) -> Result<PostMeasurement> {
    if m.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: m.dim(),
        });
    }
    let unnormalized = &(m * rho.matrix()) * &m.dagger();
    let probability = clamp_probability(unnormalized.trace().re)?;
    if probability < DROP_TOL {
        return Ok(PostMeasurement {
            state: None,
            probability,
        });
    }
    let mut normalized = unnormalized.scale(1.0 / probability);
    normalized = (&normalized + &normalized.dagger()).scale(0.5);
    let state = DensityMatrix::new(normalized, rho.dim_a(), rho.dim_b())?;
    Ok(PostMeasurement {
        state: Some(state),
        probability,
    })
}

/// A POVM rewritten as weighted rank-1 projectors `α_k |v_k⟩⟨v_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedPovm {
    pub weights: Vec<f64>,
    pub vectors: Vec<Ket>,
    /// Refined outcome index → coarse outcome index.
    pub back_map: Vec<usize>,
    pub coarse_len: usize,
}

impl RefinedPovm {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn projector(&self, k: usize) -> CMatrix {
        self.vectors[k].projector()
    }

    /// `α_k P_k`.
    pub fn element(&self, k: usize) -> CMatrix {
        self.projector(k).scale(self.weights[k])
    }

    pub fn to_povm(&self) -> Result<Povm> {
        Povm::new((0..self.len()).map(|k| self.element(k)).collect())
    }

    /// Sums refined probabilities into coarse outcomes.
    pub fn coarse_grain(&self, refined: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.coarse_len];
        for (k, p) in refined.iter().enumerate() {
            out[self.back_map[k]] += p;
        }
        out
    }
}

/// Spectral refinement of every element; eigenvalues below [`DROP_TOL`]
/// are dropped.
pub fn povm_refine(povm: &Povm) -> Result<RefinedPovm> {
    let mut weights = Vec::new();
    let mut vectors = Vec::new();
    let mut back_map = Vec::new();
    for (i, m) in povm.elements().iter().enumerate() {
        let eig = hermitian_eig(m)?;
        for (&e, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
            if e < DROP_TOL {
                continue;
            }
            weights.push(e.min(1.0));
            vectors.push(v.normalized());
            back_map.push(i);
        }
    }
    Ok(RefinedPovm {
        weights,
        vectors,
        back_map,
        coarse_len: povm.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{singlet, werner2x2, werner_local_phi, werner_phi};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sigma_z_from_bloch() {
        let obs = obs_from_bloch(&BlochVector::Z);
        assert!(obs.matrix().max_abs_diff(&crate::qmat::pauli_z()) < 1e-15);
        let m = obs.measurement();
        assert!(m.projectors()[0].max_abs_diff(&Ket::basis(2, 0).projector()) < 1e-15);
        assert!(m.projectors()[1].max_abs_diff(&Ket::basis(2, 1).projector()) < 1e-15);
    }

    #[test]
    fn bloch_constructors() {
        assert!(BlochVector::new(1.0, 1.0, 0.0).is_err());
        assert!(BlochVector::normalized(0.0, 0.0, 0.0).is_err());
        let v = BlochVector::normalized(1.0, 0.0, 1.0).unwrap();
        assert!((v.dot(&v) - 1.0).abs() < 1e-15);
        let json = serde_json::to_string(&BlochVector::X).unwrap();
        assert_eq!(json, "[1.0,0.0,0.0]");
        let back: BlochVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, BlochVector::X);
        assert!(serde_json::from_str::<BlochVector>("[2,0,0]").is_err());
    }

    #[test]
    fn bloch_probabilities_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let v = BlochVector::sample(&mut rng);
            let obs = obs_from_bloch(&v);
            let m = obs.measurement();
            let total = &m.projectors()[0] + &m.projectors()[1];
            assert!(total.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
            let psi = random::pure_state(&mut rng, 2);
            let e = obs.matrix().expectation(&psi);
            let p_plus = m.projectors()[0].expectation(&psi);
            assert!((p_plus - (1.0 + e) / 2.0).abs() < 1e-12);
            let p_minus = m.projectors()[1].expectation(&psi);
            assert!((p_plus + p_minus - 1.0).abs() < 1e-12);
            let back = BlochVector::from_projector(&m.projectors()[0]).unwrap();
            assert!((back.dot(&v) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_is_perfectly_anticorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = singlet();
        for _ in 0..10 {
            let v = BlochVector::sample(&mut rng);
            let obs = obs_from_bloch(&v);
            let p = &obs.measurement().projectors()[0];
            assert!(born_joint(&s, p, p).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn werner_joint_probability_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=4 {
            let phi = werner_local_phi(d);
            let w = werner_phi(d, phi).unwrap();
            let pa = ProjectiveMeasurement::random_basis(&mut rng, d);
            let qb = ProjectiveMeasurement::random_basis(&mut rng, d);
            let df = d as f64;
            for p in pa.projectors() {
                for q in qb.projectors() {
                    let overlap = p.trace_product(q).re;
                    let expected = ((df - phi) + (df * phi - 1.0) * overlap) / (df * df * df - df);
                    assert!((born_joint(&w, p, q).unwrap() - expected).abs() < 1e-12);
                }
            }
            let total: f64 = born_table(&w, pa.projectors(), qb.projectors())
                .unwrap()
                .iter()
                .flatten()
                .sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_measurement_has_probability_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::density(&mut rng, 3, 2);
        let p = born_joint(&rho, &CMatrix::identity(3), &CMatrix::identity(2)).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(born_joint(&rho, &CMatrix::identity(2), &CMatrix::identity(2)).is_err());
    }

    #[test]
    fn joint_expectations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = BlochVector::sample(&mut rng);
            let y = BlochVector::sample(&mut rng);
            let (a, b) = (obs_from_bloch(&x), obs_from_bloch(&y));
            let e = expectation_joint(&singlet(), &a, &b).unwrap();
            assert!((e + x.dot(&y)).abs() < 1e-12);
            let e = expectation_joint(&werner2x2(0.5).unwrap(), &a, &b).unwrap();
            assert!((e + x.dot(&y) / 2.0).abs() < 1e-12);
            let alpha = 0.37;
            let e = expectation_joint(&werner2x2(alpha).unwrap(), &a, &b).unwrap();
            assert!((e + alpha * x.dot(&y)).abs() < 1e-12);

            let ra = random::density(&mut rng, 2, 1).into_matrix();
            let rb = random::density(&mut rng, 2, 1).into_matrix();
            let prod = crate::states::product(&ra, &rb).unwrap();
            let ea = ra.trace_product(a.matrix()).re;
            let eb = rb.trace_product(b.matrix()).re;
            assert!((expectation_joint(&prod, &a, &b).unwrap() - ea * eb).abs() < 1e-12);
        }
    }

    #[test]
    fn observable_groups_degenerate_eigenvalues() {
        let obs = Observable::new(CMatrix::diagonal(&[1.0, 1.0, -1.0])).unwrap();
        assert_eq!(obs.measurement().len(), 2);
        assert_eq!(obs.measurement().labels(), &[1.0, -1.0]);
    }

    #[test]
    fn post_measurement_examples() {
        let psi = Ket::basis(2, 0).tensor(&Ket::basis(2, 1));
        let rho = DensityMatrix::from_pure(&psi, 2, 2).unwrap();
        let out = post_measurement_state(&rho, &psi.projector()).unwrap();
        assert!((out.probability - 1.0).abs() < 1e-15);
        assert!(out.state.unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let other = Ket::basis(2, 1).tensor(&Ket::basis(2, 0));
        let out = post_measurement_state(&rho, &other.projector()).unwrap();
        assert_eq!(out.probability, 0.0);
        assert!(out.state.is_none());
    }

    #[test]
    fn projective_validation() {
        let p = Ket::basis(2, 0).projector();
        assert!(ProjectiveMeasurement::new(vec![p.clone(), p.clone()], vec![1.0, -1.0]).is_err());
        assert!(ProjectiveMeasurement::new(vec![p], vec![1.0]).is_err());
        assert!(Povm::new(vec![CMatrix::identity(2).scale(0.5)]).is_err());
        assert!(Povm::new(vec![crate::qmat::pauli_z(), &CMatrix::identity(2) - &crate::qmat::pauli_z()]).is_err());
    }

    #[test]
    fn refine_projective_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = ProjectiveMeasurement::random_basis(&mut rng, 3);
        let r = povm_refine(&m.to_povm()).unwrap();
        assert_eq!(r.len(), 3);
        for k in 0..3 {
            assert!((r.weights[k] - 1.0).abs() < 1e-12);
            assert!(r.element(k).max_abs_diff(&m.projectors()[k]) < 1e-12);
            assert_eq!(r.back_map[k], k);
        }
    }

    #[test]
    fn refine_half_identity() {
        let half = CMatrix::identity(2).scale(0.5);
        let povm = Povm::new(vec![half.clone(), half]).unwrap();
        let r = povm_refine(&povm).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(r.back_map, vec![0, 0, 1, 1]);
        for &w in &r.weights {
            assert!((w - 0.5).abs() < 1e-12);
        }
        assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_elements_drop_zero_eigenvalues() {
        let povm = Povm::new(vec![
            Ket::basis(3, 0).projector(),
            CMatrix::diagonal(&[0.0, 1.0, 1.0]),
        ])
        .unwrap();
        let r = povm_refine(&povm).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r.back_map, vec![0, 1, 1]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn refined_povm_invariants(seed in any::<u64>(), d in 2usize..4, extra in 0usize..3) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let povm = Povm::random(&mut rng, d, d + extra).unwrap();
                let r = povm_refine(&povm).unwrap();
                for k in 0..r.len() {
                    prop_assert!(r.weights[k] > 0.0 && r.weights[k] <= 1.0);
                    prop_assert!((r.projector(k).trace().re - 1.0).abs() < 1e-10);
                }
                prop_assert!((r.weights.iter().sum::<f64>() - d as f64).abs() < 1e-10);
                let total = sum(&(0..r.len()).map(|k| r.element(k)).collect::<Vec<_>>());
                prop_assert!(total.max_abs_diff(&CMatrix::identity(d)) < 1e-10);

                let rho = random::density(&mut rng, d, 1).into_matrix();
                let refined: Vec<f64> = (0..r.len()).map(|k| r.element(k).trace_product(&rho).re).collect();
                let coarse = r.coarse_grain(&refined);
                for (i, m) in povm.elements().iter().enumerate() {
                    prop_assert!((coarse[i] - m.trace_product(&rho).re).abs() < 1e-10);
                }
            }

            #[test]
            fn born_sums_to_one(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random::density(&mut rng, da, db);
                let a = Povm::random(&mut rng, da, da + 1).unwrap();
                let b = ProjectiveMeasurement::random_basis(&mut rng, db);
                let total: f64 = born_table(&rho, a.elements(), b.projectors()).unwrap().iter().flatten().sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }

            #[test]
            fn expectation_matches_trace(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random::density(&mut rng, 2, 2);
                let a = obs_from_bloch(&BlochVector::sample(&mut rng));
                let b = obs_from_bloch(&BlochVector::sample(&mut rng));
                let direct = rho.matrix().trace_product(&tensor(a.matrix(), b.matrix())).re;
                prop_assert!((expectation_joint(&rho, &a, &b).unwrap() - direct).abs() < 1e-10);
            }
        }
    }
}
