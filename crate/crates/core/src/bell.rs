//! CHSH values, the two-qubit correlation matrix, the Horodecki quantity
//! `M(ρ)` and settings that attain `2√M(ρ)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::BlochVector;
use crate::qmat::{paulis, tensor};
use crate::states::DensityMatrix;

/// Alice measures along `x` or `x′`, Bob along `y` or `y′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub x: BlochVector,
    #[serde(rename = "x'")]
    pub x_prime: BlochVector,
    pub y: BlochVector,
    #[serde(rename = "y'")]
    pub y_prime: BlochVector,
}

impl ChshSettings {
    /// `x = ẑ`, `x′ = x̂`, `y = −(x̂ + ẑ)/√2`, `y′ = (ẑ − x̂)/√2`; the singlet
    /// reaches `2√2` here.
    pub fn reference() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            x: BlochVector::Z,
            x_prime: BlochVector::X,
            y: BlochVector { x: -s, y: 0.0, z: -s },
            y_prime: BlochVector { x: -s, y: 0.0, z: s },
        }
    }

    /// The same experiment described with the parties swapped.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y_prime,
            x_prime: self.y,
            y: self.x_prime,
            y_prime: self.x,
        }
    }
}

/// `t[n][m] = tr(ρ σ_n ⊗ σ_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub t: [[f64; 3]; 3],
}

impl CorrelationMatrix {
    fn to_nalgebra(self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.t[i][j])
    }

    /// `xᵀ T y`, the correlator of `x·σ ⊗ y·σ`.
    pub fn correlator(&self, x: &BlochVector, y: &BlochVector) -> f64 {
        let xa = x.to_array();
        let ya = y.to_array();
        (0..3)
            .map(|n| (0..3).map(|m| xa[n] * self.t[n][m] * ya[m]).sum::<f64>())
            .sum()
    }

    /// CHSH combination evaluated through `T`; agrees with [`chsh_value`].
    pub fn chsh(&self, s: &ChshSettings) -> f64 {
        self.correlator(&s.x, &s.y) + self.correlator(&s.x_prime, &s.y) + self.correlator(&s.x_prime, &s.y_prime)
            - self.correlator(&s.x, &s.y_prime)
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (n, row) in t.iter_mut().enumerate() {
            for (m, v) in row.iter_mut().enumerate() {
                *v = self.t[m][n];
            }
        }
        Self { t }
    }
}

/// CHSH value, Horodecki quantity and the settings used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub value: f64,
    #[serde(rename = "M")]
    pub m_rho: f64,
    pub settings: ChshSettings,
    /// Two largest eigenvalues `[u, ũ]` of `TᵀT`.
    pub eigenvalues: [f64; 2],
}

impl ChshResult {
    /// `2√M`, the largest CHSH value over all settings.
    pub fn bound(&self) -> f64 {
        2.0 * self.m_rho.max(0.0).sqrt()
    }

    pub fn violates(&self) -> bool {
        self.m_rho > 1.0
    }
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::param(
            "rho",
            format!("CHSH needs a two-qubit state, got {}x{}", rho.dim_a(), rho.dim_b()),
        ));
    }
    Ok(())
}

/// `tr(ρ x·σ ⊗ y·σ)`.
pub fn correlator(rho: &DensityMatrix, x: &BlochVector, y: &BlochVector) -> Result<f64> {
    require_two_qubits(rho)?;
    Ok(rho.matrix().trace_product(&tensor(&x.sigma(), &y.sigma())).re)
}

/// `E(x,y) + E(x′,y) + E(x′,y′) − E(x,y′)`.
pub fn chsh_value(rho: &DensityMatrix, s: &ChshSettings) -> Result<f64> {
    Ok(correlator(rho, &s.x, &s.y)? + correlator(rho, &s.x_prime, &s.y)? + correlator(rho, &s.x_prime, &s.y_prime)?
        - correlator(rho, &s.x, &s.y_prime)?)
}

pub fn correlation_matrix(rho: &DensityMatrix) -> Result<CorrelationMatrix> {
    require_two_qubits(rho)?;
    let sigma = paulis();
    let mut t = [[0.0; 3]; 3];
    for (n, row) in t.iter_mut().enumerate() {
        for (m, v) in row.iter_mut().enumerate() {
            *v = rho.matrix().trace_product(&tensor(&sigma[n], &sigma[m])).re;
        }
    }
    Ok(CorrelationMatrix { t })
}

/// Eigenpairs of `TᵀT`, eigenvalues descending.
fn gram_eigen(t: &CorrelationMatrix) -> ([f64; 3], [Vector3<f64>; 3]) {
    let m = t.to_nalgebra();
    let eig = (m.transpose() * m).symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.map(|i| eig.eigenvalues[i].max(0.0));
    let vectors = order.map(|i| eig.eigenvectors.column(i).into_owned());
    (values, vectors)
}

fn unit(v: Vector3<f64>) -> Option<BlochVector> {
    BlochVector::normalized(v[0], v[1], v[2]).ok().filter(|_| v.norm() > 1e-12)
}

/// Any unit vector orthogonal to `v`.
fn orthogonal_to(v: &Vector3<f64>) -> Vector3<f64> {
    let axis = if v[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let w = axis - v * v.dot(&axis);
    w / w.norm()
}

fn bloch(v: Vector3<f64>) -> BlochVector {
    unit(v).expect("nonzero vector")
}

/// Settings reaching `2√M(ρ)`, built from the top two eigenvectors of
/// `TᵀT`. Returns the canonical axes when `T = 0`.
pub fn optimal_settings_for(t: &CorrelationMatrix) -> ChshSettings {
    let (_, vecs) = gram_eigen(t);
    let tm = t.to_nalgebra();
    let z = vecs[0];
    let z2 = vecs[1];
    let tz = tm * z;
    let tz2 = tm * z2;
    let (a, b) = (tz.norm(), tz2.norm());
    if a < 1e-12 && b < 1e-12 {
        return ChshSettings {
            x: BlochVector::Z,
            x_prime: BlochVector::X,
            y: BlochVector::Z,
            y_prime: BlochVector::X,
        };
    }
    let theta = b.atan2(a);
    // x′ pairs with y + y′ ∝ z and x with y − y′ ∝ z′.
    let x_prime = bloch(tz);
    let x = unit(tz2).unwrap_or_else(|| bloch(orthogonal_to(&tz)));
    let mut best: Option<(f64, ChshSettings)> = None;
    for sa in [1.0, -1.0] {
        for sb in [1.0, -1.0] {
            let zs = z * sa;
            let z2s = z2 * sb;
            let candidate = ChshSettings {
                x,
                x_prime,
                y: bloch(zs * theta.cos() + z2s * theta.sin()),
                y_prime: bloch(zs * theta.cos() - z2s * theta.sin()),
            };
            let value = t.chsh(&candidate);
            if best.is_none_or(|(v, _)| value > v) {
                best = Some((value, candidate));
            }
        }
    }
    best.expect("four candidates").1
}

pub fn optimal_settings(rho: &DensityMatrix) -> Result<ChshSettings> {
    Ok(optimal_settings_for(&correlation_matrix(rho)?))
}

/// `M(ρ) = u + ũ` together with the CHSH value at [`optimal_settings`].
pub fn horodecki_m(rho: &DensityMatrix) -> Result<ChshResult> {
    let t = correlation_matrix(rho)?;
    let (values, _) = gram_eigen(&t);
    let settings = optimal_settings_for(&t);
    Ok(ChshResult {
        value: chsh_value(rho, &settings)?,
        m_rho: values[0] + values[1],
        settings,
        eigenvalues: [values[0], values[1]],
    })
}

/// Result for a fixed choice of settings.
pub fn chsh_with_settings(rho: &DensityMatrix, settings: ChshSettings) -> Result<ChshResult> {
    let t = correlation_matrix(rho)?;
    let (values, _) = gram_eigen(&t);
    Ok(ChshResult {
        value: chsh_value(rho, &settings)?,
        m_rho: values[0] + values[1],
        settings,
        eigenvalues: [values[0], values[1]],
    })
}
