//! Local filtering: Popescu's projection of the local Werner state and the
//! `ε`-filters that reveal hidden nonlocality of `ρ_G(q)` and `ρ′_G(q)`.

use serde::{Deserialize, Serialize};

use crate::bell::{chsh_value, horodecki_m, optimal_settings, ChshSettings};
use crate::error::{Error, Result};
use crate::measure::{post_measurement_state, DROP_TOL};
use crate::qmat::{hermitian_eig, tensor, CMatrix, Ket};
use crate::states::{rho_g, rho_g_prime, singlet, DensityMatrix};

/// Success branches `K_A`, `K_B` of two local two-outcome measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFilter {
    ka: CMatrix,
    kb: CMatrix,
}

impl LocalFilter {
    /// Requires `K†K ≤ I` on both sides (largest eigenvalue ≤ 1 + 1e-10).
    pub fn new(ka: CMatrix, kb: CMatrix) -> Result<Self> {
        for (name, k) in [("kA", &ka), ("kB", &kb)] {
            let top = hermitian_eig(&(&k.dagger() * k))?.max_eigenvalue();
            if top > 1.0 + 1e-10 {
                return Err(Error::param(name, format!("K†K has eigenvalue {top} > 1")));
            }
        }
        Ok(Self { ka, kb })
    }

    pub fn identity(da: usize, db: usize) -> Self {
        Self {
            ka: CMatrix::identity(da),
            kb: CMatrix::identity(db),
        }
    }

    pub fn ka(&self) -> &CMatrix {
        &self.ka
    }

    pub fn kb(&self) -> &CMatrix {
        &self.kb
    }

    /// Both operators multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.ka.scale(factor), self.kb.scale(factor))
    }
}

/// Normalized post-filter state, absent when the success probability is
/// below 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub post_state: Option<DensityMatrix>,
    pub success_prob: f64,
}

impl FilterOutcome {
    pub fn state(&self) -> Result<&DensityMatrix> {
        self.post_state.as_ref().ok_or_else(|| {
            Error::InvalidState(format!("filter succeeds with probability {:.3e}", self.success_prob))
        })
    }
}

/// `(K_A ⊗ K_B) ρ (K_A ⊗ K_B)†`, normalized.
pub fn apply_filters(rho: &DensityMatrix, f: &LocalFilter) -> Result<FilterOutcome> {
    if f.ka.dim() != rho.dim_a() || f.kb.dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: f.ka.dim() * f.kb.dim(),
        });
    }
    let out = post_measurement_state(rho, &tensor(&f.ka, &f.kb))?;
    Ok(FilterOutcome {
        post_state: out.state,
        success_prob: out.probability,
    })
}

/// `F_A = ε|0⟩⟨0| + |1⟩⟨1|`, `F_B = δ|0⟩⟨0| + |1⟩⟨1|` with `δ = ε/√q`.
/// When `δ > 1` both operators are divided by `δ`.
pub fn hirsch_filters(epsilon: f64, q: f64) -> Result<LocalFilter> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::param("epsilon", format!("{epsilon} is outside (0, 1]")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::param("q", format!("{q} is outside (0, 1]")));
    }
    let delta = epsilon / q.sqrt();
    let scale = if delta > 1.0 { 1.0 / delta } else { 1.0 };
    LocalFilter::new(
        CMatrix::diagonal(&[epsilon * scale, scale]),
        CMatrix::diagonal(&[delta * scale, scale]),
    )
}

/// Filters used when `q = 0`, the `δ → ∞` limit after rescaling Bob's
/// operator alone: `F_A = ε|0⟩⟨0| + |1⟩⟨1|`, `F_B = |0⟩⟨0|`.
fn flag_only_filters(epsilon: f64) -> Result<LocalFilter> {
    LocalFilter::new(CMatrix::diagonal(&[epsilon, 1.0]), CMatrix::diagonal(&[1.0, 0.0]))
}

/// `√q|Ψ₋⟩⟨Ψ₋| + (1 − √q)(|01⟩⟨01| + |10⟩⟨10|)/2`, the `ε → 0` limit of
/// the filtered `ρ_G(q)`.
pub fn filtered_rho_g_limit(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::param("q", format!("{q} is outside [0, 1]")));
    }
    let s = q.sqrt();
    let flips = &Ket::from_real(&[0.0, 1.0, 0.0, 0.0]).projector() + &Ket::from_real(&[0.0, 0.0, 1.0, 0.0]).projector();
    DensityMatrix::new(&singlet().matrix().scale(s) + &flips.scale((1.0 - s) / 2.0), 2, 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopescuResult {
    /// Filtered state restricted to `span{|0⟩, |1⟩}⊗span{|0⟩, |1⟩}`.
    pub w_prime: DensityMatrix,
    /// CHSH value at the reference settings.
    pub chsh: f64,
    /// `2√M(w′)`.
    pub chsh_optimal: f64,
    pub success_prob: f64,
    /// Max-entry distance to `(d/(d+2))(I₄/(2d) + |Ψ₋⟩⟨Ψ₋|)`.
    pub closed_form_deviation: f64,
}

/// `(d/(d + 2))(I₄/(2d) + |Ψ₋⟩⟨Ψ₋|)`.
pub fn popescu_closed_form(d: usize) -> Result<DensityMatrix> {
    let df = d as f64;
    let m = &CMatrix::identity(4).scale(1.0 / (2.0 * df)) + singlet().matrix();
    DensityMatrix::new(m.scale(df / (df + 2.0)), 2, 2)
}

/// Block of the local Werner state on `span{|i⟩ : i ∈ keep}^{⊗2}`, read
/// off entry by entry: `⟨ij|W|kl⟩ = ((d+1)/d³)δ_ik δ_jl − δ_il δ_jk/d²`.
/// This is `(P ⊗ P) W (P ⊗ P)` restricted to the range of `P ⊗ P`, without
/// forming the `d² × d²` matrix.
pub fn werner_local_block(d: usize, keep: &[usize]) -> Result<CMatrix> {
    if d < 2 || keep.iter().any(|&i| i >= d) {
        return Err(Error::param("keep", "indices must lie in 0..d with d >= 2"));
    }
    let df = d as f64;
    let pairs: Vec<(usize, usize)> = keep.iter().flat_map(|&i| keep.iter().map(move |&j| (i, j))).collect();
    let mut m = CMatrix::zeros(pairs.len());
    for (r, &(i, j)) in pairs.iter().enumerate() {
        for (c, &(k, l)) in pairs.iter().enumerate() {
            let mut v = 0.0;
            if i == k && j == l {
                v += (df + 1.0) / (df * df * df);
            }
            if i == l && j == k {
                v -= 1.0 / (df * df);
            }
            m[(r, c)] = crate::qmat::C64::new(v, 0.0);
        }
    }
    Ok(m)
}

/// Projects both sides of the local Werner state onto the first two basis
/// vectors.
pub fn popescu_protocol(d: usize) -> Result<PopescuResult> {
    if d < 3 {
        return Err(Error::param("d", format!("need d >= 3, got {d}")));
    }
    let block = werner_local_block(d, &[0, 1])?;
    let success_prob = block.trace().re;
    let w_prime = DensityMatrix::new(block.scale(1.0 / success_prob), 2, 2)?;
    let closed_form_deviation = w_prime.matrix().max_abs_diff(popescu_closed_form(d)?.matrix());
    let chsh = chsh_value(&w_prime, &ChshSettings::reference())?;
    let chsh_optimal = horodecki_m(&w_prime)?.bound();
    Ok(PopescuResult {
        w_prime,
        chsh,
        chsh_optimal,
        success_prob,
        closed_form_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterFamily {
    RhoG,
    RhoGPrime,
}

impl FilterFamily {
    pub fn state(&self, q: f64) -> Result<DensityMatrix> {
        match self {
            FilterFamily::RhoG => rho_g(q),
            FilterFamily::RhoGPrime => rho_g_prime(q),
        }
    }

    /// `ε → 0` limit of `M` after filtering.
    pub fn limit_m(&self, q: f64) -> f64 {
        match self {
            FilterFamily::RhoG => 1.0 + q,
            FilterFamily::RhoGPrime => 1.0 + q / 4.0,
        }
    }
}

pub const DEFAULT_EPSILONS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub epsilon: f64,
    pub success_prob: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub chsh_bound: f64,
    pub chsh_at_optimal_settings: f64,
}

/// Filters `family(q)` with [`hirsch_filters`] for each `ε`, in the given
/// order.
pub fn hidden_nonlocality_scan(family: FilterFamily, q: f64, epsilons: &[f64]) -> Result<Vec<ScanRow>> {
    let rho = family.state(q)?;
    epsilons
        .iter()
        .map(|&epsilon| {
            let filter = if q == 0.0 {
                if !(epsilon > 0.0 && epsilon <= 1.0) {
                    return Err(Error::param("epsilon", format!("{epsilon} is outside (0, 1]")));
                }
                flag_only_filters(epsilon)?
            } else {
                hirsch_filters(epsilon, q)?
            };
            let out = apply_filters(&rho, &filter)?;
            let post = out.state()?;
            let result = horodecki_m(post)?;
            let settings = optimal_settings(post)?;
            Ok(ScanRow {
                epsilon,
                success_prob: out.success_prob,
                m: result.m_rho,
                chsh_bound: result.bound(),
                chsh_at_optimal_settings: chsh_value(post, &settings)?,
            })
        })
        .collect()
}

/// Whether a success probability counts as a usable outcome.
pub fn is_degenerate(success_prob: f64) -> bool {
    success_prob < DROP_TOL
}
