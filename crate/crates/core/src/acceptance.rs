//! The acceptance suite: thirteen numerical checks of the library against
//! exact values. Shared by the `acceptance` test target and the CLI's
//! `reproduce` command.
//!
//! Monte Carlo sub-runs use seed `seed + 1000·id + k` for the `k`-th run of
//! criterion `id`; random measurement choices come from a separate
//! generator seeded with `seed ^ (id << 32)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bell::{chsh_value, correlation_matrix, horodecki_m, ChshSettings};
use crate::error::Result;
use crate::filters::{apply_filters, hidden_nonlocality_scan, popescu_protocol, FilterFamily, LocalFilter};
use crate::format::fmt12;
use crate::lhv::barrett::{barrett_response_a, barrett_response_b, simulate_barrett};
use crate::lhv::driver::{max_sigma_ratio, sigma_ratio, with_workers, CellComparison, SampleRng};
use crate::lhv::gd::{simulate_epr_one_bit, simulate_gd_w2x2, GdW2x2Model};
use crate::lhv::hirsch::{hirsch_moments, simulate_hirsch_projective, HirschModel};
use crate::lhv::lift::{lift_oracle, simulate_povm_lift};
use crate::lhv::werner::{simplex_integral_mc, simulate_werner, werner_response_a, werner_response_b};
use crate::lhv::{sample_sphere_cd, DichotomicModel};
use crate::measure::{born_table, obs_from_bloch, povm_refine, BlochVector, Povm, ProjectiveMeasurement};
use crate::qmat::{CMatrix, Ket};
use crate::states::{
    barrett_state, flip_witness, random, rho_e, rho_g, rho_g_prime, singlet, werner_local, werner_local_phi,
};

/// Tolerance in standard errors for every Monte Carlo comparison.
pub const SIGMAS: f64 = 5.0;

pub const TITLES: [&str; 13] = [
    "singlet CHSH at reference settings",
    "Horodecki bound and optimal settings",
    "Werner local model joint probabilities",
    "simplex integral",
    "Gisin-Degorre model for W2x2(1/2)",
    "one-bit EPR simulation",
    "Hirsch projective model for rho_G(q)",
    "POVM lift on rho'_G(0.4)",
    "filtering limits",
    "Popescu filtering",
    "flip witness",
    "response validity and determinism",
    "Barrett model (exploratory)",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceConfig {
    /// Samples per Monte Carlo run.
    pub n: u64,
    /// Samples for the exploratory Barrett comparison.
    pub n_barrett: u64,
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            n: 1_000_000,
            n_barrett: 10_000_000,
            seed: 0,
        }
    }
}

impl AcceptanceConfig {
    fn mc_seed(&self, id: u8, k: u64) -> u64 {
        self.seed.wrapping_add(1000 * u64::from(id) + k)
    }

    fn rng(&self, id: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (u64::from(id) << 32))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedTable {
    pub name: String,
    pub rows: Vec<CellComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    /// Non-gating criteria are reported but do not fail the suite.
    pub gating: bool,
    pub summary: String,
    pub details: Vec<String>,
    pub tables: Vec<NamedTable>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let note = if self.gating { "" } else { " (non-gating)" };
        format!("[{verdict}] {:>2}. {}{note}: {}", self.id, self.title, self.summary)
    }
}

/// Accumulates checks for one criterion.
struct Checker {
    passed: bool,
    details: Vec<String>,
    tables: Vec<NamedTable>,
    worst_sigma: f64,
    worst_abs: f64,
}

impl Checker {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
            tables: Vec::new(),
            worst_sigma: 0.0,
            worst_abs: 0.0,
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.passed = false;
        }
        let verdict = if ok { "ok" } else { "FAILED" };
        self.details.push(format!("{verdict}: {detail}"));
    }

    fn close(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        let diff = (value - target).abs();
        self.worst_abs = self.worst_abs.max(diff);
        self.check(
            diff <= tol,
            format!("{label} = {} vs {} (|diff| {} <= {})", fmt12(value), fmt12(target), fmt12(diff), fmt12(tol)),
        );
    }

    fn sigma(&mut self, label: &str, mean: f64, stderr: f64, target: f64) {
        let ratio = sigma_ratio(mean - target, stderr);
        self.worst_sigma = self.worst_sigma.max(ratio);
        self.check(
            ratio <= SIGMAS,
            format!(
                "{label} = {} ± {} vs {} ({} sigma)",
                fmt12(mean),
                fmt12(stderr),
                fmt12(target),
                fmt12(ratio)
            ),
        );
    }

    fn table(&mut self, name: String, rows: Vec<CellComparison>) {
        let worst = max_sigma_ratio(&rows);
        self.worst_sigma = self.worst_sigma.max(worst);
        self.check(worst <= SIGMAS, format!("{name}: max sigma ratio {}", fmt12(worst)));
        self.tables.push(NamedTable { name, rows });
    }

    fn finish(self, id: u8, gating: bool, summary: String) -> CriterionReport {
        CriterionReport {
            id,
            title: TITLES[usize::from(id) - 1].to_string(),
            passed: self.passed,
            gating,
            summary,
            details: self.details,
            tables: self.tables,
        }
    }
}

fn dichotomic_oracle(rho: &crate::states::DensityMatrix, x: &BlochVector, y: &BlochVector) -> Result<Vec<Vec<f64>>> {
    born_table(
        rho,
        obs_from_bloch(x).measurement().projectors(),
        obs_from_bloch(y).measurement().projectors(),
    )
}

fn c1_singlet_chsh() -> Result<CriterionReport> {
    let mut c = Checker::new();
    let v = chsh_value(&singlet(), &ChshSettings::reference())?;
    c.close("CHSH", v, 2.0 * 2f64.sqrt(), 1e-10);
    Ok(c.finish(1, true, format!("value {} (target 2*sqrt(2))", fmt12(v))))
}

fn c2_horodecki(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(2);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_gap: f64 = 0.0;
    let mut violating = 0;
    for k in 0..50 {
        // Half pure (often strongly entangled), half full-rank.
        let rho = if k % 2 == 0 {
            crate::states::DensityMatrix::from_pure(&random::pure_state(&mut rng, 4), 2, 2)?
        } else {
            random::density(&mut rng, 2, 2)
        };
        let r = horodecki_m(&rho)?;
        let t = correlation_matrix(&rho)?;
        let best = (0..10_000)
            .map(|_| {
                t.chsh(&ChshSettings {
                    x: BlochVector::sample(&mut rng),
                    x_prime: BlochVector::sample(&mut rng),
                    y: BlochVector::sample(&mut rng),
                    y_prime: BlochVector::sample(&mut rng),
                })
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst_excess = worst_excess.max(best - r.bound());
        worst_gap = worst_gap.max((r.value - r.bound()).abs());
        violating += usize::from(r.violates());
    }
    c.check(
        worst_excess <= 1e-9,
        format!("random search never exceeds 2sqrt(M): worst excess {}", fmt12(worst_excess)),
    );
    c.check(
        worst_gap <= 1e-6,
        format!("optimal settings reach 2sqrt(M): worst gap {}", fmt12(worst_gap)),
    );
    Ok(c.finish(
        2,
        true,
        format!(
            "50 states ({violating} violating), worst search excess {}, worst optimal gap {}",
            fmt12(worst_excess),
            fmt12(worst_gap)
        ),
    ))
}

fn c3_werner(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(3);
    let mut k = 0;
    for d in [2usize, 3] {
        let w = werner_local(d)?;
        for pair in 0..5 {
            let pa = ProjectiveMeasurement::random_basis(&mut rng, d);
            let qb = ProjectiveMeasurement::random_basis(&mut rng, d);
            let t = simulate_werner(d, &pa, &qb, cfg.n, cfg.mc_seed(3, k))?;
            k += 1;
            let oracle = born_table(&w, pa.projectors(), qb.projectors())?;
            c.table(format!("werner d={d} pair {pair}"), t.compare(&oracle)?);
        }
        // Equal rank-1 projectors on both sides: (1 + φ)/(d(d + 1)).
        let basis = ProjectiveMeasurement::random_basis(&mut rng, d);
        let t = simulate_werner(d, &basis, &basis, cfg.n, cfg.mc_seed(3, k))?;
        k += 1;
        let df = d as f64;
        let target = (1.0 + werner_local_phi(d)) / (df * (df + 1.0));
        for a in 0..d {
            let cell = t.get(a, a);
            c.sigma(&format!("werner d={d} p(a=a) for a={a}"), cell.mean, cell.stderr, target);
        }
    }
    let worst = c.worst_sigma;
    Ok(c.finish(3, true, format!("12 runs at n={}, worst cell {} sigma", cfg.n, fmt12(worst))))
}

fn c4_simplex(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(4);
    let basis = ProjectiveMeasurement::random_basis(&mut rng, 3);
    let est = simplex_integral_mc(3, 0, &basis, cfg.n, cfg.mc_seed(4, 0))?;
    c.sigma("simplex integral d=3", est.mean, est.stderr, 1.0 / 27.0);
    let worst = c.worst_sigma;
    Ok(c.finish(
        4,
        true,
        format!("{} vs 1/27, {} sigma", fmt12(est.mean), fmt12(worst)),
    ))
}

fn c5_gd(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(5);
    let mut all_rewrites = true;
    for k in 0..10 {
        let x = BlochVector::sample(&mut rng);
        let y = BlochVector::sample(&mut rng);
        let r = simulate_gd_w2x2(&x, &y, cfg.n, cfg.mc_seed(5, k))?;
        c.sigma(&format!("pair {k} E(AB)"), r.report.e_ab.mean, r.report.e_ab.stderr, -x.dot(&y) / 2.0);
        c.sigma(&format!("pair {k} E(A)"), r.report.e_a.mean, r.report.e_a.stderr, 0.0);
        c.sigma(&format!("pair {k} E(B)"), r.report.e_b.mean, r.report.e_b.stderr, 0.0);
        let agrees = r.rewrite_always_agrees();
        all_rewrites &= agrees;
        c.check(
            agrees,
            format!("pair {k} rewriting agrees on {} of samples", fmt12(1.0 - r.rewrite_mismatch.mean)),
        );
        let oracle = dichotomic_oracle(&crate::states::werner2x2(0.5)?, &x, &y)?;
        c.table(format!("gd pair {k}"), r.report.joint.compare(&oracle)?);
    }
    let worst = c.worst_sigma;
    Ok(c.finish(
        5,
        true,
        format!(
            "10 direction pairs, worst {} sigma, rewriting {}",
            fmt12(worst),
            if all_rewrites { "100%" } else { "<100%" }
        ),
    ))
}

fn c6_one_bit(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(6);
    let x0 = BlochVector::sample(&mut rng);
    let mut pairs = vec![(x0, x0)];
    for _ in 0..4 {
        pairs.push((BlochVector::sample(&mut rng), BlochVector::sample(&mut rng)));
    }
    for (k, (x, y)) in pairs.iter().enumerate() {
        let r = simulate_epr_one_bit(x, y, cfg.n, cfg.mc_seed(6, k as u64))?;
        c.sigma(&format!("pair {k} E(AB)"), r.report.e_ab.mean, r.report.e_ab.stderr, -x.dot(y));
        c.sigma(&format!("pair {k} E(A)"), r.report.e_a.mean, r.report.e_a.stderr, 0.0);
        let oracle = dichotomic_oracle(&singlet(), x, y)?;
        c.table(format!("one-bit pair {k}"), r.report.joint.compare(&oracle)?);
    }
    let worst = c.worst_sigma;
    Ok(c.finish(6, true, format!("5 direction pairs, worst {} sigma", fmt12(worst))))
}

fn c7_hirsch(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(7);
    let mut k = 0;
    for q in [0.1, 0.3, 0.5] {
        let rho = rho_g(q)?;
        let x = BlochVector::sample(&mut rng);
        let y = BlochVector::sample(&mut rng);
        let r = simulate_hirsch_projective(q, &x, &y, cfg.n, cfg.mc_seed(7, k))?;
        k += 1;
        c.table(format!("hirsch q={q}"), r.report.joint.compare(&dichotomic_oracle(&rho, &x, &y)?)?);
        let (ea, eb, eab) = hirsch_moments(q, &x, &y);
        c.sigma(&format!("q={q} E(A)"), r.report.e_a.mean, r.report.e_a.stderr, ea);
        c.sigma(&format!("q={q} E(B)"), r.report.e_b.mean, r.report.e_b.stderr, eb);
        c.sigma(&format!("q={q} E(AB)"), r.report.e_ab.mean, r.report.e_ab.stderr, eab);

        // Second Alice direction: acceptance must not depend on x.
        let x2 = BlochVector::sample(&mut rng);
        let r2 = simulate_hirsch_projective(q, &x2, &y, cfg.n, cfg.mc_seed(7, k))?;
        k += 1;
        let (a1, a2) = (r.acceptance, r2.acceptance);
        let combined = (a1.stderr.powi(2) + a2.stderr.powi(2)).sqrt();
        c.sigma(&format!("q={q} acceptance rate difference"), a1.mean - a2.mean, combined, 0.0);
        c.sigma(&format!("q={q} acceptance rate"), a1.mean, a1.stderr, 0.5);
        c.sigma(
            &format!("q={q} E(A) at second x"),
            r2.report.e_a.mean,
            r2.report.e_a.stderr,
            (1.0 - q) * x2.z,
        );
    }
    let worst = c.worst_sigma;
    Ok(c.finish(7, true, format!("q in {{0.1, 0.3, 0.5}}, worst {} sigma", fmt12(worst))))
}

fn c8_lift(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(8);
    let q = 0.4;
    let model = HirschModel::new(q)?;
    let rho0 = model.target_state()?;
    let zero = Ket::basis(2, 0).projector();
    let lifted = rho_g_prime(q)?;
    for k in 0..5 {
        let pa = Povm::random(&mut rng, 2, 3)?;
        let pb = Povm::random(&mut rng, 2, 3)?;
        let r = simulate_povm_lift(&model, &zero, &zero, &pa, &pb, cfg.n, cfg.mc_seed(8, k))?;
        let (joint, both) = lift_oracle(&rho0, &zero, &zero, &pa, &pb)?;
        let direct = born_table(&lifted, pa.elements(), pb.elements())?;
        let agree = joint.iter().flatten().zip(direct.iter().flatten()).all(|(a, b)| (a - b).abs() < 1e-12);
        c.check(agree, format!("pair {k}: lifted-state oracle equals the explicit rho'_G mixture"));
        c.table(format!("lift pair {k}"), r.joint.compare(&direct)?);
        c.table(format!("lift pair {k} both-hit branch"), r.both_hit.compare(&both)?);
        c.sigma(&format!("pair {k} Alice fallback rate"), r.miss_a.mean, r.miss_a.stderr, 0.5);
        c.sigma(&format!("pair {k} Bob fallback rate"), r.miss_b.mean, r.miss_b.stderr, 0.5);
    }
    let worst = c.worst_sigma;
    Ok(c.finish(8, true, format!("5 POVM pairs, worst {} sigma", fmt12(worst))))
}

fn c9_filtering() -> Result<CriterionReport> {
    let mut c = Checker::new();
    for q in [0.25, 0.5] {
        let row = hidden_nonlocality_scan(FilterFamily::RhoG, q, &[1e-3])?[0];
        c.close(&format!("M(filtered rho_G({q}))"), row.m, 1.0 + q, 1e-4);
        let row = hidden_nonlocality_scan(FilterFamily::RhoGPrime, q, &[1e-3])?[0];
        c.close(&format!("M(filtered rho'_G({q}))"), row.m, 1.0 + q / 4.0, 1e-4);
    }
    let p = CMatrix::diagonal(&[1.0, 1.0, 0.0]);
    let q = 0.6;
    let out = apply_filters(&rho_e(q)?, &LocalFilter::new(p, CMatrix::identity(2))?)?;
    let block = out.state()?.restrict(&[0, 1], &[0, 1])?;
    let dev = block.matrix().max_abs_diff(singlet().matrix());
    c.close("rho_E filtered distance to singlet", dev, 0.0, 1e-10);
    c.close("rho_E filter success probability", out.success_prob, q, 1e-12);
    let v = chsh_value(&block, &ChshSettings::reference())?;
    c.close("rho_E filtered CHSH", v, 2.0 * 2f64.sqrt(), 1e-10);
    let worst = c.worst_abs;
    Ok(c.finish(9, true, format!("limits 1+q and 1+q/4 reached, worst |diff| {}", fmt12(worst))))
}

fn c10_popescu() -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut values = Vec::new();
    for d in 3..=8 {
        let r = popescu_protocol(d)?;
        let df = d as f64;
        c.close(&format!("d={d} CHSH"), r.chsh, 2.0 * 2f64.sqrt() * df / (df + 2.0), 1e-10);
        c.close(&format!("d={d} distance to closed form"), r.closed_form_deviation, 0.0, 1e-12);
        let expect_violation = d >= 5;
        c.check(
            (r.chsh > 2.0) == expect_violation,
            format!("d={d}: CHSH {} {} 2", fmt12(r.chsh), if r.chsh > 2.0 { ">" } else { "<=" }),
        );
        values.push(format!("d={d}:{}", fmt12(r.chsh)));
    }
    Ok(c.finish(10, true, format!("violation from d=5 on ({})", values.join(", "))))
}

fn c11_witness(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    for k in 0..=20 {
        let q = k as f64 / 20.0;
        let w = flip_witness(&rho_g(q)?)?;
        c.close(&format!("tr(V rho_G({q}))"), w, (1.0 - 3.0 * q) / 2.0, 1e-12);
    }
    let below = flip_witness(&rho_g(1.0 / 3.0 - 1e-6)?)?;
    let above = flip_witness(&rho_g(1.0 / 3.0 + 1e-6)?)?;
    c.check(below > 0.0 && above < 0.0, format!("sign flips at q=1/3 ({} -> {})", fmt12(below), fmt12(above)));
    let mut rng = cfg.rng(11);
    let mut min_w = f64::INFINITY;
    for k in 0..100 {
        let d = 2 + k % 3;
        min_w = min_w.min(flip_witness(&random::separable(&mut rng, d, d, 8))?);
    }
    c.check(min_w >= -1e-9, format!("100 separable states, minimum witness {}", fmt12(min_w)));
    Ok(c.finish(11, true, format!("exact on q grid, separable minimum {}", fmt12(min_w))))
}

fn c12_properties(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = SampleRng::seed_from_u64(cfg.seed ^ (12 << 32));
    let samples = 100_000;

    let basis = ProjectiveMeasurement::random_basis(&mut rng, 3);
    let (mut worst_a, mut worst_b, mut negative) = (0.0f64, 0.0f64, false);
    for _ in 0..samples {
        let lambda = sample_sphere_cd(&mut rng, 3);
        let ra: Vec<f64> = (0..3).map(|a| werner_response_a(a, &lambda, &basis)).collect();
        let rb: Vec<f64> = (0..3).map(|b| werner_response_b(b, &lambda, &basis)).collect();
        worst_a = worst_a.max((ra.iter().sum::<f64>() - 1.0).abs());
        worst_b = worst_b.max((rb.iter().sum::<f64>() - 1.0).abs());
        negative |= ra.iter().chain(&rb).any(|&p| p < -1e-12);
    }
    c.check(worst_a == 0.0 && worst_b <= 1e-12 && !negative, format!(
        "Werner responses: Alice sums exact ({}), Bob within {}",
        fmt12(worst_a),
        fmt12(worst_b)
    ));

    let (ok, detail) = barrett_validity(&mut rng, samples)?;
    c.check(ok, detail);

    let hirsch = HirschModel::new(0.35)?;
    let mut all_valid = true;
    let x = BlochVector::sample(&mut rng);
    for _ in 0..samples {
        for model in [&hirsch as &dyn DichotomicModelDyn, &GdW2x2Model] {
            let h = model.hidden(&mut rng);
            all_valid &= h.is_valid();
            let a = model.a(&h, &x, &mut rng);
            let b = model.b(&h, &x, &mut rng);
            all_valid &= (a == 1 || a == -1) && (b == 1 || b == -1);
        }
    }
    c.check(all_valid, "dichotomic models: hidden variables valid and outputs in {+1, -1}".into());

    let n = cfg.n.min(200_000);
    let pa = ProjectiveMeasurement::random_basis(&mut rng, 3);
    let qb = ProjectiveMeasurement::random_basis(&mut rng, 3);
    let seed = cfg.mc_seed(12, 0);
    let one = with_workers(1, || simulate_werner(3, &pa, &qb, n, seed))?;
    let four = with_workers(4, || simulate_werner(3, &pa, &qb, n, seed))?;
    c.check(one == four, format!("Werner table bit-identical for 1 and 4 workers (n={n})"));
    let h1 = with_workers(1, || simulate_hirsch_projective(0.3, &x, &x, n, seed))?;
    let h3 = with_workers(3, || simulate_hirsch_projective(0.3, &x, &x, n, seed))?;
    c.check(h1 == h3, format!("Hirsch table bit-identical for 1 and 3 workers (n={n})"));
    Ok(c.finish(12, true, format!("{samples} hidden variables per model, determinism checked")))
}

/// Object-safe view of [`DichotomicModel`] for mixed iteration.
trait DichotomicModelDyn {
    fn hidden(&self, rng: &mut SampleRng) -> crate::lhv::HiddenVar;
    fn a(&self, h: &crate::lhv::HiddenVar, x: &BlochVector, rng: &mut SampleRng) -> i8;
    fn b(&self, h: &crate::lhv::HiddenVar, y: &BlochVector, rng: &mut SampleRng) -> i8;
}

impl<M: DichotomicModel> DichotomicModelDyn for M {
    fn hidden(&self, rng: &mut SampleRng) -> crate::lhv::HiddenVar {
        self.sample_hidden(rng)
    }
    fn a(&self, h: &crate::lhv::HiddenVar, x: &BlochVector, rng: &mut SampleRng) -> i8 {
        self.alice(h, x, rng)
    }
    fn b(&self, h: &crate::lhv::HiddenVar, y: &BlochVector, rng: &mut SampleRng) -> i8 {
        self.bob(h, y, rng)
    }
}

fn barrett_validity(rng: &mut SampleRng, samples: usize) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut min_p = f64::INFINITY;
    for d in [2usize, 3] {
        let ra = povm_refine(&Povm::random(rng, d, d + 1)?)?;
        let rb = povm_refine(&Povm::random(rng, d, d + 1)?)?;
        for _ in 0..samples {
            let lambda = sample_sphere_cd(rng, d);
            let pa = barrett_response_a(&lambda, &ra);
            let pb = barrett_response_b(&lambda, &rb);
            worst = worst.max((pa.iter().sum::<f64>() - 1.0).abs()).max((pb.iter().sum::<f64>() - 1.0).abs());
            min_p = pa.iter().chain(&pb).fold(min_p, |m, &p| m.min(p));
        }
    }
    Ok((
        worst <= 1e-12 && min_p >= -1e-12,
        format!(
            "Barrett responses (d=2,3): normalization error {}, minimum {}",
            fmt12(worst),
            fmt12(min_p)
        ),
    ))
}

fn c13_barrett(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let mut c = Checker::new();
    let mut rng = cfg.rng(13);
    let (ok, detail) = barrett_validity(&mut rng, 100_000)?;
    c.check(ok, detail);
    let pa = ProjectiveMeasurement::random_basis(&mut rng, 2).to_povm();
    let pb = ProjectiveMeasurement::random_basis(&mut rng, 2).to_povm();
    let t = simulate_barrett(2, &pa, &pb, cfg.n_barrett, cfg.mc_seed(13, 0))?;
    let oracle = born_table(&barrett_state(2)?, pa.elements(), pb.elements())?;
    let rows = t.compare(&oracle)?;
    for r in &rows {
        c.details.push(format!(
            "cell ({}, {}): {} vs {} ({} sigma)",
            r.a,
            r.b,
            fmt12(r.mean),
            fmt12(r.oracle),
            fmt12(r.sigma_ratio)
        ));
    }
    c.table("barrett d=2".into(), rows);
    let worst = c.worst_sigma;
    let summary = if c.passed {
        format!("d=2 table at n={} agrees, worst {} sigma", cfg.n_barrett, fmt12(worst))
    } else {
        format!("d=2 table at n={} deviates, worst {} sigma (documented finding)", cfg.n_barrett, fmt12(worst))
    };
    Ok(c.finish(13, false, summary))
}

fn failed(id: u8, err: crate::Error) -> CriterionReport {
    CriterionReport {
        id,
        title: TITLES[usize::from(id) - 1].to_string(),
        passed: false,
        gating: id != 13,
        summary: format!("error: {err}"),
        details: vec![err.to_string()],
        tables: Vec::new(),
    }
}

/// Runs criterion `id` (1 to 13). Library errors turn into a failed
/// report.
pub fn run_criterion(id: u8, cfg: &AcceptanceConfig) -> CriterionReport {
    let result = match id {
        1 => c1_singlet_chsh(),
        2 => c2_horodecki(cfg),
        3 => c3_werner(cfg),
        4 => c4_simplex(cfg),
        5 => c5_gd(cfg),
        6 => c6_one_bit(cfg),
        7 => c7_hirsch(cfg),
        8 => c8_lift(cfg),
        9 => c9_filtering(),
        10 => c10_popescu(),
        11 => c11_witness(cfg),
        12 => c12_properties(cfg),
        13 => c13_barrett(cfg),
        _ => Err(crate::Error::param("id", format!("no criterion {id}"))),
    };
    result.unwrap_or_else(|e| failed(id.clamp(1, 13), e))
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionReport> {
    (1..=13).map(|id| run_criterion(id, cfg)).collect()
}

/// True when every gating criterion passed.
pub fn all_gating_passed(reports: &[CriterionReport]) -> bool {
    reports.iter().all(|r| r.passed || !r.gating)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_criteria_pass() {
        let cfg = AcceptanceConfig::default();
        for id in [1, 9, 10, 11] {
            let r = run_criterion(id, &cfg);
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = run_criterion(14, &AcceptanceConfig::default());
        assert!(!r.passed);
    }

    #[test]
    fn line_format() {
        let r = run_criterion(1, &AcceptanceConfig::default());
        assert!(r.line().starts_with("[PASS]  1. singlet CHSH"));
    }
}
