//! Turning state-reducing approximating maps into KMS-symmetric Markov maps:
//! dominated-density extraction, Gaussian modular averaging, functional-
//! calculus contractification with scheduled residual targets, and the final
//! unitalization.

use serde::{Deserialize, Serialize};

use crate::cpmap::{
    self, kms_implementation_unchecked, state_reducing_margin, CPMap, L2Operator, PRECONDITION_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{eigh, op_norm};
use crate::matrix::{ComplexMatrix, C64};
use crate::state::StandardForm;

/// Gaussian averaging kernel parameters for Φ^l.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AveragingConfig {
    /// Gaussian width parameter l in the kernel √(1/(lπ)) e^{-t²/l}.
    pub l: f64,
    /// Number of trapezoid nodes on [-R, R]; odd, at least 11.
    pub quadrature_points: usize,
    /// Truncation radius R.
    pub truncation_radius: f64,
}

impl AveragingConfig {
    /// Default radius √(l · ln(1/ε)) with ε = 1e-12, so the discarded
    /// Gaussian tail is at noise level.
    pub fn new(l: f64) -> Result<Self> {
        if l <= 0.0 {
            return Err(Error::InvalidParameter(
                "averaging width l must be positive".into(),
            ));
        }
        let radius = (l * (1e12f64).ln()).sqrt();
        // keep the node spacing bounded as the window grows
        let points = ((2.0 * radius / 0.26).ceil() as usize).max(201) | 1;
        Ok(Self {
            l,
            quadrature_points: points,
            truncation_radius: radius,
        })
    }

    pub fn with_points(l: f64, points: usize) -> Result<Self> {
        let mut cfg = Self::new(l)?;
        if points < 11 || points.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "quadrature_points must be odd and at least 11".into(),
            ));
        }
        cfg.quadrature_points = points;
        Ok(cfg)
    }

    /// Trapezoid nodes and weights, including the kernel normalization
    /// √(1/(lπ)) e^{-t²/l}.
    fn nodes_and_weights(&self) -> Vec<(f64, f64)> {
        let m = self.quadrature_points;
        let r = self.truncation_radius;
        let h = 2.0 * r / (m - 1) as f64;
        let scale = (1.0 / (self.l * std::f64::consts::PI)).sqrt();
        (0..m)
            .map(|i| {
                let t = -r + h * i as f64;
                let w = if i == 0 || i == m - 1 { 0.5 * h } else { h };
                (t, scale * w * (-t * t / self.l).exp())
            })
            .collect()
    }
}

/// The dominated density c = ρ^{-1/2} Φ*(ρ) ρ^{-1/2}, the finite-dimensional
/// carrier of the functional φ_c = φ∘Φ; satisfies 0 ⪯ c ⪯ 1 exactly when Φ
/// is state-reducing.
pub fn dominated_density(sf: &StandardForm, phi: &CPMap) -> Result<ComplexMatrix> {
    let margin = state_reducing_margin(sf, phi)?;
    if margin < -PRECONDITION_TOL {
        return Err(Error::NotStateReducing { min_eig: margin });
    }
    let ih = sf.state().inv_half_power();
    let dual = phi.apply_dual(sf.state().rho())?;
    let c = (&(ih * &dual) * ih).hermitian_part();
    Ok(c)
}

/// φ_c(x) = trace(ρ^{1/2} c ρ^{1/2} x).
pub fn dominated_functional(sf: &StandardForm, c: &ComplexMatrix, x: &ComplexMatrix) -> C64 {
    let h = sf.state().half_power();
    (&(&(h * c) * h) * x).trace()
}

/// Worst deviation of trace(ρ Φ(E_ij)) from φ_c(E_ij) over all matrix units;
/// validates the finite-dimensional identification of φ_c.
pub fn dominated_density_pairing_defect(
    sf: &StandardForm,
    phi: &CPMap,
    c: &ComplexMatrix,
) -> Result<f64> {
    let n = sf.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = ComplexMatrix::matrix_unit(n, i, j);
            let lhs = sf.state().expect(&phi.apply(&e)?);
            let rhs = dominated_functional(sf, c, &e);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// Gaussian modular average Φ^l(x) = √(1/(lπ)) ∫ e^{-t²/l} σ_t(Φ(σ_{-t}(x))) dt,
/// evaluated by trapezoid quadrature.
///
/// Computed in the eigenbasis of ρ, where each conjugated Choi matrix is an
/// entrywise phase twist of the base Choi matrix, so the whole quadrature
/// collapses to one entrywise filter q(ω) = Σ w_m e^{-t_m²/l} e^{i t_m ω}.
pub fn modular_average(sf: &StandardForm, phi: &CPMap, cfg: &AveragingConfig) -> Result<CPMap> {
    let margin = state_reducing_margin(sf, phi)?;
    if margin < -PRECONDITION_TOL {
        return Err(Error::NotStateReducing { min_eig: margin });
    }
    modular_average_unchecked(sf, phi, cfg)
}

pub(crate) fn modular_average_unchecked(
    sf: &StandardForm,
    phi: &CPMap,
    cfg: &AveragingConfig,
) -> Result<CPMap> {
    let n = sf.dim();
    let v = sf.state().eigenvectors();
    let vh = v.conj_transpose();
    let logs: Vec<f64> = sf.state().eigenvalues().iter().map(|&l| l.ln()).collect();

    // map in the eigenbasis of rho
    let phi_eig = CPMap::new(n, phi.kraus().iter().map(|k| &(&vh * k) * v).collect())?;
    let mut choi = phi_eig.choi();

    let nodes = cfg.nodes_and_weights();
    let total_weight: f64 = nodes.iter().map(|&(_, w)| w).sum();
    if !(0.5..=1.5).contains(&total_weight) {
        return Err(Error::QuadratureUnstable {
            detail: format!("kernel mass {total_weight:.6} far from 1"),
        });
    }

    let filter = |omega: f64| -> C64 {
        nodes
            .iter()
            .map(|&(t, w)| C64::new(0.0, t * omega).exp() * w)
            .sum()
    };

    // Choi[(i n + a),(j n + b)] picks up q(l_a - l_b - l_i + l_j)
    let mut cache: Vec<(f64, C64)> = Vec::new();
    for i in 0..n {
        for a in 0..n {
            for j in 0..n {
                for b in 0..n {
                    let omega = logs[a] - logs[b] - logs[i] + logs[j];
                    let q = match cache.iter().find(|(o, _)| (o - omega).abs() < 1e-15) {
                        Some(&(_, q)) => q,
                        None => {
                            let q = filter(omega);
                            cache.push((omega, q));
                            q
                        }
                    };
                    choi[(i * n + a, j * n + b)] *= q;
                }
            }
        }
    }

    let averaged_eig = CPMap::from_choi(n, &choi).map_err(|e| match e {
        Error::ChoiNotPsd { min_eig } => Error::QuadratureUnstable {
            detail: format!("averaged Choi matrix has eigenvalue {min_eig:.3e}"),
        },
        other => other,
    })?;
    CPMap::new(
        n,
        averaged_eig
            .kraus()
            .iter()
            .map(|k| &(v * k) * &vh)
            .collect(),
    )
}

/// Schedule for the contractification stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractifyConfig {
    /// Strictly decreasing residual targets; the default is ε_j = 2^{-j}.
    pub epsilons: Vec<f64>,
    /// Candidate Gaussian widths, scanned in order.
    pub l_grid: Vec<f64>,
    /// Cap for the n(j) bisection.
    pub n_cap: u64,
    /// Grid resolution for the C_n constant on the spectral hull.
    pub c_grid_points: usize,
}

impl ContractifyConfig {
    /// ε_j = 2^{-j} for j in j_lo..=j_hi.
    pub fn dyadic(j_lo: u32, j_hi: u32) -> Self {
        let epsilons = (j_lo..=j_hi).map(|j| 0.5f64.powi(j as i32)).collect();
        Self {
            epsilons,
            l_grid: (0..14).map(|i| 2.0f64.powi(i)).collect(),
            n_cap: 1 << 42,
            c_grid_points: 10_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter(
                "epsilon schedule must be non-empty and strictly decreasing".into(),
            ));
        }
        if self.epsilons.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidParameter("epsilons must be positive".into()));
        }
        Ok(())
    }
}

impl Default for ContractifyConfig {
    fn default() -> Self {
        Self::dyadic(1, 6)
    }
}

/// max over the spectral hull [0, top] of λ e^{-2n(λ-1)²}.
fn max_lambda_value(n: u64, top: f64) -> f64 {
    let nf = n as f64;
    let f = |lam: f64| lam * (-2.0 * nf * (lam - 1.0) * (lam - 1.0)).exp();
    // interior critical point of λ e^{-2n(λ-1)^2}: 4nλ² - 4nλ - 1 = 0
    let crit = 0.5 * (1.0 + (1.0 + 1.0 / nf).sqrt());
    let mut best = f(top.min(1.0));
    if crit <= top {
        best = best.max(f(crit));
    }
    best.max(f(top))
}

/// Minimal n with the hull-restricted max ≤ 1 + ε (monotone in n, bisected).
fn select_n(epsilon: f64, top: f64, cap: u64) -> Result<u64> {
    let ok = |n: u64| max_lambda_value(n, top) <= 1.0 + epsilon;
    if ok(1) {
        return Ok(1);
    }
    let mut hi = 2u64;
    while !ok(hi) {
        hi = hi.saturating_mul(2);
        if hi > cap {
            return Err(Error::ScheduleExhausted {
                stage: 0,
                failing_residual: format!(
                    "no n ≤ {cap} satisfies the peak bound for ε = {epsilon:.3e}"
                ),
            });
        }
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// C_n: max over the hull grid of ((e^{-n(λ-1)²} - 1)/(λ-1))², with the
/// removable singularity at λ = 1 filled by its limit 0 and the analytic
/// interior maximizer included as an extra grid point.
fn c_constant(n: u64, top: f64, grid_points: usize) -> f64 {
    let nf = n as f64;
    let ratio_sq = |lam: f64| {
        let u = lam - 1.0;
        if u.abs() < 1e-12 {
            return 0.0;
        }
        let r = ((-nf * u * u).exp() - 1.0) / u;
        r * r
    };
    let mut best: f64 = 0.0;
    let m = grid_points.max(2);
    for i in 0..=m {
        let lam = top * i as f64 / m as f64;
        best = best.max(ratio_sq(lam));
    }
    // stationary point of (1-e^{-v²})/v sits near v* ≈ 1.1209/√n
    let vstar = 1.120_906 / nf.sqrt();
    for cand in [1.0 - vstar, 1.0 + vstar, 0.0, top] {
        if (0.0..=top).contains(&cand) {
            best = best.max(ratio_sq(cand));
        }
    }
    best
}

/// Residuals of the analytic estimates for one candidate (n, l, k).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticResiduals {
    /// ‖σ_{-i/4}(f)‖.
    pub f_quarter_norm: f64,
    /// ‖σ_{-i/4}(f) − f‖.
    pub f_quarter_drift: f64,
    /// ‖σ_{-i/2}(f)‖.
    pub f_half_norm: f64,
    /// ‖σ_{-i/4}(g) − g‖.
    pub g_quarter_drift: f64,
}

/// Per-stage report of the contractification schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractifyStage {
    pub j: usize,
    pub epsilon: f64,
    pub n: u64,
    pub c_n: f64,
    pub l: f64,
    pub k: usize,
    pub residuals: AnalyticResiduals,
    /// max over the embedded matrix-unit test set of ‖(T_k^l − 1)ξ‖.
    pub test_set_residual: f64,
    /// ‖(T_k^l − 1)Ω‖.
    pub omega_residual: f64,
    /// λ_max(Ψ_j(1)) − 1 (should be ≤ 0 up to rounding).
    pub unit_excess: f64,
    /// −min eigenvalue of ρ − Ψ_j*(ρ) (should be ≤ 0 up to rounding).
    pub state_excess: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractifyReport {
    /// Uniform bound sup_k ‖Φ_k(1)‖ recorded before the schedule runs.
    pub unit_hull: f64,
    pub stages: Vec<ContractifyStage>,
}

fn analytic_residuals(
    sf: &StandardForm,
    g: &ComplexMatrix,
    n: u64,
) -> Result<(ComplexMatrix, AnalyticResiduals)> {
    let nf = n as f64;
    let f = eigh(g)?.apply_real_fn(|lam| (-nf * (lam - 1.0) * (lam - 1.0)).exp());
    let s_quarter = sf.modular_analytic(C64::new(0.0, -0.25), &f)?;
    let s_half = sf.modular_analytic(C64::new(0.0, -0.5), &f)?;
    let g_quarter = sf.modular_analytic(C64::new(0.0, -0.25), g)?;
    let residuals = AnalyticResiduals {
        f_quarter_norm: op_norm(&s_quarter),
        f_quarter_drift: op_norm(&(&s_quarter - &f)),
        f_half_norm: op_norm(&s_half),
        g_quarter_drift: op_norm(&(&g_quarter - g)),
    };
    Ok((f, residuals))
}

/// Contractify a family of state-reducing maps: for each ε_j in the schedule
/// pick witnesses (n, l, k) meeting the displayed residual targets and return
/// Ψ_j = (1+ε_j)^{-2} f Φ_{k(j)}^{l(j)}(·) f with f = F_{n(j)}(Φ^l(1)).
pub fn contractify(
    sf: &StandardForm,
    phis: &[CPMap],
    cfg: &ContractifyConfig,
) -> Result<(Vec<CPMap>, ContractifyReport)> {
    cfg.validate()?;
    if phis.is_empty() {
        return Ok((
            Vec::new(),
            ContractifyReport {
                unit_hull: 0.0,
                stages: Vec::new(),
            },
        ));
    }
    let mut unit_hull: f64 = 0.0;
    for phi in phis {
        let margin = state_reducing_margin(sf, phi)?;
        if margin < -PRECONDITION_TOL {
            return Err(Error::NotStateReducing { min_eig: margin });
        }
        unit_hull = unit_hull.max(eigh(&phi.unit_image())?.max_eigenvalue().max(0.0));
    }
    let top = unit_hull.max(1.0) * (1.0 + 1e-9);

    let omega = sf.cyclic_vector();
    let n_alg = sf.dim();
    let test_set: Vec<_> = (0..n_alg * n_alg)
        .map(|idx| {
            sf.kms_embed(&ComplexMatrix::matrix_unit(n_alg, idx / n_alg, idx % n_alg))
                .expect("dimension")
        })
        .collect();

    let mut outputs = Vec::new();
    let mut stages = Vec::new();

    // averaged maps and implementations are cached per (k, l) across stages
    let mut averages: Vec<Vec<Option<(CPMap, L2Operator)>>> =
        vec![vec![None; cfg.l_grid.len()]; phis.len()];
    let mut get_average = |k: usize, li: usize| -> Result<(CPMap, L2Operator)> {
        if averages[k][li].is_none() {
            let acfg = AveragingConfig::new(cfg.l_grid[li])?;
            let avg = modular_average_unchecked(sf, &phis[k], &acfg)?;
            let t = kms_implementation_unchecked(sf, &avg);
            averages[k][li] = Some((avg, t));
        }
        Ok(averages[k][li].clone().unwrap())
    };

    for (j, &epsilon) in cfg.epsilons.iter().enumerate() {
        let n = select_n(epsilon, top, cfg.n_cap).map_err(|e| match e {
            Error::ScheduleExhausted {
                failing_residual, ..
            } => Error::ScheduleExhausted {
                stage: j,
                failing_residual,
            },
            other => other,
        })?;
        let c_n = c_constant(n, top, cfg.c_grid_points);
        let g_target = if c_n > 0.0 {
            epsilon / c_n.sqrt()
        } else {
            f64::INFINITY
        };

        // scan l, then k; targets are monotone so the first hit is the witness
        let mut chosen: Option<(usize, usize, ComplexMatrix, AnalyticResiduals, f64, f64)> = None;
        let mut last_failure = String::new();
        'l_scan: for li in 0..cfg.l_grid.len() {
            // the analytic targets must hold for every k in the family
            let mut per_k: Vec<(ComplexMatrix, AnalyticResiduals)> = Vec::new();
            for k in 0..phis.len() {
                let (avg, _) = get_average(k, li)?;
                let g = avg.unit_image().hermitian_part();
                let (f, res) = analytic_residuals(sf, &g, n)?;
                let ok = res.f_quarter_norm <= 1.0 + epsilon
                    && res.f_quarter_drift <= epsilon
                    && res.f_half_norm <= 1.0 + epsilon
                    && res.g_quarter_drift <= g_target;
                if !ok {
                    last_failure = format!(
                        "l = {}: residuals {:?} vs targets (1+ε, ε, 1+ε, ε/√C_n = {:.3e})",
                        cfg.l_grid[li], res, g_target
                    );
                    continue 'l_scan;
                }
                per_k.push((f, res));
            }
            // k-selection: L²-closeness of T_k^l on the test set and at Ω
            #[allow(clippy::needless_range_loop)]
            for k in 0..phis.len() {
                let (_, t) = get_average(k, li)?;
                let omega_res = (&t.apply(&omega).mat - &omega.mat).fro_norm();
                let mut test_res: f64 = 0.0;
                for xi in &test_set {
                    test_res = test_res.max((&t.apply(xi).mat - &xi.mat).fro_norm());
                }
                if test_res <= epsilon && omega_res <= g_target {
                    let (f, res) = per_k[k].clone();
                    chosen = Some((li, k, f, res, test_res, omega_res));
                    break 'l_scan;
                }
                last_failure = format!(
                    "l = {}, k = {}: test-set residual {:.3e} (target {:.3e}), Ω residual {:.3e} (target {:.3e})",
                    cfg.l_grid[li], k, test_res, epsilon, omega_res, g_target
                );
            }
        }

        let (li, k, f, residuals, test_set_residual, omega_residual) =
            chosen.ok_or(Error::ScheduleExhausted {
                stage: j,
                failing_residual: last_failure,
            })?;

        let (avg, _) = get_average(k, li)?;
        let psi = avg
            .conjugate(&f)?
            .scale(1.0 / ((1.0 + epsilon) * (1.0 + epsilon)))?;

        let unit_excess = eigh(&psi.unit_image())?.max_eigenvalue() - 1.0;
        let state_excess = -state_reducing_margin(sf, &psi)?;
        stages.push(ContractifyStage {
            j,
            epsilon,
            n,
            c_n,
            l: cfg.l_grid[li],
            k,
            residuals,
            test_set_residual,
            omega_residual,
            unit_excess,
            state_excess,
        });
        outputs.push(psi);
    }

    Ok((outputs, ContractifyReport { unit_hull, stages }))
}

/// The CP map x ↦ trace(w x) · a for w, a ⪰ 0 (tiny negative eigenvalues are
/// clipped).
fn functional_times_element(n: usize, w: &ComplexMatrix, a: &ComplexMatrix) -> Result<CPMap> {
    let we = eigh(w)?;
    let ae = eigh(a)?;
    let mut kraus = Vec::new();
    for kw in 0..n {
        let lw = we.eigenvalues[kw].max(0.0);
        if lw == 0.0 {
            continue;
        }
        for ka in 0..n {
            let la = ae.eigenvalues[ka].max(0.0);
            if la == 0.0 {
                continue;
            }
            let s = (lw * la).sqrt();
            let op = ComplexMatrix::from_fn(n, n, |r, c| {
                ae.eigenvectors[(r, ka)] * we.eigenvectors[(c, kw)].conj() * s
            });
            kraus.push(op);
        }
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(n, n));
    }
    CPMap::new(n, kraus)
}

/// Unitalize a contractive state-reducing map:
/// Ψ(x) = Φ(x) + a^{1/2} φ_b(x) a^{1/2} with b = 1 − c and
/// a = (1 − Φ(1))/φ(1 − c). The output is Markov; Markov inputs pass through
/// unchanged.
pub fn markovize(sf: &StandardForm, phi: &CPMap) -> Result<CPMap> {
    let n = sf.dim();
    let id = ComplexMatrix::identity(n);
    let defect_matrix = (&id - &phi.unit_image()).hermitian_part();
    let defect_eig = eigh(&defect_matrix)?;
    if defect_eig.min_eigenvalue() < -PRECONDITION_TOL {
        return Err(Error::PreconditionFailed {
            hypothesis: "contractive (Phi(1) ⪯ 1)".into(),
            residual: -defect_eig.min_eigenvalue(),
        });
    }
    let unital_defect = op_norm(&defect_matrix);
    if unital_defect <= 1e-12 {
        return Ok(phi.clone());
    }

    let c = dominated_density(sf, phi)?;
    let b = (&id - &c).hermitian_part();
    let denom = sf.state().expect(&b).re;
    if denom <= 1e-12 {
        return Err(Error::DegenerateDenominator {
            denominator: denom,
            defect: unital_defect,
        });
    }
    let a = defect_matrix.scale_re(1.0 / denom);
    let h = sf.state().half_power();
    let w = (&(h * &b) * h).hermitian_part();
    let correction = functional_times_element(n, &w, &a)?;
    phi.add(&correction)
}

/// Everything the full pipeline reports besides the maps themselves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub contractify: ContractifyReport,
    /// Markov residuals of each output after unitalization + symmetrization.
    pub markov_residuals: Vec<cpmap::MarkovDiagnostics>,
    /// KMS symmetry residual ‖T − T*‖ of each output.
    pub symmetry_residuals: Vec<f64>,
    /// max test-set residual ‖(T_in − 1)ξ‖ of the input chosen at each stage.
    pub input_residuals: Vec<f64>,
    /// max test-set residual ‖(T_out − 1)ξ‖ of each output.
    pub output_residuals: Vec<f64>,
}

/// The composite pipeline: contractify, unitalize each output, then
/// KMS-symmetrize. Outputs are KMS-symmetric Markov maps whose
/// implementations still converge on the embedded matrix-unit test set.
pub fn full_pipeline(
    sf: &StandardForm,
    phis: &[CPMap],
    cfg: &ContractifyConfig,
) -> Result<(Vec<CPMap>, PipelineReport)> {
    let (contracted, contractify_report) = contractify(sf, phis, cfg)?;
    let n = sf.dim();
    let test_set: Vec<_> = (0..n * n)
        .map(|idx| {
            sf.kms_embed(&ComplexMatrix::matrix_unit(n, idx / n, idx % n))
                .expect("dimension")
        })
        .collect();
    let residual_of = |t: &L2Operator| -> f64 {
        test_set
            .iter()
            .map(|xi| (&t.apply(xi).mat - &xi.mat).fro_norm())
            .fold(0.0, f64::max)
    };

    let mut outputs = Vec::new();
    let mut markov_residuals = Vec::new();
    let mut symmetry_residuals = Vec::new();
    let mut input_residuals = Vec::new();
    let mut output_residuals = Vec::new();
    for (stage, psi) in contractify_report.stages.iter().zip(contracted.iter()) {
        let markov = markovize(sf, psi)?;
        let symmetric = cpmap::kms_symmetrize(sf, &markov)?;
        let (_, diag) = cpmap::is_markov(sf, &symmetric, PRECONDITION_TOL)?;
        markov_residuals.push(diag);
        let t_out = kms_implementation_unchecked(sf, &symmetric);
        symmetry_residuals.push(t_out.self_adjoint_defect());
        let t_in = kms_implementation_unchecked(sf, &phis[stage.k]);
        input_residuals.push(residual_of(&t_in));
        output_residuals.push(residual_of(&t_out));
        outputs.push(symmetric);
    }

    Ok((
        outputs,
        PipelineReport {
            contractify: contractify_report,
            markov_residuals,
            symmetry_residuals,
            input_residuals,
            output_residuals,
        },
    ))
}
