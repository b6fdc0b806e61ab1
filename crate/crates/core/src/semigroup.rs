//! Hilbert-space semigroup synthesis: averaged generators, resolvent
//! invariance, the commuting-family replacement, the C₀-semigroup limit of a
//! family of self-adjoint contractions, and the round trip back to Markov
//! map snapshots.

use serde::{Deserialize, Serialize};

use crate::cpmap::{
    self, kms_implementation, reconstruct_from_l2, CPMap, L2Operator, PRECONDITION_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{eigh, op_norm, psd_truncate, HermitianEigen};
use crate::matrix::{ComplexMatrix, C64};
use crate::state::{StandardForm, StdVector};

/// Closed convex sets tracked through the synthesis: the singleton {Ω}, the
/// order interval {0 ≤ ξ ≤ Ω}, and the natural cone at matrix level k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexSetKind {
    SingletonOmega,
    OrderInterval,
    NaturalCone { level: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvexSetSpec {
    pub kind: ConvexSetKind,
    pub tolerance: f64,
}

impl ConvexSetSpec {
    pub fn new(kind: ConvexSetKind) -> Self {
        Self {
            kind,
            tolerance: 1e-8,
        }
    }

    /// The family tracked by the Markov-semigroup synthesis: {Ω}, the order
    /// interval, and cone levels 1..=cap.
    pub fn canonical_family(cap: usize) -> Vec<ConvexSetSpec> {
        let mut sets = vec![
            ConvexSetSpec::new(ConvexSetKind::SingletonOmega),
            ConvexSetSpec::new(ConvexSetKind::OrderInterval),
        ];
        for level in 1..=cap.max(1) {
            sets.push(ConvexSetSpec::new(ConvexSetKind::NaturalCone { level }));
        }
        sets
    }
}

/// Spectral data of a C₀-semigroup of self-adjoint contractions: the
/// generator's eigenvalues (non-negative, non-decreasing) and eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralSemigroup {
    hilbert_dim: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl SpectralSemigroup {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenvectors.rows() != d || eigenvectors.cols() != d {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "{} eigenvalues with {}x{} eigenvector matrix",
                    d,
                    eigenvectors.rows(),
                    eigenvectors.cols()
                ),
            });
        }
        let mut eigenvalues = eigenvalues;
        for v in &mut eigenvalues {
            if *v < -1e-8 {
                return Err(Error::InvalidParameter(format!(
                    "generator eigenvalue {v:.3e} is genuinely negative"
                )));
            }
            *v = v.max(0.0);
        }
        let gram = &eigenvectors.conj_transpose() * &eigenvectors;
        let ortho_defect = (&gram - &ComplexMatrix::identity(d)).fro_norm();
        if ortho_defect > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "eigenvector matrix is not orthonormal (defect {ortho_defect:.3e})"
            )));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&i, &j| eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap());
        let sorted_vals: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let sorted_vecs = ComplexMatrix::from_fn(d, d, |i, j| eigenvectors[(i, order[j])]);
        Ok(Self {
            hilbert_dim: d,
            eigenvalues: sorted_vals,
            eigenvectors: sorted_vecs,
        })
    }

    /// Spectral decomposition of a Hermitian PSD generator matrix.
    pub fn from_generator_matrix(m: &ComplexMatrix) -> Result<Self> {
        let e = eigh(m)?;
        Self::new(e.eigenvalues, e.eigenvectors)
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    fn spectral_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let he = HermitianEigen {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
        };
        he.apply_real_fn(f)
    }

    /// Generator matrix A.
    pub fn generator(&self) -> ComplexMatrix {
        self.spectral_fn(|x| x)
    }

    /// S_t = e^{-tA}.
    pub fn at_time(&self, t: f64) -> ComplexMatrix {
        self.spectral_fn(|x| (-t * x).exp())
    }

    /// S_t as an operator on the standard form of M_n (requires the Hilbert
    /// dimension to be n²).
    pub fn l2_at_time(&self, t: f64) -> Result<L2Operator> {
        let n = (self.hilbert_dim as f64).sqrt().round() as usize;
        if n * n != self.hilbert_dim {
            return Err(Error::DimensionMismatch {
                context: format!("Hilbert dimension {} is not a square", self.hilbert_dim),
            });
        }
        L2Operator::new(n, self.at_time(t))
    }
}

/// Wire format `{"dim": d, "eigenvalues": [...], "eigenvectors": <matrix>}`.
#[derive(Serialize, Deserialize)]
pub struct SemigroupWire {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralSemigroup {
    pub fn to_wire(&self) -> SemigroupWire {
        SemigroupWire {
            dim: self.hilbert_dim,
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
        }
    }

    pub fn from_wire(wire: SemigroupWire) -> Result<Self> {
        if wire.eigenvalues.len() != wire.dim {
            return Err(Error::DimensionMismatch {
                context: "semigroup wire eigenvalue count".into(),
            });
        }
        Self::new(wire.eigenvalues, wire.eigenvectors)
    }
}

fn require_self_adjoint_contraction(t: &L2Operator, index: usize) -> Result<()> {
    let defect = t.self_adjoint_defect();
    if defect > 1e-9 {
        return Err(Error::OperatorNotSelfAdjoint { index, defect });
    }
    let norm = t.op_norm();
    if norm > 1.0 + 1e-9 {
        return Err(Error::NotContraction {
            index,
            detail: format!("operator norm {norm:.12}"),
        });
    }
    Ok(())
}

/// A = n·I − Σᵢ Tᵢ for self-adjoint contractions Tᵢ; self-adjoint with
/// spectrum in [0, 2n].
pub fn averaged_generator(ts: &[L2Operator]) -> Result<L2Operator> {
    if ts.is_empty() {
        return Err(Error::InvalidParameter("empty operator family".into()));
    }
    let dim = ts[0].dim();
    let mut acc = L2Operator::identity(dim).scale_re(ts.len() as f64);
    for (i, t) in ts.iter().enumerate() {
        if t.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("operator {i} dimension"),
            });
        }
        require_self_adjoint_contraction(t, i)?;
        acc = acc.sub(t);
    }
    Ok(acc)
}

/// λ(λI + A)⁻¹ for Hermitian PSD A: a self-adjoint contraction.
pub fn resolvent(a: &L2Operator, lambda: f64) -> Result<L2Operator> {
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter(
            "resolvent parameter must be positive".into(),
        ));
    }
    let defect = a.self_adjoint_defect();
    if defect > 1e-8 {
        return Err(Error::OperatorNotSelfAdjoint { index: 0, defect });
    }
    let e = eigh(a.matrix())?;
    if e.min_eigenvalue() < -1e-8 {
        return Err(Error::PreconditionFailed {
            hypothesis: "positive semidefinite generator".into(),
            residual: -e.min_eigenvalue(),
        });
    }
    let cond = (lambda + e.max_eigenvalue().max(0.0)) / lambda;
    if cond > 1e12 {
        return Err(Error::SingularSystem { cond });
    }
    let m = e.apply_real_fn(|x| lambda / (lambda + x.max(0.0)));
    L2Operator::new(a.dim(), m)
}

/// Lift T to level k: blockwise application on M_k(HS) ≅ M_{kn}.
pub fn lift_apply(t: &L2Operator, level: usize, x: &ComplexMatrix) -> ComplexMatrix {
    let n = t.dim();
    let mut blocks = Vec::with_capacity(level * level);
    for a in 0..level {
        for b in 0..level {
            let xb = x.block(a, b, n);
            blocks.push(t.apply(&StdVector::new(xb)).mat);
        }
    }
    ComplexMatrix::from_blocks(level, n, &blocks)
}

/// Result of a sampled invariance check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub kind: ConvexSetKind,
    pub samples: usize,
    pub worst_violation: f64,
    pub ok: bool,
}

/// Sample random points of the set, push them through the (lifted) operator
/// and measure the distance back to the set. Distances are measured against
/// an explicit feasible point (spectral clipping of the unembedded
/// parameter), which vanishes exactly on members.
pub fn check_set_invariance(
    sf: &StandardForm,
    op: &L2Operator,
    set: &ConvexSetSpec,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> Result<InvarianceReport> {
    let mut worst: f64 = 0.0;
    match set.kind {
        ConvexSetKind::SingletonOmega => {
            let omega = sf.cyclic_vector();
            worst = (&op.apply(&omega).mat - &omega.mat).fro_norm();
        }
        ConvexSetKind::OrderInterval => {
            for _ in 0..samples {
                let xi = crate::sampling::random_order_interval_point(rng, sf);
                let image = op.apply(&xi);
                let m = sf.kms_unembed(&image)?.hermitian_part();
                let clipped = eigh(&m)?.apply_real_fn(|x| x.clamp(0.0, 1.0));
                let feasible = sf.kms_embed(&clipped)?;
                worst = worst.max((&image.mat - &feasible.mat).fro_norm());
            }
        }
        ConvexSetKind::NaturalCone { level } => {
            let amplified = sf.amplified(level)?;
            for _ in 0..samples {
                let xi = crate::sampling::random_cone_element(rng, &amplified);
                let image = lift_apply(op, level, &xi.mat);
                let m = amplified.kms_unembed(&StdVector::new(image.clone()))?;
                let truncated = psd_truncate(&m.hermitian_part())?;
                let feasible = amplified.kms_embed(&truncated)?;
                worst = worst.max((&image - &feasible.mat).fro_norm());
            }
        }
    }
    Ok(InvarianceReport {
        kind: set.kind,
        samples,
        worst_violation: worst,
        ok: worst <= set.tolerance,
    })
}

/// Knobs for the synthesis pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisSchedule {
    /// Size of the commuting resolvent family produced by step 1.
    pub family_size: usize,
    /// Acceptance residual for truncated strong limits.
    pub cauchy_tol: f64,
    /// Pairwise commutator tolerance for the pass-through dispatch.
    pub commutator_tol: f64,
    /// Time grid used for Cauchy acceptance and invariance sampling.
    pub t_grid: Vec<f64>,
    /// Cap on step-2 summable subsequence length.
    pub max_terms: usize,
    /// Samples per convex set in the invariance reports.
    pub invariance_samples: usize,
    pub seed: u64,
}

impl Default for SynthesisSchedule {
    fn default() -> Self {
        Self {
            family_size: 12,
            cauchy_tol: 1e-8,
            commutator_tol: 1e-10,
            t_grid: vec![0.1, 0.5, 1.0, 2.0, 10.0],
            max_terms: 64,
            invariance_samples: 32,
            seed: 0x5bd1e995,
        }
    }
}

/// Output of the commuting-family replacement (step 1).
#[derive(Debug, Clone)]
pub struct CommutingFamily {
    /// The mutually commuting self-adjoint contractions.
    pub ops: Vec<L2Operator>,
    /// True when the inputs already commuted and were passed through.
    pub passthrough: bool,
    /// Indices of the inputs selected by the 2^{-n} subsequence criterion
    /// (pass-through keeps the input order).
    pub chosen: Vec<usize>,
    /// Σ (I − T_i) over the chosen subsequence: the generator data behind
    /// the resolvent family.
    pub generator: L2Operator,
    /// Largest pairwise commutator norm among the outputs.
    pub max_commutator: f64,
    /// Last Cauchy increment of R_{N,n} in the prefix N (None for
    /// pass-through).
    pub cauchy_residual: Option<f64>,
}

fn max_pairwise_commutator(ops: &[L2Operator]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let ab = ops[i].compose(&ops[j]);
            let ba = ops[j].compose(&ops[i]);
            worst = worst.max(ab.distance(&ba));
        }
    }
    worst
}

/// Modified Gram–Schmidt, dropping directions below `tol`.
fn orthonormal_columns(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let coeff: C64 = b.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
            for (wi, bi) in w.iter_mut().zip(b.iter()) {
                *wi -= coeff * bi;
            }
        }
        let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol {
            for wi in &mut w {
                *wi /= norm;
            }
            basis.push(w);
        }
    }
    basis
}

/// Operator norm of (T − I) restricted to the span of `span_vectors`.
fn restricted_defect(t: &L2Operator, span_vectors: &[Vec<C64>]) -> f64 {
    let basis = orthonormal_columns(span_vectors, 1e-10);
    if basis.is_empty() {
        return 0.0;
    }
    let n2 = t.dim() * t.dim();
    let q = ComplexMatrix::from_fn(n2, basis.len(), |i, j| basis[j][i]);
    let diff = t.sub(&L2Operator::identity(t.dim()));
    op_norm(&(diff.matrix() * &q))
}

/// Replace a strongly convergent family of self-adjoint contractions by a
/// mutually commuting one with the same invariances: subsequence selection
/// with the 2^{-n} span criterion, then the resolvent family
/// T̃_n = n(n + Δ)⁻¹ of the accumulated generator. Families that already
/// commute pass through unchanged.
pub fn commuting_family(
    sf: &StandardForm,
    ts: &[L2Operator],
    sets: &[ConvexSetSpec],
    schedule: &SynthesisSchedule,
) -> Result<CommutingFamily> {
    if ts.is_empty() {
        return Err(Error::InvalidParameter("empty operator family".into()));
    }
    let dim = ts[0].dim();
    for (i, t) in ts.iter().enumerate() {
        require_self_adjoint_contraction(t, i)?;
        if t.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: format!("operator {i} dimension"),
            });
        }
    }

    let input_commutator = max_pairwise_commutator(ts);
    if input_commutator <= schedule.commutator_tol {
        let generator = sum_of_defects(ts);
        return Ok(CommutingFamily {
            ops: ts.to_vec(),
            passthrough: true,
            chosen: (0..ts.len()).collect(),
            generator,
            max_commutator: input_commutator,
            cauchy_residual: None,
        });
    }

    // matrix-unit basis of the standard-form space
    let n = dim;
    let basis_vectors: Vec<Vec<C64>> = (0..n * n)
        .map(|idx| ComplexMatrix::matrix_unit(n, idx / n, idx % n).vectorize())
        .collect();

    // subsequence with ||(T - I)|_{V_m}|| ≤ 2^{-m}, V_m spanned by powers of
    // the chosen operators applied to the basis
    let mut chosen: Vec<usize> = Vec::new();
    let mut used = vec![false; ts.len()];
    let mut span: Vec<Vec<C64>> = Vec::new();
    let target_len = ts.len().min(48);
    for m in 1..=target_len {
        let threshold = 0.5f64.powi(m as i32);
        let mut found = None;
        for (i, t) in ts.iter().enumerate() {
            if used[i] {
                continue;
            }
            if restricted_defect(t, &span) <= threshold {
                found = Some(i);
                break;
            }
        }
        let Some(i) = found else {
            if chosen.is_empty() {
                return Err(Error::SubsequenceExhausted { step: m });
            }
            break;
        };
        used[i] = true;
        chosen.push(i);
        // grow the span: powers T_i^k(xi_l) for k up to m² (capped)
        let mut current: Vec<Vec<C64>> = basis_vectors.clone();
        for vec in &basis_vectors {
            span.push(vec.clone());
        }
        let power_cap = (m * m).min(8);
        for _ in 0..power_cap {
            current = current
                .iter()
                .map(|v| {
                    let x = ComplexMatrix::from_vectorized(n, n, v).unwrap();
                    ts[i].apply(&StdVector::new(x)).mat.vectorize()
                })
                .collect();
            for v in &current {
                span.push(v.clone());
            }
        }
    }

    // accumulated generator over the chosen prefix, with Cauchy tracking of
    // the resolvent family in the prefix length
    let chosen_ops: Vec<L2Operator> = chosen.iter().map(|&i| ts[i].clone()).collect();
    let generator = sum_of_defects(&chosen_ops);
    let mut cauchy_residual = None;
    if chosen_ops.len() >= 2 {
        let prev = sum_of_defects(&chosen_ops[..chosen_ops.len() - 1]);
        let mut worst: f64 = 0.0;
        for nn in 1..=schedule.family_size {
            let r_full = resolvent_of_generator(&generator, nn as f64)?;
            let r_prev = resolvent_of_generator(&prev, nn as f64)?;
            worst = worst.max(r_full.distance(&r_prev));
        }
        if worst > schedule.cauchy_tol {
            return Err(Error::CauchyFailure { residual: worst });
        }
        cauchy_residual = Some(worst);
    }

    let ops: Vec<L2Operator> = (1..=schedule.family_size)
        .map(|nn| resolvent_of_generator(&generator, nn as f64))
        .collect::<Result<_>>()?;
    let max_commutator = max_pairwise_commutator(&ops);

    // sampled invariance of every tracked set
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(schedule.seed);
    for set in sets {
        for op in &ops {
            let report = check_set_invariance(sf, op, set, schedule.invariance_samples, &mut rng)?;
            if !report.ok {
                return Err(Error::PreconditionFailed {
                    hypothesis: format!("resolvent family preserves {:?}", set.kind),
                    residual: report.worst_violation,
                });
            }
        }
    }

    Ok(CommutingFamily {
        ops,
        passthrough: false,
        chosen,
        generator,
        max_commutator,
        cauchy_residual,
    })
}

/// Σ (I − T_i).
fn sum_of_defects(ts: &[L2Operator]) -> L2Operator {
    let dim = ts[0].dim();
    let mut acc = L2Operator::identity(dim).scale_re(0.0);
    for t in ts {
        acc = acc.add(&L2Operator::identity(dim).sub(t));
    }
    acc
}

/// n(n + Δ)⁻¹ = (I + Δ/n)⁻¹ for the accumulated generator Δ.
fn resolvent_of_generator(delta: &L2Operator, nn: f64) -> Result<L2Operator> {
    let e = eigh(delta.matrix())?;
    let m = e.apply_real_fn(|mu| 1.0 / (1.0 + mu.max(0.0) / nn));
    L2Operator::new(delta.dim(), m)
}

/// How the step-2 truncation terminated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ConvergenceStatus {
    /// The geometric selection rule certifies the remaining tail below the
    /// Cauchy tolerance.
    CertifiedTail { bound: f64 },
    /// The input list was fully consumed; the generator is the exact finite
    /// sum and nothing is left to converge.
    Consumed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub passthrough: bool,
    pub chosen_step1: Vec<usize>,
    /// Resolvent indices (or input indices for pass-through) summed in step 2.
    pub chosen_step2: Vec<usize>,
    pub max_commutator: f64,
    pub cauchy_residual: Option<f64>,
    pub status: ConvergenceStatus,
    /// Final grid residual ‖S_{t,last} − S_{t,prev}‖, when measurable.
    pub last_grid_residual: Option<f64>,
    pub invariance: Vec<InvarianceReport>,
}

/// Synthesize the C₀-semigroup of self-adjoint contractions from a family of
/// approximating operators, keeping every tracked convex set invariant.
///
/// Step 1 replaces the family by a commuting one (pass-through when it
/// already commutes); step 2 accumulates a summable subsequence of defects
/// Δ = Σ (I − T) and exponentiates, certifying the truncation either by the
/// geometric tail of the selection rule or by exhausting the finite input.
pub fn synthesize_semigroup(
    sf: &StandardForm,
    ts: &[L2Operator],
    sets: &[ConvexSetSpec],
    schedule: &SynthesisSchedule,
) -> Result<(SpectralSemigroup, SynthesisReport)> {
    let family = commuting_family(sf, ts, sets, schedule)?;
    let dim = family.ops[0].dim();
    let t_max = schedule.t_grid.iter().cloned().fold(1.0, f64::max);

    let mut accumulated = L2Operator::identity(dim).scale_re(0.0);
    let mut chosen_step2 = Vec::new();
    let mut last_grid_residual = None;
    let status;

    if family.passthrough {
        // finite commuting sequence: scan in order with the geometric rule
        let norms: Vec<f64> = family
            .ops
            .iter()
            .map(|t| t.sub(&L2Operator::identity(dim)).op_norm())
            .collect();
        // relative slack so measured norms that tie the dyadic thresholds
        // exactly are not lost to rounding; deep-tail norms carry ~1e-6
        // relative noise from forming T - I near the identity
        let scale = 2.0 * (1.0 + 1e-4) * norms.iter().cloned().fold(1e-300, f64::max).max(1e-300);
        let mut m = 1usize;
        let mut used = vec![false; family.ops.len()];
        let mut prev_exp: Option<Vec<ComplexMatrix>> = None;
        loop {
            let threshold = scale * 0.5f64.powi(m as i32);
            let pick = (0..family.ops.len())
                .find(|&i| !used[i] && (norms[i] <= threshold || norms[i] <= 1e-12));
            match pick {
                Some(i) => {
                    used[i] = true;
                    chosen_step2.push(i);
                    accumulated = accumulated.add(&L2Operator::identity(dim).sub(&family.ops[i]));
                    let current: Vec<ComplexMatrix> = schedule
                        .t_grid
                        .iter()
                        .map(|&t| crate::linalg::herm_exp(accumulated.matrix(), -t))
                        .collect::<Result<_>>()?;
                    if let Some(prev) = &prev_exp {
                        let res = current
                            .iter()
                            .zip(prev.iter())
                            .map(|(a, b)| op_norm(&(a - b)))
                            .fold(0.0, f64::max);
                        last_grid_residual = Some(res);
                    }
                    prev_exp = Some(current);
                    m += 1;
                }
                None => {
                    if used.iter().all(|&u| u) {
                        status = ConvergenceStatus::Consumed;
                        break;
                    }
                    // unpicked operators remain but none meets the rule: the
                    // sequence stalls below the certification target
                    let best_remaining = norms
                        .iter()
                        .zip(used.iter())
                        .filter(|(_, &u)| !u)
                        .map(|(&v, _)| v)
                        .fold(f64::INFINITY, f64::min);
                    return Err(Error::NonConvergent {
                        residual: best_remaining * t_max,
                    });
                }
            }
            if m > schedule.max_terms {
                status = ConvergenceStatus::CertifiedTail {
                    bound: t_max * scale * 0.5f64.powi(schedule.max_terms as i32),
                };
                break;
            }
        }
    } else {
        // resolvent family: T(i) = (I + Δ/i)^{-1} is available for every
        // index, so the dyadic rule always finds its witness
        let delta_eig = eigh(family.generator.matrix())?;
        let mu_max = delta_eig.max_eigenvalue().max(0.0);
        let mut prev_index = 0u64;
        let mut tail = f64::INFINITY;
        for m in 1..=schedule.max_terms {
            let threshold = 0.5f64.powi(m as i32);
            // ||T(i) - I|| = mu_max/(i + mu_max) ≤ threshold
            let needed = if mu_max <= 0.0 {
                1.0
            } else {
                mu_max * (1.0 - threshold) / threshold
            };
            let i = (needed.ceil() as u64).max(prev_index + 1);
            prev_index = i;
            chosen_step2.push(i as usize);
            let term = delta_eig.apply_real_fn(|mu| {
                let mu = mu.max(0.0);
                mu / (i as f64 + mu)
            });
            accumulated = accumulated.add(&L2Operator::new(dim, term)?);
            tail = t_max * 0.5f64.powi(m as i32);
            if tail <= schedule.cauchy_tol {
                break;
            }
        }
        if tail > schedule.cauchy_tol {
            return Err(Error::NonConvergent { residual: tail });
        }
        status = ConvergenceStatus::CertifiedTail { bound: tail };
    }

    let semigroup = SpectralSemigroup::from_generator_matrix(accumulated.matrix())?;

    // sampled invariance of the synthesized semigroup on the time grid
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(schedule.seed ^ 0xabcd);
    let mut invariance = Vec::new();
    for set in sets {
        let mut worst = InvarianceReport {
            kind: set.kind,
            samples: 0,
            worst_violation: 0.0,
            ok: true,
        };
        for &t in &schedule.t_grid {
            let st = L2Operator::new(dim, semigroup.at_time(t))?;
            let rep = check_set_invariance(sf, &st, set, schedule.invariance_samples, &mut rng)?;
            worst.samples += rep.samples;
            if rep.worst_violation > worst.worst_violation {
                worst.worst_violation = rep.worst_violation;
            }
            worst.ok = worst.ok && rep.ok;
        }
        invariance.push(worst);
    }

    Ok((
        semigroup,
        SynthesisReport {
            passthrough: family.passthrough,
            chosen_step1: family.chosen,
            chosen_step2,
            max_commutator: family.max_commutator,
            cauchy_residual: family.cauchy_residual,
            status,
            last_grid_residual,
            invariance,
        },
    ))
}

/// Markov map snapshot of the semigroup at one time, with its residuals.
#[derive(Debug, Clone)]
pub struct SemigroupSnapshot {
    pub time: f64,
    pub map: CPMap,
    pub markov: cpmap::MarkovDiagnostics,
    pub symmetry_defect: f64,
}

/// Synthesize the KMS-symmetric Markov semigroup generated by a family of
/// KMS-symmetric Markov maps and reconstruct map snapshots Φ_t at the
/// requested times.
pub fn markov_semigroup_from_witnesses(
    sf: &StandardForm,
    phis: &[CPMap],
    times: &[f64],
    cone_level_cap: usize,
    schedule: &SynthesisSchedule,
) -> Result<(SpectralSemigroup, Vec<SemigroupSnapshot>, SynthesisReport)> {
    let mut impls = Vec::new();
    for (i, phi) in phis.iter().enumerate() {
        let (markov, diag) = cpmap::is_markov(sf, phi, PRECONDITION_TOL)?;
        if !markov {
            return Err(Error::PreconditionFailed {
                hypothesis: format!("witness {i} is Markov"),
                residual: diag.unital_defect.max(diag.state_preserving_defect),
            });
        }
        let t = kms_implementation(sf, phi)?;
        let sym = t.self_adjoint_defect();
        if sym > 1e-8 {
            return Err(Error::PreconditionFailed {
                hypothesis: format!("witness {i} is KMS-symmetric"),
                residual: sym,
            });
        }
        impls.push(t);
    }
    let sets = ConvexSetSpec::canonical_family(cone_level_cap);
    let (semigroup, report) = synthesize_semigroup(sf, &impls, &sets, schedule)?;

    let mut snapshots = Vec::new();
    for &time in times {
        let st = semigroup.l2_at_time(time)?;
        let map = reconstruct_from_l2(sf, &st)?;
        let (_, markov) = cpmap::is_markov(sf, &map, PRECONDITION_TOL)?;
        let symmetry_defect = kms_implementation(sf, &map)?.self_adjoint_defect();
        snapshots.push(SemigroupSnapshot {
            time,
            map,
            markov,
            symmetry_defect,
        });
    }
    Ok((semigroup, snapshots, report))
}

/// The ‖ρ_λ − ψ_{n,λ}‖ ≤ 2/(nλ) internals diagnostic from the compactness
/// part of the commuting-family construction, evaluated on a chosen prefix
/// of self-adjoint contractions.
pub fn compactness_diagnostic(
    chosen_ops: &[L2Operator],
    n: usize,
    lambda: f64,
) -> Result<(f64, f64)> {
    if n == 0 || n >= chosen_ops.len() {
        return Err(Error::InvalidParameter(
            "diagnostic needs 1 ≤ n < family length".into(),
        ));
    }
    let dim = chosen_ops[0].dim();
    let id = L2Operator::identity(dim);
    let theta_n = {
        let mut acc = id.scale_re(0.0);
        for t in &chosen_ops[..n] {
            acc = acc.add(t);
        }
        acc.scale_re(1.0 / n as f64)
    };
    let delta_n = sum_of_defects(&chosen_ops[..n]);
    let delta_full = sum_of_defects(chosen_ops);
    let delta_nm = delta_full.sub(&delta_n);

    // (I + scale·A)^{-1} for Hermitian PSD A
    let inv = |a: &L2Operator, scale: f64| -> Result<L2Operator> {
        let e = eigh(&a.matrix().scale_re(scale))?;
        if e.min_eigenvalue() < -1e-8 {
            return Err(Error::PreconditionFailed {
                hypothesis: "PSD operator in diagnostic".into(),
                residual: -e.min_eigenvalue(),
            });
        }
        L2Operator::new(dim, e.apply_real_fn(|x| 1.0 / (1.0 + x.max(0.0))))
    };

    let c = lambda / (n as f64 * lambda + 1.0);
    let gamma = inv(&delta_nm, c)?;
    let rho_lambda = inv(&delta_full, lambda)?;
    let res_n = inv(&delta_n, lambda)?;

    let first = theta_n.compose(&res_n).compose(&gamma);
    let second = rho_lambda
        .sub(&res_n)
        .compose(&theta_n)
        .compose(&gamma)
        .scale_re(c);
    let psi = first.add(&second);
    let measured = rho_lambda.distance(&psi);
    let bound = 2.0 / (n as f64 * lambda);
    Ok((measured, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::state::QuantumState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn qubit() -> StandardForm {
        StandardForm::new(QuantumState::diagonal(&[0.75, 0.25]).unwrap())
    }

    fn omega_projector(sf: &StandardForm) -> L2Operator {
        let w = sf.cyclic_vector().mat.vectorize();
        let n2 = sf.hilbert_dim();
        L2Operator::new(
            sf.dim(),
            ComplexMatrix::from_fn(n2, n2, |i, j| w[i] * w[j].conj()),
        )
        .unwrap()
    }

    #[test]
    fn averaged_generator_examples() {
        let id = L2Operator::identity(2);
        let a = averaged_generator(std::slice::from_ref(&id)).unwrap();
        assert!(a.op_norm() < 1e-12);

        let sf = qubit();
        let p = omega_projector(&sf);
        let a = averaged_generator(std::slice::from_ref(&p)).unwrap();
        let expected = L2Operator::identity(2).sub(&p);
        assert!(a.distance(&expected) < 1e-12);

        let bad = L2Operator::identity(2).scale_re(1.5);
        assert!(matches!(
            averaged_generator(&[bad]),
            Err(Error::NotContraction { .. })
        ));
    }

    #[test]
    fn two_commuting_projections_give_integer_spectrum() {
        let sf = qubit();
        let p = omega_projector(&sf);
        let id = L2Operator::identity(2);
        let q = id.sub(&p); // complementary projection commutes with p
        let a = averaged_generator(&[p, q]).unwrap();
        let e = eigh(a.matrix()).unwrap();
        for v in e.eigenvalues {
            let nearest = [0.0f64, 1.0, 2.0]
                .iter()
                .map(|&c| (v - c).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-10);
        }
    }

    #[test]
    fn resolvent_scalar_formula_and_identity() {
        let a = L2Operator::new(1, ComplexMatrix::from_real_diag(&[0.0])).unwrap();
        let r = resolvent(&a, 3.0).unwrap();
        assert!(r.distance(&L2Operator::identity(1)) < 1e-12);

        let a = L2Operator::new(1, ComplexMatrix::from_real_diag(&[1.0])).unwrap();
        let r = resolvent(&a, 1.0).unwrap();
        assert!((r.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resolvent_identity_on_random_psd() {
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        let g = sampling::random_psd(&mut rng, 4);
        let a = L2Operator::new(2, g).unwrap();
        let (lam, mu) = (0.7, 1.9);
        let r_lam = resolvent(&a, lam).unwrap();
        let r_mu = resolvent(&a, mu).unwrap();
        // with ρ_λ = λ(λ+A)^{-1}: λ ρ_λ − μ ρ_μ = (μ − λ) ρ_λ ρ_μ... in the
        // unnormalized form (λ+A)^{-1} − (μ+A)^{-1} = (μ−λ)(λ+A)^{-1}(μ+A)^{-1}
        let lhs = r_lam.scale_re(1.0 / lam).sub(&r_mu.scale_re(1.0 / mu));
        let rhs = r_lam.compose(&r_mu).scale_re((mu - lam) / (lam * mu));
        assert!(lhs.distance(&rhs) < 1e-10);
    }

    #[test]
    fn invariance_of_identity_and_markov_fixed_point() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let sf = qubit();
        let id = L2Operator::identity(2);
        for set in ConvexSetSpec::canonical_family(2) {
            let rep = check_set_invariance(&sf, &id, &set, 16, &mut rng).unwrap();
            assert!(rep.ok, "identity fails {:?}: {:?}", set.kind, rep);
        }
        let m = sampling::random_markov(&mut rng, &sf, 3).unwrap();
        let t = kms_implementation(&sf, &m).unwrap();
        let omega_set = ConvexSetSpec::new(ConvexSetKind::SingletonOmega);
        let rep = check_set_invariance(&sf, &t, &omega_set, 1, &mut rng).unwrap();
        assert!(rep.ok);
    }

    #[test]
    fn synthesize_identity_family() {
        let sf = qubit();
        let ids = vec![L2Operator::identity(2); 3];
        let sets = ConvexSetSpec::canonical_family(1);
        let (sg, report) =
            synthesize_semigroup(&sf, &ids, &sets, &SynthesisSchedule::default()).unwrap();
        assert!(report.passthrough);
        assert!(sg.eigenvalues().iter().all(|&l| l < 1e-12));
        let st = sg.at_time(2.0);
        assert!((&st - &ComplexMatrix::identity(4)).fro_norm() < 1e-12);
    }

    #[test]
    fn synthesize_single_projection_closed_form() {
        let sf = qubit();
        let p = omega_projector(&sf);
        let sets = vec![ConvexSetSpec::new(ConvexSetKind::SingletonOmega)];
        let (sg, report) = synthesize_semigroup(
            &sf,
            std::slice::from_ref(&p),
            &sets,
            &SynthesisSchedule::default(),
        )
        .unwrap();
        assert!(matches!(report.status, ConvergenceStatus::Consumed));
        // S_t = P + e^{-t}(I - P)
        let t = 0.8f64;
        let expected = {
            let id = L2Operator::identity(2);
            let comp = id.sub(&p);
            p.add(&comp.scale_re((-t).exp()))
        };
        assert!(op_norm(&(&sg.at_time(t) - expected.matrix())) < 1e-10);
    }

    #[test]
    fn synthesize_geometric_depolarizing_family() {
        // commuting family with geometric rates: generator has eigenvalue 0
        // on the Omega direction and one positive rate on its complement
        let sf = StandardForm::new(QuantumState::tracial(2));
        let p = omega_projector(&sf);
        let id = L2Operator::identity(2);
        let family: Vec<L2Operator> = (1..=40)
            .map(|k| {
                let theta = 0.5f64.powi(k);
                id.scale_re(1.0 - theta).add(&p.scale_re(theta))
            })
            .collect();
        let sets = ConvexSetSpec::canonical_family(2);
        let schedule = SynthesisSchedule::default();
        let (sg, report) = synthesize_semigroup(&sf, &family, &sets, &schedule).unwrap();
        assert!(report.passthrough);
        for rep in &report.invariance {
            assert!(rep.ok, "invariance {:?}", rep);
        }
        // spectrum: one zero (Omega direction), triple positive rate c
        let evs = sg.eigenvalues();
        assert!(evs[0].abs() < 1e-12);
        let c = evs[1];
        assert!(c > 1e-6);
        assert!(evs[1..].iter().all(|&l| (l - c).abs() < 1e-10));
        // semigroup law on a grid
        for &(t, s) in &[(0.3, 0.5), (1.0, 2.0)] {
            let lhs = sg.at_time(t + s);
            let rhs = &sg.at_time(t) * &sg.at_time(s);
            assert!(op_norm(&(&lhs - &rhs)) < 1e-10);
        }
    }

    #[test]
    fn harmonic_family_is_rejected_as_nonconvergent() {
        let sf = StandardForm::new(QuantumState::tracial(2));
        let p = omega_projector(&sf);
        let id = L2Operator::identity(2);
        let family: Vec<L2Operator> = (1..=30)
            .map(|k| {
                let theta = 1.0 / k as f64;
                id.scale_re(1.0 - theta).add(&p.scale_re(theta))
            })
            .collect();
        let sets = vec![ConvexSetSpec::new(ConvexSetKind::SingletonOmega)];
        let result = synthesize_semigroup(&sf, &family, &sets, &SynthesisSchedule::default());
        assert!(matches!(result, Err(Error::NonConvergent { .. })));
    }

    #[test]
    fn noncommuting_inputs_go_through_resolvent_replacement() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let sf = StandardForm::new(sampling::random_state(&mut rng, 2));
        // two non-commuting KMS-symmetric Markov implementations, with a
        // geometric tail pulling the family to the identity
        let m1 = sampling::random_kms_symmetric_markov(&mut rng, &sf, 2).unwrap();
        let m2 = sampling::random_kms_symmetric_markov(&mut rng, &sf, 3).unwrap();
        let t1 = kms_implementation(&sf, &m1).unwrap();
        let t2 = kms_implementation(&sf, &m2).unwrap();
        let id = L2Operator::identity(2);
        let mut family = vec![];
        for k in 1..=34 {
            let theta = 0.5f64.powi(k);
            let base = if k % 2 == 0 { &t1 } else { &t2 };
            family.push(id.scale_re(1.0 - theta).add(&base.scale_re(theta)));
        }
        let sets = ConvexSetSpec::canonical_family(1);
        let schedule = SynthesisSchedule::default();
        let cf = commuting_family(&sf, &family, &sets, &schedule).unwrap();
        assert!(!cf.passthrough);
        assert!(cf.max_commutator < 1e-10);
        for op in &cf.ops {
            assert!(op.is_self_adjoint(1e-9));
            assert!(op.is_contraction(1e-9));
        }
        let (sg, report) = synthesize_semigroup(&sf, &family, &sets, &schedule).unwrap();
        assert!(matches!(
            report.status,
            ConvergenceStatus::CertifiedTail { .. }
        ));
        let omega = sf.cyclic_vector();
        let s1 = L2Operator::new(2, sg.at_time(1.0)).unwrap();
        assert!((&s1.apply(&omega).mat - &omega.mat).fro_norm() < 1e-9);
    }

    #[test]
    fn compactness_diagnostic_bound_holds() {
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let sf = StandardForm::new(sampling::random_state(&mut rng, 2));
        let m1 = sampling::random_kms_symmetric_markov(&mut rng, &sf, 2).unwrap();
        let t1 = kms_implementation(&sf, &m1).unwrap();
        let id = L2Operator::identity(2);
        let family: Vec<L2Operator> = (1..=12)
            .map(|k| {
                let theta = 0.5f64.powi(k);
                id.scale_re(1.0 - theta).add(&t1.scale_re(theta))
            })
            .collect();
        for &n in &[2usize, 4] {
            for &lam in &[0.5, 1.0, 2.0] {
                let (measured, bound) = compactness_diagnostic(&family, n, lam).unwrap();
                assert!(
                    measured <= bound + 1e-6,
                    "diagnostic {measured} > {bound} at n={n}, λ={lam}"
                );
            }
        }
    }

    #[test]
    fn markov_semigroup_snapshots_stay_markov() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let sf = StandardForm::new(sampling::random_state(&mut rng, 2));
        let base = sampling::random_kms_symmetric_markov(&mut rng, &sf, 3).unwrap();
        let id = CPMap::identity(2);
        let family: Vec<CPMap> = (1..=34)
            .map(|k| {
                let theta = 0.5f64.powi(k);
                id.scale(1.0 - theta)
                    .unwrap()
                    .add(&base.scale(theta).unwrap())
                    .unwrap()
            })
            .collect();
        let (sg, snapshots, _report) = markov_semigroup_from_witnesses(
            &sf,
            &family,
            &[0.5, 1.0],
            2,
            &SynthesisSchedule::default(),
        )
        .unwrap();
        assert_eq!(sg.hilbert_dim(), 4);
        for snap in &snapshots {
            assert!(snap.markov.unital_defect < 1e-8);
            assert!(snap.markov.state_preserving_defect < 1e-8);
            assert!(snap.symmetry_defect < 1e-8);
        }
    }

    #[test]
    fn semigroup_wire_round_trip() {
        let sf = qubit();
        let p = omega_projector(&sf);
        let sets = vec![ConvexSetSpec::new(ConvexSetKind::SingletonOmega)];
        let (sg, _) =
            synthesize_semigroup(&sf, &[p], &sets, &SynthesisSchedule::default()).unwrap();
        let s = serde_json::to_string(&sg.to_wire()).unwrap();
        let back = SpectralSemigroup::from_wire(serde_json::from_str(&s).unwrap()).unwrap();
        assert!(op_norm(&(&back.at_time(1.0) - &sg.at_time(1.0))) < 1e-12);
    }
}
