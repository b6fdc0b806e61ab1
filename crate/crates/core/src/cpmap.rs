//! Completely positive maps in Kraus form, their Markov predicates, the
//! GNS/KMS L²-implementations, KMS adjoints and the reconstruction of a map
//! from a symmetric L²-Markov operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, op_norm, trace_norm};
use crate::matrix::{ComplexMatrix, C64};
use crate::state::{StandardForm, StdVector};

/// Default tolerance for the state-reducing / Markov precondition checks.
pub const PRECONDITION_TOL: f64 = 1e-9;

/// Eigenvalues of a reconstructed Choi matrix in [-CHOI_CLIP, 0] are treated
/// as numerical noise and clipped; anything below fails.
pub const CHOI_CLIP: f64 = 1e-8;

/// A completely positive map Φ(x) = Σᵢ Kᵢ x Kᵢ* on M_n.
#[derive(Debug, Clone)]
pub struct CPMap {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl CPMap {
    pub fn new(dim: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus family".into()));
        }
        for k in &kraus {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: format!("Kraus operator {}x{} on M_{}", k.rows(), k.cols(), dim),
                });
            }
        }
        Ok(Self { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Depolarizing-type map x ↦ (1-p) x + p φ(x) 1 for the given state.
    pub fn depolarizing(sf: &StandardForm, p: f64) -> Result<Self> {
        let n = sf.dim();
        let id = CPMap::identity(n).scale(1.0 - p)?;
        let state_prep = CPMap::state_preparation(sf, &ComplexMatrix::identity(n))?.scale(p)?;
        id.add(&state_prep)
    }

    /// The rank-one map x ↦ φ(x) · b for b ⪰ 0 (completely positive).
    pub fn state_preparation(sf: &StandardForm, b: &ComplexMatrix) -> Result<Self> {
        let n = sf.dim();
        let rho_eig = eigh(sf.state().rho())?;
        let b_eig = eigh(b)?;
        if b_eig.min_eigenvalue() < -1e-12 {
            return Err(Error::InvalidParameter(
                "state_preparation requires b to be positive semidefinite".into(),
            ));
        }
        let mut kraus = Vec::new();
        for k in 0..n {
            let lam = rho_eig.eigenvalues[k].max(0.0);
            for m in 0..n {
                let mu = b_eig.eigenvalues[m].max(0.0);
                let w = (lam * mu).sqrt();
                if w == 0.0 {
                    continue;
                }
                // w |w_m><v_k|
                let op = ComplexMatrix::from_fn(n, n, |a, c| {
                    b_eig.eigenvectors[(a, m)] * rho_eig.eigenvectors[(c, k)].conj() * w
                });
                kraus.push(op);
            }
        }
        CPMap::new(n, kraus)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Φ(x) = Σ Kᵢ x Kᵢ*.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "apply on {}x{} input, map dimension {}",
                    x.rows(),
                    x.cols(),
                    self.dim
                ),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &(&(k * x) * &k.conj_transpose());
        }
        Ok(out)
    }

    /// Trace dual Φ*(y) = Σ Kᵢ* y Kᵢ, so that trace(y Φ(x)) = trace(Φ*(y) x).
    pub fn apply_dual(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &(&(&k.conj_transpose() * y) * k);
        }
        Ok(out)
    }

    /// Φ(1).
    pub fn unit_image(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out = &out + &(k * &k.conj_transpose());
        }
        out
    }

    /// Choi matrix Σᵢⱼ E_ij ⊗ Φ(E_ij) (n²×n², Hermitian, PSD for Kraus maps).
    pub fn choi(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut choi = ComplexMatrix::zeros(n * n, n * n);
        for k in &self.kraus {
            // rank-one contribution |w><w| with w[i*n+a] = K[a,i]
            let w: Vec<C64> = (0..n * n).map(|idx| k[(idx % n, idx / n)]).collect();
            for r in 0..n * n {
                for c in 0..n * n {
                    choi[(r, c)] += w[r] * w[c].conj();
                }
            }
        }
        choi
    }

    /// Recover a Kraus family from a Choi matrix. Eigenvalues in
    /// [-CHOI_CLIP, 0] are clipped to zero; anything below fails.
    pub fn from_choi(dim: usize, choi: &ComplexMatrix) -> Result<Self> {
        if choi.rows() != dim * dim || choi.cols() != dim * dim {
            return Err(Error::DimensionMismatch {
                context: format!("Choi matrix {}x{} for M_{}", choi.rows(), choi.cols(), dim),
            });
        }
        let e = eigh(choi)?;
        if e.min_eigenvalue() < -CHOI_CLIP {
            return Err(Error::ChoiNotPsd {
                min_eig: e.min_eigenvalue(),
            });
        }
        let mut kraus = Vec::new();
        for (idx, &mu) in e.eigenvalues.iter().enumerate() {
            let mu = mu.max(0.0);
            if mu == 0.0 {
                continue;
            }
            let s = mu.sqrt();
            let k = ComplexMatrix::from_fn(dim, dim, |a, i| e.eigenvectors[(i * dim + a, idx)] * s);
            kraus.push(k);
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(dim, dim));
        }
        CPMap::new(dim, kraus)
    }

    /// Scale the map by s ≥ 0 (scales every Kraus operator by √s).
    pub fn scale(&self, s: f64) -> Result<Self> {
        if s < 0.0 {
            return Err(Error::InvalidParameter("negative CP scaling".into()));
        }
        let r = s.sqrt();
        CPMap::new(self.dim, self.kraus.iter().map(|k| k.scale_re(r)).collect())
    }

    /// Sum of two CP maps (concatenated Kraus families).
    pub fn add(&self, other: &CPMap) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                context: "CP map sum".into(),
            });
        }
        let mut kraus = self.kraus.clone();
        kraus.extend(other.kraus.iter().cloned());
        CPMap::new(self.dim, kraus)
    }

    /// Two-sided conjugation x ↦ a Φ(x) a* (Kraus operators a·Kᵢ).
    pub fn conjugate(&self, a: &ComplexMatrix) -> Result<Self> {
        CPMap::new(self.dim, self.kraus.iter().map(|k| a * k).collect())
    }

    /// Frobenius distance between Choi matrices; vanishes exactly on
    /// Kraus-gauge equivalent maps.
    pub fn choi_distance(&self, other: &CPMap) -> f64 {
        (&self.choi() - &other.choi()).fro_norm()
    }
}

/// Wire format `{"dim": n, "kraus": [<matrix>, ...]}`.
#[derive(Serialize, Deserialize)]
pub struct CPMapWire {
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
}

/// Witness-family file format `{"maps": [<cp map>, ...]}`.
#[derive(Serialize, Deserialize)]
pub struct CPMapFamilyWire {
    pub maps: Vec<CPMapWire>,
}

impl CPMapFamilyWire {
    pub fn parse_maps(self) -> Result<Vec<CPMap>> {
        self.maps.into_iter().map(CPMap::from_wire).collect()
    }
}

impl CPMap {
    pub fn to_wire(&self) -> CPMapWire {
        CPMapWire {
            dim: self.dim,
            kraus: self.kraus.clone(),
        }
    }

    pub fn from_wire(wire: CPMapWire) -> Result<Self> {
        CPMap::new(wire.dim, wire.kraus)
    }
}

/// A linear operator on the n²-dimensional standard-form Hilbert space,
/// stored as an n²×n² matrix acting on row-major vectorized elements.
#[derive(Debug, Clone)]
pub struct L2Operator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl L2Operator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "L2 operator {}x{} for algebra dimension {}",
                    matrix.rows(),
                    matrix.cols(),
                    dim
                ),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim),
        }
    }

    /// Build column-by-column from the images of the matrix units E_rc.
    pub fn from_images(dim: usize, mut image: impl FnMut(usize, usize) -> ComplexMatrix) -> Self {
        let n2 = dim * dim;
        let mut m = ComplexMatrix::zeros(n2, n2);
        for r in 0..dim {
            for c in 0..dim {
                let col = r * dim + c;
                let img = image(r, c);
                let v = img.vectorize();
                for (row, &value) in v.iter().enumerate() {
                    m[(row, col)] = value;
                }
            }
        }
        Self { dim, matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, xi: &StdVector) -> StdVector {
        let v = xi.mat.vectorize();
        let n2 = self.dim * self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n2];
        for (row, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (col, &value) in v.iter().enumerate().take(n2) {
                acc += self.matrix[(row, col)] * value;
            }
            *o = acc;
        }
        StdVector::new(ComplexMatrix::from_vectorized(self.dim, self.dim, &out).unwrap())
    }

    /// Hilbert-space adjoint with respect to the Hilbert–Schmidt inner
    /// product (conjugate transpose of the matrix).
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.conj_transpose(),
        }
    }

    pub fn compose(&self, other: &L2Operator) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn sub(&self, other: &L2Operator) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn add(&self, other: &L2Operator) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.scale_re(s),
        }
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    pub fn self_adjoint_defect(&self) -> f64 {
        op_norm(&(&self.matrix - &self.matrix.conj_transpose()))
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_defect() <= tol
    }

    pub fn is_contraction(&self, tol: f64) -> bool {
        self.op_norm() <= 1.0 + tol
    }

    pub fn distance(&self, other: &L2Operator) -> f64 {
        op_norm(&(&self.matrix - &other.matrix))
    }
}

/// Wire format `{"dim": n, "matrix": <n²×n² matrix>, "vectorization": "row-major"}`.
#[derive(Serialize, Deserialize)]
pub struct L2OperatorWire {
    pub dim: usize,
    pub matrix: ComplexMatrix,
    pub vectorization: String,
}

impl L2Operator {
    pub fn to_wire(&self) -> L2OperatorWire {
        L2OperatorWire {
            dim: self.dim,
            matrix: self.matrix.clone(),
            vectorization: "row-major".into(),
        }
    }

    pub fn from_wire(wire: L2OperatorWire) -> Result<Self> {
        if wire.vectorization != "row-major" {
            return Err(Error::InvalidParameter(format!(
                "unsupported vectorization '{}'",
                wire.vectorization
            )));
        }
        L2Operator::new(wire.dim, wire.matrix)
    }
}

/// Residuals backing a Markov verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovDiagnostics {
    /// ‖Φ(1) − 1‖ (operator norm).
    pub unital_defect: f64,
    /// ‖Φ*(ρ) − ρ‖₁ (trace norm).
    pub state_preserving_defect: f64,
}

/// Markov predicate: unital and φ-preserving within `tol`.
pub fn is_markov(sf: &StandardForm, phi: &CPMap, tol: f64) -> Result<(bool, MarkovDiagnostics)> {
    check_dims(sf, phi)?;
    let n = sf.dim();
    let unital_defect = op_norm(&(&phi.unit_image() - &ComplexMatrix::identity(n)));
    let state_preserving_defect =
        trace_norm(&(&phi.apply_dual(sf.state().rho())? - sf.state().rho()));
    let diagnostics = MarkovDiagnostics {
        unital_defect,
        state_preserving_defect,
    };
    Ok((
        unital_defect <= tol && state_preserving_defect <= tol,
        diagnostics,
    ))
}

/// State-reducing predicate φ∘Φ ≤ φ, i.e. ρ − Φ*(ρ) ⪰ 0 within `tol`.
pub fn is_state_reducing(sf: &StandardForm, phi: &CPMap, tol: f64) -> Result<bool> {
    Ok(state_reducing_margin(sf, phi)? >= -tol)
}

/// Smallest eigenvalue of ρ − Φ*(ρ); non-negative iff the map reduces the state.
pub fn state_reducing_margin(sf: &StandardForm, phi: &CPMap) -> Result<f64> {
    check_dims(sf, phi)?;
    let diff = &sf.state().rho().clone() - &phi.apply_dual(sf.state().rho())?;
    Ok(eigh(&diff)?.min_eigenvalue())
}

/// Sub-unitality defect: max(0, λ_max(Φ(1)) − 1).
pub fn contractivity_defect(phi: &CPMap) -> Result<f64> {
    let top = eigh(&phi.unit_image())?.max_eigenvalue();
    Ok((top - 1.0).max(0.0))
}

fn check_dims(sf: &StandardForm, phi: &CPMap) -> Result<()> {
    if sf.dim() != phi.dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "state dimension {} vs map dimension {}",
                sf.dim(),
                phi.dim()
            ),
        });
    }
    Ok(())
}

/// KMS L²-implementation: the operator ρ^{1/4} x ρ^{1/4} ↦ ρ^{1/4} Φ(x) ρ^{1/4}.
///
/// Requires φ∘Φ ≤ φ. The returned operator is a contraction whenever Φ is in
/// addition sub-unital (Φ(1) ⪯ 1); for a merely state-reducing map the norm
/// is only bounded by √max(1, ‖Φ(1)‖) and can genuinely exceed 1.
pub fn kms_implementation(sf: &StandardForm, phi: &CPMap) -> Result<L2Operator> {
    check_dims(sf, phi)?;
    let margin = state_reducing_margin(sf, phi)?;
    if margin < -PRECONDITION_TOL {
        return Err(Error::NotStateReducing { min_eig: margin });
    }
    Ok(kms_implementation_unchecked(sf, phi))
}

/// Same as [`kms_implementation`] without the state-reducing gate; used by
/// pipeline stages that track their own residuals.
pub fn kms_implementation_unchecked(sf: &StandardForm, phi: &CPMap) -> L2Operator {
    let n = sf.dim();
    let iq = sf.state().inv_quarter_power();
    let q = sf.state().quarter_power();
    L2Operator::from_images(n, |r, c| {
        let e = ComplexMatrix::matrix_unit(n, r, c);
        let x = &(iq * &e) * iq;
        let y = phi.apply(&x).expect("dimensions checked");
        &(q * &y) * q
    })
}

/// GNS L²-implementation: x ρ^{1/2} ↦ Φ(x) ρ^{1/2}.
pub fn gns_implementation(sf: &StandardForm, phi: &CPMap) -> Result<L2Operator> {
    check_dims(sf, phi)?;
    let margin = state_reducing_margin(sf, phi)?;
    if margin < -PRECONDITION_TOL {
        return Err(Error::NotStateReducing { min_eig: margin });
    }
    let n = sf.dim();
    let ih = sf.state().inv_half_power();
    let h = sf.state().half_power();
    Ok(L2Operator::from_images(n, |r, c| {
        let e = ComplexMatrix::matrix_unit(n, r, c);
        let x = &e * ih;
        let y = phi.apply(&x).expect("dimensions checked");
        &y * h
    }))
}

/// KMS adjoint Φ†, the unique map with (Φ†)⁽²⁾ = (Φ⁽²⁾)*. In Kraus terms
/// Φ†(y) = ρ^{-1/2} Φ*(ρ^{1/2} y ρ^{1/2}) ρ^{-1/2}; the Kraus family is
/// re-extracted from the Choi matrix, which must stay PSD.
pub fn kms_adjoint(sf: &StandardForm, phi: &CPMap) -> Result<CPMap> {
    check_dims(sf, phi)?;
    let h = sf.state().half_power();
    let ih = sf.state().inv_half_power();
    let direct = CPMap::new(
        phi.dim(),
        phi.kraus()
            .iter()
            .map(|k| &(ih * &k.conj_transpose()) * h)
            .collect(),
    )?;
    // normalize the family through the Choi matrix, matching the
    // reconstruction contract (and flagging numerical degeneracy)
    CPMap::from_choi(phi.dim(), &direct.choi())
}

/// KMS symmetrization (Φ + Φ†)/2.
pub fn kms_symmetrize(sf: &StandardForm, phi: &CPMap) -> Result<CPMap> {
    let adj = kms_adjoint(sf, phi)?;
    phi.scale(0.5)?.add(&adj.scale(0.5)?)
}

/// KMS symmetry predicate: the implementation is self-adjoint within `tol`.
pub fn is_kms_symmetric(sf: &StandardForm, phi: &CPMap, tol: f64) -> Result<bool> {
    let t = kms_implementation(sf, phi)?;
    Ok(t.is_self_adjoint(tol))
}

/// Knobs for [`reconstruct_from_l2`].
#[derive(Debug, Clone)]
pub struct ReconstructConfig {
    pub tol: f64,
    /// Number of random points of the order interval [0, Ω] checked.
    pub interval_samples: usize,
    pub seed: u64,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            interval_samples: 64,
            seed: 0x9e37_79b9_7f4a_7c15,
        }
    }
}

/// Reconstruct the KMS-symmetric Markov map behind a symmetric L²-Markov
/// operator: Φ(x) = ρ^{-1/4} T(ρ^{1/4} x ρ^{1/4}) ρ^{-1/4}.
///
/// Preconditions checked, each failing with the violated hypothesis: T is
/// self-adjoint, a contraction, fixes Ω, preserves the order interval
/// [0, Ω] on sampled points, and the induced map has a PSD Choi matrix.
pub fn reconstruct_from_l2(sf: &StandardForm, t: &L2Operator) -> Result<CPMap> {
    reconstruct_from_l2_with(sf, t, &ReconstructConfig::default())
}

pub fn reconstruct_from_l2_with(
    sf: &StandardForm,
    t: &L2Operator,
    cfg: &ReconstructConfig,
) -> Result<CPMap> {
    if t.dim() != sf.dim() {
        return Err(Error::DimensionMismatch {
            context: format!("L2 operator dim {} vs state dim {}", t.dim(), sf.dim()),
        });
    }
    let tol = cfg.tol;
    let sa = t.self_adjoint_defect();
    if sa > tol {
        return Err(Error::PreconditionFailed {
            hypothesis: "self-adjoint".into(),
            residual: sa,
        });
    }
    let norm = t.op_norm();
    if norm > 1.0 + tol {
        return Err(Error::PreconditionFailed {
            hypothesis: "contraction".into(),
            residual: norm - 1.0,
        });
    }
    let omega = sf.cyclic_vector();
    let fixed = (&t.apply(&omega).mat - &omega.mat).fro_norm();
    if fixed > tol {
        return Err(Error::PreconditionFailed {
            hypothesis: "fixed point".into(),
            residual: fixed,
        });
    }

    // sampled order-interval preservation: 0 ≤ ξ ≤ Ω must map into itself.
    // Unembedding makes each check exact: ξ = ρ^{1/4} m ρ^{1/4}, 0 ⪯ m ⪯ 1.
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(cfg.seed);
    let n = sf.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.interval_samples {
        let m = crate::sampling::random_interval_element(&mut rng, n);
        let xi = sf.kms_embed(&m).expect("dimension");
        let image = t.apply(&xi);
        let m_out = sf.kms_unembed(&image).expect("dimension");
        let e = eigh(&m_out)?;
        worst = worst.max(-e.min_eigenvalue()).max(e.max_eigenvalue() - 1.0);
    }
    if worst > tol {
        return Err(Error::PreconditionFailed {
            hypothesis: "order interval".into(),
            residual: worst,
        });
    }

    // induced map and its Choi matrix
    let iq = sf.state().inv_quarter_power();
    let images: Vec<ComplexMatrix> = (0..n * n)
        .map(|idx| {
            let e = ComplexMatrix::matrix_unit(n, idx / n, idx % n);
            let embedded = sf.kms_embed(&e).expect("dimension");
            let out = t.apply(&embedded);
            &(iq * &out.mat) * iq
        })
        .collect();
    let mut choi = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let img = &images[i * n + j];
            for a in 0..n {
                for b in 0..n {
                    choi[(i * n + a, j * n + b)] = img[(a, b)];
                }
            }
        }
    }
    let choi_min = eigh(&choi)?.min_eigenvalue();
    if choi_min < -CHOI_CLIP {
        return Err(Error::PreconditionFailed {
            hypothesis: "Choi PSD".into(),
            residual: -choi_min,
        });
    }
    CPMap::from_choi(n, &choi)
}
