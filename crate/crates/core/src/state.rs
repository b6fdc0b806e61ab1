//! Finite-dimensional standard form of a matrix algebra with a faithful
//! state: density matrix, cached fractional powers, GNS/KMS embeddings and
//! the modular flow with its analytic continuation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianEigen};
use crate::matrix::{ComplexMatrix, C64};

/// Smallest admissible eigenvalue of a density matrix. States below this are
/// rejected at construction since every formula downstream uses ρ^{-1/4}.
pub const FAITHFULNESS_FLOOR: f64 = 1e-10;

/// Tolerance on |trace(rho) - 1| at construction.
pub const TRACE_TOL: f64 = 1e-12;

/// Default bound on |Im z| · log cond(rho) for analytic continuation.
pub const ANALYTIC_BOUND: f64 = 50.0;

/// Optional block structure for direct sums ⊕ᵢ M_{nᵢ}, stored as the list of
/// block sizes. Elements of the algebra must vanish outside the diagonal
/// blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMask {
    pub sizes: Vec<usize>,
}

impl BlockMask {
    pub fn total_dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Largest magnitude of an entry outside the diagonal blocks.
    pub fn off_block_defect(&self, x: &ComplexMatrix) -> f64 {
        let mut starts = vec![0usize];
        for s in &self.sizes {
            starts.push(starts.last().unwrap() + s);
        }
        let block_of = |i: usize| starts.iter().rposition(|&s| s <= i).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                if block_of(i) != block_of(j) {
                    worst = worst.max(x[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn validate(&self, x: &ComplexMatrix, tol: f64) -> Result<()> {
        let defect = self.off_block_defect(x);
        if defect > tol {
            return Err(Error::PreconditionFailed {
                hypothesis: "element respects the block mask".into(),
                residual: defect,
            });
        }
        Ok(())
    }
}

/// A faithful state on M_n, held as a density matrix together with its
/// eigendecomposition and the fractional powers every module reuses.
#[derive(Debug, Clone)]
pub struct QuantumState {
    dim: usize,
    rho: ComplexMatrix,
    eig: HermitianEigen,
    quarter: ComplexMatrix,
    half: ComplexMatrix,
    inv_quarter: ComplexMatrix,
    inv_half: ComplexMatrix,
    block_mask: Option<BlockMask>,
}

impl QuantumState {
    /// Build a state from a density matrix. The input is symmetrized (only
    /// here, never elsewhere), its trace must be 1 within [`TRACE_TOL`] and
    /// all eigenvalues must clear the faithfulness floor.
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        Self::with_floor(rho, FAITHFULNESS_FLOOR)
    }

    pub fn with_floor(rho: ComplexMatrix, floor: f64) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::DimensionMismatch {
                context: format!("density matrix {}x{}", rho.rows(), rho.cols()),
            });
        }
        let herm_defect = rho.hermiticity_defect();
        if herm_defect > 1e-8 {
            return Err(Error::NotHermitian {
                defect: herm_defect,
                tol: 1e-8,
            });
        }
        let rho = rho.hermitian_part();
        let trace_defect = (rho.trace().re - 1.0).abs() + rho.trace().im.abs();
        if trace_defect > TRACE_TOL {
            return Err(Error::TraceNotOne {
                defect: trace_defect,
            });
        }
        let eig = eigh(&rho)?;
        if eig.min_eigenvalue() < floor {
            return Err(Error::FaithfulnessFloor {
                eigenvalue: eig.min_eigenvalue(),
                floor,
            });
        }
        let quarter = eig.apply_real_fn(|x| x.powf(0.25));
        let half = eig.apply_real_fn(|x| x.sqrt());
        let inv_quarter = eig.apply_real_fn(|x| x.powf(-0.25));
        let inv_half = eig.apply_real_fn(|x| x.powf(-0.5));
        Ok(Self {
            dim: rho.rows(),
            rho,
            eig,
            quarter,
            half,
            inv_quarter,
            inv_half,
            block_mask: None,
        })
    }

    /// State on a block direct sum; `rho` must respect the mask.
    pub fn with_blocks(rho: ComplexMatrix, mask: BlockMask) -> Result<Self> {
        if mask.total_dim() != rho.rows() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "block mask totals {} for a {}x{} matrix",
                    mask.total_dim(),
                    rho.rows(),
                    rho.cols()
                ),
            });
        }
        mask.validate(&rho, 1e-12)?;
        let mut state = Self::new(rho)?;
        state.block_mask = Some(mask);
        Ok(state)
    }

    /// Tracial state on M_n.
    pub fn tracial(dim: usize) -> Self {
        let rho = ComplexMatrix::from_real_diag(&vec![1.0 / dim as f64; dim]);
        Self::new(rho).expect("tracial state is always valid")
    }

    /// Diagonal state from strictly positive weights summing to 1.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(weights))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eig.eigenvectors
    }

    pub fn quarter_power(&self) -> &ComplexMatrix {
        &self.quarter
    }

    pub fn half_power(&self) -> &ComplexMatrix {
        &self.half
    }

    pub fn inv_quarter_power(&self) -> &ComplexMatrix {
        &self.inv_quarter
    }

    pub fn inv_half_power(&self) -> &ComplexMatrix {
        &self.inv_half
    }

    pub fn block_mask(&self) -> Option<&BlockMask> {
        self.block_mask.as_ref()
    }

    /// φ(x) = trace(ρ x).
    pub fn expect(&self, x: &ComplexMatrix) -> C64 {
        (&self.rho * x).trace()
    }

    /// Condition number λ_max/λ_min of the density matrix.
    pub fn condition(&self) -> f64 {
        self.eig.max_eigenvalue() / self.eig.min_eigenvalue()
    }

    /// True when the state is tracial within 1e-12 (‖ρ − I/n‖).
    pub fn is_tracial(&self) -> bool {
        let tr = ComplexMatrix::from_real_diag(&vec![1.0 / self.dim as f64; self.dim]);
        (&self.rho - &tr).fro_norm() <= 1e-12
    }
}

/// The JSON wire format for states: `{"dim": n, "rho": <matrix>}`.
#[derive(Serialize, Deserialize)]
pub struct StateWire {
    pub dim: usize,
    pub rho: ComplexMatrix,
}

impl QuantumState {
    pub fn to_wire(&self) -> StateWire {
        StateWire {
            dim: self.dim,
            rho: self.rho.clone(),
        }
    }

    pub fn from_wire(wire: StateWire) -> Result<Self> {
        if wire.rho.rows() != wire.dim || wire.rho.cols() != wire.dim {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "state dim {} vs matrix {}x{}",
                    wire.dim,
                    wire.rho.rows(),
                    wire.rho.cols()
                ),
            });
        }
        Self::new(wire.rho)
    }
}

/// An element of the standard-form Hilbert space: an n×n matrix carrying the
/// Hilbert–Schmidt inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct StdVector {
    pub mat: ComplexMatrix,
}

impl StdVector {
    pub fn new(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    pub fn norm(&self) -> f64 {
        self.mat.fro_norm()
    }

    pub fn inner(&self, other: &StdVector) -> C64 {
        self.mat.hs_inner(&other.mat)
    }

    pub fn self_adjoint_defect(&self) -> f64 {
        self.mat.hermiticity_defect()
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_defect() <= tol
    }
}

/// Standard form of (M_n, φ): the Hilbert space of n×n matrices, cyclic
/// vector Ω = ρ^{1/2} and modular conjugation Jξ = ξ*.
#[derive(Debug, Clone)]
pub struct StandardForm {
    state: QuantumState,
}

impl StandardForm {
    pub fn new(state: QuantumState) -> Self {
        Self { state }
    }

    pub fn state(&self) -> &QuantumState {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    /// Dimension n² of the standard-form Hilbert space.
    pub fn hilbert_dim(&self) -> usize {
        self.state.dim() * self.state.dim()
    }

    /// Cyclic vector Ω = ρ^{1/2}.
    pub fn cyclic_vector(&self) -> StdVector {
        StdVector::new(self.state.half_power().clone())
    }

    fn check_element(&self, x: &ComplexMatrix) -> Result<()> {
        if x.rows() != self.dim() || x.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "algebra element {}x{} on a dimension-{} algebra",
                    x.rows(),
                    x.cols(),
                    self.dim()
                ),
            });
        }
        Ok(())
    }

    /// Symmetric embedding x ↦ ρ^{1/4} x ρ^{1/4}.
    pub fn kms_embed(&self, x: &ComplexMatrix) -> Result<StdVector> {
        self.check_element(x)?;
        let q = self.state.quarter_power();
        Ok(StdVector::new(&(q * x) * q))
    }

    /// GNS embedding x ↦ x ρ^{1/2}.
    pub fn gns_embed(&self, x: &ComplexMatrix) -> Result<StdVector> {
        self.check_element(x)?;
        Ok(StdVector::new(x * self.state.half_power()))
    }

    /// Inverse of the KMS embedding, ξ ↦ ρ^{-1/4} ξ ρ^{-1/4}.
    pub fn kms_unembed(&self, xi: &StdVector) -> Result<ComplexMatrix> {
        self.check_element(&xi.mat)?;
        let iq = self.state.inv_quarter_power();
        Ok(&(iq * &xi.mat) * iq)
    }

    /// Modular flow σ_t(x) = ρ^{it} x ρ^{-it}, evaluated in the eigenbasis.
    pub fn modular_flow(&self, t: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.modular_analytic_with_bound(C64::new(t, 0.0), x, f64::INFINITY)
    }

    /// Analytic continuation σ_z(x) = ρ^{iz} x ρ^{-iz} with the default
    /// overflow guard.
    pub fn modular_analytic(&self, z: C64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.modular_analytic_with_bound(z, x, ANALYTIC_BOUND)
    }

    /// Analytic continuation with an explicit overflow bound on
    /// |Im z| · log cond(ρ).
    pub fn modular_analytic_with_bound(
        &self,
        z: C64,
        x: &ComplexMatrix,
        bound: f64,
    ) -> Result<ComplexMatrix> {
        self.check_element(x)?;
        let magnitude = z.im.abs() * self.state.condition().ln();
        if magnitude > bound {
            return Err(Error::AnalyticOverflow { magnitude, bound });
        }
        let v = self.state.eigenvectors();
        let vh = v.conj_transpose();
        let logs: Vec<f64> = self.state.eigenvalues().iter().map(|&l| l.ln()).collect();
        let mut y = &(&vh * x) * v;
        let n = self.dim();
        for a in 0..n {
            for b in 0..n {
                // rho^{iz} x rho^{-iz} picks up exp(iz (log λ_a - log λ_b)) entrywise
                let delta = logs[a] - logs[b];
                let phase = (Complex64::i() * z * delta).exp();
                y[(a, b)] *= phase;
            }
        }
        Ok(&(v * &y) * &vh)
    }

    /// Modular conjugation Jξ = ξ*.
    pub fn modular_conjugate(&self, xi: &StdVector) -> StdVector {
        StdVector::new(xi.mat.conj_transpose())
    }

    /// Standard-form Hilbert space at matrix level k: the state
    /// (tr_k/k) ⊗ φ on M_k ⊗ M_n with the same modular data blockwise.
    pub fn amplified(&self, k: usize) -> Result<StandardForm> {
        let idk = ComplexMatrix::from_real_diag(&vec![1.0 / k as f64; k]);
        let rho_k = idk.kron(self.state.rho());
        Ok(StandardForm::new(QuantumState::new(rho_k)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qubit_state() -> StandardForm {
        StandardForm::new(QuantumState::diagonal(&[0.75, 0.25]).unwrap())
    }

    #[test]
    fn rejects_unfaithful_and_traceless() {
        assert!(matches!(
            QuantumState::diagonal(&[1.0, 0.0]),
            Err(Error::FaithfulnessFloor { .. })
        ));
        assert!(matches!(
            QuantumState::new(ComplexMatrix::from_real_diag(&[0.5, 0.6])),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn cached_powers_are_consistent() {
        let st = QuantumState::diagonal(&[0.75, 0.25]).unwrap();
        let q = st.quarter_power();
        let fourth = &(&(q * q) * q) * q;
        assert!((&fourth - st.rho()).fro_norm() < 1e-10);
        let prod = st.quarter_power() * st.inv_quarter_power();
        assert!((&prod - &ComplexMatrix::identity(2)).fro_norm() < 1e-12);
    }

    #[test]
    fn kms_embed_identity_gives_cyclic_vector() {
        let sf = qubit_state();
        let omega = sf.kms_embed(&ComplexMatrix::identity(2)).unwrap();
        assert!((&omega.mat - &sf.cyclic_vector().mat).fro_norm() < 1e-12);
        assert!((omega.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kms_embed_qubit_example() {
        // rho = diag(3/4, 1/4), x = diag(1, 0) -> diag(sqrt(3)/2, 0)
        let sf = qubit_state();
        let x = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let xi = sf.kms_embed(&x).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[3.0f64.sqrt() / 2.0, 0.0]);
        assert!((&xi.mat - &expected).fro_norm() < 1e-12);
    }

    #[test]
    fn tracial_embeddings_coincide() {
        let sf = StandardForm::new(QuantumState::tracial(3));
        let x = ComplexMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, j as f64));
        let a = sf.kms_embed(&x).unwrap();
        let b = sf.gns_embed(&x).unwrap();
        assert!((&a.mat - &b.mat).fro_norm() < 1e-12);
        let scaled = x.scale_re(1.0 / 3.0f64.sqrt());
        assert!((&a.mat - &scaled).fro_norm() < 1e-12);
    }

    #[test]
    fn gns_embed_matrix_unit_example() {
        // rho = diag(3/4, 1/4), x = E12 -> (1/2) E12
        let sf = qubit_state();
        let e12 = ComplexMatrix::matrix_unit(2, 0, 1);
        let xi = sf.gns_embed(&e12).unwrap();
        assert!((&xi.mat - &e12.scale_re(0.5)).fro_norm() < 1e-12);
    }

    #[test]
    fn modular_flow_phase_on_matrix_unit() {
        // sigma_t(E12) = (p/(1-p))^{it} E12
        let p: f64 = 0.75;
        let sf = qubit_state();
        let e12 = ComplexMatrix::matrix_unit(2, 0, 1);
        let t = 0.7;
        let got = sf.modular_flow(t, &e12).unwrap();
        let phase = (C64::i() * t * (p / (1.0 - p)).ln()).exp();
        assert!((got[(0, 1)] - phase).norm() < 1e-12);
        assert!(got[(0, 0)].norm() < 1e-14 && got[(1, 0)].norm() < 1e-14);
    }

    #[test]
    fn modular_flow_tracial_and_zero_time() {
        let sf = StandardForm::new(QuantumState::tracial(2));
        let x = ComplexMatrix::from_fn(2, 2, |i, j| C64::new(i as f64, j as f64));
        assert!((&sf.modular_flow(1.3, &x).unwrap() - &x).fro_norm() < 1e-12);
        let sf2 = qubit_state();
        assert!((&sf2.modular_flow(0.0, &x).unwrap() - &x).fro_norm() < 1e-12);
    }

    #[test]
    fn modular_analytic_trivial_for_tracial_state() {
        let sf = StandardForm::new(QuantumState::tracial(3));
        let x = ComplexMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, 0.3 * j as f64));
        for &z in &[C64::new(0.4, 0.0), C64::new(0.0, -0.25), C64::new(1.0, -0.5)] {
            let got = sf.modular_analytic(z, &x).unwrap();
            assert!((&got - &x).fro_norm() < 1e-12);
        }
    }

    #[test]
    fn modular_analytic_kms_point() {
        // z = -i/2 gives rho^{1/2} x rho^{-1/2}
        let sf = qubit_state();
        let x = ComplexMatrix::from_fn(2, 2, |i, j| C64::new(1.0 + i as f64, j as f64));
        let got = sf.modular_analytic(C64::new(0.0, -0.5), &x).unwrap();
        let st = sf.state();
        let expected = &(st.half_power() * &x) * st.inv_half_power();
        assert!((&got - &expected).fro_norm() < 1e-12);
    }

    #[test]
    fn modular_analytic_quarter_shift_example() {
        // z = -i/4, x = E12 -> (p/(1-p))^{1/4} E12
        let sf = qubit_state();
        let e12 = ComplexMatrix::matrix_unit(2, 0, 1);
        let got = sf.modular_analytic(C64::new(0.0, -0.25), &e12).unwrap();
        let expected = e12.scale_re(3.0f64.powf(0.25));
        assert!((&got - &expected).fro_norm() < 1e-12);
    }

    #[test]
    fn analytic_overflow_guard_triggers() {
        let st = QuantumState::diagonal(&[1.0 - 1e-9, 1e-9]).unwrap();
        let sf = StandardForm::new(st);
        let x = ComplexMatrix::identity(2);
        let err = sf.modular_analytic(C64::new(0.0, -1e4), &x);
        assert!(matches!(err, Err(Error::AnalyticOverflow { .. })));
    }

    #[test]
    fn conjugation_fixes_cyclic_vector_and_is_involutive() {
        let sf = qubit_state();
        let omega = sf.cyclic_vector();
        let j_omega = sf.modular_conjugate(&omega);
        assert!((&j_omega.mat - &omega.mat).fro_norm() < 1e-12);

        let xi = StdVector::new(ComplexMatrix::matrix_unit(2, 0, 1).scale(C64::new(0.0, 1.0)));
        let jj = sf.modular_conjugate(&sf.modular_conjugate(&xi));
        assert!((&jj.mat - &xi.mat).fro_norm() < 1e-14);
        // conjugate linearity: J(i E11) = -i E11
        let eta = StdVector::new(ComplexMatrix::matrix_unit(2, 0, 0).scale(C64::new(0.0, 1.0)));
        let j_eta = sf.modular_conjugate(&eta);
        assert!((j_eta.mat[(0, 0)] - C64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn kms_condition_trace_identity() {
        // phi(xy) = phi(y sigma_{-i}(x))
        let sf = qubit_state();
        let x = ComplexMatrix::from_fn(2, 2, |i, j| C64::new(0.3 + i as f64, 0.1 * j as f64));
        let y = ComplexMatrix::from_fn(2, 2, |i, j| C64::new(j as f64 - 0.2, 0.4 * i as f64));
        let lhs = sf.state().expect(&(&x * &y));
        let sx = sf.modular_analytic(C64::new(0.0, -1.0), &x).unwrap();
        let rhs = sf.state().expect(&(&y * &sx));
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn block_mask_validation() {
        let mask = BlockMask { sizes: vec![1, 1] };
        let rho = ComplexMatrix::from_real_diag(&[0.6, 0.4]);
        let st = QuantumState::with_blocks(rho, mask.clone()).unwrap();
        assert_eq!(st.block_mask().unwrap(), &mask);
        let offdiag = ComplexMatrix::matrix_unit(2, 0, 1);
        assert!(mask.validate(&offdiag, 1e-12).is_err());
        assert!(mask.validate(&ComplexMatrix::identity(2), 1e-12).is_ok());
    }

    #[test]
    fn block_algebra_operations_stay_blockwise() {
        // C ⊕ M_2 with a block-diagonal state: the modular machinery keeps
        // mask-respecting elements mask-respecting
        let mask = BlockMask { sizes: vec![1, 2] };
        let rho = ComplexMatrix::from_real_diag(&[0.5, 0.3, 0.2]);
        let sf = StandardForm::new(QuantumState::with_blocks(rho, mask.clone()).unwrap());
        let mut x = ComplexMatrix::zeros(3, 3);
        x[(0, 0)] = C64::new(2.0, 0.0);
        x[(1, 2)] = C64::new(1.0, -0.5);
        x[(2, 1)] = C64::new(0.25, 0.0);
        assert!(mask.validate(&x, 1e-12).is_ok());
        let embedded = sf.kms_embed(&x).unwrap();
        assert!(mask.validate(&embedded.mat, 1e-12).is_ok());
        let flowed = sf.modular_flow(0.7, &x).unwrap();
        assert!(mask.validate(&flowed, 1e-12).is_ok());
        let analytic = sf.modular_analytic(C64::new(0.0, -0.25), &x).unwrap();
        assert!(mask.validate(&analytic, 1e-12).is_ok());
    }

    #[test]
    fn amplified_state_is_block_scaled() {
        let sf = qubit_state();
        let sf2 = sf.amplified(2).unwrap();
        assert_eq!(sf2.dim(), 4);
        assert!((sf2.state().rho().trace().re - 1.0).abs() < 1e-12);
        assert!((sf2.state().rho()[(0, 0)].re - 0.375).abs() < 1e-12);
    }
}
