//! The natural positive cone {ρ^{1/4} m ρ^{1/4} : m ⪰ 0} of the standard
//! form, metric projections onto it, and the ξ₊ / ξ∧ operations used by the
//! Dirichlet-form conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::matrix::{ComplexMatrix, C64};
use crate::state::{StandardForm, StdVector};

/// Projection algorithm selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeAlgorithm {
    /// Tracial fast path when applicable, projected descent otherwise.
    Auto,
    /// Spectral truncation; valid only for tracial states.
    SpectralTracial,
    /// Projected gradient descent on the PSD parameter.
    ProjectedDescent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeProjectionConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub algorithm: ConeAlgorithm,
}

impl Default for ConeProjectionConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-10,
            algorithm: ConeAlgorithm::Auto,
        }
    }
}

impl ConeProjectionConfig {
    fn validate(&self) -> Result<()> {
        if self.tolerance <= 0.0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "cone projection needs tolerance > 0 and max_iterations ≥ 1".into(),
            ));
        }
        Ok(())
    }
}

/// Exact optimality residuals of a claimed projection: the projected point
/// unembeds to a PSD parameter, the difference points out of the cone
/// (self-duality), and the two are orthogonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionDefect {
    /// −λ_min of the unembedded projection (membership in the cone).
    pub membership: f64,
    /// −λ_min of ρ^{1/4}(Pξ − ξ)ρ^{1/4} (variational inequality, via
    /// self-duality of the cone).
    pub variational: f64,
    /// |⟨Pξ, ξ − Pξ⟩| (complementarity).
    pub complementarity: f64,
}

impl ProjectionDefect {
    pub fn worst(&self) -> f64 {
        self.membership
            .max(self.variational)
            .max(self.complementarity)
    }
}

/// Residuals certifying `proj` as the cone projection of the self-adjoint
/// part of `xi`.
pub fn projection_defect(
    sf: &StandardForm,
    xi: &StdVector,
    proj: &StdVector,
) -> Result<ProjectionDefect> {
    let herm = xi.mat.hermitian_part();
    let m = sf.kms_unembed(proj)?;
    let membership = -eigh(&m)?.min_eigenvalue();
    let diff = &proj.mat - &herm;
    let q = sf.state().quarter_power();
    let lifted = &(q * &diff) * q;
    let variational = -eigh(&lifted)?.min_eigenvalue();
    let complementarity = proj.mat.hs_inner(&(&herm - &proj.mat)).norm();
    Ok(ProjectionDefect {
        membership,
        variational,
        complementarity,
    })
}

fn spectral_truncation(xi_herm: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(eigh(xi_herm)?.apply_real_fn(|x| x.max(0.0)))
}

/// Projected gradient descent on m for min ‖ξ − ρ^{1/4} m ρ^{1/4}‖², run in
/// the eigenbasis of ρ where the congruence is the entrywise weight
/// w_ij = (λ_i λ_j)^{1/4}. The objective is strongly convex with modulus
/// λ_min(ρ) and smoothness λ_max(ρ), so plain PGD converges linearly.
fn projected_descent(
    sf: &StandardForm,
    xi_herm: &ComplexMatrix,
    cfg: &ConeProjectionConfig,
) -> Result<ComplexMatrix> {
    let n = sf.dim();
    let v = sf.state().eigenvectors();
    let vh = v.conj_transpose();
    let lam = sf.state().eigenvalues();
    let w = ComplexMatrix::from_fn(n, n, |i, j| C64::new((lam[i] * lam[j]).powf(0.25), 0.0));
    let target = &(&vh * xi_herm) * v;

    let lipschitz = lam[n - 1].max(1e-300);
    let step = 1.0 / lipschitz;

    let entrywise = |a: &ComplexMatrix, b: &ComplexMatrix| {
        ComplexMatrix::from_fn(n, n, |i, j| a[(i, j)] * b[(i, j)])
    };

    // start from the unconstrained minimizer's PSD truncation
    let unconstrained = ComplexMatrix::from_fn(n, n, |i, j| target[(i, j)] / w[(i, j)]);
    let mut m = spectral_truncation(&unconstrained.hermitian_part())?;

    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let fitted = entrywise(&w, &m);
        let grad = entrywise(&w, &(&fitted - &target));
        let stepped = (&m - &grad.scale_re(step)).hermitian_part();
        let next = spectral_truncation(&stepped)?;
        residual = (&next - &m).fro_norm();
        m = next;
        if residual <= cfg.tolerance {
            let m_std = &(v * &m) * &vh;
            return Ok(m_std.hermitian_part());
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual,
    })
}

/// Nearest point of the natural cone to (the self-adjoint part of) ξ in the
/// Hilbert–Schmidt metric. Non-self-adjoint inputs are split ξ = a + ib and
/// only a is projected, matching the real-subspace structure of the cone.
pub fn cone_project(
    sf: &StandardForm,
    xi: &StdVector,
    cfg: &ConeProjectionConfig,
) -> Result<StdVector> {
    cfg.validate()?;
    if xi.mat.rows() != sf.dim() || xi.mat.cols() != sf.dim() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "cone projection of a {}x{} vector on M_{}",
                xi.mat.rows(),
                xi.mat.cols(),
                sf.dim()
            ),
        });
    }
    let herm = xi.mat.hermitian_part();
    let tracial = sf.state().is_tracial();
    let projected = match cfg.algorithm {
        ConeAlgorithm::SpectralTracial => {
            if !tracial {
                return Err(Error::InvalidParameter(
                    "spectral-tracial projection requires the tracial state".into(),
                ));
            }
            spectral_truncation(&herm)?
        }
        ConeAlgorithm::Auto if tracial => spectral_truncation(&herm)?,
        _ => {
            let m = projected_descent(sf, &herm, cfg)?;
            let q = sf.state().quarter_power();
            &(q * &m) * q
        }
    };
    Ok(StdVector::new(projected.hermitian_part()))
}

/// Distance from ξ to the natural cone, ‖ξ − P(ξ)‖ (the anti-Hermitian part
/// of ξ counts in full).
pub fn cone_distance(sf: &StandardForm, xi: &StdVector, cfg: &ConeProjectionConfig) -> Result<f64> {
    let p = cone_project(sf, xi, cfg)?;
    Ok((&xi.mat - &p.mat).fro_norm())
}

/// Positive part ξ₊ of a self-adjoint vector: the cone projection.
pub fn positive_part(
    sf: &StandardForm,
    xi: &StdVector,
    cfg: &ConeProjectionConfig,
) -> Result<StdVector> {
    let defect = xi.self_adjoint_defect();
    if defect > 1e-10 {
        return Err(Error::NotSelfAdjoint { defect });
    }
    cone_project(sf, xi, cfg)
}

/// ξ∧ = ξ − (ξ − Ω)₊, the projection onto {η = η* : η ≤ Ω in the cone order}.
pub fn wedge_part(
    sf: &StandardForm,
    xi: &StdVector,
    cfg: &ConeProjectionConfig,
) -> Result<StdVector> {
    let defect = xi.self_adjoint_defect();
    if defect > 1e-10 {
        return Err(Error::NotSelfAdjoint { defect });
    }
    let omega = sf.cyclic_vector();
    let shifted = StdVector::new(&xi.mat - &omega.mat);
    let pos = cone_project(sf, &shifted, cfg)?;
    Ok(StdVector::new(&xi.mat - &pos.mat))
}

/// True iff both ξ and Ω − ξ lie in the cone within `tol` (distances
/// measured through the projection).
pub fn in_order_interval(sf: &StandardForm, xi: &StdVector, tol: f64) -> Result<bool> {
    let cfg = ConeProjectionConfig::default();
    if cone_distance(sf, xi, &cfg)? > tol {
        return Ok(false);
    }
    let omega = sf.cyclic_vector();
    let rest = StdVector::new(&omega.mat - &xi.mat);
    Ok(cone_distance(sf, &rest, &cfg)? <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::state::QuantumState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn biased_qubit() -> StandardForm {
        StandardForm::new(QuantumState::diagonal(&[0.75, 0.25]).unwrap())
    }

    #[test]
    fn tracial_projection_is_spectral_truncation() {
        let sf = StandardForm::new(QuantumState::tracial(2));
        let xi = StdVector::new(ComplexMatrix::from_real_diag(&[1.0, -1.0]));
        let p = cone_project(&sf, &xi, &ConeProjectionConfig::default()).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        assert!((&p.mat - &expected).fro_norm() < 1e-12);
    }

    #[test]
    fn cone_points_are_fixed() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let sf = biased_qubit();
        let xi = sampling::random_cone_element(&mut rng, &sf);
        let p = cone_project(&sf, &xi, &ConeProjectionConfig::default()).unwrap();
        assert!((&p.mat - &xi.mat).fro_norm() < 1e-8);
    }

    #[test]
    fn negative_cone_points_project_to_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let sf = biased_qubit();
        let xi = sampling::random_cone_element(&mut rng, &sf);
        let neg = StdVector::new(xi.mat.scale_re(-1.0));
        let p = positive_part(&sf, &neg, &ConeProjectionConfig::default()).unwrap();
        assert!(p.norm() < 1e-8);
    }

    /// Dense brute-force oracle at 2×2: minimize ‖ξ − ρ^{1/4} m ρ^{1/4}‖²
    /// over PSD m = [[a, c+id],[c-id, b]] by nested grid refinement over the
    /// four real parameters.
    fn brute_force_min_2x2(sf: &StandardForm, xi: &ComplexMatrix) -> f64 {
        let q = sf.state().quarter_power();
        let objective = |a: f64, b: f64, c: f64, d: f64| -> f64 {
            if a < 0.0 || b < 0.0 || a * b < c * c + d * d {
                return f64::INFINITY;
            }
            let m = ComplexMatrix::new(
                2,
                2,
                vec![
                    C64::new(a, 0.0),
                    C64::new(c, d),
                    C64::new(c, -d),
                    C64::new(b, 0.0),
                ],
            )
            .unwrap();
            let lifted = &(q * &m) * q;
            (xi - &lifted).fro_norm().powi(2)
        };
        let mut center = [1.0, 1.0, 0.0, 0.0];
        let mut width = 4.0;
        let mut best = f64::INFINITY;
        for _ in 0..14 {
            let mut best_pt = center;
            for ia in -5..=5i32 {
                for ib in -5..=5i32 {
                    for ic in -5..=5i32 {
                        for idd in -5..=5i32 {
                            let pt = [
                                center[0] + width * ia as f64 / 5.0,
                                center[1] + width * ib as f64 / 5.0,
                                center[2] + width * ic as f64 / 5.0,
                                center[3] + width * idd as f64 / 5.0,
                            ];
                            let val = objective(pt[0], pt[1], pt[2], pt[3]);
                            if val < best {
                                best = val;
                                best_pt = pt;
                            }
                        }
                    }
                }
            }
            center = best_pt;
            width *= 0.4;
        }
        best
    }

    #[test]
    fn qubit_projection_matches_brute_force_oracle() {
        let sf = biased_qubit();
        let xi_mat = ComplexMatrix::new(
            2,
            2,
            vec![
                C64::new(0.6, 0.0),
                C64::new(0.3, 0.2),
                C64::new(0.3, -0.2),
                C64::new(-0.8, 0.0),
            ],
        )
        .unwrap();
        let xi = StdVector::new(xi_mat.clone());
        let p = positive_part(&sf, &xi, &ConeProjectionConfig::default()).unwrap();
        let dist_sq = (&xi_mat - &p.mat).fro_norm().powi(2);
        let oracle = brute_force_min_2x2(&sf, &xi_mat);
        assert!(
            dist_sq <= oracle + 1e-6,
            "projection distance² {dist_sq} vs oracle {oracle}"
        );
        let defect = projection_defect(&sf, &xi, &p).unwrap();
        assert!(defect.worst() < 1e-7, "defect {:?}", defect);
    }

    #[test]
    fn spectral_tracial_algorithm_dispatch() {
        let cfg = ConeProjectionConfig {
            algorithm: ConeAlgorithm::SpectralTracial,
            ..ConeProjectionConfig::default()
        };
        let tracial = StandardForm::new(QuantumState::tracial(2));
        let xi = StdVector::new(ComplexMatrix::from_real_diag(&[2.0, -3.0]));
        let p = cone_project(&tracial, &xi, &cfg).unwrap();
        assert!((&p.mat - &ComplexMatrix::from_real_diag(&[2.0, 0.0])).fro_norm() < 1e-12);
        // the tracial-only algorithm refuses biased states
        assert!(matches!(
            cone_project(&biased_qubit(), &xi, &cfg),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let cfg = ConeProjectionConfig {
            max_iterations: 1,
            tolerance: 1e-14,
            algorithm: ConeAlgorithm::ProjectedDescent,
        };
        let sf = biased_qubit();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let xi = sampling::random_self_adjoint_vector(&mut rng, 2);
        assert!(matches!(
            cone_project(&sf, &xi, &cfg),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn positive_part_rejects_non_self_adjoint() {
        let sf = biased_qubit();
        let xi = StdVector::new(ComplexMatrix::matrix_unit(2, 0, 1));
        assert!(matches!(
            positive_part(&sf, &xi, &ConeProjectionConfig::default()),
            Err(Error::NotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn wedge_fixes_cyclic_vector_and_zero() {
        let sf = biased_qubit();
        let cfg = ConeProjectionConfig::default();
        let omega = sf.cyclic_vector();
        let w = wedge_part(&sf, &omega, &cfg).unwrap();
        assert!((&w.mat - &omega.mat).fro_norm() < 1e-8);
        let zero = StdVector::new(ComplexMatrix::zeros(2, 2));
        let w0 = wedge_part(&sf, &zero, &cfg).unwrap();
        assert!(w0.norm() < 1e-8);
    }

    #[test]
    fn wedge_tracial_example() {
        // rho = I/2: Omega = I/sqrt(2); diag(2, 0.1) wedges to diag(1/sqrt2, 0.1)
        let sf = StandardForm::new(QuantumState::tracial(2));
        let xi = StdVector::new(ComplexMatrix::from_real_diag(&[2.0, 0.1]));
        let w = wedge_part(&sf, &xi, &ConeProjectionConfig::default()).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[std::f64::consts::FRAC_1_SQRT_2, 0.1]);
        assert!((&w.mat - &expected).fro_norm() < 1e-12);
    }

    #[test]
    fn order_interval_examples() {
        let sf = biased_qubit();
        let omega = sf.cyclic_vector();
        assert!(in_order_interval(&sf, &omega, 1e-8).unwrap());
        let half = StdVector::new(omega.mat.scale_re(0.5));
        assert!(in_order_interval(&sf, &half, 1e-8).unwrap());
        let double = StdVector::new(omega.mat.scale_re(2.0));
        assert!(!in_order_interval(&sf, &double, 1e-8).unwrap());
    }

    #[test]
    fn decomposition_orthogonality() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let cfg = ConeProjectionConfig::default();
        for _ in 0..5 {
            let sf = StandardForm::new(sampling::random_state(&mut rng, 3));
            let xi = sampling::random_self_adjoint_vector(&mut rng, 3);
            let plus = positive_part(&sf, &xi, &cfg).unwrap();
            let neg = StdVector::new(xi.mat.scale_re(-1.0));
            let minus = positive_part(&sf, &neg, &cfg).unwrap();
            let recombined = &plus.mat - &minus.mat;
            assert!((&recombined - &xi.mat).fro_norm() < 1e-7);
            assert!(plus.inner(&minus).norm() < 1e-7);
        }
    }

    #[test]
    fn projection_is_nonexpansive_on_random_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let cfg = ConeProjectionConfig::default();
        let sf = StandardForm::new(sampling::random_state(&mut rng, 2));
        for _ in 0..10 {
            let a = sampling::random_self_adjoint_vector(&mut rng, 2);
            let b = sampling::random_self_adjoint_vector(&mut rng, 2);
            let pa = cone_project(&sf, &a, &cfg).unwrap();
            let pb = cone_project(&sf, &b, &cfg).unwrap();
            assert!((&pa.mat - &pb.mat).fro_norm() <= (&a.mat - &b.mat).fro_norm() + 1e-8);
        }
    }

    #[test]
    fn self_duality_on_sampled_pairs() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let sf = StandardForm::new(sampling::random_state(&mut rng, 3));
        for _ in 0..20 {
            let a = sampling::random_cone_element(&mut rng, &sf);
            let b = sampling::random_cone_element(&mut rng, &sf);
            assert!(a.inner(&b).re >= -1e-9);
        }
    }
}
