//! Seeded random generators used by the verification suites: states with
//! controlled conditioning, Gaussian Kraus families, Markov maps produced by
//! the markovization pipeline, and points of the cone / order interval.
//!
//! Everything takes an explicit RNG so that suite reports are reproducible.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cpmap::CPMap;
use crate::error::Result;
use crate::linalg::eigh;
use crate::matrix::{ComplexMatrix, C64};
use crate::state::{QuantumState, StandardForm, StdVector};

fn gauss(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        C64::new(gauss(rng), gauss(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Random Hermitian matrix with O(1) entries.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_gaussian_matrix(rng, n, n).hermitian_part()
}

/// Unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_gaussian_matrix(rng, n, n);
    crate::linalg::qr_unitary(&g)
}

/// Random PSD matrix g g*/n.
pub fn random_psd(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_gaussian_matrix(rng, n, n);
    (&g * &g.conj_transpose()).scale_re(1.0 / n as f64)
}

/// Hermitian matrix with spectrum rescaled exactly onto [0, 1]; used to
/// sample the order interval 0 ⪯ m ⪯ 1 with both endpoints attained.
pub fn random_interval_element(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    if n == 1 {
        return ComplexMatrix::from_real_diag(&[rng.random::<f64>()]);
    }
    let h = random_hermitian(rng, n);
    let e = eigh(&h).expect("hermitian");
    let lo = e.min_eigenvalue();
    let hi = e.max_eigenvalue();
    if hi - lo < 1e-12 {
        return ComplexMatrix::zeros(n, n);
    }
    e.apply_real_fn(|x| (x - lo) / (hi - lo))
}

/// Faithful state with eigenvalues bounded away from zero: a random simplex
/// point mixed with the flat distribution, conjugated by a random unitary.
pub fn random_state(rng: &mut impl Rng, n: usize) -> QuantumState {
    let mut weights: Vec<f64> = (0..n)
        .map(|_| -rng.random::<f64>().max(1e-12).ln())
        .collect();
    let total: f64 = weights.iter().sum();
    let flat = 0.25 / n as f64;
    for w in &mut weights {
        *w = 0.75 * (*w / total) + flat;
    }
    let u = random_unitary(rng, n);
    let d = ComplexMatrix::from_real_diag(&weights);
    let rho = &(&u * &d) * &u.conj_transpose();
    // re-normalize the trace exactly against rounding in the conjugation
    let tr = rho.trace().re;
    QuantumState::new(rho.scale_re(1.0 / tr)).expect("constructed state is faithful")
}

/// Random CP map with `rank` Gaussian Kraus operators (unnormalized).
pub fn random_cp(rng: &mut impl Rng, n: usize, rank: usize) -> CPMap {
    let kraus = (0..rank.max(1))
        .map(|_| random_gaussian_matrix(rng, n, n).scale_re(1.0 / n as f64))
        .collect();
    CPMap::new(n, kraus).expect("dimensions consistent")
}

/// Random CP map scaled to be simultaneously state-reducing (φ∘Φ ≤ φ) and
/// sub-unital (Φ(1) ⪯ 1). This is the hypothesis class in which the KMS
/// L²-implementation is guaranteed to be a contraction.
pub fn random_contractive_state_reducing(
    rng: &mut impl Rng,
    sf: &StandardForm,
    rank: usize,
) -> Result<CPMap> {
    let phi = random_cp(rng, sf.dim(), rank);
    contractive_state_reducing_normalization(sf, &phi)
}

/// Scale a CP map by the largest factor that makes it both state-reducing
/// and sub-unital.
pub fn contractive_state_reducing_normalization(sf: &StandardForm, phi: &CPMap) -> Result<CPMap> {
    let ih = sf.state().inv_half_power();
    let dual = phi.apply_dual(sf.state().rho())?;
    let reducing_top = eigh(&(&(ih * &dual) * ih))?.max_eigenvalue().max(0.0);
    let unital_top = eigh(&phi.unit_image())?.max_eigenvalue().max(0.0);
    let top = reducing_top.max(unital_top);
    if top <= 0.0 {
        return Ok(phi.clone());
    }
    phi.scale(1.0 / top)
}

/// Random CP map scaled to be state-reducing only (Φ(1) unconstrained).
pub fn random_state_reducing(rng: &mut impl Rng, sf: &StandardForm, rank: usize) -> Result<CPMap> {
    let phi = random_cp(rng, sf.dim(), rank);
    let ih = sf.state().inv_half_power();
    let dual = phi.apply_dual(sf.state().rho())?;
    let top = eigh(&(&(ih * &dual) * ih))?.max_eigenvalue().max(1e-12);
    phi.scale(1.0 / top)
}

/// Random Markov map: Gaussian Kraus operators normalized to the contractive
/// state-reducing class, then pushed through the markovization pipeline so
/// the result is unital and φ-preserving on the nose.
pub fn random_markov(rng: &mut impl Rng, sf: &StandardForm, rank: usize) -> Result<CPMap> {
    let phi = random_contractive_state_reducing(rng, sf, rank)?;
    crate::markovize::markovize(sf, &phi)
}

/// Random KMS-symmetric Markov map: [`random_markov`] followed by the
/// symmetrization (Φ + Φ†)/2.
pub fn random_kms_symmetric_markov(
    rng: &mut impl Rng,
    sf: &StandardForm,
    rank: usize,
) -> Result<CPMap> {
    let phi = random_markov(rng, sf, rank)?;
    crate::cpmap::kms_symmetrize(sf, &phi)
}

/// Random element of the natural positive cone ρ^{1/4} m ρ^{1/4}, m ⪰ 0,
/// normalized to unit Hilbert–Schmidt norm.
pub fn random_cone_element(rng: &mut impl Rng, sf: &StandardForm) -> StdVector {
    let m = random_psd(rng, sf.dim());
    let xi = sf.kms_embed(&m).expect("dimension");
    let norm = xi.norm();
    if norm < 1e-14 {
        return sf.cyclic_vector();
    }
    StdVector::new(xi.mat.scale_re(1.0 / norm))
}

/// Random point of the order interval {ξ : 0 ≤ ξ ≤ Ω} in the cone order.
pub fn random_order_interval_point(rng: &mut impl Rng, sf: &StandardForm) -> StdVector {
    let m = random_interval_element(rng, sf.dim());
    sf.kms_embed(&m).expect("dimension")
}

/// Random self-adjoint standard-form vector with unit norm.
pub fn random_self_adjoint_vector(rng: &mut impl Rng, n: usize) -> StdVector {
    let h = random_hermitian(rng, n);
    let norm = h.fro_norm().max(1e-14);
    StdVector::new(h.scale_re(1.0 / norm))
}

/// Random standard-form vector (no symmetry), unit norm.
pub fn random_vector(rng: &mut impl Rng, n: usize) -> StdVector {
    let g = random_gaussian_matrix(rng, n, n);
    let norm = g.fro_norm().max(1e-14);
    StdVector::new(g.scale_re(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let u = random_unitary(&mut rng, 4);
        let prod = &u.conj_transpose() * &u;
        assert!((&prod - &ComplexMatrix::identity(4)).fro_norm() < 1e-10);
    }

    #[test]
    fn random_state_is_well_conditioned() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for n in 2..=4 {
            let st = random_state(&mut rng, n);
            assert!(st.eigenvalues()[0] > 0.25 / (2.0 * n as f64));
            assert!((st.rho().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_element_spectrum_in_unit_range() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let m = random_interval_element(&mut rng, 3);
        let e = eigh(&m).unwrap();
        assert!(e.min_eigenvalue() >= -1e-12);
        assert!(e.max_eigenvalue() <= 1.0 + 1e-12);
    }

    #[test]
    fn normalized_maps_satisfy_both_bounds() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let sf = StandardForm::new(random_state(&mut rng, 3));
        for _ in 0..8 {
            let phi = random_contractive_state_reducing(&mut rng, &sf, 4).unwrap();
            assert!(crate::cpmap::is_state_reducing(&sf, &phi, 1e-10).unwrap());
            assert!(crate::cpmap::contractivity_defect(&phi).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn cone_elements_unembed_to_psd() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let sf = StandardForm::new(random_state(&mut rng, 2));
        let xi = random_cone_element(&mut rng, &sf);
        let m = sf.kms_unembed(&xi).unwrap();
        assert!(eigh(&m).unwrap().min_eigenvalue() >= -1e-10);
    }
}
