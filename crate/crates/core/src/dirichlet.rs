//! Quadratic forms of self-adjoint contraction semigroups, the conservative
//! (completely) Dirichlet conditions, and the form built from approximating
//! Markov witnesses.

use serde::{Deserialize, Serialize};

use crate::cone::{positive_part, wedge_part, ConeProjectionConfig};
use crate::cpmap::CPMap;
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::semigroup::{
    markov_semigroup_from_witnesses, SemigroupSnapshot, SpectralSemigroup, SynthesisReport,
    SynthesisSchedule,
};
use crate::state::{StandardForm, StdVector};

/// Domain bookkeeping: trivial at finite dimension, a summability flag for
/// truncated spectral models of infinite-dimensional forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainRule {
    Full,
    Summability,
}

/// Spectral presentation of a non-negative closed quadratic form
/// Q(ξ) = Σ λ_n |⟨e_n, ξ⟩|².
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    dim: usize,
    eigenvalues: Vec<f64>,
    /// None means the standard basis (diagonal form).
    eigenvectors: Option<ComplexMatrix>,
    domain: DomainRule,
}

impl QuadraticForm {
    pub fn new(
        eigenvalues: Vec<f64>,
        eigenvectors: Option<ComplexMatrix>,
        domain: DomainRule,
    ) -> Result<Self> {
        let dim = eigenvalues.len();
        if let Some(v) = &eigenvectors {
            if v.rows() != dim || v.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "form eigenvector matrix".into(),
                });
            }
        }
        let mut eigenvalues = eigenvalues;
        for l in &mut eigenvalues {
            if *l < -1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "form eigenvalue {l:.3e} is negative"
                )));
            }
            *l = l.max(0.0);
        }
        // canonical sorting; for diagonal forms the labels are the basis
        // indices so the order is kept as given
        if let Some(v) = eigenvectors {
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&i, &j| eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap());
            let vals: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
            let vecs = ComplexMatrix::from_fn(dim, dim, |i, j| v[(i, order[j])]);
            Ok(Self {
                dim,
                eigenvalues: vals,
                eigenvectors: Some(vecs),
                domain,
            })
        } else {
            Ok(Self {
                dim,
                eigenvalues,
                eigenvectors: None,
                domain,
            })
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> Option<&ComplexMatrix> {
        self.eigenvectors.as_ref()
    }

    pub fn domain(&self) -> DomainRule {
        self.domain
    }

    /// Number of eigenvalues below `tol` (kernel dimension of the generator).
    pub fn zero_multiplicity(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l <= tol).count()
    }

    /// Q on raw coordinates.
    pub fn evaluate_coords(&self, coords: &[C64]) -> Result<f64> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: format!("form on {} coords, dimension {}", coords.len(), self.dim),
            });
        }
        match &self.eigenvectors {
            None => Ok(self
                .eigenvalues
                .iter()
                .zip(coords.iter())
                .map(|(&l, z)| l * z.norm_sqr())
                .sum()),
            Some(v) => {
                let mut q = 0.0;
                for (j, &l) in self.eigenvalues.iter().enumerate() {
                    if l == 0.0 {
                        continue;
                    }
                    let mut amp = C64::new(0.0, 0.0);
                    for (i, z) in coords.iter().enumerate() {
                        amp += v[(i, j)].conj() * z;
                    }
                    q += l * amp.norm_sqr();
                }
                Ok(q)
            }
        }
    }

    /// Q on a standard-form vector (requires dim = n²).
    pub fn evaluate(&self, xi: &StdVector) -> Result<f64> {
        self.evaluate_coords(&xi.mat.vectorize())
    }

    /// The sesquilinear form Q̃(ξ, η) behind Q, conjugate-linear in ξ.
    pub fn sesquilinear(&self, xi: &StdVector, eta: &StdVector) -> Result<C64> {
        let a = xi.mat.vectorize();
        let b = eta.mat.vectorize();
        if a.len() != self.dim || b.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "sesquilinear arguments".into(),
            });
        }
        match &self.eigenvectors {
            None => Ok(self
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &l)| a[i].conj() * b[i] * l)
                .sum()),
            Some(v) => {
                let mut q = C64::new(0.0, 0.0);
                for (j, &l) in self.eigenvalues.iter().enumerate() {
                    if l == 0.0 {
                        continue;
                    }
                    let mut amp_a = C64::new(0.0, 0.0);
                    let mut amp_b = C64::new(0.0, 0.0);
                    for i in 0..self.dim {
                        amp_a += v[(i, j)].conj() * a[i];
                        amp_b += v[(i, j)].conj() * b[i];
                    }
                    q += amp_a.conj() * amp_b * l;
                }
                Ok(q)
            }
        }
    }
}

/// Wire format: the semigroup dump plus a domain tag.
#[derive(Serialize, Deserialize)]
pub struct FormWire {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<ComplexMatrix>,
    pub domain: DomainRule,
}

impl QuadraticForm {
    pub fn to_wire(&self) -> FormWire {
        FormWire {
            dim: self.dim,
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
            domain: self.domain,
        }
    }

    pub fn from_wire(wire: FormWire) -> Result<Self> {
        if wire.eigenvalues.len() != wire.dim {
            return Err(Error::DimensionMismatch {
                context: "form wire eigenvalue count".into(),
            });
        }
        Self::new(wire.eigenvalues, wire.eigenvectors, wire.domain)
    }
}

/// The generating form of a semigroup: Q(ξ) = lim_{t→0} (1/t)⟨ξ, ξ − S_tξ⟩,
/// which at desk scale is the shared spectral data.
pub fn form_from_semigroup(s: &SpectralSemigroup) -> QuadraticForm {
    QuadraticForm {
        dim: s.hilbert_dim(),
        eigenvalues: s.eigenvalues().to_vec(),
        eigenvectors: Some(s.eigenvectors().clone()),
        domain: DomainRule::Full,
    }
}

/// Inverse of [`form_from_semigroup`]; diagonal forms materialize the
/// standard basis (capped, since abstract spectral models can be large).
pub fn semigroup_from_form(q: &QuadraticForm) -> Result<SpectralSemigroup> {
    let vectors = match &q.eigenvectors {
        Some(v) => v.clone(),
        None => {
            if q.dim > 4096 {
                return Err(Error::DimensionOverflow {
                    dim: q.dim,
                    cap: 4096,
                });
            }
            ComplexMatrix::identity(q.dim)
        }
    };
    SpectralSemigroup::new(q.eigenvalues.clone(), vectors)
}

/// |(1/t)⟨ξ, ξ − S_tξ⟩ − Q(ξ)| at one time step.
pub fn difference_quotient_defect(
    s: &SpectralSemigroup,
    q: &QuadraticForm,
    xi: &StdVector,
    t: f64,
) -> Result<f64> {
    let st = s.at_time(t);
    let v = xi.mat.vectorize();
    let sv: Vec<C64> = (0..v.len())
        .map(|row| {
            v.iter()
                .enumerate()
                .map(|(col, &z)| st[(row, col)] * z)
                .sum()
        })
        .collect();
    let inner: C64 = v
        .iter()
        .zip(sv.iter())
        .map(|(a, b)| a.conj() * (a - b))
        .sum();
    let quotient = inner.re / t;
    Ok((quotient - q.evaluate(xi)?).abs())
}

/// Margins of the conservative Dirichlet conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirichletReport {
    /// max |Q(ξ) − Q(ξ*)| over the samples.
    pub reality_defect: f64,
    /// Q(Ω).
    pub omega_value: f64,
    /// max Q(ξ₊) − Q(ξ) over the samples.
    pub positive_margin: f64,
    /// max Q(ξ∧) − Q(ξ) over the samples.
    pub wedge_margin: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Conservative Dirichlet predicate: Q real, Q(Ω) = 0, and both projections
/// ξ ↦ ξ₊ and ξ ↦ ξ∧ contract Q on sampled self-adjoint vectors.
pub fn is_conservative_dirichlet(
    sf: &StandardForm,
    q: &QuadraticForm,
    samples: usize,
    tol: f64,
    rng: &mut impl rand::Rng,
) -> Result<(bool, DirichletReport)> {
    if q.dim() != sf.hilbert_dim() {
        return Err(Error::DimensionMismatch {
            context: format!("form dim {} vs standard form {}", q.dim(), sf.hilbert_dim()),
        });
    }
    let cfg = ConeProjectionConfig::default();
    let mut reality_defect: f64 = 0.0;
    for _ in 0..samples {
        let xi = crate::sampling::random_vector(rng, sf.dim());
        let adj = sf.modular_conjugate(&xi);
        reality_defect = reality_defect.max((q.evaluate(&xi)? - q.evaluate(&adj)?).abs());
    }
    let omega_value = q.evaluate(&sf.cyclic_vector())?;
    let mut positive_margin = f64::NEG_INFINITY;
    let mut wedge_margin = f64::NEG_INFINITY;
    for _ in 0..samples {
        let xi = crate::sampling::random_self_adjoint_vector(rng, sf.dim());
        let base = q.evaluate(&xi)?;
        let plus = positive_part(sf, &xi, &cfg)?;
        positive_margin = positive_margin.max(q.evaluate(&plus)? - base);
        let wedge = wedge_part(sf, &xi, &cfg)?;
        wedge_margin = wedge_margin.max(q.evaluate(&wedge)? - base);
    }
    let passed = reality_defect <= tol
        && omega_value <= tol
        && positive_margin <= tol
        && wedge_margin <= tol;
    Ok((
        passed,
        DirichletReport {
            reality_defect,
            omega_value,
            positive_margin,
            wedge_margin,
            samples,
            passed,
        },
    ))
}

/// Margins of the level-k lifted condition (iii).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompleteDirichletReport {
    pub level: usize,
    pub positive_margin: f64,
    pub wedge_margin: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Q^{(k)}([ξ_ab]) = Σ_ab Q(ξ_ab) on a level-k element stored as a kn×kn
/// matrix of n×n blocks.
pub fn lifted_evaluate(
    q: &QuadraticForm,
    n: usize,
    level: usize,
    x: &ComplexMatrix,
) -> Result<f64> {
    let mut total = 0.0;
    for a in 0..level {
        for b in 0..level {
            let block = StdVector::new(x.block(a, b, n));
            total += q.evaluate(&block)?;
        }
    }
    Ok(total)
}

/// Complete Dirichlet check at matrix level k: the lifted form must contract
/// under the level-k positive part and wedge, with the cone taken in the
/// amplified standard form.
pub fn is_completely_dirichlet(
    sf: &StandardForm,
    q: &QuadraticForm,
    level: usize,
    samples: usize,
    tol: f64,
    rng: &mut impl rand::Rng,
) -> Result<(bool, CompleteDirichletReport)> {
    if level == 0 {
        return Err(Error::InvalidParameter("matrix level must be ≥ 1".into()));
    }
    let n = sf.dim();
    if q.dim() != n * n {
        return Err(Error::DimensionMismatch {
            context: "form dimension for completely-Dirichlet check".into(),
        });
    }
    let amplified = sf.amplified(level)?;
    let cfg = ConeProjectionConfig::default();
    let mut positive_margin = f64::NEG_INFINITY;
    let mut wedge_margin = f64::NEG_INFINITY;
    for _ in 0..samples {
        let xi = crate::sampling::random_self_adjoint_vector(rng, level * n);
        let base = lifted_evaluate(q, n, level, &xi.mat)?;
        let plus = positive_part(&amplified, &xi, &cfg)?;
        positive_margin = positive_margin.max(lifted_evaluate(q, n, level, &plus.mat)? - base);
        let wedge = wedge_part(&amplified, &xi, &cfg)?;
        wedge_margin = wedge_margin.max(lifted_evaluate(q, n, level, &wedge.mat)? - base);
    }
    let passed = positive_margin <= tol && wedge_margin <= tol;
    Ok((
        passed,
        CompleteDirichletReport {
            level,
            positive_margin,
            wedge_margin,
            samples,
            passed,
        },
    ))
}

/// Everything produced by the witness-to-form composition.
pub struct WitnessFormOutput {
    pub form: QuadraticForm,
    pub semigroup: SpectralSemigroup,
    pub snapshots: Vec<SemigroupSnapshot>,
    pub synthesis: SynthesisReport,
    pub dirichlet: DirichletReport,
    pub complete: Vec<CompleteDirichletReport>,
}

/// Compose the Markov-semigroup synthesis with the generating form, check
/// the conservative completely-Dirichlet conditions for k ≤ 3 and report the
/// eigenvalue sequence.
pub fn haagerup_witness_form(
    sf: &StandardForm,
    phis: &[CPMap],
    schedule: &SynthesisSchedule,
    samples: usize,
    tol: f64,
    rng: &mut impl rand::Rng,
) -> Result<WitnessFormOutput> {
    let (semigroup, snapshots, synthesis) =
        markov_semigroup_from_witnesses(sf, phis, &[], 3, schedule)?;
    let form = form_from_semigroup(&semigroup);
    let (_, dirichlet) = is_conservative_dirichlet(sf, &form, samples, tol, rng)?;
    let mut complete = Vec::new();
    for level in 1..=3 {
        let (_, rep) = is_completely_dirichlet(sf, &form, level, samples, tol, rng)?;
        complete.push(rep);
    }
    Ok(WitnessFormOutput {
        form,
        semigroup,
        snapshots,
        synthesis,
        dirichlet,
        complete,
    })
}

/// The transpose operator on the standard form of the tracial state: a
/// positive, unital, trace-preserving map that is not completely positive.
/// Its generator I − T yields a form that is Dirichlet at level 1 but fails
/// the level-2 lifted condition.
pub fn transpose_counterexample_form(n: usize) -> Result<(StandardForm, QuadraticForm)> {
    let sf = StandardForm::new(crate::state::QuantumState::tracial(n));
    let n2 = n * n;
    // T vec(E_ij) = vec(E_ji)
    let mut t = ComplexMatrix::zeros(n2, n2);
    for i in 0..n {
        for j in 0..n {
            t[(j * n + i, i * n + j)] = C64::new(1.0, 0.0);
        }
    }
    let generator = &ComplexMatrix::identity(n2) - &t;
    let semigroup = SpectralSemigroup::from_generator_matrix(&generator)?;
    Ok((sf, form_from_semigroup(&semigroup)))
}
