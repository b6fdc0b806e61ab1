//! The explicit spectral Dirichlet form on the free orthogonal quantum
//! group: dilated Chebyshev recurrences in exact integer arithmetic,
//! eigenvalues λ_s = U_s'(N)/U_s(N) with multiplicities U_s(N)², the
//! truncated spectral model and the growth report.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dirichlet::{DomainRule, QuadraticForm};
use crate::error::{Error, Result};

/// Exact values of the dilated Chebyshev polynomials of the second kind at
/// an integer argument: U_0 = 1, U_1 = N, U_{s+1} = N·U_s − U_{s-1} (the
/// convention with U_1(N) = N, forced by the dimension of the fundamental
/// representation), together with the derivatives from the differentiated
/// recurrence U_{s+1}' = U_s + N·U_s' − U_{s-1}'.
#[derive(Debug, Clone)]
pub struct ChebyshevData {
    pub n: u64,
    /// values[s] = U_s(N)
    pub values: Vec<BigInt>,
    /// derivatives[s] = U_s'(N)
    pub derivatives: Vec<BigInt>,
}

/// Exact recurrence for s = 0..=s_max.
pub fn chebyshev(n: u64, s_max: usize) -> Result<ChebyshevData> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "Chebyshev data needs N ≥ 2, got {n}"
        )));
    }
    let big_n = BigInt::from(n);
    let mut values = vec![BigInt::one(), big_n.clone()];
    let mut derivatives = vec![BigInt::zero(), BigInt::one()];
    for s in 1..s_max.max(1) {
        let next = &big_n * &values[s] - &values[s - 1];
        let next_d = &values[s] + &big_n * &derivatives[s] - &derivatives[s - 1];
        values.push(next);
        derivatives.push(next_d);
    }
    values.truncate(s_max + 1);
    derivatives.truncate(s_max + 1);
    Ok(ChebyshevData {
        n,
        values,
        derivatives,
    })
}

impl ChebyshevData {
    /// λ_s = U_s'(N)/U_s(N) as an exact rational.
    pub fn eigenvalue(&self, s: usize) -> BigRational {
        BigRational::new(self.derivatives[s].clone(), self.values[s].clone())
    }

    /// Multiplicity n_s = U_s(N) as f64 (for dimension accounting).
    pub fn multiplicity(&self, s: usize) -> &BigInt {
        &self.values[s]
    }
}

/// Exact rational eigenvalue λ_s = U_s'(N)/U_s(N).
pub fn eigenvalue(n: u64, s: usize) -> Result<BigRational> {
    Ok(chebyshev(n, s)?.eigenvalue(s))
}

/// Convert a (possibly huge) positive rational to f64 through a scaled
/// integer quotient, avoiding intermediate overflow.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let negative = r.is_negative();
    let numer = r.numer().abs();
    let denom = r.denom().abs();
    // scale so that the integer quotient keeps 60+ significant bits
    let shift = 64i64 + denom.bits() as i64 - numer.bits() as i64;
    let scaled = if shift >= 0 {
        (numer << shift as u64) / &denom
    } else {
        numer / (&denom << (-shift) as u64)
    };
    let mut out = 0.0f64;
    let digits = scaled.to_u64_digits().1;
    for (i, d) in digits.iter().enumerate() {
        out += (*d as f64) * 2f64.powi(64 * i as i32);
    }
    out *= 2f64.powi(-shift as i32);
    if negative {
        -out
    } else {
        out
    }
}

/// One row of the spectral table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralRow {
    pub s: usize,
    /// n_s as a decimal string (exact).
    pub multiplicity: String,
    /// λ_s as an exact rational string "p/q".
    pub lambda_exact: String,
    pub lambda: f64,
    /// d_s = λ_s − s/√(N²−4); NaN for N = 2.
    pub deviation: f64,
}

/// The truncated spectral model: the zero mode plus eigenvalue λ_s with
/// multiplicity n_s² for s = 1..=s_max, on an abstract labeled space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OnPlusSpectralModel {
    pub n: u64,
    pub s_max: usize,
    pub rows: Vec<SpectralRow>,
    /// 1 + Σ n_s².
    pub total_dimension: usize,
    /// Basis labels (s, i, j) in eigenvalue blocks, with (0, 0, 0) first.
    pub labels: Vec<(usize, usize, usize)>,
}

/// Default cap on the total model dimension.
pub const DIMENSION_CAP: usize = 100_000;

/// Build the truncated model and export it as a diagonal [`QuadraticForm`]
/// with the summability domain tag.
pub fn build_spectral_model(
    n: u64,
    s_max: usize,
    dimension_cap: usize,
) -> Result<(OnPlusSpectralModel, QuadraticForm)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be ≥ 2, got {n}")));
    }
    if s_max < 1 {
        return Err(Error::InvalidParameter("s_max must be ≥ 1".into()));
    }
    let data = chebyshev(n, s_max)?;
    let asym = if n > 2 {
        ((n * n - 4) as f64).sqrt()
    } else {
        f64::NAN
    };

    let mut rows = Vec::new();
    let mut labels = vec![(0usize, 0usize, 0usize)];
    let mut eigenvalues = vec![0.0f64];
    let mut total: usize = 1;
    for s in 1..=s_max {
        let lam = data.eigenvalue(s);
        let lam_f = rational_to_f64(&lam);
        let mult = data.multiplicity(s);
        let mult_usize: usize = mult
            .to_string()
            .parse()
            .map_err(|_| Error::DimensionOverflow {
                dim: usize::MAX,
                cap: dimension_cap,
            })?;
        let block = mult_usize
            .checked_mul(mult_usize)
            .ok_or(Error::DimensionOverflow {
                dim: usize::MAX,
                cap: dimension_cap,
            })?;
        total = total.checked_add(block).ok_or(Error::DimensionOverflow {
            dim: usize::MAX,
            cap: dimension_cap,
        })?;
        if total > dimension_cap {
            return Err(Error::DimensionOverflow {
                dim: total,
                cap: dimension_cap,
            });
        }
        let deviation = if n > 2 {
            lam_f - s as f64 / asym
        } else {
            f64::NAN
        };
        rows.push(SpectralRow {
            s,
            multiplicity: mult.to_string(),
            lambda_exact: format!("{}/{}", lam.numer(), lam.denom()),
            lambda: lam_f,
            deviation,
        });
        for i in 0..mult_usize {
            for j in 0..mult_usize {
                labels.push((s, i, j));
                eigenvalues.push(lam_f);
            }
        }
    }
    let form = QuadraticForm::new(eigenvalues, None, DomainRule::Summability)?;
    Ok((
        OnPlusSpectralModel {
            n,
            s_max,
            rows,
            total_dimension: total,
            labels,
        },
        form,
    ))
}

/// Growth report over s in [s_lo, s_hi].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub n: u64,
    pub s_lo: usize,
    pub s_hi: usize,
    /// max |d_s| over the window (N ≥ 3 branch).
    pub max_abs_deviation: f64,
    /// |d_{s_hi} − d_{s_lo}|.
    pub window_drift: f64,
    /// max |d_{s+1} − d_s| over the window.
    pub max_successive_difference: f64,
    /// true iff λ_{s+1} > λ_s exactly (rational comparison) on the window.
    pub strictly_increasing: bool,
    /// For N = 2: worst |λ_s − s(s+2)/6| as exact-rational comparison
    /// (0 when the closed form matches exactly).
    pub closed_form_defect: Option<f64>,
}

/// Measure the eigenvalue growth: exact closed form for N = 2, the
/// d_s = λ_s − s/√(N²−4) window statistics for N ≥ 3.
pub fn growth_check(n: u64, s_lo: usize, s_hi: usize) -> Result<GrowthReport> {
    if s_lo >= s_hi {
        return Err(Error::InvalidParameter("need s_lo < s_hi".into()));
    }
    if s_lo < 1 {
        return Err(Error::InvalidParameter("need s_lo ≥ 1".into()));
    }
    let data = chebyshev(n, s_hi)?;

    let mut strictly_increasing = true;
    for s in s_lo..s_hi {
        // λ_{s+1} > λ_s as an exact cross-multiplied integer comparison
        let lhs = &data.derivatives[s + 1] * &data.values[s];
        let rhs = &data.derivatives[s] * &data.values[s + 1];
        if lhs <= rhs {
            strictly_increasing = false;
            break;
        }
    }

    if n == 2 {
        let mut worst = BigRational::zero();
        for s in s_lo..=s_hi {
            let closed = BigRational::new(BigInt::from(s as u64 * (s as u64 + 2)), BigInt::from(6));
            let diff = (data.eigenvalue(s) - closed).abs();
            if diff > worst {
                worst = diff;
            }
        }
        return Ok(GrowthReport {
            n,
            s_lo,
            s_hi,
            max_abs_deviation: f64::NAN,
            window_drift: f64::NAN,
            max_successive_difference: f64::NAN,
            strictly_increasing,
            closed_form_defect: Some(rational_to_f64(&worst)),
        });
    }

    let asym = ((n * n - 4) as f64).sqrt();
    let d = |s: usize| rational_to_f64(&data.eigenvalue(s)) - s as f64 / asym;
    let mut max_abs: f64 = 0.0;
    let mut max_succ: f64 = 0.0;
    let mut prev = d(s_lo);
    max_abs = max_abs.max(prev.abs());
    for s in (s_lo + 1)..=s_hi {
        let cur = d(s);
        max_abs = max_abs.max(cur.abs());
        max_succ = max_succ.max((cur - prev).abs());
        prev = cur;
    }
    Ok(GrowthReport {
        n,
        s_lo,
        s_hi,
        max_abs_deviation: max_abs,
        window_drift: (d(s_hi) - d(s_lo)).abs(),
        max_successive_difference: max_succ,
        strictly_increasing,
        closed_form_defect: None,
    })
}

/// CSV rows `s,n_s,lambda_exact,lambda_float,d_s` for s = 0..=s_max.
pub fn spectral_csv(n: u64, s_max: usize) -> Result<String> {
    let data = chebyshev(n, s_max)?;
    let asym = if n > 2 {
        ((n * n - 4) as f64).sqrt()
    } else {
        f64::NAN
    };
    let mut out = String::from("s,n_s,lambda_exact,lambda_float,d_s\n");
    for s in 0..=s_max {
        let lam = data.eigenvalue(s);
        let lam_f = rational_to_f64(&lam);
        let dev = if n > 2 {
            format!("{:.12e}", lam_f - s as f64 / asym)
        } else {
            String::from("")
        };
        out.push_str(&format!(
            "{},{},{}/{},{:.12e},{}\n",
            s,
            data.values[s],
            lam.numer(),
            lam.denom(),
            lam_f,
            dev
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilated_recurrence_small_values() {
        let d2 = chebyshev(2, 5).unwrap();
        let vals: Vec<u64> = d2
            .values
            .iter()
            .map(|v| v.to_string().parse().unwrap())
            .collect();
        assert_eq!(vals, vec![1, 2, 3, 4, 5, 6]);

        let d3 = chebyshev(3, 3).unwrap();
        let vals: Vec<u64> = d3
            .values
            .iter()
            .map(|v| v.to_string().parse().unwrap())
            .collect();
        assert_eq!(vals, vec![1, 3, 8, 21]);
    }

    #[test]
    fn derivative_closed_form_at_two() {
        // U_s'(2) = s(s+1)(s+2)/6
        let d = chebyshev(2, 5).unwrap();
        for s in 0..=5u64 {
            let expected = s * (s + 1) * (s + 2) / 6;
            assert_eq!(d.derivatives[s as usize], BigInt::from(expected));
        }
    }

    #[test]
    fn eigenvalue_examples() {
        // N = 2: λ_s = s(s+2)/6
        let lam1 = eigenvalue(2, 1).unwrap();
        assert_eq!(lam1, BigRational::new(BigInt::from(1), BigInt::from(2)));
        let lam4 = eigenvalue(2, 4).unwrap();
        assert_eq!(lam4, BigRational::from(BigInt::from(4)));
        let lam0 = eigenvalue(2, 0).unwrap();
        assert!(lam0.is_zero());
        // N = 3: λ_1 = 1/3
        let lam = eigenvalue(3, 1).unwrap();
        assert_eq!(lam, BigRational::new(BigInt::from(1), BigInt::from(3)));
    }

    #[test]
    fn rational_to_f64_handles_huge_ratios() {
        let d = chebyshev(8, 200).unwrap();
        let lam = d.eigenvalue(200);
        let f = rational_to_f64(&lam);
        // λ_s ≈ s/√(N²-4) for large s
        let approx = 200.0 / 60f64.sqrt();
        assert!((f - approx).abs() < 0.2, "λ_200(8) ≈ {f} vs {approx}");
        // sanity on small rationals
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert!((rational_to_f64(&half) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn model_dimensions_and_zero_mode() {
        let (model, form) = build_spectral_model(2, 2, DIMENSION_CAP).unwrap();
        // 1 + 2² + 3² = 14
        assert_eq!(model.total_dimension, 14);
        assert_eq!(form.dim(), 14);
        assert_eq!(form.zero_multiplicity(1e-15), 1);
        assert_eq!(model.labels[0], (0, 0, 0));
        // eigenvalues: 1/2 with multiplicity 4, then 4/3 with multiplicity 9
        assert!((model.rows[0].lambda - 0.5).abs() < 1e-15);
        assert!((model.rows[1].lambda - 4.0 / 3.0).abs() < 1e-14);

        let (model3, form3) = build_spectral_model(3, 1, DIMENSION_CAP).unwrap();
        assert_eq!(model3.total_dimension, 10);
        assert!((form3.eigenvalues()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn model_rejects_oversized_truncation() {
        assert!(matches!(
            build_spectral_model(3, 12, DIMENSION_CAP),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn growth_exact_closed_form_at_two() {
        let rep = growth_check(2, 1, 50).unwrap();
        assert!(rep.strictly_increasing);
        assert_eq!(rep.closed_form_defect, Some(0.0));
    }

    #[test]
    fn growth_window_statistics_at_three() {
        let rep = growth_check(3, 100, 200).unwrap();
        assert!(rep.strictly_increasing);
        assert!(rep.window_drift < 1e-2, "drift {}", rep.window_drift);
        assert!(rep.max_successive_difference < 1e-3);
    }

    #[test]
    fn eigenvalues_increase_monotonically_at_four() {
        let rep = growth_check(4, 2, 60).unwrap();
        assert!(rep.strictly_increasing);
    }

    #[test]
    fn csv_shape() {
        let csv = spectral_csv(2, 10).unwrap();
        let lines: Vec<&str> = csv.trim().lines().collect();
        assert_eq!(lines.len(), 12); // header + 11 rows
        assert!(lines[0].starts_with("s,n_s,lambda_exact"));
        assert!(lines[2].starts_with("1,2,1/2,"));
    }

    #[test]
    fn rejects_small_n() {
        assert!(chebyshev(1, 5).is_err());
        assert!(build_spectral_model(1, 3, DIMENSION_CAP).is_err());
    }
}
