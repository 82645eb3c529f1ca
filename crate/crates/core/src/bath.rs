//! Drude baths and the exponential-plus-delta expansion of their noise
//! correlation function.
//!
//! The real part of C(t) is expanded as the Drude pole at rate γ (with the
//! exact cotangent weight) plus the poles of a Padé approximant of the Bose
//! function. Whatever zero-frequency weight the retained poles miss is
//! assigned to a white-noise term 2Δ·δ(t). The imaginary part of a Drude
//! correlation function is a single exponential and is represented exactly.
//!
//! Units: ħ = k_B = 1, frequencies in units of a reference frequency.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{self, Kernel};

/// Physical description of one Drude bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Coupling strength η.
    pub eta: f64,
    /// Drude cutoff γ.
    pub gamma: f64,
    /// Temperature T.
    pub temperature: f64,
    /// Number of Padé poles J retained beyond the Drude pole.
    pub pade_terms: usize,
}

impl BathSpec {
    pub fn new(eta: f64, gamma: f64, temperature: f64, pade_terms: usize) -> Result<Self> {
        let spec = Self {
            eta,
            gamma,
            temperature,
            pade_terms,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta must be >= 0, got {}",
                self.eta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn with_pade_terms(self, pade_terms: usize) -> Self {
        Self { pade_terms, ..self }
    }
}

/// J(ω) = η γ² ω / (ω² + γ²).
pub fn drude_spectral_density(spec: &BathSpec, omega: f64) -> f64 {
    let g2 = spec.gamma * spec.gamma;
    spec.eta * g2 * omega / (omega * omega + g2)
}

/// One exponential term (c′ + i c″) e^{-rate·t}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub c_real: f64,
    pub c_imag: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseDecomposition {
    terms: Vec<ExpTerm>,
    delta_weight: f64,
    c_imag_at_zero: f64,
}

impl NoiseDecomposition {
    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    /// Δ, the weight of the 2Δ·δ(t) part of C^R.
    pub fn delta_weight(&self) -> f64 {
        self.delta_weight
    }

    /// lim_{t→0⁺} C^I(t).
    pub fn c_imag_at_zero(&self) -> f64 {
        self.c_imag_at_zero
    }

    /// Exponential part of C(t) for t > 0 (the delta term is not pointwise).
    pub fn correlation(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|term| C64::new(term.c_real, term.c_imag) * (-term.rate * t).exp())
            .sum()
    }

    /// ∫₀^∞ C^R(t) dt of the full expansion including the delta term.
    pub fn zero_frequency_weight(&self) -> f64 {
        self.retained_weight() + self.delta_weight
    }

    fn retained_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.c_real / t.rate).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.delta_weight == 0.0
            && self
                .terms
                .iter()
                .all(|t| t.c_real == 0.0 && t.c_imag == 0.0)
    }
}

/// A pole ξ and residue weight κ of the Padé approximant
/// 1/(1 − e^{−x}) ≈ 1/x + 1/2 + Σ_j 2κ_j x / (x² + ξ_j²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PadePole {
    pub xi: f64,
    pub kappa: f64,
}

fn bose_tridiagonal_eigen(size: usize, offset: usize) -> Vec<f64> {
    // Off-diagonals 1/sqrt(b_m b_{m+1}) with b_m = 2m + 1.
    let b = |m: usize| (2 * (m + offset) + 1) as f64;
    let mut mat = DMatrix::<f64>::zeros(size, size);
    for m in 1..size {
        let v = 1.0 / (b(m) * b(m + 1)).sqrt();
        mat[(m - 1, m)] = v;
        mat[(m, m - 1)] = v;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(mat)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Poles and residues of the [N−1/N] Padé approximant of the Bose function,
/// sorted by increasing ξ.
pub fn pade_poles(n: usize) -> Vec<PadePole> {
    if n == 0 {
        return Vec::new();
    }
    let lam = bose_tridiagonal_eigen(2 * n, 0);
    let mut xi: Vec<f64> = lam[..n].iter().map(|l| 2.0 / l).collect();
    xi.sort_by(f64::total_cmp);
    let lam_t = bose_tridiagonal_eigen(2 * n - 1, 1);
    let mut zeta: Vec<f64> = lam_t[..n - 1].iter().map(|l| 2.0 / l).collect();
    zeta.sort_by(f64::total_cmp);

    let prefactor = 0.5 * n as f64 * (2 * n + 3) as f64;
    (0..n)
        .map(|j| {
            let xj2 = xi[j] * xi[j];
            // Pair numerator and denominator factors to keep the product finite.
            let others = xi
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, x)| x);
            let kappa = zeta
                .iter()
                .zip(others)
                .fold(prefactor, |acc, (z, x)| acc * (z * z - xj2) / (x * x - xj2));
            PadePole { xi: xi[j], kappa }
        })
        .collect()
}

/// Exponential expansion of the Drude correlation function with
/// `spec.pade_terms` Padé poles and the matching delta weight.
pub fn pade_decompose(spec: &BathSpec) -> Result<NoiseDecomposition> {
    spec.validate()?;
    let beta = spec.beta();
    let gamma = spec.gamma;
    let eta = spec.eta;
    let g2 = gamma * gamma;

    let half_bg = 0.5 * beta * gamma;
    let sin_half = half_bg.sin();
    if sin_half.abs() < 1e-10 {
        return Err(Error::PoleCollision {
            pade_terms: spec.pade_terms,
            pole: gamma,
            gamma,
        });
    }
    let mut terms = Vec::with_capacity(spec.pade_terms + 1);
    terms.push(ExpTerm {
        c_real: 0.5 * eta * g2 * half_bg.cos() / sin_half,
        c_imag: -0.5 * eta * g2,
        rate: gamma,
    });
    for pole in pade_poles(spec.pade_terms) {
        let nu = pole.xi / beta;
        if (nu - gamma).abs() < 1e-8 * gamma {
            return Err(Error::PoleCollision {
                pade_terms: spec.pade_terms,
                pole: nu,
                gamma,
            });
        }
        terms.push(ExpTerm {
            c_real: 2.0 * pole.kappa / beta * eta * g2 * nu / (nu * nu - g2),
            c_imag: 0.0,
            rate: nu,
        });
    }
    let delta = delta_weight(spec, &terms)?;
    let c_imag_at_zero = terms.iter().map(|t| t.c_imag).sum();
    Ok(NoiseDecomposition {
        terms,
        delta_weight: delta,
        c_imag_at_zero,
    })
}

/// Δ = ∫₀^∞ [C^R(t) − Σ_j c′_j e^{−γ_j t}] dt, evaluated from the exact
/// zero-frequency weight η·T of the Drude bath.
pub fn delta_weight(spec: &BathSpec, retained: &[ExpTerm]) -> Result<f64> {
    let exact = spec.eta * spec.temperature;
    let kept: f64 = retained.iter().map(|t| t.c_real / t.rate).sum();
    let delta = exact - kept;
    if delta < -1e-12 * exact.max(1.0) {
        return Err(Error::NegativeDelta { value: delta });
    }
    Ok(delta.max(0.0))
}

/// Default absolute tolerance of the quadrature oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// C(t) by direct numerical integration of the spectral representation
/// C(t) = ∫₀^∞ dω/π J(ω) [coth(βω/2) cos ωt − i sin ωt].
///
/// At t = 0 the imaginary part is returned as its t → 0⁺ limit, and the real
/// part diverges logarithmically for a Drude bath (J ~ 1/ω), which is
/// reported as an error.
pub fn correlation_quadrature_oracle(spec: &BathSpec, t: f64) -> Result<C64> {
    correlation_quadrature_oracle_with_tol(spec, t, ORACLE_TOLERANCE)
}

pub fn correlation_quadrature_oracle_with_tol(
    spec: &BathSpec,
    t: f64,
    abs_tol: f64,
) -> Result<C64> {
    spec.validate()?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "oracle needs t >= 0, got {t}"
        )));
    }
    if spec.eta == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let j = |w: f64| drude_spectral_density(spec, w);
    if t == 0.0 {
        // J ~ ηγ²/ω at large ω, so ∫ J coth dω grows like log ω.
        return Err(Error::Divergent(
            "real part of a Drude correlation function is infinite at t = 0".into(),
        ));
    }
    let beta = spec.beta();
    // coth(βω/2) = 1 + 2 n(ω): the thermal part decays exponentially, the
    // vacuum part only as 1/ω and needs the extrapolated Fourier driver.
    let thermal = |w: f64| {
        if w == 0.0 {
            2.0 * spec.eta / beta
        } else {
            2.0 * j(w) / (beta * w).exp_m1()
        }
    };
    let cutoff = (60.0 / beta).max(1.0);
    let thermal_part = quadrature::integrate(
        |w| thermal(w) * (w * t).cos(),
        0.0,
        cutoff,
        abs_tol * 0.25,
        20_000,
    )?;
    let vacuum = quadrature::fourier_half_line(j, t, Kernel::Cos, abs_tol * 0.25)?;
    let imag = quadrature::fourier_half_line(j, t, Kernel::Sin, abs_tol * 0.5)?;
    Ok(C64::new(
        (thermal_part.value + vacuum.value) / PI,
        -imag.value / PI,
    ))
}

/// lim_{t→0⁺} C^I(t) from the large-frequency tail of J(ω).
pub fn imaginary_oracle_at_zero(spec: &BathSpec) -> f64 {
    let w = 1e7 * spec.gamma;
    -0.5 * w * drude_spectral_density(spec, w)
}

/// Outcome of comparing a decomposition against the quadrature oracle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FidelityReport {
    /// max_t |C_rec(t) − C_oracle(t)| / max_t |C_oracle(t)| over the grid.
    pub max_relative_error: f64,
    pub worst_time: f64,
    pub grid_points: usize,
}

/// Uniform grid t_i = i·(10/γ)/n, i = 1..=n.
pub fn fidelity_grid(spec: &BathSpec, points: usize) -> Vec<f64> {
    let t_max = 10.0 / spec.gamma;
    (1..=points)
        .map(|i| t_max * i as f64 / points as f64)
        .collect()
}

/// Oracle values on a grid, computed once so several decompositions can be
/// checked against them.
pub fn oracle_on_grid(spec: &BathSpec, grid: &[f64]) -> Result<Vec<C64>> {
    grid.iter()
        .map(|&t| correlation_quadrature_oracle(spec, t))
        .collect()
}

pub fn reconstruction_error(
    decomposition: &NoiseDecomposition,
    grid: &[f64],
    oracle: &[C64],
) -> FidelityReport {
    let scale = oracle.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut worst = 0.0;
    let mut worst_time = f64::NAN;
    for (&t, &exact) in grid.iter().zip(oracle) {
        let err = (decomposition.correlation(t) - exact).norm();
        if err > worst {
            worst = err;
            worst_time = t;
        }
    }
    FidelityReport {
        max_relative_error: if scale > 0.0 { worst / scale } else { worst },
        worst_time,
        grid_points: grid.len(),
    }
}

/// Smallest Padé order whose reconstruction matches the oracle to `tol`
/// (relative to the largest |C| on the grid).
pub fn auto_pade_terms(
    spec: &BathSpec,
    tol: f64,
    max_terms: usize,
) -> Result<(NoiseDecomposition, FidelityReport)> {
    let grid = fidelity_grid(spec, 100);
    let oracle = oracle_on_grid(spec, &grid)?;
    let mut last = None;
    for n in 0..=max_terms {
        let candidate = spec.with_pade_terms(n);
        let decomposition = match pade_decompose(&candidate) {
            Ok(d) => d,
            Err(Error::NegativeDelta { .. }) | Err(Error::PoleCollision { .. }) => continue,
            Err(e) => return Err(e),
        };
        let report = reconstruction_error(&decomposition, &grid, &oracle);
        if report.max_relative_error < tol {
            return Ok((decomposition, report));
        }
        last = Some(report);
    }
    Err(Error::Quadrature {
        achieved: last.map_or(f64::INFINITY, |r| r.max_relative_error),
        requested: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(eta: f64, gamma: f64, t: f64, n: usize) -> BathSpec {
        BathSpec::new(eta, gamma, t, n).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        assert_eq!(drude_spectral_density(&spec(1.0, 2.0, 1.0, 0), 0.0), 0.0);
        assert_relative_eq!(drude_spectral_density(&spec(1.0, 2.0, 1.0, 0), 2.0), 1.0);
        assert_relative_eq!(
            drude_spectral_density(&spec(0.01, 2.0, 1.0, 0), 1.0),
            0.008,
            max_relative = 1e-14
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(BathSpec::new(-1.0, 2.0, 1.0, 0).is_err());
        assert!(BathSpec::new(1.0, 0.0, 1.0, 0).is_err());
        assert!(BathSpec::new(1.0, 2.0, 0.0, 0).is_err());
    }

    #[test]
    fn pade_approximant_matches_bose_function() {
        let poles = pade_poles(5);
        for &x in &[0.5, 3.0, 10.0f64] {
            let approx: f64 = 1.0 / x
                + 0.5
                + poles
                    .iter()
                    .map(|p| 2.0 * p.kappa * x / (x * x + p.xi * p.xi))
                    .sum::<f64>();
            let exact = 1.0 / (1.0 - (-x).exp());
            assert!((approx - exact).abs() < 1e-9, "x={x}");
        }
        // Low poles approach the Matsubara frequencies.
        assert_relative_eq!(poles[0].xi, 2.0 * PI, max_relative = 1e-9);
        assert_relative_eq!(poles[0].kappa, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn large_pade_orders_stay_finite() {
        for p in pade_poles(80) {
            assert!(p.xi.is_finite() && p.kappa.is_finite() && p.kappa > 0.0);
        }
    }

    #[test]
    fn imaginary_part_is_single_drude_exponential() {
        let d = pade_decompose(&spec(0.3, 2.0, 1.0, 3)).unwrap();
        assert_relative_eq!(d.c_imag_at_zero(), -0.5 * 0.3 * 4.0, max_relative = 1e-15);
        for &t in &[0.0, 0.3, 2.0] {
            let im = d.correlation(t).im;
            assert_relative_eq!(im, -0.6 * (-2.0 * t).exp(), max_relative = 1e-14);
        }
        let sum: f64 = d.terms().iter().map(|t| t.c_imag).sum();
        assert_eq!(sum, d.c_imag_at_zero());
    }

    #[test]
    fn zero_coupling_gives_zero_expansion() {
        let d = pade_decompose(&spec(0.0, 2.0, 2.0, 4)).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.delta_weight(), 0.0);
        let c = correlation_quadrature_oracle(&spec(0.0, 2.0, 2.0, 0), 0.7).unwrap();
        assert_eq!(c, C64::new(0.0, 0.0));
    }

    #[test]
    fn zero_frequency_weight_is_exact() {
        for &(t, n) in &[(2.0, 0), (2.0, 3), (1.0, 1), (10.0, 0)] {
            let s = spec(0.7, 2.0, t, n);
            let d = pade_decompose(&s).unwrap();
            assert_relative_eq!(d.zero_frequency_weight(), 0.7 * t, max_relative = 1e-13);
        }
    }

    #[test]
    fn delta_weight_shrinks_with_pade_order() {
        for &temp in &[1.0, 2.0, 10.0] {
            let mut prev = f64::INFINITY;
            for n in 0..6 {
                let d = pade_decompose(&spec(1.0, 2.0, temp, n)).unwrap();
                let delta = d.delta_weight();
                assert!(delta <= prev + 1e-14, "T={temp} n={n}: {delta} > {prev}");
                prev = delta;
            }
            assert!(prev < 1e-9);
        }
    }

    #[test]
    fn low_temperature_tail_with_too_few_poles_is_negative() {
        // βγ/2 = 10 lies beyond three Matsubara frequencies: the single Drude
        // pole over-counts the zero-frequency weight.
        assert!(matches!(
            pade_decompose(&spec(1.0, 2.0, 0.1, 0)),
            Err(Error::NegativeDelta { .. })
        ));
    }

    #[test]
    fn cotangent_singularity_is_a_pole_collision() {
        // βγ/2 = π: the first Matsubara pole sits exactly on γ.
        let s = spec(1.0, 2.0 * PI, 1.0, 2);
        assert!(matches!(
            pade_decompose(&s),
            Err(Error::PoleCollision { .. })
        ));
    }

    #[test]
    fn oracle_imaginary_part_matches_closed_form() {
        let s = spec(1.0, 2.0, 1.0, 0);
        for &t in &[0.05, 0.5, 3.0] {
            let c = correlation_quadrature_oracle(&s, t).unwrap();
            assert!((c.im + 2.0 * (-2.0 * t).exp()).abs() < 1e-9, "t={t}");
        }
        assert_relative_eq!(imaginary_oracle_at_zero(&s), -2.0, max_relative = 1e-12);
    }

    #[test]
    fn oracle_real_part_at_zero_diverges() {
        let s = spec(0.01, 2.0, 2.0, 0);
        assert!(matches!(
            correlation_quadrature_oracle(&s, 0.0),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn oracle_rejects_negative_time() {
        let s = spec(0.01, 2.0, 2.0, 0);
        assert!(correlation_quadrature_oracle(&s, -1.0).is_err());
    }
}
