//! Preset models: the two-bath spin-boson model and the driven three-level
//! engine, plus a second-order Markovian (Redfield) steady-current oracle.

use nalgebra::{SymmetricEigen, SVD};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bath::{drude_spectral_density, pade_decompose, BathSpec, NoiseDecomposition};
use crate::error::{Error, Result};
use crate::system::{CMatrix, Drive, SystemModel};

pub use crate::fingerprint::{decomposition_fingerprint, model_fingerprint, to_hex, Fingerprint};

pub const SPIN_BOSON: &str = "spin-boson";
pub const THREE_LEVEL_ENGINE: &str = "three-level-engine";

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinBosonParams {
    pub omega0: f64,
    pub s_x: f64,
    pub s_z: f64,
    pub baths: [BathSpec; 2],
}

impl SpinBosonParams {
    /// ω₀ = 1, γ = 2, T₁ = 2, T₂ = 1, s_x = s_z = 1, equal couplings η.
    pub fn standard(eta: f64, pade_terms: usize) -> Self {
        Self {
            omega0: 1.0,
            s_x: 1.0,
            s_z: 1.0,
            baths: [
                BathSpec {
                    eta,
                    gamma: 2.0,
                    temperature: 2.0,
                    pade_terms,
                },
                BathSpec {
                    eta,
                    gamma: 2.0,
                    temperature: 1.0,
                    pade_terms,
                },
            ],
        }
    }
}

/// H_S = (ω₀/2)σ_z, V₁ = σ_x, V₂ = (s_xσ_x + s_zσ_z)/√(s_x² + s_z²).
pub fn build_spin_boson(
    params: &SpinBosonParams,
) -> Result<(SystemModel, Vec<NoiseDecomposition>)> {
    let norm = params.s_x.hypot(params.s_z);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidParameter(
            "mixing vector (s_x, s_z) must be nonzero".into(),
        ));
    }
    if !params.omega0.is_finite() {
        return Err(Error::InvalidParameter("omega0 must be finite".into()));
    }
    let v2 = (sigma_x() * c(params.s_x) + sigma_z() * c(params.s_z)) / c(norm);
    let model = SystemModel::new(
        sigma_z() * c(0.5 * params.omega0),
        None,
        vec![sigma_x(), v2],
    )?;
    let decs = params
        .baths
        .iter()
        .map(pade_decompose)
        .collect::<Result<Vec<_>>>()?;
    Ok((model, decs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelParams {
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    /// Drive frequency Ω.
    pub drive_frequency: f64,
    pub baths: [BathSpec; 2],
}

impl ThreeLevelParams {
    /// ω₁ = 1, ω₂ = Ω = 0.5, g = 0.1, γ = 2, η₂ = 0.001.
    pub fn standard(eta1: f64, t1: f64, t2: f64, pade_terms: [usize; 2]) -> Self {
        Self {
            omega1: 1.0,
            omega2: 0.5,
            g: 0.1,
            drive_frequency: 0.5,
            baths: [
                BathSpec {
                    eta: eta1,
                    gamma: 2.0,
                    temperature: t1,
                    pade_terms: pade_terms[0],
                },
                BathSpec {
                    eta: 0.001,
                    gamma: 2.0,
                    temperature: t2,
                    pade_terms: pade_terms[1],
                },
            ],
        }
    }
}

/// H_S(t) = ω₁|1⟩⟨1| + ω₂|2⟩⟨2| + g(e^{−iΩt}|1⟩⟨2| + h.c.), V₁ = |0⟩⟨1| + h.c.,
/// V₂ = |0⟩⟨2| + h.c.
pub fn build_three_level(
    params: &ThreeLevelParams,
) -> Result<(SystemModel, Vec<NoiseDecomposition>)> {
    if !(params.omega1 > params.omega2 && params.omega2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "level ordering requires omega1 > omega2 > 0, got {} and {}",
            params.omega1, params.omega2
        )));
    }
    let mut h = CMatrix::zeros(3, 3);
    h[(1, 1)] = c(params.omega1);
    h[(2, 2)] = c(params.omega2);
    let mut pattern = CMatrix::zeros(3, 3);
    pattern[(1, 2)] = c(1.0);
    let mut v1 = CMatrix::zeros(3, 3);
    v1[(0, 1)] = c(1.0);
    v1[(1, 0)] = c(1.0);
    let mut v2 = CMatrix::zeros(3, 3);
    v2[(0, 2)] = c(1.0);
    v2[(2, 0)] = c(1.0);
    let drive = Drive {
        amplitude: params.g,
        frequency: params.drive_frequency,
        pattern,
    };
    let model = SystemModel::new(h, Some(drive), vec![v1, v2])?;
    let decs = params
        .baths
        .iter()
        .map(pade_decompose)
        .collect::<Result<Vec<_>>>()?;
    Ok((model, decs))
}

/// Number of Matsubara terms in the oracle's principal-value sum.
const MATSUBARA_TERMS: usize = 4000;

/// G(ω) = ∫₀^∞ C(τ) e^{iωτ} dτ. The real part is S(ω)/2 with
/// S(ω) = J(ω)[coth(βω/2) + 1] (J odd-extended); the imaginary part comes
/// from the exact Matsubara expansion of C(τ).
pub fn half_sided_spectrum(spec: &BathSpec, omega: f64) -> C64 {
    let beta = spec.beta();
    let g = spec.gamma;
    let eta = spec.eta;
    let re = if omega == 0.0 {
        eta / beta
    } else {
        let j = drude_spectral_density(spec, omega);
        0.5 * j * (1.0 / (0.5 * beta * omega).tanh() + 1.0)
    };
    // Drude pole (cot(βγ/2) − i)·ηγ²/2 at rate γ, then Matsubara poles.
    let c0 = C64::new(
        0.5 * eta * g * g / (0.5 * beta * g).tan(),
        -0.5 * eta * g * g,
    );
    let mut im = (c0 / C64::new(g, -omega)).im;
    for j in 1..=MATSUBARA_TERMS {
        let nu = 2.0 * PI * j as f64 / beta;
        let cj = 2.0 * eta * g * g / beta * nu / (nu * nu - g * g);
        im += cj * omega / (nu * nu + omega * omega);
    }
    // Tail beyond the cut: c_j ω/ν_j² ≈ ηγ²ωβ²/(4π³ j³), Σ_{j>K} j⁻³ ≈ 1/(2K²).
    let k = MATSUBARA_TERMS as f64;
    im += eta * g * g * omega * beta * beta / (8.0 * PI.powi(3)) / (k * k);
    C64::new(re, im)
}

/// Steady heat current Q̇^k = Tr{H_S D_k[ρ_ss]} of the second-order
/// Markovian master equation dρ/dt = −i[H_S, ρ] + Σ_k D_k[ρ],
/// D_k[ρ] = −[V_k, Λ_kρ − ρΛ_k†], (Λ_k)_{ab} = (V_k)_{ab} G_k(−ω_ab).
pub fn redfield_steady_current_oracle(model: &SystemModel, baths: &[BathSpec]) -> Result<Vec<f64>> {
    if model.is_driven() {
        return Err(Error::InvalidParameter(
            "the Redfield oracle needs an undriven model".into(),
        ));
    }
    if baths.len() != model.n_baths() {
        return Err(Error::InvalidParameter(
            "one bath per coupling is required".into(),
        ));
    }
    let d = model.dim();
    let h = model.h_static().clone();
    let eig = SymmetricEigen::new(h.clone());
    let u = eig.eigenvectors;
    let energies = eig.eigenvalues;
    let ud = u.adjoint();

    let lambdas: Vec<CMatrix> = model
        .couplings()
        .iter()
        .zip(baths)
        .map(|(v, spec)| {
            let ve = &ud * v * &u;
            let mut l = CMatrix::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    let w = energies[a] - energies[b];
                    l[(a, b)] = ve[(a, b)] * half_sided_spectrum(spec, -w);
                }
            }
            &u * l * &ud
        })
        .collect();

    let apply = |rho: &CMatrix| -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let mut out = (&h * rho - rho * &h) * (-i);
        for (v, l) in model.couplings().iter().zip(&lambdas) {
            let x = l * rho - rho * l.adjoint();
            out -= v * &x - &x * v;
        }
        out
    };
    // Column-stacked superoperator matrix.
    let n = d * d;
    let mut super_l = CMatrix::zeros(n, n);
    for col in 0..n {
        let mut basis = CMatrix::zeros(d, d);
        basis[(col % d, col / d)] = c(1.0);
        let image = apply(&basis);
        for row in 0..n {
            super_l[(row, col)] = image[(row % d, row / d)];
        }
    }
    let svd = SVD::new(super_l, false, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smallest = svd.singular_values[order[0]];
    let second = svd.singular_values[order[1]];
    let largest = svd.singular_values[order[n - 1]];
    if second < 1e-10 * largest || smallest > 1e-8 * largest {
        return Err(Error::DegenerateSteadyState(second));
    }
    let v_t = svd.v_t.expect("requested");
    let mut rho = CMatrix::zeros(d, d);
    for row in 0..n {
        rho[(row % d, row / d)] = v_t[(order[0], row)].conj();
    }
    let tr = rho.trace();
    rho /= tr;

    Ok(model
        .couplings()
        .iter()
        .zip(&lambdas)
        .map(|(v, l)| {
            let x = l * &rho - &rho * l.adjoint();
            let dk = -(v * &x - &x * v);
            (&h * dk).trace().re
        })
        .collect())
}

/// Two-level golden-rule current into the system from bath 1 for
/// H_S = (ω₀/2)σ_z and V₁ = V₂ = σ_x.
pub fn golden_rule_two_level(omega0: f64, baths: &[BathSpec; 2]) -> f64 {
    let n = |b: &BathSpec| 1.0 / (omega0 / b.temperature).exp_m1();
    let j1 = drude_spectral_density(&baths[0], omega0);
    let j2 = drude_spectral_density(&baths[1], omega0);
    let (n1, n2) = (n(&baths[0]), n(&baths[1]));
    2.0 * omega0 * j1 * j2 * (n1 - n2) / (j1 * (2.0 * n1 + 1.0) + j2 * (2.0 * n2 + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn spin_boson_couplings() {
        let p = SpinBosonParams::standard(0.01, 1);
        let (m, decs) = build_spin_boson(&p).unwrap();
        assert_eq!(decs.len(), 2);
        let v2 = &m.couplings()[1];
        assert!((v2[(0, 0)].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v2[(0, 1)].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let h = m.hamiltonian_at(3.0);
        assert!((h[(0, 0)].re - 0.5).abs() < 1e-15);

        let mut dephasing = p;
        dephasing.s_x = 0.0;
        let (m, _) = build_spin_boson(&dephasing).unwrap();
        assert!(m
            .a_operator(1, 0.0)
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));

        let mut bad = p;
        bad.s_x = 0.0;
        bad.s_z = 0.0;
        assert!(build_spin_boson(&bad).is_err());
    }

    #[test]
    fn three_level_layout() {
        let p = ThreeLevelParams::standard(0.01, 10.0, 1.0, [0, 1]);
        let (m, _) = build_three_level(&p).unwrap();
        assert_eq!(m.dim(), 3);
        assert!((m.hamiltonian_at(0.0)[(1, 2)].re - 0.1).abs() < 1e-15);
        let mut bad = p;
        bad.omega2 = 1.5;
        assert!(build_three_level(&bad).is_err());
    }

    #[test]
    fn fingerprints_are_stable() {
        let p = SpinBosonParams::standard(0.01, 1);
        let (m1, d1) = build_spin_boson(&p).unwrap();
        let (m2, d2) = build_spin_boson(&p).unwrap();
        assert_eq!(model_fingerprint(&m1), model_fingerprint(&m2));
        assert_eq!(
            decomposition_fingerprint(&d1),
            decomposition_fingerprint(&d2)
        );
        let (m3, d3) = build_spin_boson(&SpinBosonParams::standard(0.02, 1)).unwrap();
        assert_eq!(model_fingerprint(&m1), model_fingerprint(&m3));
        assert_ne!(
            decomposition_fingerprint(&d1),
            decomposition_fingerprint(&d3)
        );
    }

    #[test]
    fn half_sided_spectrum_imaginary_part_matches_quadrature() {
        // Im G(ω) = ∫₀^∞ [C^R(τ) sin ωτ + C^I(τ) cos ωτ] dτ, with C^I exact and
        // C^R from the quadrature oracle integrated numerically.
        let spec = BathSpec::new(1.0, 2.0, 1.0, 0).unwrap();
        let w = 0.7;
        let g = half_sided_spectrum(&spec, w);
        let im_from_ci = -0.5 * 4.0 * 2.0 / (4.0 + w * w);
        let cr = |t: f64| {
            crate::bath::correlation_quadrature_oracle_with_tol(&spec, t, 1e-9)
                .unwrap()
                .re
        };
        let est = crate::quadrature::integrate(|t| cr(t) * (w * t).sin(), 1e-12, 30.0, 1e-6, 400)
            .unwrap();
        assert!(
            (g.im - (im_from_ci + est.value)).abs() < 1e-4,
            "{} vs {}",
            g.im,
            im_from_ci + est.value
        );
    }

    #[test]
    fn oracle_matches_golden_rule_and_vanishes_at_equilibrium() {
        let mut p = SpinBosonParams::standard(0.001, 0);
        p.s_z = 0.0;
        let (m, _) = build_spin_boson(&p).unwrap();
        let q = redfield_steady_current_oracle(&m, &p.baths).unwrap();
        let gr = golden_rule_two_level(1.0, &p.baths);
        assert!(gr > 0.0);
        assert!((q[0] - gr).abs() < 1e-3 * gr, "{} vs {gr}", q[0]);
        assert!((q[0] + q[1]).abs() < 1e-12);

        let mut eq = p;
        eq.baths[1].temperature = 2.0;
        let q = redfield_steady_current_oracle(&m, &eq.baths).unwrap();
        assert!(q[0].abs() < 1e-14);

        let mut drained = p;
        drained.baths[1].eta = 0.0;
        let q = redfield_steady_current_oracle(&m, &drained.baths).unwrap();
        assert!(q[0].abs() < 1e-14);
    }
}
