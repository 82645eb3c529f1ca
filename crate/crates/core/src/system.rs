//! Driven finite-dimensional systems, their coupling operators, and the
//! superoperators that act on reduced density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::bath::NoiseDecomposition;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest entry of |X − X†|.
pub fn hermiticity_deviation(x: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..x.nrows() {
        for c in r..x.ncols() {
            worst = worst.max((x[(r, c)] - x[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Tr(A·B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let d = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// Single-tone drive g·(e^{−iΩt}·P + h.c.).
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    pub amplitude: f64,
    pub frequency: f64,
    pub pattern: CMatrix,
}

impl Drive {
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.frequency
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    dim: usize,
    h_static: CMatrix,
    drive: Option<Drive>,
    couplings: Vec<CMatrix>,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl SystemModel {
    pub fn new(h_static: CMatrix, drive: Option<Drive>, couplings: Vec<CMatrix>) -> Result<Self> {
        let dim = h_static.nrows();
        if dim == 0 || h_static.ncols() != dim {
            return Err(Error::InvalidParameter(
                "h_static must be a non-empty square matrix".into(),
            ));
        }
        if hermiticity_deviation(&h_static) > HERMITIAN_TOL {
            return Err(Error::InvalidParameter("h_static is not Hermitian".into()));
        }
        for (k, v) in couplings.iter().enumerate() {
            if v.shape() != (dim, dim) {
                return Err(Error::InvalidParameter(format!(
                    "coupling {k} has the wrong shape"
                )));
            }
            if hermiticity_deviation(v) > HERMITIAN_TOL {
                return Err(Error::InvalidParameter(format!(
                    "coupling {k} is not Hermitian"
                )));
            }
        }
        if let Some(drive) = &drive {
            if drive.pattern.shape() != (dim, dim) {
                return Err(Error::InvalidParameter(
                    "drive pattern has the wrong shape".into(),
                ));
            }
            if !(drive.frequency > 0.0 && drive.frequency.is_finite()) {
                return Err(Error::InvalidParameter(
                    "drive frequency must be > 0".into(),
                ));
            }
            if !drive.amplitude.is_finite() {
                return Err(Error::InvalidParameter(
                    "drive amplitude must be finite".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            h_static,
            drive,
            couplings,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_static(&self) -> &CMatrix {
        &self.h_static
    }

    pub fn drive(&self) -> Option<&Drive> {
        self.drive.as_ref()
    }

    /// A drive with zero amplitude does not count.
    pub fn is_driven(&self) -> bool {
        self.drive.as_ref().is_some_and(|d| d.amplitude != 0.0)
    }

    pub fn couplings(&self) -> &[CMatrix] {
        &self.couplings
    }

    pub fn n_baths(&self) -> usize {
        self.couplings.len()
    }

    pub fn coupling(&self, k: usize) -> Result<&CMatrix> {
        self.couplings.get(k).ok_or(Error::IndexOutOfRange {
            what: "bath",
            index: k,
            len: self.couplings.len(),
        })
    }

    pub fn hamiltonian_at(&self, t: f64) -> CMatrix {
        let mut h = self.h_static.clone();
        if let Some(drive) = &self.drive {
            let phase = C64::from_polar(drive.amplitude, -drive.frequency * t);
            let term = drive.pattern.map(|p| p * phase);
            h += &term + term.adjoint();
        }
        h
    }

    /// ∂H_S/∂t.
    pub fn power_operator(&self, t: f64) -> CMatrix {
        match &self.drive {
            None => CMatrix::zeros(self.dim, self.dim),
            Some(drive) => {
                let phase = C64::from_polar(drive.amplitude, -drive.frequency * t)
                    * C64::new(0.0, -drive.frequency);
                let term = drive.pattern.map(|p| p * phase);
                &term + term.adjoint()
            }
        }
    }

    /// A_k(t) = i[H_S(t), V_k].
    pub fn a_operator(&self, k: usize, t: f64) -> Result<CMatrix> {
        let v = self.coupling(k)?;
        Ok(commutator(&self.hamiltonian_at(t), v) * I)
    }

    /// B_{k,k′} = i²[[V_k, V_{k′}], V_k].
    pub fn b_operator(&self, k: usize, kp: usize) -> Result<CMatrix> {
        if k == kp {
            return Err(Error::SameBath(k));
        }
        let v = self.coupling(k)?;
        let vp = self.coupling(kp)?;
        Ok(-commutator(&commutator(v, vp), v))
    }

    pub fn apply_phi(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        Ok(SuperOp::phi(self.coupling(k)?.clone()).apply(x))
    }

    pub fn apply_psi(&self, k: usize, x: &CMatrix) -> Result<CMatrix> {
        Ok(SuperOp::psi(self.coupling(k)?.clone()).apply(x))
    }

    /// Θ_{k_j} X = c′ Φ_k X − c″ Ψ_k X.
    pub fn apply_theta(
        &self,
        decompositions: &[NoiseDecomposition],
        k: usize,
        j: usize,
        x: &CMatrix,
    ) -> Result<CMatrix> {
        Ok(self.theta(decompositions, k, j)?.apply(x))
    }

    pub fn theta(
        &self,
        decompositions: &[NoiseDecomposition],
        k: usize,
        j: usize,
    ) -> Result<SuperOp> {
        let v = self.coupling(k)?;
        let dec = decompositions.get(k).ok_or(Error::IndexOutOfRange {
            what: "decomposition",
            index: k,
            len: decompositions.len(),
        })?;
        let term = dec.terms().get(j).ok_or(Error::IndexOutOfRange {
            what: "decomposition term",
            index: j,
            len: dec.terms().len(),
        })?;
        Ok(SuperOp::Sum(vec![
            SuperOp::Commutator {
                op: v.clone(),
                scale: I * term.c_real,
            },
            SuperOp::Anticommutator {
                op: v.clone(),
                scale: C64::new(-term.c_imag, 0.0),
            },
        ]))
    }

    /// X ↦ −i[H_S(t), X].
    pub fn liouvillian(&self, t: f64) -> SuperOp {
        SuperOp::Commutator {
            op: self.hamiltonian_at(t),
            scale: -I,
        }
    }
}

/// Linear maps on d×d matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum SuperOp {
    /// X ↦ A·X
    Left(CMatrix),
    /// X ↦ X·A
    Right(CMatrix),
    /// X ↦ s·[A, X]
    Commutator { op: CMatrix, scale: C64 },
    /// X ↦ s·{A, X}
    Anticommutator { op: CMatrix, scale: C64 },
    /// Σ_i S_i X
    Sum(Vec<SuperOp>),
    /// S_0 S_1 ⋯ S_n X (rightmost applied first)
    Compose(Vec<SuperOp>),
}

impl SuperOp {
    /// Φ X = i[V, X].
    pub fn phi(v: CMatrix) -> Self {
        SuperOp::Commutator { op: v, scale: I }
    }

    /// Ψ X = {V, X}.
    pub fn psi(v: CMatrix) -> Self {
        SuperOp::Anticommutator {
            op: v,
            scale: C64::new(1.0, 0.0),
        }
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        match self {
            SuperOp::Left(a) => a * x,
            SuperOp::Right(a) => x * a,
            SuperOp::Commutator { op, scale } => commutator(op, x) * *scale,
            SuperOp::Anticommutator { op, scale } => anticommutator(op, x) * *scale,
            SuperOp::Sum(parts) => {
                let mut acc = CMatrix::zeros(x.nrows(), x.ncols());
                for p in parts {
                    acc += p.apply(x);
                }
                acc
            }
            SuperOp::Compose(parts) => parts.iter().rev().fold(x.clone(), |acc, p| p.apply(&acc)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{pade_decompose, BathSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sx() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }
    fn sy() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }
    fn sz() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    fn max_abs(x: &CMatrix) -> f64 {
        x.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn spin_boson() -> SystemModel {
        let v2 = (sx() + sz()) * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        SystemModel::new(sz() * c(0.5, 0.0), None, vec![sx(), v2]).unwrap()
    }

    fn engine(g: f64) -> SystemModel {
        let mut h = CMatrix::zeros(3, 3);
        h[(1, 1)] = c(1.0, 0.0);
        h[(2, 2)] = c(0.5, 0.0);
        let mut pattern = CMatrix::zeros(3, 3);
        pattern[(1, 2)] = c(1.0, 0.0);
        let mut v1 = CMatrix::zeros(3, 3);
        v1[(0, 1)] = c(1.0, 0.0);
        v1[(1, 0)] = c(1.0, 0.0);
        let mut v2 = CMatrix::zeros(3, 3);
        v2[(0, 2)] = c(1.0, 0.0);
        v2[(2, 0)] = c(1.0, 0.0);
        let drive = Drive {
            amplitude: g,
            frequency: 0.5,
            pattern,
        };
        SystemModel::new(h, Some(drive), vec![v1, v2]).unwrap()
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let mut h = sz();
        h[(0, 1)] = c(0.3, 0.0);
        assert!(SystemModel::new(h, None, vec![]).is_err());
        assert!(SystemModel::new(sz(), None, vec![sy() * c(0.0, 1.0)]).is_err());
    }

    #[test]
    fn undriven_hamiltonian_is_static() {
        let m = spin_boson();
        assert_eq!(m.hamiltonian_at(0.0), m.hamiltonian_at(7.3));
        assert_eq!(max_abs(&m.power_operator(1.0)), 0.0);
    }

    #[test]
    fn engine_drive_entries() {
        let m = engine(0.1);
        let h = m.hamiltonian_at(0.0);
        assert!((h[(1, 2)] - c(0.1, 0.0)).norm() < 1e-15);
        assert!((h[(2, 1)] - c(0.1, 0.0)).norm() < 1e-15);
        let p = m.power_operator(0.0);
        assert!((p[(1, 2)] - c(0.0, -0.05)).norm() < 1e-15);
        assert!((p[(2, 1)] - c(0.0, 0.05)).norm() < 1e-15);
        let period = m.drive().unwrap().period();
        assert!(max_abs(&(m.hamiltonian_at(0.7) - m.hamiltonian_at(0.7 + period))) < 1e-12);
    }

    #[test]
    fn a_operator_pauli_algebra() {
        let a = spin_boson().a_operator(0, 0.0).unwrap();
        assert!(max_abs(&(a + sy())) < 1e-15);
        let commuting = SystemModel::new(sz(), None, vec![sz()]).unwrap();
        assert_eq!(max_abs(&commuting.a_operator(0, 0.0).unwrap()), 0.0);
    }

    #[test]
    fn a_operator_engine_entries() {
        let m = engine(0.1);
        let a = m.a_operator(0, 0.0).unwrap();
        // i[H, V₁]: (0,1) = i(0 − ω₁) = −i, (1,0) = i·ω₁; drive mixes in (0,2)/(2,0).
        assert!((a[(0, 1)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((a[(1, 0)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((a[(2, 0)] - c(0.0, 0.1)).norm() < 1e-15);
        assert!((a[(0, 2)] - c(0.0, -0.1)).norm() < 1e-15);
    }

    #[test]
    fn b_operator_cases() {
        let m = spin_boson();
        assert!(matches!(m.b_operator(1, 1), Err(Error::SameBath(1))));
        // [σx, (σx+σz)/√2] = −2iσy/√2; [−2iσy/√2, σx] = −2i(−2iσz)/√2 ⇒ i²·that.
        let b = m.b_operator(0, 1).unwrap();
        let expected = sz() * c(4.0 * std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(max_abs(&(b - expected)) < 1e-14);
        let commuting = SystemModel::new(sz(), None, vec![sx(), sx()]).unwrap();
        assert_eq!(max_abs(&commuting.b_operator(0, 1).unwrap()), 0.0);
        let ident = SystemModel::new(sz(), None, vec![CMatrix::identity(2, 2), sx()]).unwrap();
        assert_eq!(max_abs(&ident.b_operator(0, 1).unwrap()), 0.0);
    }

    #[test]
    fn psi_of_identity() {
        let m = spin_boson();
        let r = m.apply_psi(0, &CMatrix::identity(2, 2)).unwrap();
        assert!(max_abs(&(r - sx() * c(2.0, 0.0))) < 1e-15);
    }

    #[test]
    fn theta_reduces_to_phi() {
        let m = spin_boson();
        let dec = pade_decompose(&BathSpec::new(1.0, 2.0, 1.0, 1).unwrap()).unwrap();
        let term = dec.terms()[1];
        assert_eq!(term.c_imag, 0.0);
        let x = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.), c(0.1, 0.2), c(0.1, -0.2), c(0.7, 0.)]);
        let decs = vec![dec.clone(), dec];
        let theta = m.apply_theta(&decs, 0, 1, &x).unwrap();
        let phi = m.apply_phi(0, &x).unwrap() * c(term.c_real, 0.0);
        assert!(max_abs(&(theta - phi)) < 1e-14);
        assert!(m.apply_theta(&decs, 0, 5, &x).is_err());
        assert!(m.apply_phi(3, &x).is_err());
    }

    #[test]
    fn compose_applies_right_to_left() {
        let a = SuperOp::Left(sx());
        let b = SuperOp::Right(sz());
        let x = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        let composed = SuperOp::Compose(vec![a.clone(), b.clone()]).apply(&x);
        assert_eq!(composed, sx() * (&x * sz()));
    }
}
