//! Two-qubit states and spin measurements along directions in the x–z plane
//! of the Bloch sphere.
//!
//! Basis order is `|++⟩, |+−⟩, |−+⟩, |−−⟩` (σz eigenvalues), Alice first.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::probability::{JointDistribution, ModelError, SettingPair};

/// Norm, trace and Hermiticity tolerance.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state amplitudes are not finite")]
    NonFinite,
    #[error("pure state has norm² {0}, expected 1")]
    NotNormalized(f64),
    #[error("density matrix has trace {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Spin along z for the product-state constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

/// A validated two-qubit state.
#[derive(Debug, Clone, PartialEq)]
pub enum BipartiteState {
    Pure(Vector4<Complex64>),
    Mixed(Matrix4<Complex64>),
}

impl BipartiteState {
    pub fn pure(amplitudes: [Complex64; 4]) -> Result<Self, StateError> {
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(StateError::NonFinite);
        }
        let v = Vector4::from(amplitudes);
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > STATE_TOL {
            return Err(StateError::NotNormalized(n2));
        }
        Ok(Self::Pure(v))
    }

    /// Normalizes the amplitudes before validating.
    pub fn pure_normalized(amplitudes: [Complex64; 4]) -> Result<Self, StateError> {
        let n = Vector4::from(amplitudes).norm();
        if n == 0.0 || !n.is_finite() {
            return Err(StateError::NotNormalized(n * n));
        }
        Self::pure(amplitudes.map(|a| a / n))
    }

    pub fn mixed(rho: Matrix4<Complex64>) -> Result<Self, StateError> {
        if rho.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let herm = (rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > STATE_TOL {
            return Err(StateError::NotHermitian(herm));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(StateError::BadTrace(tr.re));
        }
        // Symmetrize away sub-tolerance anti-Hermitian noise before the eigensolve.
        let sym = (rho + rho.adjoint()).map(|z| z * 0.5);
        let min_eig = SymmetricEigen::new(sym).eigenvalues.min();
        if min_eig < -PSD_TOL {
            return Err(StateError::NotPositive(min_eig));
        }
        Ok(Self::Mixed(sym))
    }

    pub fn density_matrix(&self) -> Matrix4<Complex64> {
        match self {
            Self::Pure(v) => v * v.adjoint(),
            Self::Mixed(rho) => *rho,
        }
    }

    /// `tr ρ²`
    pub fn purity(&self) -> f64 {
        let rho = self.density_matrix();
        (rho * rho).trace().re
    }
}

/// `(|+−⟩ − |−+⟩)/√2`
pub fn singlet() -> BipartiteState {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let v = Vector4::new(z, h, -h, z);
    BipartiteState::Mixed(v * v.adjoint())
}

pub fn product(alice: Spin, bob: Spin) -> BipartiteState {
    let mut amps = [Complex64::new(0.0, 0.0); 4];
    let idx = 2 * usize::from(alice == Spin::Down) + usize::from(bob == Spin::Down);
    amps[idx] = Complex64::new(1.0, 0.0);
    BipartiteState::Pure(Vector4::from(amps))
}

/// The four measurement directions, as angles (radians) from the z axis
/// towards the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSettings {
    pub s1: f64,
    pub s2: f64,
    pub s1_prime: f64,
    pub s2_prime: f64,
}

impl MeasurementSettings {
    pub fn new(s1: f64, s2: f64, s1_prime: f64, s2_prime: f64) -> Self {
        Self {
            s1,
            s2,
            s1_prime,
            s2_prime,
        }
    }

    /// `(0, π/2; π/4, −π/4)`, which maximizes `|Δ|` for the singlet.
    pub fn chsh_optimal() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self::new(0.0, FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4)
    }

    pub fn angles(&self, pair: SettingPair) -> (f64, f64) {
        let a = if pair.alice_first() { self.s1 } else { self.s2 };
        let b = if pair.bob_first() {
            self.s1_prime
        } else {
            self.s2_prime
        };
        (a, b)
    }
}

/// `(1 + outcome·(cos θ σz + sin θ σx)) / 2`
fn spin_projector(theta: f64, outcome: i8) -> Matrix2<Complex64> {
    let s = f64::from(outcome);
    let (sin, cos) = theta.sin_cos();
    let re = |v: f64| Complex64::new(v, 0.0);
    Matrix2::new(
        re(0.5 * (1.0 + s * cos)),
        re(0.5 * s * sin),
        re(0.5 * s * sin),
        re(0.5 * (1.0 - s * cos)),
    )
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

/// Outcome probabilities `tr(ρ · P_a ⊗ P_b)` for every setting pair.
pub fn quantum_joint_distribution(
    state: &BipartiteState,
    settings: &MeasurementSettings,
) -> Result<JointDistribution, StateError> {
    let rho = state.density_matrix();
    let mut p = [0.0; 16];
    for pair in SettingPair::ALL {
        let (ta, tb) = settings.angles(pair);
        let o = 4 * pair.index();
        for (k, &(a, b)) in crate::probability::OUTCOME_ORDER.iter().enumerate() {
            let op = kron(&spin_projector(ta, a), &spin_projector(tb, b));
            p[o + k] = (rho * op).trace().re.max(0.0);
        }
        let total: f64 = p[o..o + 4].iter().sum();
        for v in &mut p[o..o + 4] {
            *v /= total;
        }
    }
    Ok(JointDistribution::new(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{check_embedding, chsh, try_factorize};

    #[test]
    fn product_up_up_is_deterministic() {
        let d = quantum_joint_distribution(
            &product(Spin::Up, Spin::Up),
            &MeasurementSettings::new(0.0, 0.0, 0.0, 0.0),
        )
        .unwrap();
        for pair in SettingPair::ALL {
            assert!((d.get(pair, 1, 1) - 1.0).abs() < 1e-15);
        }
        let f = try_factorize(&d, 1e-12).unwrap();
        assert_eq!(f.coins.unwrap().as_array(), [1.0; 4]);
    }

    #[test]
    fn singlet_anticorrelates_along_equal_angles() {
        let d =
            quantum_joint_distribution(&singlet(), &MeasurementSettings::new(0.3, 1.0, 0.3, 2.0))
                .unwrap();
        let [pp, pm, mp, mm] = d.block(SettingPair::S1S1p);
        assert!(pp.abs() < 1e-15 && mm.abs() < 1e-15);
        assert!((pm - 0.5).abs() < 1e-15 && (mp - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singlet_at_optimal_angles_reaches_cirelson() {
        let d =
            quantum_joint_distribution(&singlet(), &MeasurementSettings::chsh_optimal()).unwrap();
        let r = chsh(&d).unwrap();
        assert!((r.delta + 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!(check_embedding(&d, 1e-12).passes());
    }

    #[test]
    fn singlet_basics() {
        let s = singlet();
        assert!((s.density_matrix().trace().re - 1.0).abs() < 1e-15);
        assert!((s.purity() - 1.0).abs() < 1e-12);
        assert!((product(Spin::Up, Spin::Up).purity() - 1.0).abs() < 1e-15);
        assert_eq!(
            product(Spin::Down, Spin::Up).density_matrix()[(2, 2)].re,
            1.0
        );
    }

    #[test]
    fn invalid_states_rejected() {
        let c = |re| Complex64::new(re, 0.0);
        assert!(matches!(
            BipartiteState::pure([c(1.0), c(1.0), c(0.0), c(0.0)]),
            Err(StateError::NotNormalized(_))
        ));
        let mut rho = Matrix4::<Complex64>::identity().map(|z| z * 0.25);
        rho[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            BipartiteState::mixed(rho),
            Err(StateError::NotHermitian(_))
        ));

        let rho = Matrix4::<Complex64>::identity().map(|z| z * 0.5);
        assert!(matches!(
            BipartiteState::mixed(rho),
            Err(StateError::BadTrace(_))
        ));

        // diag(0.75, 0.75, -0.25, -0.25) has unit trace but is not positive.
        let rho = Matrix4::from_diagonal(&Vector4::new(c(0.75), c(0.75), c(-0.25), c(-0.25)));
        assert!(matches!(
            BipartiteState::mixed(rho),
            Err(StateError::NotPositive(_))
        ));

        let rho = Matrix4::<Complex64>::identity().map(|z| z * 0.25);
        assert!(BipartiteState::mixed(rho).is_ok());
    }
}
