//! Closed-form 2×2 complex linear algebra for qubit operators.
//!
//! Every Hermitian 2×2 matrix is `a0·𝕀 + a⃗·σ⃗`, so eigenvalues are `a0 ± |a⃗|`
//! and functions of the matrix act on those two numbers along the axis `â`.
//! Nothing here iterates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Largest anti-Hermitian part tolerated by [`Operator::to_pauli`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOL` are clamped to zero.
pub const PSD_TOL: f64 = 1e-12;
/// Allowed deviation of a rotation axis from unit length.
pub const AXIS_TOL: f64 = 1e-12;
/// Below this Bloch length the eigenbasis is degenerate and `ẑ` is returned.
pub const DEGENERATE_TOL: f64 = 1e-14;
/// Eigenvalues this close to zero, relative to the spectrum, are rounding noise.
pub const ROUNDING_ZERO: f64 = 16.0 * f64::EPSILON;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Operator {
    pub entries: [[Complex64; 2]; 2],
}

/// Coefficients of an operator in the `{𝕀, σx, σy, σz}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliCoeffs {
    pub a0: f64,
    pub a: Vec3,
}

/// Spectral data of a Hermitian operator: `A = λ+ P(n̂) + λ− P(−n̂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen {
    pub upper: f64,
    pub lower: f64,
    pub axis: Vec3,
}

impl Operator {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            entries: [[a, b], [c, d]],
        }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Self::new(ZERO, Complex64::new(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0))
    }

    /// `σ_k` for `k ∈ {0, 1, 2}`.
    pub fn pauli(k: usize) -> Self {
        match k {
            0 => Self::sigma_x(),
            1 => Self::sigma_y(),
            2 => Self::sigma_z(),
            _ => panic!("Pauli index {k} out of range"),
        }
    }

    /// `n⃗·σ⃗`
    pub fn sigma_dot(n: &Vec3) -> Self {
        Self::new(
            Complex64::new(n.z, 0.0),
            Complex64::new(n.x, -n.y),
            Complex64::new(n.x, n.y),
            Complex64::new(-n.z, 0.0),
        )
    }

    pub fn from_pauli(c: &PauliCoeffs) -> Self {
        Self::identity().scale(c.a0) + Self::sigma_dot(&c.a)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        let e = &self.entries;
        Self::new(s * e[0][0], s * e[0][1], s * e[1][0], s * e[1][1])
    }

    pub fn adjoint(&self) -> Self {
        let e = &self.entries;
        Self::new(e[0][0].conj(), e[1][0].conj(), e[0][1].conj(), e[1][1].conj())
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn det(&self) -> Complex64 {
        let e = &self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.entries[r][c] - other.entries[r][c]).norm());
            }
        }
        worst
    }

    /// Largest entry of the anti-Hermitian part `(A − A†)/2`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()) / 2.0
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `U · self · U†`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        *u * *self * u.adjoint()
    }

    /// `U† · self · U`
    pub fn heisenberg_by(&self, u: &Self) -> Self {
        u.adjoint() * *self * *u
    }

    /// Decomposes a Hermitian operator as `a0·𝕀 + a⃗·σ⃗`.
    pub fn to_pauli(&self) -> Result<PauliCoeffs> {
        let residual = self.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
        Ok(self.pauli_parts_unchecked())
    }

    /// Real parts of `tr(A σ_k)/2` without the Hermiticity check.
    pub fn pauli_parts_unchecked(&self) -> PauliCoeffs {
        let e = &self.entries;
        let a0 = 0.5 * (e[0][0].re + e[1][1].re);
        let ax = 0.5 * (e[0][1].re + e[1][0].re);
        let ay = 0.5 * (e[1][0].im - e[0][1].im);
        let az = 0.5 * (e[0][0].re - e[1][1].re);
        PauliCoeffs {
            a0,
            a: Vec3::new(ax, ay, az),
        }
    }

    pub fn eig_hermitian(&self) -> Result<Eigen> {
        Ok(self.to_pauli()?.eigen())
    }

    /// Principal square root of a positive semidefinite operator.
    ///
    /// Eigenvalues in `[-PSD_TOL, 0)` are treated as zero, and so are positive
    /// ones within a few ulps of zero. Both happen for effects on the boundary
    /// `|x| + |m⃗| = 1`, whose roots would otherwise pick up `√ε` errors.
    pub fn sqrt_psd(&self) -> Result<Self> {
        let eig = self.eig_hermitian()?;
        if eig.lower < -PSD_TOL {
            return Err(Error::NotPsd {
                eigenvalue: eig.lower,
            });
        }
        let snap = |v: f64| {
            if v <= ROUNDING_ZERO * eig.upper.abs().max(1.0) {
                0.0
            } else {
                v.sqrt()
            }
        };
        let hi = snap(eig.upper);
        let lo = snap(eig.lower);
        Ok(Self::from_pauli(&PauliCoeffs {
            a0: 0.5 * (hi + lo),
            a: eig.axis * (0.5 * (hi - lo)),
        }))
    }
}

impl PauliCoeffs {
    pub fn new(a0: f64, a: Vec3) -> Self {
        Self { a0, a }
    }

    pub fn eigen(&self) -> Eigen {
        let r = self.a.norm();
        let axis = if r < DEGENERATE_TOL {
            Vec3::z()
        } else {
            self.a / r
        };
        Eigen {
            upper: self.a0 + r,
            lower: self.a0 - r,
            axis,
        }
    }
}

/// `exp(−i·phase·(axis·σ⃗)) = cos(phase)·𝕀 − i·sin(phase)·(axis·σ⃗)`.
///
/// `phase` is the dimensionless product of frequency and elapsed time.
pub fn qubit_unitary(axis: &Vec3, phase: f64) -> Result<Operator> {
    let norm = axis.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > AXIS_TOL {
        return Err(Error::BadAxis { norm });
    }
    let (s, c) = phase.sin_cos();
    Ok(Operator::identity().scale(c) + Operator::sigma_dot(axis).scale_c(Complex64::new(0.0, -s)))
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        let (a, b) = (&self.entries, &rhs.entries);
        Operator::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        self + (-rhs)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale(-1.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        let (a, b) = (&self.entries, &rhs.entries);
        Operator::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.entries;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            e[0][0], e[0][1], e[1][0], e[1][1]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_vec(a: &Vec3, b: &Vec3, tol: f64) {
        assert!((a - b).norm() <= tol, "{a:?} != {b:?}");
    }

    #[test]
    fn pauli_of_basis_elements() {
        let id = Operator::identity().to_pauli().unwrap();
        assert_eq!(id.a0, 1.0);
        assert_vec(&id.a, &Vec3::zeros(), 0.0);

        let z = Operator::sigma_z().to_pauli().unwrap();
        assert_eq!(z.a0, 0.0);
        assert_vec(&z.a, &Vec3::z(), 0.0);

        let proj = (Operator::identity() + Operator::sigma_z()).scale(0.5);
        let c = proj.to_pauli().unwrap();
        assert_eq!(c.a0, 0.5);
        assert_vec(&c.a, &Vec3::new(0.0, 0.0, 0.5), 0.0);
    }

    #[test]
    fn to_pauli_rejects_non_hermitian() {
        let a = Operator::sigma_x().scale_c(I);
        assert!(matches!(a.to_pauli(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigen_examples() {
        let e = Operator::sigma_x().eig_hermitian().unwrap();
        assert_eq!((e.upper, e.lower), (1.0, -1.0));
        assert_vec(&e.axis, &Vec3::x(), 0.0);

        let e = Operator::identity().scale(0.5).eig_hermitian().unwrap();
        assert_eq!((e.upper, e.lower), (0.5, 0.5));
        assert_vec(&e.axis, &Vec3::z(), 0.0);

        let a = Operator::identity().scale(0.3) + Operator::sigma_y().scale(0.2);
        let e = a.eig_hermitian().unwrap();
        assert_abs_diff_eq!(e.upper, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.lower, 0.1, epsilon = 1e-15);
        assert_vec(&e.axis, &Vec3::y(), 1e-15);
    }

    #[test]
    fn sqrt_examples() {
        let proj = (Operator::identity() + Operator::sigma_z()).scale(0.5);
        assert!(proj.sqrt_psd().unwrap().max_abs_diff(&proj) < 1e-15);

        let quarter = Operator::identity().scale(0.25);
        let half = Operator::identity().scale(0.5);
        assert!(quarter.sqrt_psd().unwrap().max_abs_diff(&half) < 1e-15);

        // Unsharp effect (𝕀 + 0.8 σz)/2 has eigenvalues 0.9 and 0.1.
        let e = (Operator::identity() + Operator::sigma_z().scale(0.8)).scale(0.5);
        let s = e.sqrt_psd().unwrap();
        let eig = s.eig_hermitian().unwrap();
        assert_abs_diff_eq!(eig.upper, 0.9f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(eig.lower, 0.1f64.sqrt(), epsilon = 1e-15);
        assert_vec(&eig.axis, &Vec3::z(), 1e-15);
        assert!((s * s).max_abs_diff(&e) < 1e-15);
    }

    #[test]
    fn sqrt_clamps_tiny_negative_and_rejects_negative() {
        let almost = Operator::from_pauli(&PauliCoeffs::new(0.5, Vec3::new(0.0, 0.0, 0.5 + 5e-13)));
        assert!(almost.sqrt_psd().is_ok());
        let neg = Operator::from_pauli(&PauliCoeffs::new(0.5, Vec3::new(0.0, 0.0, 0.6)));
        assert!(matches!(neg.sqrt_psd(), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn unitary_examples() {
        let u = qubit_unitary(&Vec3::x(), 0.0).unwrap();
        assert!(u.max_abs_diff(&Operator::identity()) < 1e-16);

        let u = qubit_unitary(&Vec3::x(), FRAC_PI_2).unwrap();
        let expected = Operator::sigma_x().scale_c(Complex64::new(0.0, -1.0));
        assert!(u.max_abs_diff(&expected) < 1e-15);

        assert!(matches!(
            qubit_unitary(&Vec3::new(1.0, 1.0, 0.0), 0.3),
            Err(Error::BadAxis { .. })
        ));
    }

    #[test]
    fn heisenberg_rotation_pins_phase_convention() {
        for k in 0..50 {
            let tau = k as f64 * PI / 49.0;
            let u = qubit_unitary(&Vec3::x(), tau).unwrap();
            let c = Operator::sigma_z().heisenberg_by(&u).to_pauli().unwrap();
            assert_abs_diff_eq!(c.a0, 0.0, epsilon = 1e-12);
            assert_vec(
                &c.a,
                &Vec3::new(0.0, (2.0 * tau).sin(), (2.0 * tau).cos()),
                1e-12,
            );
        }
    }

    fn hermitian() -> impl Strategy<Value = Operator> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_map(|(a0, x, y, z)| Operator::from_pauli(&PauliCoeffs::new(a0, Vec3::new(x, y, z))))
    }

    fn psd() -> impl Strategy<Value = Operator> {
        (0.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(t, x, y, z)| {
            let v = Vec3::new(x, y, z);
            let r = v.norm().max(1e-300);
            // a0 ≥ |a| keeps the lower eigenvalue non-negative
            let a0 = r * (1.0 + t);
            Operator::from_pauli(&PauliCoeffs::new(a0, v))
        })
    }

    fn unit_axis() -> impl Strategy<Value = Vec3> {
        (0.0..PI, 0.0..2.0 * PI).prop_map(|(t, p)| {
            Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn adjoint_is_involution(a in hermitian(), b in hermitian()) {
            let m = a * b;
            prop_assert_eq!(m.adjoint().adjoint(), m);
        }

        #[test]
        fn trace_is_cyclic(a in hermitian(), b in hermitian()) {
            prop_assert!(((a * b).trace() - (b * a).trace()).norm() < 1e-14);
        }

        #[test]
        fn pauli_round_trip(a in hermitian()) {
            let back = Operator::from_pauli(&a.to_pauli().unwrap());
            prop_assert!(back.max_abs_diff(&a) < 1e-14);
        }

        #[test]
        fn eigenvalues_are_a0_plus_minus_norm(a in hermitian()) {
            let c = a.to_pauli().unwrap();
            let e = a.eig_hermitian().unwrap();
            prop_assert!(e.upper >= e.lower);
            prop_assert!((e.upper - (c.a0 + c.a.norm())).abs() < 1e-14);
            prop_assert!((e.lower - (c.a0 - c.a.norm())).abs() < 1e-14);
            // det = λ+ λ−
            prop_assert!((a.det().re - e.upper * e.lower).abs() < 1e-12);
        }

        #[test]
        fn sqrt_squares_back(a in psd()) {
            let s = a.sqrt_psd().unwrap();
            prop_assert!((s * s).max_abs_diff(&a) < 1e-12);
            prop_assert!(s.is_hermitian(1e-15));
            prop_assert!(s.eig_hermitian().unwrap().lower >= 0.0);
        }

        #[test]
        fn unitary_is_unitary(axis in unit_axis(), phase in -10.0..10.0f64) {
            let u = qubit_unitary(&axis, phase).unwrap();
            prop_assert!((u * u.adjoint()).max_abs_diff(&Operator::identity()) < 1e-14);
        }
    }
}
