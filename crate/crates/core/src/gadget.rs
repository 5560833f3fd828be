//! The SU(2) gadget: two quarter-wave plates and a half-wave plate.
//!
//! The gadget acts on the mode operators as `(b1, b2)ᵀ = U(θ, φ) (a1, a2)ᵀ`
//! with
//!
//! ```text
//! U(θ, φ) = [  cos θ          e^{iφ} sin θ ]
//!           [ −e^{−iφ} sin θ  cos θ        ]
//! ```
//!
//! The abstract angles are realized by the Euler form
//! `exp(−iξσ₂/2) exp(iησ₃/2) exp(−iζσ₂/2)` and the Euler angles map linearly
//! onto the orientations of the three plates.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::math::{angle_distance, circular_distance, wrap};

/// Below this, `b` or `√(a²+c²)` is treated as exactly zero.
const DEGENERATE_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Abstract gadget setting with `θ ∈ [0, π/2]` and `φ ∈ [0, 2π)`.
///
/// Out-of-range input is reduced with `U(θ+π, φ) = −U(θ, φ)` and
/// `U(π−θ, φ) = −U(θ, φ+π)`, so the reduced setting reproduces the requested
/// unitary up to a global sign. Intensity moments are unaffected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    theta: f64,
    phi: f64,
}

impl MeasurementSetting {
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = wrap(theta, TAU);
        let mut phi = phi;
        if theta > PI {
            theta -= PI;
        }
        if theta > FRAC_PI_2 {
            theta = PI - theta;
            phi += PI;
        }
        MeasurementSetting { theta, phi: wrap(phi, TAU) }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// True when both angles agree within `tol`, `φ` compared on the circle.
    /// At `θ = 0` the gadget is the identity whatever `φ` is.
    pub fn approx_eq(&self, other: &MeasurementSetting, tol: f64) -> bool {
        if (self.theta - other.theta).abs() > tol {
            return false;
        }
        self.theta.max(other.theta) <= tol || angle_distance(self.phi, other.phi) <= tol
    }

    pub fn axis(&self) -> AxisTriple {
        let (s, co) = self.theta.sin_cos();
        AxisTriple { a: self.phi.cos() * s, b: self.phi.sin() * s, c: co }
    }
}

/// `a = cos φ sin θ`, `b = sin φ sin θ`, `c = cos θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// The 2×2 matrix `U(θ, φ)`; unitary with unit determinant.
pub fn gadget_unitary(setting: &MeasurementSetting) -> Matrix2<Complex64> {
    let (s, co) = setting.theta.sin_cos();
    let e = Complex64::from_polar(1.0, setting.phi);
    Matrix2::new(c(co, 0.0), e * s, -e.conj() * s, c(co, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
}

impl EulerAngles {
    pub fn new(xi: f64, eta: f64, zeta: f64) -> Self {
        EulerAngles { xi, eta, zeta }
    }

    /// `exp(−iξσ₂/2) exp(iησ₃/2) exp(−iζσ₂/2)`.
    pub fn unitary(&self) -> Matrix2<Complex64> {
        let rot = |x: f64| {
            let (s, co) = (x / 2.0).sin_cos();
            Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
        };
        let phase = Complex64::from_polar(1.0, self.eta / 2.0);
        let mid = Matrix2::new(phase, c(0.0, 0.0), c(0.0, 0.0), phase.conj());
        rot(self.xi) * mid * rot(self.zeta)
    }

    /// Largest angle mismatch with each angle compared modulo `2π`.
    ///
    /// Shifting any Euler angle by `2π` flips the sign of the reconstructed
    /// unitary, so triples within this distance give the same gadget up to a
    /// global sign.
    pub fn distance(&self, other: &EulerAngles) -> f64 {
        angle_distance(self.xi, other.xi)
            .max(angle_distance(self.eta, other.eta))
            .max(angle_distance(self.zeta, other.zeta))
    }
}

/// Euler angles realizing `U(θ, φ)`.
///
/// Generic settings use `cos(η/2) = √(a²+c²)`,
/// `e^{i(ξ+ζ)/2} = (c − ia)/√(a²+c²)` and `e^{i(ξ−ζ)/2} = i b/|b|` with
/// principal arguments; the reconstruction then equals `+U`. For `b = 0`
/// (`φ ∈ {0, π}` or `θ = 0`) the result is `(0, 0, −2·atan2(a, c))`, i.e.
/// `ζ = −2θ` at `φ = 0` and `ζ = 2θ` at `φ = π`. For `a = c = 0`
/// (`θ = π/2`, `φ = ±π/2`) the sum `ξ + ζ` is free and `η = π`,
/// `ξ − ζ = sign(b)·π`.
pub fn euler_from_setting(setting: &MeasurementSetting) -> EulerAngles {
    let AxisTriple { a, b, c } = setting.axis();
    let ac = a.hypot(c);
    if b.abs() <= DEGENERATE_TOL {
        return EulerAngles::new(0.0, 0.0, -2.0 * a.atan2(c));
    }
    let half_diff = b.signum() * FRAC_PI_2;
    if ac <= DEGENERATE_TOL {
        return EulerAngles::new(half_diff, PI, -half_diff);
    }
    let half_sum = (-a).atan2(c);
    let eta = 2.0 * ac.min(1.0).acos();
    EulerAngles::new(half_sum + half_diff, eta, half_sum - half_diff)
}

/// Orientations of the two quarter-wave plates and the half-wave plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateAngles {
    pub qp1: f64,
    pub qp2: f64,
    pub hp: f64,
}

impl PlateAngles {
    pub fn new(qp1: f64, qp2: f64, hp: f64) -> Self {
        PlateAngles { qp1, qp2, hp }
    }

    /// Quarter-wave plates reduced modulo `π`, half-wave plate modulo `π/2`.
    /// Both reductions change the plate product by at most a global sign.
    pub fn normalized(&self) -> Self {
        PlateAngles { qp1: wrap(self.qp1, PI), qp2: wrap(self.qp2, PI), hp: wrap(self.hp, FRAC_PI_2) }
    }

    /// Largest mismatch under the physical periods.
    pub fn distance(&self, other: &PlateAngles) -> f64 {
        circular_distance(self.qp1, other.qp1, PI)
            .max(circular_distance(self.qp2, other.qp2, PI))
            .max(circular_distance(self.hp, other.hp, FRAC_PI_2))
    }
}

pub fn plate_angles_from_euler(euler: &EulerAngles) -> PlateAngles {
    let EulerAngles { xi, eta, zeta } = *euler;
    PlateAngles::new(xi / 2.0 + FRAC_PI_4, (xi + eta) / 2.0 + FRAC_PI_4, (xi + eta - zeta) / 4.0 - FRAC_PI_4)
        .normalized()
}

/// Inverse of [`plate_angles_from_euler`]. `ζ` is recovered modulo `2π`
/// because the half-wave plate angle is only known modulo `π/2`.
pub fn euler_from_plate_angles(plates: &PlateAngles) -> EulerAngles {
    let xi = 2.0 * (plates.qp1 - FRAC_PI_4);
    let eta = 2.0 * (plates.qp2 - FRAC_PI_4) - xi;
    let zeta = xi + eta - 4.0 * (plates.hp + FRAC_PI_4);
    EulerAngles::new(xi, eta, zeta)
}

fn rotation(alpha: f64) -> Matrix2<Complex64> {
    let (s, co) = alpha.sin_cos();
    Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

fn retarder(alpha: f64, half_retardance: f64) -> Matrix2<Complex64> {
    let e = Complex64::from_polar(1.0, half_retardance);
    let diag = Matrix2::new(e.conj(), c(0.0, 0.0), c(0.0, 0.0), e);
    rotation(alpha) * diag * rotation(-alpha)
}

/// Jones matrix `R(α) diag(e^{−iπ/4}, e^{iπ/4}) R(−α)`.
pub fn quarter_wave_plate(alpha: f64) -> Matrix2<Complex64> {
    retarder(alpha, FRAC_PI_4)
}

/// Jones matrix `R(α) diag(−i, i) R(−α)`.
pub fn half_wave_plate(alpha: f64) -> Matrix2<Complex64> {
    retarder(alpha, FRAC_PI_2)
}

/// Gadget matrix realized by the plates.
///
/// Light passes QP1, QP2 and then HP, so the field propagates with
/// `J = HWP·QWP2·QWP1`. The gadget matrix acts on annihilation operators in
/// the Heisenberg picture and is `J†`. Order and adjoint were calibrated
/// against the reference N = 2 settings table; the result equals
/// `gadget_unitary` up to a global phase.
pub fn compose_plate_unitary(plates: &PlateAngles) -> Matrix2<Complex64> {
    let jones = half_wave_plate(plates.hp) * quarter_wave_plate(plates.qp2) * quarter_wave_plate(plates.qp1);
    jones.adjoint()
}

/// Distance between two matrices after removing the best global phase.
pub fn phase_aligned_distance(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
    let overlap: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm()).fold(0.0, f64::max)
}

/// Distance between two matrices up to a global sign.
pub fn sign_aligned_distance(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
    let plus = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let minus = (a + b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    plus.min(minus)
}

/// One row of the reference N = 2 settings table: computed values next to
/// the published ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub theta_label: &'static str,
    pub phi_label: &'static str,
    pub setting: MeasurementSetting,
    pub euler: EulerAngles,
    pub plates: PlateAngles,
    pub printed_euler: EulerAngles,
    pub printed_plates: PlateAngles,
    /// [`EulerAngles::distance`] between computed and printed triples.
    pub euler_deviation: f64,
    /// [`PlateAngles::distance`] between computed and printed plates.
    pub plates_deviation: f64,
    /// Euler angles solved back from the printed plate angles.
    pub euler_from_printed_plates: EulerAngles,
    pub note: Option<&'static str>,
}

const THETAS: [(&str, f64); 3] = [("π/8", PI / 8.0), ("π/4", PI / 4.0), ("3π/8", 3.0 * PI / 8.0)];
const PHIS: [(&str, f64); 3] = [("2π/3", 2.0 * PI / 3.0), ("4π/3", 4.0 * PI / 3.0), ("2π", TAU)];

// Published (ξ, η, ζ, QP1, QP2, HP), rows ordered by φ and then θ.
const PRINTED: [[f64; 6]; 9] = [
    [1.775, 0.676, 4.197, 1.673, 2.011, 0.169],
    [2.034, 1.318, 5.176, 1.802, 2.461, 0.329],
    [-3.833, 1.855, -0.692, 2.010, 2.938, 0.464],
    [4.917, 0.676, 1.775, 0.102, 0.440, 1.740],
    [-1.107, 1.318, -4.249, 0.232, 0.891, 1.900],
    [5.591, 1.855, 2.450, 0.439, 1.367, 2.034],
    [0.0, 0.0, -PI / 4.0, PI / 4.0, PI / 4.0, 13.0 * PI / 16.0],
    [0.0, 0.0, -PI / 2.0, PI / 4.0, PI / 4.0, 7.0 * PI / 8.0],
    [0.0, 0.0, -3.0 * PI / 4.0, PI / 4.0, PI / 4.0, 15.0 * PI / 16.0],
];

const ROW1_NOTE: &str =
    "printed zeta 4.197 does not reproduce the printed plate angles; zeta 4.917 does (digit transposition)";

/// The nine settings `θ ∈ {π/8, π/4, 3π/8} × φ ∈ {2π/3, 4π/3, 2π}` with
/// Euler and plate angles.
pub fn table1() -> Vec<TableRow> {
    let mut rows = Vec::with_capacity(9);
    for (pi_idx, &(phi_label, phi)) in PHIS.iter().enumerate() {
        for (ti_idx, &(theta_label, theta)) in THETAS.iter().enumerate() {
            let p = PRINTED[3 * pi_idx + ti_idx];
            let setting = MeasurementSetting::new(theta, phi);
            let euler = euler_from_setting(&setting);
            let plates = plate_angles_from_euler(&euler);
            let printed_euler = EulerAngles::new(p[0], p[1], p[2]);
            let printed_plates = PlateAngles::new(p[3], p[4], p[5]);
            let euler_deviation = euler.distance(&printed_euler);
            let note = (euler_deviation > 5e-3).then_some(ROW1_NOTE);
            rows.push(TableRow {
                theta_label,
                phi_label,
                setting,
                euler,
                plates,
                printed_euler,
                printed_plates,
                euler_deviation,
                plates_deviation: plates.distance(&printed_plates),
                euler_from_printed_plates: euler_from_plate_angles(&printed_plates),
                note,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn unitary_read_off() {
        let id = gadget_unitary(&MeasurementSetting::new(0.0, 1.234));
        assert!((id - Matrix2::identity()).iter().all(|z| z.norm() < 1e-15));

        let swap = gadget_unitary(&MeasurementSetting::new(FRAC_PI_2, 0.0));
        let expect = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0));
        assert!((swap - expect).iter().all(|z| z.norm() < 1e-15));

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u = gadget_unitary(&MeasurementSetting::new(FRAC_PI_4, FRAC_PI_2));
        let expect = Matrix2::new(c(r, 0.0), c(0.0, r), c(0.0, r), c(r, 0.0));
        assert!((u - expect).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn setting_reduction() {
        let s = MeasurementSetting::new(0.3, -FRAC_PI_2);
        assert!(close(s.phi(), 1.5 * PI, 1e-15));
        let s = MeasurementSetting::new(-0.3, 0.2);
        assert!(close(s.theta(), 0.3, 1e-15) && close(s.phi(), 0.2 + PI, 1e-15));
        let s = MeasurementSetting::new(TAU, TAU);
        assert_eq!((s.theta(), s.phi()), (0.0, 0.0));
        for (theta, phi) in [(2.0, 0.4), (-2.5, 5.0), (7.0, -9.0), (3.5, 1.0)] {
            let raw = {
                let (s, co) = f64::sin_cos(theta);
                let e = Complex64::from_polar(1.0, phi);
                Matrix2::new(c(co, 0.0), e * s, -e.conj() * s, c(co, 0.0))
            };
            let reduced = MeasurementSetting::new(theta, phi);
            assert!((0.0..=FRAC_PI_2).contains(&reduced.theta()));
            assert!(sign_aligned_distance(&raw, &gadget_unitary(&reduced)) < 1e-14);
        }
    }

    #[test]
    fn euler_examples() {
        let e = euler_from_setting(&MeasurementSetting::new(FRAC_PI_4, 2.0 * PI / 3.0));
        assert!(e.distance(&EulerAngles::new(2.034, 1.318, 5.176)) < 5e-4, "{e:?}");

        let e = euler_from_setting(&MeasurementSetting::new(PI / 8.0, 0.0));
        assert_eq!(e.xi, 0.0);
        assert_eq!(e.eta, 0.0);
        assert!(close(e.zeta, -PI / 4.0, 1e-15));

        let e = euler_from_setting(&MeasurementSetting::new(PI / 8.0, PI));
        assert!(close(e.zeta, PI / 4.0, 1e-15));
    }

    #[test]
    fn degenerate_axis_branch() {
        let s = MeasurementSetting::new(FRAC_PI_2, FRAC_PI_2);
        let e = euler_from_setting(&s);
        assert!(close(e.eta, PI, 1e-15));
        assert!(sign_aligned_distance(&e.unitary(), &gadget_unitary(&s)) < 1e-12);
        // The (0, 0, 2φ) choice offered for this case realizes U(π/2, 0)
        // instead, so it cannot be used.
        let printed = EulerAngles::new(0.0, 0.0, PI);
        assert!(phase_aligned_distance(&printed.unitary(), &gadget_unitary(&s)) > 0.5);
        assert!(
            sign_aligned_distance(&printed.unitary(), &gadget_unitary(&MeasurementSetting::new(FRAC_PI_2, 0.0)))
                < 1e-15
        );
    }

    #[test]
    fn plate_examples() {
        let p = plate_angles_from_euler(&EulerAngles::new(2.034, 1.318, 5.176));
        assert!(p.distance(&PlateAngles::new(1.802, 2.461, 0.329)) < 1e-3, "{p:?}");

        let p = plate_angles_from_euler(&EulerAngles::new(0.0, 0.0, -PI / 4.0));
        assert!(close(p.qp1, FRAC_PI_4, 1e-15) && close(p.qp2, FRAC_PI_4, 1e-15));
        assert!(close(p.hp, 5.0 * PI / 16.0, 1e-15));
        assert!(p.distance(&PlateAngles::new(FRAC_PI_4, FRAC_PI_4, 13.0 * PI / 16.0)) < 1e-15);

        let p = plate_angles_from_euler(&EulerAngles::new(0.0, 0.0, 0.0));
        assert!(close(p.qp1, FRAC_PI_4, 1e-15) && close(p.qp2, FRAC_PI_4, 1e-15) && close(p.hp, FRAC_PI_4, 1e-15));
    }

    #[test]
    fn plates_reproduce_gadget() {
        let id =
            compose_plate_unitary(&plate_angles_from_euler(&euler_from_setting(&MeasurementSetting::new(0.0, 0.0))));
        assert!(phase_aligned_distance(&id, &Matrix2::identity()) < 1e-12);
        for row in table1() {
            let u = compose_plate_unitary(&row.plates);
            assert!(phase_aligned_distance(&u, &gadget_unitary(&row.setting)) < 1e-9);
        }
    }

    #[test]
    fn plate_periods_are_global_phases() {
        let p = PlateAngles::new(0.3, 1.1, 0.7);
        let base = compose_plate_unitary(&p);
        for shifted in [
            PlateAngles::new(0.3 + PI, 1.1, 0.7),
            PlateAngles::new(0.3, 1.1 - PI, 0.7),
            PlateAngles::new(0.3, 1.1, 0.7 + FRAC_PI_2),
        ] {
            assert!(phase_aligned_distance(&compose_plate_unitary(&shifted), &base) < 1e-10);
        }
        assert_eq!(p.normalized().normalized(), p.normalized());
    }

    #[test]
    fn table_rows() {
        let rows = table1();
        assert_eq!(rows.len(), 9);
        let r3 = &rows[2];
        assert_eq!((r3.theta_label, r3.phi_label), ("3π/8", "2π/3"));
        assert!(r3.euler_deviation < 5e-3 && r3.plates_deviation < 5e-3);
        let r5 = &rows[4];
        assert_eq!((r5.theta_label, r5.phi_label), ("π/4", "4π/3"));
        assert!(r5.euler.distance(&EulerAngles::new(-1.107, 1.318, -4.249)) < 5e-3);
        assert!(r5.plates.distance(&PlateAngles::new(0.232, 0.891, 1.900)) < 5e-3);

        let r1 = &rows[0];
        assert!(r1.note.is_some());
        assert!(r1.plates_deviation < 5e-3);
        assert!(angle_distance(r1.euler.zeta, 4.917) < 5e-3);
        assert!(angle_distance(r1.euler_from_printed_plates.zeta, 4.917) < 5e-3);
        assert!(angle_distance(r1.printed_euler.zeta, 4.917) > 0.5);
        assert!(rows[1..].iter().all(|r| r.note.is_none()));
    }
}
