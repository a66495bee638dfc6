//! Complex arithmetic and two-port algebra.
//!
//! Every lumped network in the crate is assembled as a chain of series and
//! shunt elements in ABCD form and converted to S-parameters at a real
//! reference impedance only at the end.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Impedance in ohms.
pub type Impedance = Complex;

/// Admittance in siemens.
pub type Admittance = Complex;

/// Reference impedance of every port in the bench setups.
pub const Z0: f64 = 50.0;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

pub(crate) fn finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Strictly positive frequency in hertz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(hertz: f64) -> Result<Self> {
        if !hertz.is_finite() {
            return Err(Error::NonFinite("frequency"));
        }
        if hertz <= 0.0 {
            return Err(Error::invalid(format!("frequency must be positive, got {hertz} Hz")));
        }
        Ok(Self(hertz))
    }

    pub fn mhz(mhz: f64) -> Result<Self> {
        Self::new(mhz * 1e6)
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    /// Angular frequency in rad/s.
    pub fn omega(self) -> f64 {
        2.0 * PI * self.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6} MHz", self.0 / 1e6)
    }
}

/// Chain matrix `[[a, b], [c, d]]`; `b` in ohms, `c` in siemens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl Abcd {
    pub const IDENTITY: Abcd = Abcd { a: ONE, b: ZERO, c: ZERO, d: ONE };

    pub fn determinant(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn is_finite(&self) -> bool {
        finite(self.a) && finite(self.b) && finite(self.c) && finite(self.d)
    }

    /// Impedance seen at port 1 with `load` across port 2.
    pub fn input_impedance(&self, load: Impedance) -> Result<Impedance> {
        let den = self.c * load + self.d;
        if den.norm() == 0.0 {
            return Err(Error::DegenerateNetwork("input impedance has a pole"));
        }
        let z = (self.a * load + self.b) / den;
        if !finite(z) {
            return Err(Error::NonFinite("input impedance"));
        }
        Ok(z)
    }

    /// Follows `self` with `next` (matrix product `self * next`).
    pub fn then(&self, next: &Abcd) -> Abcd {
        Abcd {
            a: self.a * next.a + self.b * next.c,
            b: self.a * next.b + self.b * next.d,
            c: self.c * next.a + self.d * next.c,
            d: self.c * next.b + self.d * next.d,
        }
    }
}

/// Two-port scattering parameters at a real reference impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParams {
    pub s11: Complex,
    pub s21: Complex,
    pub s12: Complex,
    pub s22: Complex,
    pub z0: f64,
}

impl SParams {
    /// Fraction of incident power absorbed inside the network when driven
    /// from port 1 with port 2 matched.
    pub fn absorbed_fraction(&self) -> f64 {
        1.0 - self.s11.norm_sqr() - self.s21.norm_sqr()
    }
}

pub fn series_element(z: Impedance) -> Result<Abcd> {
    if !finite(z) {
        return Err(Error::NonFinite("series impedance"));
    }
    Ok(Abcd { a: ONE, b: z, c: ZERO, d: ONE })
}

pub fn shunt_element(y: Admittance) -> Result<Abcd> {
    if !finite(y) {
        return Err(Error::NonFinite("shunt admittance"));
    }
    Ok(Abcd { a: ONE, b: ZERO, c: y, d: ONE })
}

pub fn cascade(left: &Abcd, right: &Abcd) -> Result<Abcd> {
    if !left.is_finite() || !right.is_finite() {
        return Err(Error::NonFinite("cascade operand"));
    }
    let m = left.then(right);
    if !m.is_finite() {
        return Err(Error::NonFinite("cascade product"));
    }
    Ok(m)
}

/// Cascades a chain of elements from port 1 to port 2.
pub fn cascade_all<'a, I>(chain: I) -> Result<Abcd>
where
    I: IntoIterator<Item = &'a Abcd>,
{
    chain.into_iter().try_fold(Abcd::IDENTITY, |acc, m| cascade(&acc, m))
}

pub fn abcd_to_s(m: &Abcd, z0: f64) -> Result<SParams> {
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(Error::invalid(format!("reference impedance must be positive, got {z0}")));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("ABCD matrix"));
    }
    let b = m.b / z0;
    let c = m.c * z0;
    let den = m.a + b + c + m.d;
    if den.norm() == 0.0 || !finite(den) {
        return Err(Error::DegenerateNetwork("ABCD to S denominator is zero"));
    }
    Ok(SParams {
        s11: (m.a + b - c - m.d) / den,
        s21: Complex::new(2.0, 0.0) / den,
        s12: 2.0 * m.determinant() / den,
        s22: (-m.a + b - c + m.d) / den,
        z0,
    })
}

pub fn gamma_from_z(z: Impedance, z0: f64) -> Result<Complex> {
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(Error::invalid(format!("reference impedance must be positive, got {z0}")));
    }
    if !finite(z) {
        return Err(Error::NonFinite("load impedance"));
    }
    let den = z + z0;
    if den.norm() == 0.0 {
        return Err(Error::ReflectionPole);
    }
    Ok((z - z0) / den)
}

/// `20 log10 |x|`. A zero magnitude maps to `f64::NEG_INFINITY`, which
/// callers must treat as an explicit sentinel.
pub fn magnitude_db(x: Complex) -> f64 {
    let m = x.norm();
    if m == 0.0 {
        f64::NEG_INFINITY
    } else {
        20.0 * m.log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn series_zero_is_identity() {
        assert_eq!(series_element(ZERO).unwrap(), Abcd::IDENTITY);
        let m = series_element(c(0.0, 100.0)).unwrap();
        assert_eq!(m.b, c(0.0, 100.0));
        assert_eq!(m.a, ONE);
        assert_eq!(m.d, ONE);
        assert_eq!(m.c, ZERO);
    }

    #[test]
    fn shunt_capacitor_admittance() {
        assert_eq!(shunt_element(ZERO).unwrap(), Abcd::IDENTITY);
        let f = Frequency::mhz(298.0).unwrap();
        let m = shunt_element(c(0.0, f.omega() * 10e-12)).unwrap();
        // 2*pi*298e6*10e-12 evaluated by hand
        assert_relative_eq!(m.c.im, 0.018_723_89, max_relative = 1e-6);
        assert_eq!(shunt_element(c(0.02, 0.0)).unwrap().c, c(0.02, 0.0));
    }

    #[test]
    fn non_finite_elements_rejected() {
        assert!(series_element(c(f64::NAN, 0.0)).is_err());
        assert!(shunt_element(c(0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn series_impedances_add() {
        let m1 = series_element(c(3.0, 4.0)).unwrap();
        let m2 = series_element(c(-1.0, 7.5)).unwrap();
        let m = cascade(&m1, &m2).unwrap();
        assert_eq!(m, series_element(c(2.0, 11.5)).unwrap());
        assert_eq!(cascade(&Abcd::IDENTITY, &m).unwrap(), m);
    }

    #[test]
    fn matched_through() {
        let s = abcd_to_s(&Abcd::IDENTITY, Z0).unwrap();
        assert_relative_eq!(s.s21.re, 1.0);
        assert_relative_eq!(s.s11.norm(), 0.0);
    }

    #[test]
    fn series_resistor_insertion_loss() {
        for (r, db) in [(1.742, -0.150), (2.920, -0.250)] {
            let s = abcd_to_s(&series_element(c(r, 0.0)).unwrap(), Z0).unwrap();
            let closed = 2.0 * Z0 / (2.0 * Z0 + r);
            assert_relative_eq!(s.s21.norm(), closed, max_relative = 1e-12);
            assert!((magnitude_db(s.s21) - db).abs() < 1e-3);
        }
        let s = abcd_to_s(&series_element(c(1.742, 0.0)).unwrap(), Z0).unwrap();
        assert_relative_eq!(s.s21.norm(), 0.982_878, max_relative = 1e-5);
    }

    #[test]
    fn zero_denominator_is_degenerate() {
        // a + b/z0 + c z0 + d = 0
        let m = Abcd { a: ONE, b: c(-100.0, 0.0), c: ZERO, d: ONE };
        assert!(matches!(abcd_to_s(&m, Z0), Err(Error::DegenerateNetwork(_))));
        assert!(abcd_to_s(&Abcd::IDENTITY, 0.0).is_err());
    }

    #[test]
    fn reflection_coefficients() {
        assert_relative_eq!(gamma_from_z(c(50.0, 0.0), Z0).unwrap().norm(), 0.0);
        assert_relative_eq!(gamma_from_z(ZERO, Z0).unwrap().re, -1.0);
        let g = gamma_from_z(c(32.0, 259.2), Z0).unwrap();
        // |(-18 + j259.2)| / |(82 + j259.2)|
        let expect = (18.0f64.powi(2) + 259.2f64.powi(2)).sqrt() / (82.0f64.powi(2) + 259.2f64.powi(2)).sqrt();
        assert_relative_eq!(g.norm(), expect, max_relative = 1e-12);
        assert!((g.norm() - 0.9557).abs() < 5e-4);
        assert_eq!(gamma_from_z(c(-50.0, 0.0), Z0), Err(Error::ReflectionPole));
    }

    #[test]
    fn decibels() {
        assert_eq!(magnitude_db(ONE), 0.0);
        assert!((magnitude_db(c(0.98288, 0.0)) + 0.150).abs() < 1e-3);
        assert!((magnitude_db(c(0.017783, 0.0)) + 35.0).abs() < 1e-3);
        assert_eq!(magnitude_db(ZERO), f64::NEG_INFINITY);
    }

    #[test]
    fn loaded_s11_matches_gamma_of_input_impedance() {
        let f = Frequency::mhz(300.0).unwrap();
        let chain = [
            series_element(c(0.0, -1.0 / (f.omega() * 6e-12))).unwrap(),
            shunt_element(c(0.0, f.omega() * 10e-12)).unwrap(),
        ];
        let m = cascade_all(chain.iter()).unwrap();
        let load = c(32.0, 259.2);
        let zin = m.input_impedance(load).unwrap();
        let terminated = cascade(&m, &shunt_element(1.0 / load).unwrap()).unwrap();
        // port 2 left open: z = a / c
        let with_load = terminated.a / terminated.c;
        let g1 = gamma_from_z(zin, Z0).unwrap();
        let g2 = gamma_from_z(with_load, Z0).unwrap();
        assert!((g1 - g2).norm() < 1e-9);
    }

    #[test]
    fn frequency_validation() {
        assert!(Frequency::new(0.0).is_err());
        assert!(Frequency::new(-1.0).is_err());
        assert!(Frequency::new(f64::NAN).is_err());
        assert_eq!(Frequency::mhz(300.0).unwrap().hz(), 300e6);
    }
}
