//! Linearized Hermitian fluctuation operators.
//!
//! An operator is stored as a sparse map from vacuum input mode to a single
//! complex weight `w_j`, and stands for
//!
//! ```text
//! X = sum_j ( w_j da_j + conj(w_j) da_j^dagger )
//! ```
//!
//! so Hermiticity holds by construction. Every mode is an independent vacuum
//! with `<da da^dagger> = 1`, which makes the variance `sum_j |w_j|^2` and the
//! variance of a single quadrature equal to [`VACUUM_VARIANCE`].
//!
//! The Bogoliubov maps work in the Heisenberg picture: an operator written in
//! terms of the squeezed output modes is rewritten in terms of the vacuum
//! modes that fed the squeezer.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{finite, Error, Result};

/// Variance of any single vacuum quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Label of an independent vacuum input mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId(pub u32);

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

impl From<u32> for ModeId {
    fn from(index: u32) -> Self {
        ModeId(index)
    }
}

/// Squeezing strength. Negative values give the inverse transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParam(f64);

impl SqueezeParam {
    pub fn new(r: f64) -> Result<Self> {
        finite("r", r).map(SqueezeParam)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0.0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FluctuationOperator {
    coefficients: BTreeMap<ModeId, Complex64>,
}

impl FluctuationOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds an operator from raw weights. Exact zeros are dropped.
    pub fn from_coefficients<I>(coefficients: I) -> Self
    where
        I: IntoIterator<Item = (ModeId, Complex64)>,
    {
        let mut op = Self::zero();
        for (mode, w) in coefficients {
            op.accumulate(mode, w);
        }
        op
    }

    /// Generalized quadrature `(da e^{-i theta} + da^dagger e^{i theta}) / sqrt 2`.
    /// `theta = 0` is the amplitude quadrature, `theta = pi/2` the phase quadrature.
    pub fn quadrature(mode: ModeId, theta: f64) -> Self {
        let w = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -theta);
        Self::from_coefficients([(mode, w)])
    }

    pub fn coefficient(&self, mode: ModeId) -> Complex64 {
        self.coefficients.get(&mode).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeId, Complex64)> + '_ {
        self.coefficients.iter().map(|(&m, &w)| (m, w))
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeId> + '_ {
        self.coefficients.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    fn accumulate(&mut self, mode: ModeId, w: Complex64) {
        let entry = self.coefficients.entry(mode).or_default();
        *entry += w;
        if *entry == Complex64::new(0.0, 0.0) {
            self.coefficients.remove(&mode);
        }
    }

    fn set(&mut self, mode: ModeId, w: Complex64) {
        if w == Complex64::new(0.0, 0.0) {
            self.coefficients.remove(&mode);
        } else {
            self.coefficients.insert(mode, w);
        }
    }

    /// Real-weighted sum of operators.
    pub fn linear_combine<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a FluctuationOperator)>,
    {
        let mut out = Self::zero();
        for (a, op) in terms {
            for (mode, w) in op.iter() {
                out.accumulate(mode, w * a);
            }
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_coefficients(self.iter().map(|(m, w)| (m, w * a)))
    }

    /// Vacuum expectation `<X^2>`.
    pub fn variance(&self) -> f64 {
        self.coefficients.values().map(|w| w.norm_sqr()).sum()
    }

    /// Symmetrized vacuum covariance `<XY + YX>/2`.
    pub fn covariance(&self, other: &FluctuationOperator) -> f64 {
        self.iter()
            .map(|(mode, w)| (w * other.coefficient(mode).conj()).re)
            .sum()
    }

    /// Substitutes the two-mode squeezed pair
    /// `b1 = cosh r a1 + sinh r a2^dagger`, `b2 = cosh r a2 + sinh r a1^dagger`
    /// for the pair's modes.
    pub fn two_mode_squeeze(&self, pair: (ModeId, ModeId), r: SqueezeParam) -> Result<Self> {
        let (m1, m2) = pair;
        if m1 == m2 {
            return Err(Error::InvalidPair(m1));
        }
        if r.is_identity() {
            return Ok(self.clone());
        }
        let (c, s) = (r.value().cosh(), r.value().sinh());
        let w1 = self.coefficient(m1);
        let w2 = self.coefficient(m2);
        let mut out = self.clone();
        out.set(m1, w1 * c + w2.conj() * s);
        out.set(m2, w2 * c + w1.conj() * s);
        Ok(out)
    }

    /// Substitutes `b = cosh r a + e^{i psi} sinh r a^dagger` for one mode.
    /// `psi = pi` squeezes the amplitude quadrature.
    pub fn single_mode_squeeze(&self, mode: ModeId, r: SqueezeParam, psi: f64) -> Self {
        if r.is_identity() {
            return self.clone();
        }
        let w = self.coefficient(mode);
        let mut out = self.clone();
        let rotated = Complex64::from_polar(r.value().sinh(), -psi);
        out.set(mode, w * r.value().cosh() + w.conj() * rotated);
        out
    }

    /// Maps `quadrature(mode, theta)` onto `quadrature(mode, theta + phi)`.
    pub fn phase_shift(&self, mode: ModeId, phi: f64) -> Self {
        let mut out = self.clone();
        if let Some(w) = out.coefficients.get_mut(&mode) {
            *w *= Complex64::from_polar(1.0, -phi);
        }
        out
    }
}

impl Add for &FluctuationOperator {
    type Output = FluctuationOperator;

    fn add(self, rhs: &FluctuationOperator) -> FluctuationOperator {
        FluctuationOperator::linear_combine([(1.0, self), (1.0, rhs)])
    }
}

impl Sub for &FluctuationOperator {
    type Output = FluctuationOperator;

    fn sub(self, rhs: &FluctuationOperator) -> FluctuationOperator {
        FluctuationOperator::linear_combine([(1.0, self), (-1.0, rhs)])
    }
}

impl Neg for &FluctuationOperator {
    type Output = FluctuationOperator;

    fn neg(self) -> FluctuationOperator {
        self.scaled(-1.0)
    }
}

impl Mul<&FluctuationOperator> for f64 {
    type Output = FluctuationOperator;

    fn mul(self, rhs: &FluctuationOperator) -> FluctuationOperator {
        rhs.scaled(self)
    }
}
