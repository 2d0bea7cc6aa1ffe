//! Coupling of a signal mode to a reservoir of vacuum modes.
//!
//! The amplitudes `(a, v_1 .. v_N)` obey `d/dt x = C x` with the arrow-shaped
//! antisymmetric matrix
//!
//! ```text
//!       [  0    k_1  ...  k_N ]
//!   C = [ -k_1   0   ...   0  ]
//!       [  ...              ...]
//!       [ -k_N   0   ...   0  ]
//! ```
//!
//! Only the signal and the supermode `V = sum_j (k_j / g) v_j`, with
//! `g = |k|`, evolve: they rotate into each other at rate `g`. Every other
//! reservoir combination is a constant of motion, and the propagator is
//! orthogonal, which is the conservation of total photon number.
//!
//! A cavity leaking through a weak mirror is the same rotation applied once
//! per round trip against fresh vacuum; see [`BounceChannel`].

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::error::{finite, non_negative, Error, Result};
use crate::fluctuation::VACUUM_VARIANCE;

/// Largest reservoir for which dense propagators are built.
pub const MAX_DENSE_MODES: usize = 4096;

/// Upper bound on `dt * g` accepted by [`integrate_propagator`].
pub const MAX_STEP_PHASE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSystem {
    kappas: DVector<f64>,
    g: f64,
}

impl ReservoirSystem {
    pub fn new(kappas: Vec<f64>) -> Result<Self> {
        if kappas.is_empty() {
            return Err(Error::OutOfRange {
                name: "kappas",
                reason: "reservoir needs at least one mode".into(),
            });
        }
        for &k in &kappas {
            finite("kappa", k)?;
        }
        let kappas = DVector::from_vec(kappas);
        // scaled by the largest rate so uniform couplings give g = kappa sqrt(N) exactly
        let peak = kappas.amax();
        let g = if peak == 0.0 {
            0.0
        } else {
            peak * kappas
                .iter()
                .map(|k| (k / peak).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        Ok(ReservoirSystem { kappas, g })
    }

    /// `n` modes all coupled at rate `kappa`.
    pub fn uniform(kappa: f64, n: usize) -> Result<Self> {
        Self::new(vec![kappa; n])
    }

    pub fn len(&self) -> usize {
        self.kappas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappas.is_empty()
    }

    pub fn kappas(&self) -> &DVector<f64> {
        &self.kappas
    }

    /// Collective coupling rate `sqrt(sum k_j^2)`.
    pub fn g(&self) -> f64 {
        self.g
    }

    /// Unit vector `k / g` over the reservoir modes, or `None` when
    /// nothing couples.
    pub fn supermode(&self) -> Option<DVector<f64>> {
        (self.g > 0.0).then(|| &self.kappas / self.g)
    }
}

/// Beamsplitter rotation mixing the signal with a single vacuum mode.
pub fn single_bounce(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub fn coupling_matrix(sys: &ReservoirSystem) -> DMatrix<f64> {
    let n = sys.len() + 1;
    let mut m = DMatrix::zeros(n, n);
    for (j, &k) in sys.kappas.iter().enumerate() {
        m[(0, j + 1)] = k;
        m[(j + 1, 0)] = -k;
    }
    m
}

/// Mode-amplitude propagator over `(a, v_1 .. v_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator(DMatrix<f64>);

impl Propagator {
    pub fn identity(dim: usize) -> Self {
        Propagator(DMatrix::identity(dim, dim))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn apply(&self, amplitudes: &DVector<f64>) -> DVector<f64> {
        &self.0 * amplitudes
    }

    /// `max |M^T M - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.0.nrows();
        let gram = self.0.transpose() * &self.0;
        (gram - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// Largest entrywise difference to another propagator of the same size.
    pub fn max_deviation(&self, other: &Propagator) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

fn check_dense(sys: &ReservoirSystem) -> Result<()> {
    if sys.len() > MAX_DENSE_MODES {
        return Err(Error::ReservoirTooLarge(sys.len()));
    }
    Ok(())
}

/// `C * M` for the arrow-shaped coupling matrix, in O(N^2).
fn apply_coupling(kappas: &DVector<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (src, mut dst) in m.column_iter().zip(out.column_iter_mut()) {
        let signal = src[0];
        let mut head = 0.0;
        for (j, &k) in kappas.iter().enumerate() {
            head += k * src[j + 1];
            dst[j + 1] = -k * signal;
        }
        dst[0] = head;
    }
    out
}

/// Integrates `d/dt M = C M` from the identity with classical fourth-order
/// Runge-Kutta. The step is shortened so that a whole number of steps ends
/// exactly at `t`.
pub fn integrate_propagator(sys: &ReservoirSystem, t: f64, dt: f64) -> Result<Propagator> {
    check_dense(sys)?;
    non_negative("t", t)?;
    finite("dt", dt)?;
    if dt <= 0.0 {
        return Err(Error::OutOfRange {
            name: "dt",
            reason: format!("expected > 0, got {dt}"),
        });
    }
    let g = sys.g();
    if dt * g > MAX_STEP_PHASE {
        return Err(Error::StepTooLarge {
            dt,
            g,
            bound: MAX_STEP_PHASE,
        });
    }
    let n = sys.len() + 1;
    let mut m = DMatrix::<f64>::identity(n, n);
    if t == 0.0 {
        return Ok(Propagator(m));
    }
    let steps = (t / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let k = &sys.kappas;
    for _ in 0..steps {
        let k1 = apply_coupling(k, &m);
        let k2 = apply_coupling(k, &(&m + &k1 * (h / 2.0)));
        let k3 = apply_coupling(k, &(&m + &k2 * (h / 2.0)));
        let k4 = apply_coupling(k, &(&m + &k3 * h));
        m += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(Propagator(m))
}

/// Exact propagator: a rotation by `g t` in the plane of the signal axis and
/// the supermode, identity on the orthogonal complement. Returns the
/// identity when no mode couples.
pub fn analytic_propagator(sys: &ReservoirSystem, t: f64) -> Result<Propagator> {
    check_dense(sys)?;
    finite("t", t)?;
    let n = sys.len() + 1;
    let mut m = DMatrix::<f64>::identity(n, n);
    let Some(u) = sys.supermode() else {
        return Ok(Propagator(m));
    };
    let (s, c) = (sys.g() * t).sin_cos();
    // M = I + (c - 1)(e0 e0^T + u u^T) + s (e0 u^T - u e0^T)
    m[(0, 0)] = c;
    for i in 0..u.len() {
        m[(0, i + 1)] = s * u[i];
        m[(i + 1, 0)] = -s * u[i];
        for j in 0..u.len() {
            m[(i + 1, j + 1)] += (c - 1.0) * u[i] * u[j];
        }
    }
    Ok(Propagator(m))
}

/// Cavity output coupling as a weak beamsplitter hit once per round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BounceChannel {
    theta: f64,
    tau: f64,
}

impl BounceChannel {
    /// `theta` is the per-bounce mixing angle in `[0, pi/2)`, `tau` the round
    /// trip time in seconds.
    pub fn new(theta: f64, tau: f64) -> Result<Self> {
        finite("theta", theta)?;
        finite("tau", tau)?;
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                reason: format!("expected 0 <= theta < pi/2, got {theta}"),
            });
        }
        if tau <= 0.0 {
            return Err(Error::OutOfRange {
                name: "tau",
                reason: format!("expected > 0, got {tau}"),
            });
        }
        Ok(BounceChannel { theta, tau })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn transmission(&self) -> f64 {
        self.theta.cos()
    }

    /// Energy decay rate `-2 ln(cos theta) / tau`.
    pub fn gamma(&self) -> f64 {
        -2.0 * self.theta.cos().ln() / self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BounceOutcome {
    pub amplitude_factor: f64,
    pub variance: f64,
}

/// Quadrature statistics after `m` bounces, each replacing a fraction
/// `sin^2 theta` of the field with fresh vacuum.
pub fn iterated_bounce(channel: &BounceChannel, m: u32, input_variance: f64) -> BounceOutcome {
    let c = channel.transmission();
    let amplitude_factor = c.powi(m as i32);
    let kept = amplitude_factor * amplitude_factor;
    BounceOutcome {
        amplitude_factor,
        variance: VACUUM_VARIANCE + (input_variance - VACUUM_VARIANCE) * kept,
    }
}
