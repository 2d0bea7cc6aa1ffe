//! The two-beamsplitter network.
//!
//! Two independent twin-beam pairs `(b1, b2)` and `(b3, b4)` meet at two 50%
//! beamsplitters: `b1` with `b4`, `b2` with `b3`. One output of each
//! beamsplitter is detected:
//!
//! ```text
//! c1 = (b1 e^{i phi1} + b4 e^{i phi4}) / sqrt 2
//! c2 = (b2 e^{i phi2} + b3 e^{i phi3}) / sqrt 2
//! ```
//!
//! and the observable is the linearized photon-number difference
//! `d(N1 - N2)`. Mode `b_k` is generated from vacuum input `a_k`, labelled
//! `ModeId(k)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{finite, non_negative, Error, Result};
use crate::fluctuation::{FluctuationOperator, ModeId, SqueezeParam};

pub const MODE_B1: ModeId = ModeId(1);
pub const MODE_B2: ModeId = ModeId(2);
pub const MODE_B3: ModeId = ModeId(3);
pub const MODE_B4: ModeId = ModeId(4);

/// Relative shot-noise floor below which a squeezing ratio is not reported.
pub const SHOT_NOISE_GUARD: f64 = 1e-9;

/// Squeezing angle used for local amplitude squeezing.
pub const AMPLITUDE_SQUEEZE_ANGLE: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    Epr,
    SingleModeAmplitudeSqueezed,
    Vacuum,
}

impl InputKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InputKind::Epr => "epr",
            InputKind::SingleModeAmplitudeSqueezed => "single_mode",
            InputKind::Vacuum => "vacuum",
        }
    }
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "epr" => Ok(InputKind::Epr),
            "single_mode" | "single_mode_amplitude_squeezed" => {
                Ok(InputKind::SingleModeAmplitudeSqueezed)
            }
            "vacuum" => Ok(InputKind::Vacuum),
            other => Err(format!(
                "unknown input kind `{other}` (expected epr, single_mode or vacuum)"
            )),
        }
    }
}

/// One twin-beam source: its kind, squeezing parameter and the common mean
/// amplitude of both of its beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSource {
    kind: InputKind,
    squeeze: f64,
    amplitude: f64,
}

impl PairSource {
    /// A vacuum source carries neither squeezing nor a mean field, so both
    /// are forced to zero for [`InputKind::Vacuum`].
    pub fn new(kind: InputKind, squeeze: f64, amplitude: f64) -> Result<Self> {
        let squeeze = non_negative("squeeze", squeeze)?;
        let amplitude = non_negative("beta", amplitude)?;
        Ok(match kind {
            InputKind::Vacuum => PairSource::vacuum(),
            _ => PairSource {
                kind,
                squeeze,
                amplitude,
            },
        })
    }

    pub fn epr(squeeze: f64, amplitude: f64) -> Result<Self> {
        Self::new(InputKind::Epr, squeeze, amplitude)
    }

    pub fn single_mode(squeeze: f64, amplitude: f64) -> Result<Self> {
        Self::new(InputKind::SingleModeAmplitudeSqueezed, squeeze, amplitude)
    }

    pub fn vacuum() -> Self {
        PairSource {
            kind: InputKind::Vacuum,
            squeeze: 0.0,
            amplitude: 0.0,
        }
    }

    pub fn kind(&self) -> InputKind {
        self.kind
    }

    pub fn squeeze(&self) -> f64 {
        self.squeeze
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    fn with_squeeze(&self, squeeze: f64) -> Result<Self> {
        Self::new(self.kind, squeeze, self.amplitude)
    }

    /// Rewrites an operator over the pair's output modes in terms of the
    /// vacuum modes feeding the source.
    fn substitute(&self, op: &FluctuationOperator, pair: (ModeId, ModeId)) -> FluctuationOperator {
        let r = SqueezeParam::new(self.squeeze).expect("validated on construction");
        match self.kind {
            InputKind::Epr => op
                .two_mode_squeeze(pair, r)
                .expect("pair modes are distinct constants"),
            InputKind::SingleModeAmplitudeSqueezed => op
                .single_mode_squeeze(pair.0, r, AMPLITUDE_SQUEEZE_ANGLE)
                .single_mode_squeeze(pair.1, r, AMPLITUDE_SQUEEZE_ANGLE),
            InputKind::Vacuum => op.clone(),
        }
    }
}

/// Phases of the four beams at the beamsplitters, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Phases {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
}

impl Phases {
    pub fn new(phi1: f64, phi2: f64, phi3: f64, phi4: f64) -> Self {
        Phases {
            phi1,
            phi2,
            phi3,
            phi4,
        }
    }

    /// Phases realizing the given relative phases, with `phi3 = phi4 = 0`.
    pub fn from_differences(phi14: f64, phi23: f64) -> Self {
        Phases::new(phi14, phi23, 0.0, 0.0)
    }

    pub fn phi14(&self) -> f64 {
        self.phi1 - self.phi4
    }

    pub fn phi23(&self) -> f64 {
        self.phi2 - self.phi3
    }

    fn validate(&self) -> Result<()> {
        finite("phi1", self.phi1)?;
        finite("phi2", self.phi2)?;
        finite("phi3", self.phi3)?;
        finite("phi4", self.phi4)?;
        Ok(())
    }
}

/// Full description of one measurement setting. Intra-pair amplitudes are
/// equal by construction (`beta2 = beta1`, `beta4 = beta3`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pair_12: PairSource,
    pair_34: PairSource,
    phases: Phases,
}

impl ExperimentConfig {
    pub fn new(pair_12: PairSource, pair_34: PairSource, phases: Phases) -> Result<Self> {
        phases.validate()?;
        Ok(ExperimentConfig {
            pair_12,
            pair_34,
            phases,
        })
    }

    /// Two EPR pairs at the given relative phases.
    pub fn epr(r: f64, s: f64, beta1: f64, beta3: f64, phi14: f64, phi23: f64) -> Result<Self> {
        Self::new(
            PairSource::epr(r, beta1)?,
            PairSource::epr(s, beta3)?,
            Phases::from_differences(phi14, phi23),
        )
    }

    pub fn pair_12(&self) -> PairSource {
        self.pair_12
    }

    pub fn pair_34(&self) -> PairSource {
        self.pair_34
    }

    pub fn phases(&self) -> Phases {
        self.phases
    }

    pub fn r(&self) -> f64 {
        self.pair_12.squeeze
    }

    pub fn s(&self) -> f64 {
        self.pair_34.squeeze
    }

    pub fn beta1(&self) -> f64 {
        self.pair_12.amplitude
    }

    pub fn beta3(&self) -> f64 {
        self.pair_34.amplitude
    }

    pub fn kind_12(&self) -> InputKind {
        self.pair_12.kind
    }

    pub fn kind_34(&self) -> InputKind {
        self.pair_34.kind
    }

    pub fn with_phases(&self, phases: Phases) -> Result<Self> {
        Self::new(self.pair_12, self.pair_34, phases)
    }

    pub fn with_squeezing(&self, r: f64, s: f64) -> Result<Self> {
        Self::new(
            self.pair_12.with_squeeze(r)?,
            self.pair_34.with_squeeze(s)?,
            self.phases,
        )
    }

    fn with_pair_34(&self, pair_34: PairSource) -> Self {
        ExperimentConfig { pair_34, ..*self }
    }

    /// Mean fields `gamma1`, `gamma2` of the detected outputs.
    fn mean_fields(&self) -> (Complex64, Complex64) {
        let (b1, b3) = (self.beta1(), self.beta3());
        let p = self.phases;
        let gamma1 =
            (Complex64::from_polar(b1, p.phi1) + Complex64::from_polar(b3, p.phi4)) * FRAC_1_SQRT_2;
        let gamma2 =
            (Complex64::from_polar(b1, p.phi2) + Complex64::from_polar(b3, p.phi3)) * FRAC_1_SQRT_2;
        (gamma1, gamma2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseResult {
    pub variance: f64,
    pub shot_noise: f64,
    /// `None` when the shot noise sits below the dark-fringe guard.
    pub ratio: Option<f64>,
    pub db: Option<f64>,
}

impl NoiseResult {
    fn new(variance: f64, shot_noise: f64, guard: f64) -> Self {
        let ratio = (shot_noise > guard).then(|| variance / shot_noise);
        NoiseResult {
            variance,
            shot_noise,
            ratio,
            db: ratio.map(to_db),
        }
    }
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRecord {
    /// Scanned phase (radians) or analysis frequency (Hz).
    pub value: f64,
    pub n1: f64,
    pub n2: f64,
    pub variance: f64,
    pub shot_noise: f64,
    pub ratio: Option<f64>,
}

impl ScanRecord {
    pub fn db(&self) -> Option<f64> {
        self.ratio.map(to_db)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanResult {
    pub records: Vec<ScanRecord>,
}

fn dark_fringe_guard(cfg: &ExperimentConfig) -> f64 {
    SHOT_NOISE_GUARD * (cfg.beta1().powi(2) + cfg.beta3().powi(2))
}

/// Mean photon fluxes `(n1, n2)` of the two detected outputs.
pub fn classical_fringes(cfg: &ExperimentConfig) -> (f64, f64) {
    let (b1, b3) = (cfg.beta1(), cfg.beta3());
    let base = (b1 * b1 + b3 * b3) / 2.0;
    let p = cfg.phases();
    (
        base + b1 * b3 * p.phi14().cos(),
        base + b1 * b3 * p.phi23().cos(),
    )
}

/// Linearized `d(N1 - N2)` expressed over the vacuum inputs `a1..a4`.
pub fn build_number_difference(cfg: &ExperimentConfig) -> FluctuationOperator {
    let (gamma1, gamma2) = cfg.mean_fields();
    let p = cfg.phases();
    // dN = conj(gamma) dc + h.c., so each field weight is conj(gamma) e^{i phi} / sqrt 2.
    let weight = |gamma: Complex64, phi: f64, sign: f64| {
        gamma.conj() * Complex64::from_polar(sign * FRAC_1_SQRT_2, phi)
    };
    let over_outputs = FluctuationOperator::from_coefficients([
        (MODE_B1, weight(gamma1, p.phi1, 1.0)),
        (MODE_B4, weight(gamma1, p.phi4, 1.0)),
        (MODE_B2, weight(gamma2, p.phi2, -1.0)),
        (MODE_B3, weight(gamma2, p.phi3, -1.0)),
    ]);
    let op = cfg.pair_12.substitute(&over_outputs, (MODE_B1, MODE_B2));
    cfg.pair_34.substitute(&op, (MODE_B3, MODE_B4))
}

/// Closed-form variance of `d(N1 - N2)` for two EPR inputs.
pub fn closed_form_variance(cfg: &ExperimentConfig) -> Result<f64> {
    if cfg.kind_12() != InputKind::Epr || cfg.kind_34() != InputKind::Epr {
        return Err(Error::Unsupported(format!(
            "closed-form variance needs EPR inputs on both pairs, got {} and {}",
            cfg.kind_12(),
            cfg.kind_34()
        )));
    }
    let (r, s) = (cfg.r(), cfg.s());
    let (b1, b3) = (cfg.beta1(), cfg.beta3());
    let p = cfg.phases();
    let sum = (p.phi14() + p.phi23()).cos();
    let (er, es) = ((-2.0 * r).exp(), (-2.0 * s).exp());
    Ok(
        b1 * b1 / 2.0 * (er + (2.0 * s).cosh() - (2.0 * s).sinh() * sum)
            + b3 * b3 / 2.0 * ((2.0 * r).cosh() - (2.0 * r).sinh() * sum + es)
            + b1 * b3 / 2.0 * (er + es) * (p.phi14().cos() + p.phi23().cos()),
    )
}

/// Shot-noise level: the variance with all squeezing switched off.
pub fn closed_form_shot_noise(cfg: &ExperimentConfig) -> f64 {
    let (b1, b3) = (cfg.beta1(), cfg.beta3());
    let p = cfg.phases();
    b1 * b1 + b3 * b3 + b1 * b3 * (p.phi14().cos() + p.phi23().cos())
}

pub fn noise_result(cfg: &ExperimentConfig) -> NoiseResult {
    NoiseResult::new(
        build_number_difference(cfg).variance(),
        closed_form_shot_noise(cfg),
        dark_fringe_guard(cfg),
    )
}

/// Ratio expected on the `phi14 = -phi23` line for two EPR inputs.
pub fn restored_ratio(r: f64, s: f64) -> f64 {
    ((-2.0 * r).exp() + (-2.0 * s).exp()) / 2.0
}

/// Ratio expected when pair (3,4) is replaced by vacuum.
pub fn degraded_ratio(r: f64) -> f64 {
    restored_ratio(r, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeLabel {
    Squeezed,
    NotSqueezed,
    Undefined,
}

impl SqueezeLabel {
    fn from_ratio(ratio: Option<f64>) -> Self {
        match ratio {
            Some(x) if x < 1.0 => SqueezeLabel::Squeezed,
            Some(_) => SqueezeLabel::NotSqueezed,
            None => SqueezeLabel::Undefined,
        }
    }
}

impl fmt::Display for SqueezeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SqueezeLabel::Squeezed => "SQUEEZED",
            SqueezeLabel::NotSqueezed => "NOT_SQUEEZED",
            SqueezeLabel::Undefined => "UNDEFINED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTableRow {
    pub phi14: f64,
    pub phi23: f64,
    pub result: NoiseResult,
    /// Ratio used for the label. Equals `result.ratio` away from dark fringes;
    /// on a dark fringe it is the limit as the two amplitudes become unequal.
    pub limit_ratio: Option<f64>,
    pub label: SqueezeLabel,
}

/// Relative amplitude imbalance used to resolve a dark fringe's 0/0.
const DARK_FRINGE_IMBALANCE: f64 = 1e-3;

/// The six characteristic phase settings, first the three that squeeze for
/// EPR inputs, then the three that mix squeezing with antisqueezing.
pub const SPECIAL_PHASES: [(f64, f64); 6] = [
    (0.0, 0.0),
    (PI, PI),
    (FRAC_PI_2, -FRAC_PI_2),
    (0.0, PI),
    (PI, 0.0),
    (FRAC_PI_2, FRAC_PI_2),
];

pub fn special_phase_table(r: f64, s: f64, beta1: f64, beta3: f64) -> Result<Vec<PhaseTableRow>> {
    non_negative("r", r)?;
    non_negative("s", s)?;
    if r == 0.0 && s == 0.0 {
        return Err(Error::OutOfRange {
            name: "r, s",
            reason: "at least one pair must be squeezed".into(),
        });
    }
    SPECIAL_PHASES
        .iter()
        .map(|&(phi14, phi23)| {
            let cfg = ExperimentConfig::epr(r, s, beta1, beta3, phi14, phi23)?;
            let result = noise_result(&cfg);
            let limit_ratio = match result.ratio {
                Some(x) => Some(x),
                None => {
                    let pair_34 = PairSource::epr(s, beta3 * (1.0 + DARK_FRINGE_IMBALANCE))?;
                    noise_result(&cfg.with_pair_34(pair_34)).ratio
                }
            };
            Ok(PhaseTableRow {
                phi14,
                phi23,
                result,
                limit_ratio,
                label: SqueezeLabel::from_ratio(limit_ratio),
            })
        })
        .collect()
}

/// Local (single-mode) versus nonlocal (EPR) squeezing at the two phase
/// settings that tell them apart or not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationReport {
    pub r: f64,
    /// Ratios at `(phi14, phi23) = (pi/2, -pi/2)`.
    pub epr_quadrature: NoiseResult,
    pub single_mode_quadrature: NoiseResult,
    /// Ratios at `(0, 0)`.
    pub epr_amplitude: NoiseResult,
    pub single_mode_amplitude: NoiseResult,
}

impl DiscriminationReport {
    pub fn epr_squeezed(&self) -> bool {
        self.epr_quadrature.ratio.is_some_and(|x| x < 1.0)
    }

    pub fn single_mode_squeezed(&self) -> bool {
        self.single_mode_quadrature.ratio.is_some_and(|x| x < 1.0)
    }

    /// Largest ratio difference between the two kinds at `(0, 0)`.
    pub fn amplitude_discrepancy(&self) -> Option<f64> {
        Some((self.epr_amplitude.ratio? - self.single_mode_amplitude.ratio?).abs())
    }
}

pub fn epr_discrimination(r: f64, beta1: f64, beta3: f64) -> Result<DiscriminationReport> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::OutOfRange {
            name: "r",
            reason: format!("expected > 0, got {r}"),
        });
    }
    let evaluate = |kind: InputKind, phi14: f64, phi23: f64| -> Result<NoiseResult> {
        let cfg = ExperimentConfig::new(
            PairSource::new(kind, r, beta1)?,
            PairSource::new(kind, r, beta3)?,
            Phases::from_differences(phi14, phi23),
        )?;
        Ok(noise_result(&cfg))
    };
    let local = InputKind::SingleModeAmplitudeSqueezed;
    Ok(DiscriminationReport {
        r,
        epr_quadrature: evaluate(InputKind::Epr, FRAC_PI_2, -FRAC_PI_2)?,
        single_mode_quadrature: evaluate(local, FRAC_PI_2, -FRAC_PI_2)?,
        epr_amplitude: evaluate(InputKind::Epr, 0.0, 0.0)?,
        single_mode_amplitude: evaluate(local, 0.0, 0.0)?,
    })
}

fn record(cfg: &ExperimentConfig, value: f64) -> ScanRecord {
    let (n1, n2) = classical_fringes(cfg);
    let result = noise_result(cfg);
    ScanRecord {
        value,
        n1,
        n2,
        variance: result.variance,
        shot_noise: result.shot_noise,
        ratio: result.ratio,
    }
}

/// Scans `phi14 = -phi23 = phi` over `[phi_min, phi_max]` in `steps` uniform
/// points. Only the relative phases of `template` are replaced.
pub fn phase_scan(
    template: &ExperimentConfig,
    phi_min: f64,
    phi_max: f64,
    steps: usize,
) -> Result<ScanResult> {
    finite("phi_min", phi_min)?;
    finite("phi_max", phi_max)?;
    if steps < 2 {
        return Err(Error::OutOfRange {
            name: "steps",
            reason: format!("expected >= 2, got {steps}"),
        });
    }
    let step = (phi_max - phi_min) / (steps - 1) as f64;
    let records = (0..steps)
        .map(|i| {
            let phi = if i == steps - 1 {
                phi_max
            } else {
                phi_min + step * i as f64
            };
            let cfg = template.with_phases(Phases::from_differences(phi, -phi))?;
            Ok(record(&cfg, phi))
        })
        .collect::<Result<_>>()?;
    Ok(ScanResult { records })
}

/// Squeezing parameter seen at analysis frequency `omega` behind a cavity of
/// bandwidth `gamma`: the noise reduction `1 - e^{-2r}` rolls off as a
/// Lorentzian.
pub fn lorentzian_squeeze(r: f64, omega: f64, gamma: f64) -> f64 {
    let depth = -(-2.0 * r).exp_m1();
    let x = omega / gamma;
    let reduced = -(depth / (1.0 + x * x));
    -0.5 * reduced.ln_1p()
}

pub fn noise_spectrum(
    cfg: &ExperimentConfig,
    gamma_cavity: f64,
    freqs: &[f64],
) -> Result<ScanResult> {
    finite("gamma_cavity", gamma_cavity)?;
    if gamma_cavity <= 0.0 {
        return Err(Error::OutOfRange {
            name: "gamma_cavity",
            reason: format!("expected > 0, got {gamma_cavity}"),
        });
    }
    let records = freqs
        .iter()
        .map(|&omega| {
            finite("frequency", omega)?;
            let at = cfg.with_squeezing(
                lorentzian_squeeze(cfg.r(), omega, gamma_cavity),
                lorentzian_squeeze(cfg.s(), omega, gamma_cavity),
            )?;
            Ok(record(&at, omega))
        })
        .collect::<Result<_>>()?;
    Ok(ScanResult { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fringes() {
        let bright = ExperimentConfig::epr(0.0, 0.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(close(classical_fringes(&bright).0, 2.0, 1e-15));
        let dark = ExperimentConfig::epr(0.0, 0.0, 1.0, 1.0, PI, 0.0).unwrap();
        assert!(close(classical_fringes(&dark).0, 0.0, 1e-15));
        for (a, b) in [(0.3, 1.9), (2.0, -0.4)] {
            let lone = ExperimentConfig::epr(0.2, 0.1, 1.0, 0.0, a, b).unwrap();
            assert_eq!(classical_fringes(&lone), (0.5, 0.5));
        }
    }

    #[test]
    fn shot_noise_examples() {
        let one = ExperimentConfig::epr(0.0, 0.0, 1.0, 0.0, 0.4, 1.0).unwrap();
        assert_eq!(closed_form_shot_noise(&one), 1.0);
        let double_dark = ExperimentConfig::epr(0.0, 0.0, 1.0, 1.0, PI, -PI).unwrap();
        assert!(close(closed_form_shot_noise(&double_dark), 0.0, 1e-15));
        let mixed = ExperimentConfig::epr(0.0, 0.0, 2.0, 1.0, 0.0, PI).unwrap();
        assert!(close(closed_form_shot_noise(&mixed), 5.0, 1e-14));
        let (n1, n2) = classical_fringes(&mixed);
        assert!(close(n1 + n2, 5.0, 1e-14));
    }

    #[test]
    fn unsqueezed_variance_is_shot_noise() {
        for (a, b) in [(0.0, 0.0), (1.0, 2.5), (-0.7, 3.0)] {
            let cfg = ExperimentConfig::epr(0.0, 0.0, 1.3, 0.6, a, b).unwrap();
            let v = build_number_difference(&cfg).variance();
            assert!(close(v, closed_form_shot_noise(&cfg), 1e-13));
            assert!(close(v, closed_form_variance(&cfg).unwrap(), 1e-13));
        }
        let single = ExperimentConfig::epr(0.0, 0.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(close(
            build_number_difference(&single).variance(),
            1.0,
            1e-15
        ));
    }

    #[test]
    fn lone_pair_ratio() {
        let r = 0.8;
        for phi in [0.0, 0.9, 2.2] {
            let cfg = ExperimentConfig::epr(r, 0.0, 1.7, 0.0, phi, 1.0 - phi).unwrap();
            let res = noise_result(&cfg);
            assert!(close(res.ratio.unwrap(), degraded_ratio(r), 1e-13));
        }
    }

    #[test]
    fn equal_squeezing_on_the_general_line() {
        let r = 0.6;
        let cfg = ExperimentConfig::epr(r, r, 2.0, 1.0, FRAC_PI_3, -FRAC_PI_3).unwrap();
        assert!(close(
            noise_result(&cfg).ratio.unwrap(),
            (-2.0 * r).exp(),
            1e-13
        ));
    }

    #[test]
    fn closed_form_examples() {
        let (r, s, b1, b3) = (0.4, 0.9, 1.5, 0.8);
        let off = ExperimentConfig::epr(0.0, 0.0, b1, b3, 0.3, 1.2).unwrap();
        let expect = b1 * b1 + b3 * b3 + b1 * b3 * (0.3f64.cos() + 1.2f64.cos());
        assert!(close(closed_form_variance(&off).unwrap(), expect, 1e-13));

        let phi = 1.1;
        let on = ExperimentConfig::epr(r, s, b1, b3, phi, -phi).unwrap();
        let expect = restored_ratio(r, s) * (b1 * b1 + b3 * b3 + 2.0 * b1 * b3 * phi.cos());
        assert!(close(closed_form_variance(&on).unwrap(), expect, 1e-13));

        let antisq = ExperimentConfig::epr(0.5, 0.5, 1.0, 1.0, 0.0, PI).unwrap();
        assert!(close(
            closed_form_variance(&antisq).unwrap(),
            3.086_161_269_630_487_4,
            1e-12
        ));
        assert!(close(
            build_number_difference(&antisq).variance(),
            3.086_161_269_630_487_4,
            1e-12
        ));
    }

    #[test]
    fn closed_form_rejects_non_epr() {
        let cfg = ExperimentConfig::new(
            PairSource::epr(0.5, 1.0).unwrap(),
            PairSource::vacuum(),
            Phases::default(),
        )
        .unwrap();
        assert!(matches!(
            closed_form_variance(&cfg),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn vacuum_forces_zero() {
        let p = PairSource::new(InputKind::Vacuum, 0.7, 2.0).unwrap();
        assert_eq!((p.squeeze(), p.amplitude()), (0.0, 0.0));
        assert!(PairSource::epr(-0.1, 1.0).is_err());
        assert!(PairSource::epr(0.1, f64::NAN).is_err());
        assert!(ExperimentConfig::new(p, p, Phases::new(f64::INFINITY, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn noise_result_examples() {
        let coherent = ExperimentConfig::epr(0.0, 0.0, 1.0, 0.5, 0.3, 0.2).unwrap();
        let res = noise_result(&coherent);
        assert!(close(res.ratio.unwrap(), 1.0, 1e-14));
        assert!(close(res.db.unwrap(), 0.0, 1e-12));

        let r = 0.5 * 2f64.ln();
        let cfg = ExperimentConfig::epr(r, r, 1.0, 2.0, 0.4, -0.4).unwrap();
        assert!(close(
            noise_result(&cfg).db.unwrap(),
            -3.010_299_956_639_812,
            1e-9
        ));

        let dark = ExperimentConfig::epr(0.4, 0.4, 1.0, 1.0, PI, -PI).unwrap();
        let res = noise_result(&dark);
        assert_eq!(res.ratio, None);
        assert_eq!(res.db, None);

        let nothing = ExperimentConfig::new(
            PairSource::vacuum(),
            PairSource::vacuum(),
            Phases::default(),
        )
        .unwrap();
        assert_eq!(noise_result(&nothing).ratio, None);
    }

    #[test]
    fn phase_table_needs_squeezing() {
        assert!(special_phase_table(0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn phase_table_labels() {
        let rows = special_phase_table(0.5, 0.5, 1.0, 1.0).unwrap();
        let labels: Vec<_> = rows.iter().map(|row| row.label).collect();
        use SqueezeLabel::*;
        assert_eq!(
            labels,
            [
                Squeezed,
                Squeezed,
                Squeezed,
                NotSqueezed,
                NotSqueezed,
                NotSqueezed
            ]
        );
        assert!(close(rows[0].result.ratio.unwrap(), (-1.0f64).exp(), 1e-12));
        assert!(close(rows[3].result.ratio.unwrap(), 1f64.cosh(), 1e-12));
        // (pi, pi) with equal amplitudes is a double dark fringe
        assert_eq!(rows[1].result.ratio, None);
        assert!(close(rows[1].limit_ratio.unwrap(), (-1.0f64).exp(), 1e-9));
    }

    #[test]
    fn discrimination() {
        let report = epr_discrimination(0.5, 1.0, 1.0).unwrap();
        assert!(report.epr_squeezed());
        assert!(!report.single_mode_squeezed());
        assert!(close(
            report.epr_quadrature.ratio.unwrap(),
            (-1.0f64).exp(),
            1e-12
        ));
        assert!(report.amplitude_discrepancy().unwrap() <= 1e-12);
        assert!(epr_discrimination(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn scan_shape() {
        let template = ExperimentConfig::epr(0.5, 0.3, 1.0, 0.7, 0.0, 0.0).unwrap();
        assert!(phase_scan(&template, 0.0, 1.0, 1).is_err());
        let scan = phase_scan(&template, -PI, PI, 9).unwrap();
        assert_eq!(scan.records.len(), 9);
        assert_eq!(scan.records[0].value, -PI);
        assert_eq!(scan.records[8].value, PI);
        for rec in &scan.records {
            assert!(close(rec.ratio.unwrap(), 0.458_345_538_632_734_36, 1e-12));
        }
        let flat = phase_scan(&template.with_squeezing(0.0, 0.0).unwrap(), 0.0, 6.0, 5).unwrap();
        assert!(flat
            .records
            .iter()
            .all(|rec| close(rec.ratio.unwrap(), 1.0, 1e-13)));
    }

    #[test]
    fn lorentzian_endpoints() {
        assert!(close(lorentzian_squeeze(0.7, 0.0, 3.0), 0.7, 1e-15));
        assert!(lorentzian_squeeze(0.7, 1e9, 3.0) < 1e-15);
        assert_eq!(lorentzian_squeeze(0.0, 5.0, 3.0), 0.0);
    }

    #[test]
    fn spectrum_half_depth() {
        let cfg = ExperimentConfig::epr(0.6, 0.2, 1.0, 1.0, 0.5, -0.5).unwrap();
        let spectrum = noise_spectrum(&cfg, 2.0e6, &[0.0, 2.0e6, 1.0e12]).unwrap();
        let ratio = |i: usize| spectrum.records[i].ratio.unwrap();
        assert!(close(ratio(0), noise_result(&cfg).ratio.unwrap(), 1e-14));
        assert!(close(1.0 - ratio(1), (1.0 - ratio(0)) / 2.0, 1e-13));
        assert!(close(ratio(2), 1.0, 1e-9));
        assert!(noise_spectrum(&cfg, 0.0, &[1.0]).is_err());
        assert!(noise_spectrum(&cfg, -1.0, &[1.0]).is_err());
    }
}
