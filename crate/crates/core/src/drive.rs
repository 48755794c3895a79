//! Two-tone control field: Gaussian envelopes, carriers, the dynamical Stark
//! shift of dressed levels and the Stokes phase modulation that cancels the
//! resulting two-photon detuning.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;
use crate::spectra::{Label, LabeledSpectrum};

/// Terms of the Stark sum with `|E_i − E_j ∓ ω| <` this value are resonant
/// and left out.
pub const RESONANCE_CUTOFF: f64 = 0.05;

/// Time-dependent carrier phase `φ(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum PhaseLaw {
    #[default]
    None,
    /// `φ̇(t) = rate · exp(−2((t − center)/width)²)` with `φ(origin) = 0`,
    /// i.e. a frequency offset following the squared Gaussian envelope.
    SquaredGaussian {
        rate: f64,
        center: f64,
        width: f64,
        origin: f64,
    },
}

impl PhaseLaw {
    pub fn phase(&self, t: f64) -> f64 {
        match *self {
            PhaseLaw::None => 0.0,
            PhaseLaw::SquaredGaussian {
                rate,
                center,
                width,
                origin,
            } => {
                let s = std::f64::consts::SQRT_2 / width;
                let scale = rate * width * (std::f64::consts::PI / 8.0).sqrt();
                scale * (libm::erf(s * (t - center)) - libm::erf(s * (origin - center)))
            }
        }
    }

    /// `dφ/dt`
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            PhaseLaw::None => 0.0,
            PhaseLaw::SquaredGaussian { rate, center, width, .. } => {
                let x = (t - center) / width;
                rate * (-2.0 * x * x).exp()
            }
        }
    }

    pub fn negated(&self) -> Self {
        match *self {
            PhaseLaw::None => PhaseLaw::None,
            PhaseLaw::SquaredGaussian {
                rate,
                center,
                width,
                origin,
            } => PhaseLaw::SquaredGaussian {
                rate: -rate,
                center,
                width,
                origin,
            },
        }
    }
}

/// One tone `𝒲(t) cos(ω t + φ(t))` with a Gaussian envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub peak: f64,
    pub center: f64,
    pub width: f64,
    pub carrier: f64,
    pub phase: PhaseLaw,
}

impl PulseSpec {
    pub fn new(peak: f64, center: f64, width: f64, carrier: f64) -> Self {
        Self {
            peak,
            center,
            width,
            carrier,
            phase: PhaseLaw::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak >= 0.0 && self.width > 0.0 && self.carrier >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse needs peak >= 0, width > 0, carrier >= 0 (got {}, {}, {})",
                self.peak, self.width, self.carrier
            )));
        }
        Ok(())
    }

    /// `∫ 𝒲 dt` over the real line.
    pub fn area(&self) -> f64 {
        self.peak * self.width * std::f64::consts::PI.sqrt()
    }
}

/// `peak · exp(−((t − center)/width)²)`
pub fn envelope(spec: &PulseSpec, t: f64) -> f64 {
    let x = (t - spec.center) / spec.width;
    spec.peak * (-x * x).exp()
}

/// Pump and Stokes tones plus the simulated interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveConfig {
    pub pump: PulseSpec,
    pub stokes: PulseSpec,
    pub t_start: f64,
    pub t_end: f64,
}

impl DriveConfig {
    /// Stokes centered at `−τ`, pump at `+τ`, both of width `T`, simulated
    /// over `[−3T − τ, 3T + τ]`.
    pub fn counterintuitive(
        pump_peak: f64,
        stokes_peak: f64,
        width: f64,
        tau: f64,
        pump_carrier: f64,
        stokes_carrier: f64,
    ) -> Self {
        let half = 3.0 * width + tau.abs();
        Self {
            pump: PulseSpec::new(pump_peak, tau, width, pump_carrier),
            stokes: PulseSpec::new(stokes_peak, -tau, width, stokes_carrier),
            t_start: -half,
            t_end: half,
        }
    }

    /// No field at all over the given window.
    pub fn off(t_start: f64, t_end: f64) -> Self {
        Self {
            pump: PulseSpec::new(0.0, 0.0, 1.0, 0.0),
            stokes: PulseSpec::new(0.0, 0.0, 1.0, 0.0),
            t_start,
            t_end,
        }
    }

    /// Half the separation of the two pulse centers.
    pub fn tau(&self) -> f64 {
        0.5 * (self.pump.center - self.stokes.center)
    }

    /// Checks pulse fields, counterintuitive ordering and that the window
    /// extends at least three widths past each pulse center.
    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        self.stokes.validate()?;
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidParameter("empty simulation window".into()));
        }
        if self.stokes.center > self.pump.center {
            return Err(Error::InvalidParameter("Stokes pulse must not follow the pump".into()));
        }
        let slack = 1e-9 * (self.t_end - self.t_start);
        for p in [&self.pump, &self.stokes] {
            if p.peak > 0.0
                && (p.center - 3.0 * p.width < self.t_start - slack || p.center + 3.0 * p.width > self.t_end + slack)
            {
                return Err(Error::InvalidParameter(
                    "window must cover three widths on each side of every pulse".into(),
                ));
            }
        }
        Ok(())
    }

    /// Same pulses with every time multiplied by `s` (peaks unchanged,
    /// carriers divided by `s`).
    pub fn time_scaled(&self, s: f64) -> Self {
        let scale = |p: &PulseSpec| PulseSpec {
            peak: p.peak / s,
            center: p.center * s,
            width: p.width * s,
            carrier: p.carrier / s,
            phase: match p.phase {
                PhaseLaw::None => PhaseLaw::None,
                PhaseLaw::SquaredGaussian {
                    rate,
                    center,
                    width,
                    origin,
                } => PhaseLaw::SquaredGaussian {
                    rate: rate / s,
                    center: center * s,
                    width: width * s,
                    origin: origin * s,
                },
            },
        };
        Self {
            pump: scale(&self.pump),
            stokes: scale(&self.stokes),
            t_start: self.t_start * s,
            t_end: self.t_end * s,
        }
    }
}

fn tone(p: &PulseSpec, t: f64) -> f64 {
    if p.peak == 0.0 {
        return 0.0;
    }
    envelope(p, t) * (p.carrier * t + p.phase.phase(t)).cos()
}

/// `W(t) = Σ_k 𝒲_k(t) cos(ω_k t + φ_k(t))`
pub fn field_value(cfg: &DriveConfig, t: f64) -> f64 {
    tone(&cfg.pump, t) + tone(&cfg.stokes, t)
}

/// Dressed energies and dressed drive matrix, the inputs of every Stark sum.
#[derive(Clone, Debug)]
pub struct StarkModel {
    labels: Vec<Label>,
    energies: Vec<f64>,
    dipole: DMatrix<Complex64>,
}

impl StarkModel {
    pub fn new(spec: &LabeledSpectrum, dipole: &OperatorMatrix) -> Result<Self> {
        if dipole.dim() != spec.basis().dim() {
            return Err(Error::DimensionMismatch {
                left: dipole.dim(),
                right: spec.basis().dim(),
            });
        }
        Ok(Self {
            labels: spec.labels().to_vec(),
            energies: spec.energies().to_vec(),
            dipole: spec.dressed(dipole),
        })
    }

    fn index(&self, label: Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .ok_or(Error::UnknownLabel(label))
    }

    /// Pairwise term: shift of level `i` caused by level `j` under a tone of
    /// amplitude `amp` and frequency `omega`. Resonant pieces are dropped.
    pub fn pair_shift(&self, i: Label, j: Label, amp: f64, omega: f64) -> Result<f64> {
        let (a, b) = (self.index(i)?, self.index(j)?);
        Ok(self.pair(a, b, amp, omega))
    }

    fn pair(&self, a: usize, b: usize, amp: f64, omega: f64) -> f64 {
        let coupling = (self.dipole[(a, b)] * (0.5 * amp)).norm_sqr();
        if coupling == 0.0 {
            return 0.0;
        }
        let gap = self.energies[a] - self.energies[b];
        let mut s = 0.0;
        for den in [gap - omega, gap + omega] {
            if den.abs() >= RESONANCE_CUTOFF {
                s += 1.0 / den;
            }
        }
        coupling * s
    }

    /// `Σ_{j ≠ level, j ∉ excluded} S_{level, j}`
    pub fn shift(&self, level: Label, amp: f64, omega: f64, excluded: &[Label]) -> Result<f64> {
        let a = self.index(level)?;
        let skip: Vec<usize> = excluded.iter().filter_map(|l| self.index(*l).ok()).collect();
        Ok((0..self.labels.len())
            .filter(|&b| b != a && !skip.contains(&b))
            .map(|b| self.pair(a, b, amp, omega))
            .sum())
    }
}

/// Stark shift of `level` at time `t` caused by the tone `field`.
pub fn stark_shift(
    level: Label,
    spec: &LabeledSpectrum,
    field: &PulseSpec,
    dipole: &OperatorMatrix,
    t: f64,
) -> Result<f64> {
    StarkModel::new(spec, dipole)?.shift(level, envelope(field, t), field.carrier, &[])
}

/// Which dressed states play which role in a STIRAP sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StirapRoles {
    pub initial: Label,
    pub intermediate: Label,
    pub target: Label,
}

/// Stray two-photon detuning per unit squared Stokes amplitude,
/// `δ = K 𝒲_s²` with `δ = shift(target) − shift(initial)`.
///
/// The Stokes-resonant target–intermediate pair is the intended coupling and
/// is left out of the target's sum.
pub fn two_photon_stark_coefficient(model: &StarkModel, roles: &StirapRoles, stokes_carrier: f64) -> Result<f64> {
    let target = model.shift(roles.target, 1.0, stokes_carrier, &[roles.intermediate])?;
    let initial = model.shift(roles.initial, 1.0, stokes_carrier, &[])?;
    Ok(target - initial)
}

/// `δ(t)` for the Stokes tone of `cfg`.
pub fn two_photon_detuning(model: &StarkModel, roles: &StirapRoles, cfg: &DriveConfig, t: f64) -> Result<f64> {
    let w = envelope(&cfg.stokes, t);
    Ok(two_photon_stark_coefficient(model, roles, cfg.stokes.carrier)? * w * w)
}

/// Stokes phase law that keeps the instantaneous two-photon resonance.
///
/// When the target lies below the intermediate state (Λ) the Stokes photon
/// is emitted and the phase must run at `−δ`; otherwise (V) at `+δ`. Since
/// `δ ∝ 𝒲_s²` the integral is closed form.
pub fn compensation_phase_law(
    cfg: &DriveConfig,
    spec: &LabeledSpectrum,
    dipole: &OperatorMatrix,
    roles: &StirapRoles,
) -> Result<PhaseLaw> {
    let model = StarkModel::new(spec, dipole)?;
    let k = two_photon_stark_coefficient(&model, roles, cfg.stokes.carrier)?;
    let sign = if spec.energy(roles.target)? < spec.energy(roles.intermediate)? {
        -1.0
    } else {
        1.0
    };
    let rate = sign * k * cfg.stokes.peak * cfg.stokes.peak;
    if rate == 0.0 {
        return Ok(PhaseLaw::None);
    }
    Ok(PhaseLaw::SquaredGaussian {
        rate,
        center: cfg.stokes.center,
        width: cfg.stokes.width,
        origin: cfg.t_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{BasisState, Level};
    use crate::models::{drive_operator, DriveScheme, ModelParams, Scheme};
    use crate::spectra::label_states;
    use proptest::prelude::*;

    #[test]
    fn envelope_shape() {
        let p = PulseSpec::new(0.3, 2.0, 5.0, 1.0);
        assert_eq!(envelope(&p, 2.0), 0.3);
        assert!((envelope(&p, 7.0) - 0.3 / std::f64::consts::E).abs() < 1e-15);
        assert!((envelope(&p, -3.0) - 0.3 / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn counterintuitive_delay() {
        let t = 100.0;
        let cfg = DriveConfig::counterintuitive(0.1, 0.2, t, 0.75 * t, 2.0, 4.0);
        assert_eq!(cfg.stokes.center, -75.0);
        assert_eq!(cfg.pump.center, 75.0);
        assert_eq!(cfg.tau(), 75.0);
        assert!(cfg.validate().is_ok());
        let mut bad = cfg;
        bad.t_end = 200.0;
        assert!(bad.validate().is_err());
        let mut swapped = cfg;
        std::mem::swap(&mut swapped.pump.center, &mut swapped.stokes.center);
        assert!(swapped.validate().is_err());
    }

    #[test]
    fn field_basics() {
        let off = DriveConfig::off(-10.0, 10.0);
        assert!((-100..100).all(|k| field_value(&off, k as f64 * 0.1) == 0.0));
        let mut single = DriveConfig::counterintuitive(0.0, 0.7, 3.0, 0.0, 0.0, 2.0);
        single.stokes.center = 0.0;
        assert_eq!(field_value(&single, 0.0), 0.7);
    }

    #[test]
    fn beat_of_two_tones() {
        // ω_p − ω_s = 2: the sum repeats with period π on top of the envelopes
        let mut cfg = DriveConfig::counterintuitive(1.0, 1.0, 1e9, 0.0, 3.0, 1.0);
        cfg.pump.center = 0.0;
        let t = 0.37;
        let a = field_value(&cfg, t);
        let expect = 2.0 * (2.0 * t).cos() * t.cos();
        assert!((a - expect).abs() < 1e-9);
    }

    #[test]
    fn gaussian_area() {
        let p = PulseSpec::new(0.4, 1.0, 2.5, 0.0);
        let h = 1e-3;
        let sum: f64 = (-20000..20000).map(|k| envelope(&p, 1.0 + (k as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!((sum - p.area()).abs() < 1e-10);
    }

    #[test]
    fn phase_law_matches_its_rate() {
        let law = PhaseLaw::SquaredGaussian {
            rate: -0.02,
            center: -3.0,
            width: 4.0,
            origin: -20.0,
        };
        assert!(law.phase(-20.0).abs() < 1e-15);
        let h = 1e-4;
        for t in [-10.0, -3.0, 0.5, 7.0] {
            let fd = (law.phase(t + h) - law.phase(t - h)) / (2.0 * h);
            assert!((fd - law.rate(t)).abs() < 1e-9);
        }
        assert_eq!(law.negated().phase(1.0), -law.phase(1.0));
        assert_eq!(PhaseLaw::None.phase(3.0), 0.0);
    }

    #[test]
    fn two_level_stark_is_textbook_ac_shift() {
        let b = Scheme::Rabi.basis(0);
        let p = ModelParams {
            epsilon: 1.3,
            ..ModelParams::rabi(0.0)
        };
        let spec = label_states(Scheme::Rabi, &b, &p).unwrap();
        let d = drive_operator(&b, DriveScheme::EGOnly, 1.0).unwrap();
        let w = 0.05;
        let omega = 0.4;
        let cfg = PulseSpec::new(w, 0.0, 1.0, omega);
        let s = stark_shift(Label::Product(BasisState::new(0, Level::E)), &spec, &cfg, &d, 0.0).unwrap();
        let delta = 1.3;
        let want = (w / 2.0).powi(2) * 2.0 * delta / (delta * delta - omega * omega);
        assert!((s - want).abs() < 1e-15);
        let zero = PulseSpec::new(0.0, 0.0, 1.0, omega);
        assert_eq!(stark_shift(Label::Ground, &spec, &zero, &d, 0.0).unwrap(), 0.0);
    }

    fn lambda_setup() -> (LabeledSpectrum, OperatorMatrix, StirapRoles) {
        let b = Scheme::Lambda.basis(6);
        let p = ModelParams::physical(4.0, 0.25, 0.0);
        let spec = label_states(Scheme::Lambda, &b, &p).unwrap();
        let d = drive_operator(&b, DriveScheme::LambdaLadder, 0.4).unwrap();
        let roles = StirapRoles {
            initial: Label::Ancilla(0),
            intermediate: Label::Ground,
            target: Label::Ancilla(2),
        };
        (spec, d, roles)
    }

    #[test]
    fn lambda_stray_detuning_grows_linearly_relative_to_stokes_rabi_frequency() {
        let (spec, d, roles) = lambda_setup();
        let model = StarkModel::new(&spec, &d).unwrap();
        let e0 = spec.energy(Label::Ground).unwrap();
        let omega_s = spec.energy(Label::Ground).unwrap() - spec.energy(Label::Ancilla(2)).unwrap();
        assert!((omega_s - (e0 + 2.0)).abs() < 1e-12);
        let k = two_photon_stark_coefficient(&model, &roles, omega_s).unwrap();
        assert!(k != 0.0);
        let element = spec.matrix_element(&d, Label::Ground, Label::Ancilla(2)).unwrap().norm();
        let ratio = |w: f64| (k * w * w).abs() / (element * w);
        assert!((ratio(0.1) / ratio(0.05) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compensation_cancels_detuning() {
        let (spec, d, roles) = lambda_setup();
        let t = 2000.0;
        let e0 = spec.energy(Label::Ground).unwrap();
        let cfg = DriveConfig::counterintuitive(0.001, 0.05, t, 0.75 * t, e0 + 4.0, e0 + 2.0);
        let law = compensation_phase_law(&cfg, &spec, &d, &roles).unwrap();
        let model = StarkModel::new(&spec, &d).unwrap();
        let omega_max = spec.matrix_element(&d, Label::Ground, Label::Ancilla(2)).unwrap().norm() * 0.05;
        let h = 1e-2;
        for k in 0..=60 {
            let tt = cfg.t_start + k as f64 * (cfg.t_end - cfg.t_start) / 60.0;
            let delta = two_photon_detuning(&model, &roles, &cfg, tt).unwrap();
            let phidot = (law.phase(tt + h) - law.phase(tt - h)) / (2.0 * h);
            assert!((delta + phidot).abs() <= 0.02 * omega_max);
        }
    }

    #[test]
    fn no_detuning_no_phase() {
        let (spec, d, roles) = lambda_setup();
        let cfg = DriveConfig::counterintuitive(0.0, 0.0, 10.0, 7.5, 4.0, 2.0);
        assert_eq!(compensation_phase_law(&cfg, &spec, &d, &roles).unwrap(), PhaseLaw::None);
    }

    proptest! {
        #[test]
        fn field_bounded_by_peaks(t in -50.0..50.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let cfg = DriveConfig::counterintuitive(a, b, 10.0, 7.5, 2.3, 0.9);
            prop_assert!(field_value(&cfg, t).abs() <= a + b + 1e-15);
        }

        #[test]
        fn stark_shift_is_quadratic(lambda in 0.1..10.0f64, w in 0.001..0.1f64) {
            let (spec, d, roles) = lambda_setup();
            let model = StarkModel::new(&spec, &d).unwrap();
            let om = 1.97;
            let s1 = model.shift(roles.initial, w, om, &[]).unwrap();
            let s2 = model.shift(roles.initial, lambda * w, om, &[]).unwrap();
            prop_assert!((s2 - lambda * lambda * s1).abs() <= 1e-12 * s2.abs().max(1e-300));
        }
    }
}
