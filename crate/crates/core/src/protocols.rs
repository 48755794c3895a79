//! Complete Λ- and V-STIRAP runs: carriers read off the labeled spectrum,
//! pulse scaling, optional Stark compensation, diagnostics and sweeps.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::drive::{compensation_phase_law, two_photon_stark_coefficient, DriveConfig, StarkModel, StirapRoles};
use crate::dynamics::{evolve, project_populations, truncation_check, EvolveOptions, PopulationHistory, TruncationReport};
use crate::error::{Error, Result};
use crate::hilbert::OperatorMatrix;
use crate::models::{drive_operator, hamiltonian, DriveScheme, ModelParams, Scheme};
use crate::spectra::{label_states, vee_intermediate, Branch, Label, LabeledSpectrum};

/// Everything that defines one STIRAP experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct StirapScenario {
    pub scheme: Scheme,
    pub model: ModelParams,
    /// Drop every counterrotating coupling of `model` before building `H₀`.
    pub model_rwa: bool,
    /// `Ground` for Λ; `Doublet { n: 1, .. }` for V.
    pub intermediate: Label,
    /// Gaussian width `T`.
    pub pulse_t: f64,
    /// `Ω₀ T` with `Ω₀ = 𝒲̄_s`, the Stokes field peak.
    pub omega0_t: f64,
    pub tau_over_t: f64,
    pub delta_p: f64,
    pub delta_s: f64,
    pub compensation: bool,
    pub n_max: usize,
    pub drive: DriveScheme,
    /// Ratio entering the ladder drive operator.
    pub drive_eta: f64,
    /// Fixed `𝒲̄_p/𝒲̄_s`; computed from dressed dipole elements when unset.
    pub pump_scale: Option<f64>,
    pub tol: f64,
    pub sample_count: usize,
    pub truncation_threshold: f64,
}

/// Stokes peak `Ω₀` of the presets, `0.02 ω_c` (a 600 MHz angular Rabi
/// frequency against a cavity near 5 GHz). The width follows from `Ω₀T`.
pub const DEFAULT_OMEGA0: f64 = 0.02;

impl StirapScenario {
    fn base(scheme: Scheme, model: ModelParams, intermediate: Label, omega0_t: f64, n_max: usize, drive: DriveScheme, drive_eta: f64) -> Self {
        Self {
            scheme,
            model,
            model_rwa: false,
            intermediate,
            pulse_t: omega0_t / DEFAULT_OMEGA0,
            omega0_t,
            tau_over_t: 0.75,
            delta_p: 0.0,
            delta_s: 0.0,
            compensation: false,
            n_max,
            drive,
            drive_eta,
            pump_scale: None,
            tol: 1e-9,
            sample_count: 2000,
            truncation_threshold: 1e-6,
        }
    }

    /// Λ scheme, `ε′ = 4ε`, `g = g_c = 0.25`, no stray coupling, `Ω₀T = 900`,
    /// Stark compensation on.
    pub fn lambda_usc() -> Self {
        let mut s = Self::base(
            Scheme::Lambda,
            ModelParams::physical(4.0, 0.25, 0.0),
            Label::Ground,
            900.0,
            6,
            DriveScheme::LambdaLadder,
            0.4,
        );
        s.compensation = true;
        s
    }

    /// Λ scheme at `g = 0.25` with stray coupling `g′ = g′_c`; the drive
    /// ratio follows `g′/g`. The larger stray mixing needs `n_max = 8`.
    pub fn lambda_stray(g_prime: f64) -> Self {
        let mut s = Self::lambda_usc();
        s.model = ModelParams::physical(4.0, 0.25, g_prime);
        s.drive_eta = g_prime / 0.25;
        s.n_max = 8;
        s
    }

    /// Λ scheme with only the corotating stray coupling (`g = g_c = 0`).
    pub fn lambda_stray_only(g_prime: f64) -> Self {
        let mut s = Self::lambda_usc();
        s.model = ModelParams {
            g_prime,
            ..ModelParams::physical(4.0, 0.0, 0.0)
        };
        s.model_rwa = true;
        s.drive_eta = g_prime / 0.25;
        s
    }

    /// V scheme, `α = 1.5`, `g = g_c = 0.25`, `g′ = g′_c = (2/3) g`,
    /// `Ω₀T = 400`, through `|Φ₁₋⟩`. `|Ψ₂ᵤ⟩` carries a few 1e-3 on `n = 6`,
    /// so `n_max = 11` is the first cutoff clearing the `1e-6` guard.
    pub fn vee_usc() -> Self {
        Self::base(
            Scheme::Vee,
            ModelParams::vee_physical(1.5, 0.25, 0.25 * 2.0 / 3.0),
            Label::Doublet {
                n: 1,
                branch: Branch::Minus,
            },
            400.0,
            11,
            DriveScheme::VeeLadder,
            2.0 / 3.0,
        )
    }

    /// V scheme with only the corotating stray coupling.
    pub fn vee_stray_only(g_prime: f64) -> Self {
        let mut s = Self::vee_usc();
        s.model = ModelParams {
            g_prime,
            ..ModelParams::vee_physical(1.5, 0.0, 0.0)
        };
        s.model_rwa = true;
        s
    }

    pub fn roles(&self) -> StirapRoles {
        StirapRoles {
            initial: Label::Ancilla(0),
            intermediate: self.intermediate,
            target: Label::Ancilla(2),
        }
    }

    /// Stokes peak `𝒲̄_s = Ω₀T / T`.
    pub fn stokes_peak(&self) -> f64 {
        self.omega0_t / self.pulse_t
    }

    pub fn effective_model(&self) -> ModelParams {
        if self.model_rwa {
            self.model.rwa()
        } else {
            self.model
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("pulse_T", self.pulse_t)?;
        positive("omega0_T", self.omega0_t)?;
        positive("tol", self.tol)?;
        if !(self.tau_over_t >= 0.0 && self.tau_over_t.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau_over_T must be non-negative, got {}", self.tau_over_t)));
        }
        if !(self.delta_p.is_finite() && self.delta_s.is_finite()) {
            return Err(Error::InvalidParameter("non-finite detuning".into()));
        }
        if let Some(k) = self.pump_scale {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameter(format!("pump_scale must be non-negative, got {k}")));
            }
        }
        if self.sample_count < 2 {
            return Err(Error::InvalidParameter("sample_count must be at least 2".into()));
        }
        let ok = match (self.scheme, self.intermediate) {
            (Scheme::Lambda, Label::Ground) => true,
            (Scheme::Vee, Label::Doublet { n: 1, .. }) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "intermediate {} is not valid for the {} scheme",
                self.intermediate,
                self.scheme.name()
            )));
        }
        Ok(())
    }

    /// Sets a field from its textual value. Numeric fields go through
    /// [`set_value`](Self::set_value).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidParameter(format!("cannot parse {what} from {value:?}"));
        match key {
            "scheme" => self.scheme = value.parse()?,
            "intermediate" => self.intermediate = value.parse()?,
            "drive" => self.drive = value.parse()?,
            "compensation" => self.compensation = value.parse().map_err(|_| bad("a boolean"))?,
            "model_rwa" => self.model_rwa = value.parse().map_err(|_| bad("a boolean"))?,
            "pump_scale" if value == "auto" => self.pump_scale = None,
            _ => {
                let v: f64 = value.parse().map_err(|_| bad("a number"))?;
                self.set_value(key, v)?;
            }
        }
        Ok(())
    }

    /// Sets a numeric field or model parameter by name. `g_phys` and
    /// `g_prime_phys` set a coupling together with its counterrotating
    /// partner; `eta` sets `g′ = η g` and `g′_c = η g_c`.
    pub fn set_value(&mut self, key: &str, v: f64) -> Result<()> {
        let m = &mut self.model;
        match key {
            "epsilon" => m.epsilon = v,
            "epsilon_prime" => m.epsilon_prime = v,
            "omega_c" => m.omega_c = v,
            "alpha" => *m = m.with_alpha(v),
            "g" => m.g = v,
            "g_c" => m.g_c = v,
            "g_phys" => {
                m.g = v;
                m.g_c = v;
            }
            "g_prime" => m.g_prime = v,
            "g_prime_c" => m.g_prime_c = v,
            "g_prime_phys" => {
                m.g_prime = v;
                m.g_prime_c = v;
            }
            "eta" => *m = m.with_eta(v),
            "pulse_T" => self.pulse_t = v,
            "omega0_T" => self.omega0_t = v,
            "tau_over_T" => self.tau_over_t = v,
            "delta_p" => self.delta_p = v,
            "delta_s" => self.delta_s = v,
            "drive_eta" => self.drive_eta = v,
            "pump_scale" => self.pump_scale = Some(v),
            "tol" => self.tol = v,
            "truncation_threshold" => self.truncation_threshold = v,
            "n_max" | "sample_count" => {
                if !(v >= 0.0 && v.fract() == 0.0 && v <= 1e9) {
                    return Err(Error::InvalidParameter(format!("{key} must be a non-negative integer, got {v}")));
                }
                if key == "n_max" {
                    self.n_max = v as usize;
                } else {
                    self.sample_count = v as usize;
                }
            }
            _ => return Err(Error::InvalidParameter(format!("unknown scenario field {key:?}"))),
        }
        Ok(())
    }
}

/// Names accepted by [`StirapScenario::set_value`].
pub const NUMERIC_FIELDS: &[&str] = &[
    "epsilon",
    "epsilon_prime",
    "omega_c",
    "alpha",
    "g",
    "g_c",
    "g_phys",
    "g_prime",
    "g_prime_c",
    "g_prime_phys",
    "eta",
    "pulse_T",
    "omega0_T",
    "tau_over_T",
    "delta_p",
    "delta_s",
    "drive_eta",
    "pump_scale",
    "tol",
    "truncation_threshold",
    "n_max",
    "sample_count",
];

/// A scenario turned into operators and pulses.
#[derive(Clone, Debug)]
pub struct Configured {
    pub h0: OperatorMatrix,
    pub dipole: OperatorMatrix,
    pub drive: DriveConfig,
    pub spectrum: LabeledSpectrum,
    /// Roles with the intermediate resolved against the spectrum.
    pub roles: StirapRoles,
    pub pump_scale: f64,
    /// `δ = K 𝒲_s²`
    pub stark_coefficient: f64,
}

impl Configured {
    pub fn labels(&self) -> [Label; 3] {
        [self.roles.initial, self.roles.target, self.roles.intermediate]
    }
}

fn configure(scenario: &StirapScenario, scheme: Scheme) -> Result<Configured> {
    if scenario.scheme != scheme {
        return Err(Error::InvalidParameter(format!(
            "scenario is {}, expected {}",
            scenario.scheme.name(),
            scheme.name()
        )));
    }
    scenario.validate()?;
    let model = scenario.effective_model();
    let basis = scheme.basis(scenario.n_max);
    let h0 = hamiltonian(scheme, &basis, &model)?;
    let dipole = drive_operator(&basis, scenario.drive, scenario.drive_eta)?;
    let spectrum = label_states(scheme, &basis, &model)?;
    let mut roles = scenario.roles();
    if let (Scheme::Vee, Label::Doublet { branch, .. }) = (scheme, roles.intermediate) {
        roles.intermediate = vee_intermediate(&spectrum, branch);
    }
    let e_init = spectrum.energy(roles.initial)?;
    let e_int = spectrum.energy(roles.intermediate)?;
    let e_target = spectrum.energy(roles.target)?;
    let (pump_carrier, stokes_carrier) = match scheme {
        Scheme::Lambda => (e_int - e_init + scenario.delta_p, e_int - e_target + scenario.delta_s),
        _ => (e_init - e_int + scenario.delta_p, e_target - e_int + scenario.delta_s),
    };
    if !(pump_carrier > 0.0 && stokes_carrier > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "non-positive carrier (pump {pump_carrier}, Stokes {stokes_carrier})"
        )));
    }
    let pump_scale = match scenario.pump_scale {
        Some(k) => k,
        None => {
            let stokes = spectrum.matrix_element(&dipole, roles.intermediate, roles.target)?.norm();
            let pump = spectrum.matrix_element(&dipole, roles.intermediate, roles.initial)?.norm();
            if pump == 0.0 {
                return Err(Error::InvalidParameter("pump transition has a vanishing dipole element".into()));
            }
            stokes / pump
        }
    };
    let ws = scenario.stokes_peak();
    let t = scenario.pulse_t;
    let mut drive = DriveConfig::counterintuitive(pump_scale * ws, ws, t, scenario.tau_over_t * t, pump_carrier, stokes_carrier);
    let model_stark = StarkModel::new(&spectrum, &dipole)?;
    let stark_coefficient = two_photon_stark_coefficient(&model_stark, &roles, stokes_carrier)?;
    if scenario.compensation {
        drive.stokes.phase = compensation_phase_law(&drive, &spectrum, &dipole, &roles)?;
    }
    drive.validate()?;
    Ok(Configured {
        h0,
        dipole,
        drive,
        spectrum,
        roles,
        pump_scale,
        stark_coefficient,
    })
}

/// Λ configuration: `ω_p = E₀ − E₀ᵤ + δ_p`, `ω_s = E₀ − E₂ᵤ + δ_s` with
/// labeled energies.
pub fn configure_lambda(scenario: &StirapScenario) -> Result<Configured> {
    configure(scenario, Scheme::Lambda)
}

/// V configuration: `ω_p = E₀ᵤ − E₁± + δ_p`, `ω_s = E₂ᵤ − E₁± + δ_s`.
pub fn configure_vee(scenario: &StirapScenario) -> Result<Configured> {
    configure(scenario, Scheme::Vee)
}

/// Scalar figures reported with every run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub pump_peak: f64,
    pub stokes_peak: f64,
    pub pump_carrier: f64,
    pub stokes_carrier: f64,
    pub pump_scale: f64,
    /// Peak Rabi frequencies between dressed states.
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_p_t: f64,
    pub omega_s_t: f64,
    /// Both products above 10.
    pub adiabatic: bool,
    /// Selectivity of the stray channel, when `g′/g` is defined.
    pub selectivity: Option<f64>,
    /// `|δ|` at the Stokes peak.
    pub stark_detuning_peak: f64,
    pub norm_drift: f64,
    pub max_intermediate: f64,
    pub steps: usize,
    pub truncation: TruncationReport,
}

#[derive(Clone, Debug)]
pub struct StirapResult {
    pub history: PopulationHistory,
    pub final_initial_population: f64,
    pub final_target_population: f64,
    pub final_intermediate_population: f64,
    pub final_photon_distribution: Vec<f64>,
    pub diagnostics: Diagnostics,
    pub roles: StirapRoles,
}

impl StirapResult {
    pub fn summary(&self) -> StirapSummary {
        let other = *self.history.other.last().unwrap_or(&0.0);
        StirapSummary {
            final_initial: self.final_initial_population,
            final_target: self.final_target_population,
            final_intermediate: self.final_intermediate_population,
            final_other: other,
            photon_n2: self.final_photon_distribution.get(2).copied().unwrap_or(0.0),
            diagnostics: self.diagnostics,
        }
    }
}

/// Final numbers of a run without the time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirapSummary {
    pub final_initial: f64,
    pub final_target: f64,
    pub final_intermediate: f64,
    pub final_other: f64,
    pub photon_n2: f64,
    pub diagnostics: Diagnostics,
}

/// `A = (1/2η²) |(α² − (g/ε)²)/(2 − (g/ε)²)|`
pub fn selectivity_a(alpha: f64, g_over_eps: f64, eta: f64) -> Result<f64> {
    if eta == 0.0 {
        return Err(Error::FormulaDomain("selectivity is undefined without stray coupling (eta = 0)".into()));
    }
    let x2 = g_over_eps * g_over_eps;
    let den = 2.0 - x2;
    if den == 0.0 {
        return Err(Error::FormulaDomain("g/epsilon = sqrt(2) makes the selectivity singular".into()));
    }
    Ok(((alpha * alpha - x2) / den).abs() / (2.0 * eta * eta))
}

/// Configures and integrates one scenario from the labeled `|Ψ₀ᵤ⟩`.
pub fn run(scenario: &StirapScenario) -> Result<StirapResult> {
    let cfg = configure(scenario, scenario.scheme)?;
    run_configured(scenario, &cfg)
}

pub fn run_configured(scenario: &StirapScenario, cfg: &Configured) -> Result<StirapResult> {
    let psi0 = cfg.spectrum.vector(cfg.roles.initial)?;
    let opts = EvolveOptions {
        tol: scenario.tol,
        sample_count: scenario.sample_count,
        ..EvolveOptions::default()
    };
    let traj = evolve(&cfg.h0, &cfg.dipole, &cfg.drive, &psi0, &opts)?;
    let truncation = truncation_check(&traj, cfg.spectrum.basis(), scenario.truncation_threshold);
    if !truncation.passed {
        return Err(Error::Truncation {
            occupation: truncation.max_top_occupation,
            threshold: truncation.threshold,
        });
    }
    let labels = cfg.labels();
    let history = project_populations(&traj, &cfg.spectrum, &labels)?;
    let last = |k: usize| *history.populations[k].last().unwrap_or(&0.0);
    let max_intermediate = history.populations[2].iter().fold(0.0_f64, |a, &p| a.max(p));
    let final_photon_distribution = history
        .photon_distributions
        .last()
        .map(|(_, p)| p.clone())
        .unwrap_or_default();

    let element = |a: Label, b: Label| -> Result<f64> { Ok(cfg.spectrum.matrix_element(&cfg.dipole, a, b)?.norm()) };
    let omega_p = element(cfg.roles.intermediate, cfg.roles.initial)? * cfg.drive.pump.peak;
    let omega_s = element(cfg.roles.intermediate, cfg.roles.target)? * cfg.drive.stokes.peak;
    let t = scenario.pulse_t;
    let model = scenario.effective_model();
    let selectivity = model
        .eta()
        .filter(|e| *e != 0.0)
        .map(|eta| selectivity_a(model.alpha(), model.g / model.epsilon, eta))
        .transpose()?;
    let diagnostics = Diagnostics {
        pump_peak: cfg.drive.pump.peak,
        stokes_peak: cfg.drive.stokes.peak,
        pump_carrier: cfg.drive.pump.carrier,
        stokes_carrier: cfg.drive.stokes.carrier,
        pump_scale: cfg.pump_scale,
        omega_p,
        omega_s,
        omega_p_t: omega_p * t,
        omega_s_t: omega_s * t,
        adiabatic: omega_p * t > 10.0 && omega_s * t > 10.0,
        selectivity,
        stark_detuning_peak: (cfg.stark_coefficient * cfg.drive.stokes.peak * cfg.drive.stokes.peak).abs(),
        norm_drift: traj.norm_drift,
        max_intermediate,
        steps: traj.steps,
        truncation,
    };
    Ok(StirapResult {
        final_initial_population: last(0),
        final_target_population: last(1),
        final_intermediate_population: last(2),
        final_photon_distribution,
        diagnostics,
        roles: cfg.roles,
        history,
    })
}

/// One row of a sweep; failures are kept as messages.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<StirapSummary, String>,
}

/// Runs the template once per value of `axis`, in parallel, rows in input
/// order. An unknown axis fails before anything runs.
pub fn sweep(template: &StirapScenario, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    if !NUMERIC_FIELDS.contains(&axis) {
        return Err(Error::InvalidParameter(format!("unknown sweep axis {axis:?}")));
    }
    Ok(values
        .par_iter()
        .map(|&value| {
            let mut s = template.clone();
            let outcome = s
                .set_value(axis, value)
                .and_then(|_| run(&s))
                .map(|r| r.summary())
                .map_err(|e| e.to_string());
            SweepRow { value, outcome }
        })
        .collect())
}

impl fmt::Display for StirapSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "target {:.6} initial {:.6} intermediate {:.6} other {:.2e} p(n=2) {:.6}",
            self.final_target, self.final_initial, self.final_intermediate, self.final_other, self.photon_n2
        )
    }
}

/// Dressed dipole element `|⟨a|D|b⟩|` of a configured run.
pub fn dressed_element(cfg: &Configured, a: Label, b: Label) -> Result<Complex64> {
    cfg.spectrum.matrix_element(&cfg.dipole, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mut s: StirapScenario) -> StirapScenario {
        s.omega0_t = 50.0;
        s.pulse_t = 500.0;
        s.n_max = 5;
        s.sample_count = 50;
        s
    }

    #[test]
    fn selectivity_values() {
        assert!((selectivity_a(3.0, 0.25, 0.4).unwrap() - 14.4153225806).abs() < 1e-6);
        assert!((selectivity_a(3.0, 0.25, 0.8).unwrap() - 3.6038306).abs() < 1e-6);
        assert!((selectivity_a(3.0, 0.25, 1.0).unwrap() - 2.3064516).abs() < 1e-6);
        let limit = selectivity_a(3.0, 1e-9, 0.7).unwrap();
        assert!((limit - 9.0 / (4.0 * 0.49)).abs() < 1e-9);
        assert!(matches!(selectivity_a(3.0, 0.25, 0.0), Err(Error::FormulaDomain(_))));
    }

    #[test]
    fn lambda_carriers_two_photon_condition() {
        let s = StirapScenario::lambda_usc();
        let c = configure_lambda(&s).unwrap();
        let d = c.drive.stokes.carrier - c.drive.pump.carrier;
        assert!((d + 2.0).abs() < 1e-12, "{d}");
        let e0 = c.spectrum.energy(Label::Ground).unwrap();
        assert!((c.drive.pump.carrier - (e0 + 4.0)).abs() < 1e-12);
        // κ_p is the ratio of the dressed elements
        assert!((c.pump_scale - 0.0228).abs() < 2e-3, "{}", c.pump_scale);
    }

    #[test]
    fn carrier_self_consistency_with_stray() {
        for s in [StirapScenario::lambda_stray(0.2), StirapScenario::vee_usc()] {
            let c = configure(&s, s.scheme).unwrap();
            let e = |l| c.spectrum.energy(l).unwrap();
            let diff = (c.drive.pump.carrier - c.drive.stokes.carrier).abs();
            let expect = (e(Label::Ancilla(2)) - e(Label::Ancilla(0))).abs();
            assert!((diff - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn vee_carriers_without_stray() {
        let mut s = StirapScenario::vee_usc();
        s.model.g_prime = 0.0;
        s.model.g_prime_c = 0.0;
        let c = configure_vee(&s).unwrap();
        assert!((c.drive.stokes.carrier - c.drive.pump.carrier - 2.0).abs() < 1e-12);
        let e1 = c.spectrum.energy(c.roles.intermediate).unwrap();
        assert!((c.drive.pump.carrier - (3.5 - e1)).abs() < 1e-12);
    }

    #[test]
    fn scheme_mismatch_and_bad_intermediate() {
        assert!(configure_vee(&StirapScenario::lambda_usc()).is_err());
        let mut s = StirapScenario::lambda_usc();
        s.intermediate = Label::Ancilla(1);
        assert!(s.validate().is_err());
        let mut s = StirapScenario::vee_usc();
        s.omega0_t = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn field_setters() {
        let mut s = StirapScenario::lambda_usc();
        s.set("g_prime_phys", "0.1").unwrap();
        assert_eq!((s.model.g_prime, s.model.g_prime_c), (0.1, 0.1));
        s.set("compensation", "false").unwrap();
        assert!(!s.compensation);
        s.set("intermediate", "1+").unwrap();
        s.set("scheme", "vee").unwrap();
        assert!(s.validate().is_ok());
        s.set("n_max", "5").unwrap();
        assert_eq!(s.n_max, 5);
        assert!(s.set("n_max", "2.5").is_err());
        assert!(s.set("nonsense", "1").is_err());
        assert!(s.set("g", "abc").is_err());
        s.set("alpha", "2").unwrap();
        assert_eq!(s.model.epsilon_prime, 3.0);
    }

    #[test]
    fn empty_sweep_and_unknown_axis() {
        let s = small(StirapScenario::lambda_usc());
        assert!(sweep(&s, "g", &[]).unwrap().is_empty());
        assert!(sweep(&s, "bogus", &[1.0]).is_err());
    }

    #[test]
    fn sweep_keeps_order_and_row_errors() {
        let s = small(StirapScenario::lambda_usc());
        let rows = sweep(&s, "omega0_T", &[40.0, -1.0, 50.0]).unwrap();
        assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![40.0, -1.0, 50.0]);
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.is_err());
        let direct = run(&{
            let mut t = s.clone();
            t.omega0_t = 50.0;
            t
        })
        .unwrap()
        .summary();
        assert_eq!(rows[2].outcome.as_ref().unwrap(), &direct);
    }

    #[test]
    fn small_run_is_consistent() {
        let r = run(&small(StirapScenario::lambda_usc())).unwrap();
        let p = r.final_target_population;
        assert!((0.0..=1.0).contains(&p));
        assert!(r.diagnostics.norm_drift <= 1e-6);
        assert!((r.final_photon_distribution.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        for i in 0..r.history.times.len() {
            let total: f64 = r.history.populations.iter().map(|s| s[i]).sum();
            assert!(total <= 1.0 + 1e-6);
        }
        assert!(r.diagnostics.selectivity.is_none());
        assert!(!r.diagnostics.adiabatic);
    }
}
