//! Scenario files: strict TOML, `--set` overrides, digest.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use uscstirap::models::{DriveScheme, ModelParams, Scheme};
use uscstirap::protocols::{StirapScenario, DEFAULT_OMEGA0};
use uscstirap::spectra::{Branch, Label};

/// Model keys a scan may vary. `g_phys` and `g_prime_phys` move a coupling
/// together with its counterrotating partner, `eta` sets `g′ = η g`.
pub const SCAN_KEYS: &[&str] = &[
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
];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelSection,
    #[serde(default)]
    pub pulses: PulseSection,
    #[serde(default)]
    pub drive: DriveSection,
    pub numerics: NumericsSection,
    pub scan: Option<ScanSection>,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `rabi`, `lambda` or `vee`.
    pub scheme: String,
    #[serde(default = "one")]
    pub epsilon: f64,
    /// Three-level schemes need exactly one of `epsilon_prime` and `alpha`.
    pub epsilon_prime: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(default = "one")]
    pub omega_c: f64,
    pub g: f64,
    /// Defaults to `g`.
    pub g_c: Option<f64>,
    #[serde(default)]
    pub g_prime: f64,
    /// Defaults to `g_prime`.
    pub g_prime_c: Option<f64>,
    /// Drop the counterrotating couplings.
    #[serde(default)]
    pub rwa: bool,
    /// Intermediate label, `0` for Λ, `1-` or `1+` for V.
    pub intermediate: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(rename = "omega0_T")]
    pub omega0_t: Option<f64>,
    /// Defaults to `omega0_T / 0.02`.
    #[serde(rename = "pulse_T")]
    pub pulse_t: Option<f64>,
    #[serde(rename = "tau_over_T", default = "default_tau")]
    pub tau_over_t: f64,
    #[serde(default)]
    pub delta_p: f64,
    #[serde(default)]
    pub delta_s: f64,
    #[serde(default)]
    pub compensation: bool,
    /// Pump to Stokes peak ratio; from dressed dipole elements when absent.
    pub pump_scale: Option<f64>,
}

impl Default for PulseSection {
    fn default() -> Self {
        Self {
            omega0_t: None,
            pulse_t: None,
            tau_over_t: default_tau(),
            delta_p: 0.0,
            delta_s: 0.0,
            compensation: false,
            pump_scale: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Drive operator; the ladder of the scheme when absent.
    pub operator: Option<String>,
    /// Ladder ratio; defaults to `g_prime / g`.
    pub eta: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub n_max: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub sample_count: usize,
    #[serde(default = "default_truncation")]
    pub truncation_threshold: f64,
    /// Excitation cutoff of the subspace Stokes element (4 for Λ, 6 for V).
    pub excitation_cutoff: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub parameter: String,
    /// Either an explicit list or `start`, `stop`, `count`.
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}
fn default_tau() -> f64 {
    0.75
}
fn default_tol() -> f64 {
    1e-9
}
fn default_samples() -> usize {
    2000
}
fn default_truncation() -> f64 {
    1e-6
}

/// Parses `raw` as a TOML value, falling back to a plain string.
fn parse_override_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies `section.key=value` to the raw table.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override {spec:?} is not of the form section.key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override {spec:?} has an empty key");
    }
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut cur = table;
    for k in parents {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override {spec:?}: {k} is not a table"))?;
    }
    cur.insert(last.to_string(), parse_override_value(raw.trim()));
    Ok(())
}

impl ScenarioFile {
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let file: ScenarioFile = toml::Value::Table(table)
            .try_into()
            .context("invalid scenario configuration")?;
        file.check()?;
        Ok(file)
    }

    /// Reads `path`, applies overrides in order, then parses strictly.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    fn check(&self) -> Result<()> {
        let scheme = self.scheme()?;
        if scheme != Scheme::Rabi && self.model.epsilon_prime.is_some() == self.model.alpha.is_some() {
            bail!("model: a three-level scheme needs exactly one of epsilon_prime and alpha");
        }
        if let Some(op) = &self.drive.operator {
            op.parse::<DriveScheme>()?;
        }
        if let Some(s) = &self.scan {
            if !SCAN_KEYS.contains(&s.parameter.as_str()) {
                bail!("scan: unknown parameter {:?}, expected one of {}", s.parameter, SCAN_KEYS.join(", "));
            }
            let range = [s.start.is_some(), s.stop.is_some(), s.count.is_some()];
            match (&s.values, range) {
                (Some(_), [false, false, false]) | (None, [true, true, true]) => {}
                _ => bail!("scan: give either values or all of start, stop, count"),
            }
        }
        self.model_params()?.validate()?;
        Ok(())
    }

    pub fn scheme(&self) -> Result<Scheme> {
        Ok(self.model.scheme.parse()?)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let epsilon_prime = match (m.epsilon_prime, m.alpha) {
            (Some(e), _) => e,
            (None, Some(a)) => (1.0 + a) * m.epsilon,
            (None, None) => 0.0,
        };
        let p = ModelParams {
            epsilon: m.epsilon,
            epsilon_prime,
            omega_c: m.omega_c,
            g: m.g,
            g_c: m.g_c.unwrap_or(m.g),
            g_prime: m.g_prime,
            g_prime_c: m.g_prime_c.unwrap_or(m.g_prime),
        };
        Ok(if m.rwa { p.rwa() } else { p })
    }

    pub fn branch(&self) -> Result<Branch> {
        match self.model.intermediate.as_deref().map(str::parse::<Label>).transpose()? {
            Some(Label::Doublet { branch, .. }) => Ok(branch),
            _ => Ok(Branch::Minus),
        }
    }

    pub fn scan_grid(&self) -> Result<(String, Vec<f64>)> {
        let s = self.scan.as_ref().ok_or_else(|| anyhow!("this command needs a [scan] section"))?;
        let grid = match (&s.values, s.start, s.stop, s.count) {
            (Some(v), ..) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            },
            _ => unreachable!("checked at load"),
        };
        Ok((s.parameter.clone(), grid))
    }

    /// The STIRAP scenario described by the file.
    pub fn scenario(&self) -> Result<StirapScenario> {
        let scheme = self.scheme()?;
        let model = self.model_params()?;
        let intermediate = match (&self.model.intermediate, scheme) {
            (Some(l), _) => l.parse()?,
            (None, Scheme::Vee) => Label::Doublet { n: 1, branch: Branch::Minus },
            (None, _) => Label::Ground,
        };
        let drive = match (&self.drive.operator, scheme) {
            (Some(op), _) => op.parse()?,
            (None, Scheme::Vee) => DriveScheme::VeeLadder,
            (None, _) => DriveScheme::LambdaLadder,
        };
        let drive_eta = match self.drive.eta {
            Some(e) => e,
            None => match model.eta() {
                Some(e) if e > 0.0 => e,
                _ if drive.is_ladder() => bail!("drive.eta is required when g_prime/g is zero or undefined"),
                _ => 1.0,
            },
        };
        let omega0_t = self
            .pulses
            .omega0_t
            .ok_or_else(|| anyhow!("pulses.omega0_T is required for STIRAP runs"))?;
        let pulse_t = self.pulses.pulse_t.unwrap_or(omega0_t / DEFAULT_OMEGA0);
        let s = StirapScenario {
            scheme,
            model,
            model_rwa: false,
            intermediate,
            pulse_t,
            omega0_t,
            tau_over_t: self.pulses.tau_over_t,
            delta_p: self.pulses.delta_p,
            delta_s: self.pulses.delta_s,
            compensation: self.pulses.compensation,
            n_max: self.numerics.n_max,
            drive,
            drive_eta,
            pump_scale: self.pulses.pump_scale,
            tol: self.numerics.tol,
            sample_count: self.numerics.sample_count,
            truncation_threshold: self.numerics.truncation_threshold,
        };
        s.validate()?;
        Ok(s)
    }

    /// Canonical TOML of the resolved file (defaults filled in).
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }

    /// Hex SHA-256 of [`Self::canonical`].
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [model]
        scheme = "lambda"
        epsilon_prime = 4.0
        g = 0.25
        [numerics]
        n_max = 6
    "#;

    fn table(s: &str) -> toml::Table {
        toml::from_str(s).unwrap()
    }

    #[test]
    fn defaults_filled_in() {
        let f = ScenarioFile::from_table(table(MINIMAL)).unwrap();
        assert_eq!(f.pulses.tau_over_t, 0.75);
        assert_eq!((f.pulses.delta_p, f.pulses.delta_s), (0.0, 0.0));
        assert!(!f.pulses.compensation);
        assert_eq!(f.numerics.tol, 1e-9);
        let p = f.model_params().unwrap();
        assert_eq!((p.g_c, p.g_prime_c), (0.25, 0.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut t = table(MINIMAL);
        apply_override(&mut t, "model.gg=0.3").unwrap();
        assert!(ScenarioFile::from_table(t).is_err());
        let mut t = table(MINIMAL);
        apply_override(&mut t, "extra.x=1").unwrap();
        assert!(ScenarioFile::from_table(t).is_err());
    }

    #[test]
    fn missing_required_rejected() {
        let t = table("[model]\nscheme = \"rabi\"\ng = 0.1\n");
        assert!(ScenarioFile::from_table(t).is_err());
        let t = table("[model]\nscheme = \"vee\"\ng = 0.1\n[numerics]\nn_max = 4\n");
        assert!(ScenarioFile::from_table(t).is_err());
    }

    #[test]
    fn overrides_typed() {
        let mut t = table(MINIMAL);
        apply_override(&mut t, "model.g=0.3").unwrap();
        apply_override(&mut t, "model.scheme=vee").unwrap();
        apply_override(&mut t, "model.epsilon_prime=2.5").unwrap();
        apply_override(&mut t, "pulses.compensation=true").unwrap();
        apply_override(&mut t, "sweep.values=[0.1, 0.2]").unwrap();
        apply_override(&mut t, "sweep.parameter=g_prime_phys").unwrap();
        let f = ScenarioFile::from_table(t).unwrap();
        assert_eq!(f.model.g, 0.3);
        assert_eq!(f.scheme().unwrap(), Scheme::Vee);
        assert!(f.pulses.compensation);
        assert_eq!(f.sweep.unwrap().values, vec![0.1, 0.2]);
        assert!(apply_override(&mut table(MINIMAL), "no_equals").is_err());
        assert!(apply_override(&mut table(MINIMAL), "model..g=1").is_err());
    }

    #[test]
    fn digest_tracks_resolved_content() {
        let a = ScenarioFile::from_table(table(MINIMAL)).unwrap();
        let mut t = table(MINIMAL);
        apply_override(&mut t, "numerics.tol=1e-9").unwrap();
        let b = ScenarioFile::from_table(t).unwrap();
        assert_eq!(a.digest(), b.digest());
        let mut t = table(MINIMAL);
        apply_override(&mut t, "numerics.tol=1e-10").unwrap();
        let c = ScenarioFile::from_table(t).unwrap();
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn scenario_needs_pulse_area() {
        let f = ScenarioFile::from_table(table(MINIMAL)).unwrap();
        assert!(f.scenario().is_err());
        let mut t = table(MINIMAL);
        apply_override(&mut t, "pulses.omega0_T=900").unwrap();
        apply_override(&mut t, "drive.eta=0.4").unwrap();
        let s = ScenarioFile::from_table(t).unwrap().scenario().unwrap();
        assert_eq!(s.pulse_t, 45000.0);
        assert_eq!(s.intermediate, Label::Ground);
        assert_eq!(s.drive, DriveScheme::LambdaLadder);
    }

    #[test]
    fn ladder_eta_defaults_to_stray_ratio() {
        let mut t = table(MINIMAL);
        apply_override(&mut t, "model.g_prime=0.1").unwrap();
        apply_override(&mut t, "pulses.omega0_T=100").unwrap();
        let s = ScenarioFile::from_table(t).unwrap().scenario().unwrap();
        assert!((s.drive_eta - 0.4).abs() < 1e-15);
    }

    #[test]
    fn linear_range_grid() {
        let mut t = table(MINIMAL);
        apply_override(&mut t, "scan.parameter=g_phys").unwrap();
        apply_override(&mut t, "scan.start=0.0").unwrap();
        apply_override(&mut t, "scan.stop=0.3").unwrap();
        apply_override(&mut t, "scan.count=4").unwrap();
        let (k, grid) = ScenarioFile::from_table(t).unwrap().scan_grid().unwrap();
        assert_eq!(k, "g_phys");
        assert_eq!(grid.len(), 4);
        assert!((grid[3] - 0.3).abs() < 1e-15);
        let mut t = table(MINIMAL);
        apply_override(&mut t, "scan.parameter=g").unwrap();
        apply_override(&mut t, "scan.start=0.0").unwrap();
        assert!(ScenarioFile::from_table(t).is_err());
    }
}
