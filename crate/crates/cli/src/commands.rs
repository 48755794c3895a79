//! The subcommands. Each writes one table (plus a summary for `stirap`).

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use uscstirap::hilbert::{BasisState, Level};
use uscstirap::models::{ModelParams, Scheme};
use uscstirap::protocols::{run, selectivity_a, sweep, StirapResult, StirapSummary};
use uscstirap::spectra::{
    label_states, perturbative_doublet_amplitudes, perturbative_ground_amplitudes, spectrum_scan,
    stokes_matrix_element, Branch, Label, Subspace,
};

use crate::config::ScenarioFile;
use crate::output::{fmt_f64, provenance, summary_path, Table};

/// Writes a scanned value into the model.
pub fn apply_scan(p: &mut ModelParams, key: &str, v: f64) {
    match key {
        "epsilon" => p.epsilon = v,
        "epsilon_prime" => p.epsilon_prime = v,
        "omega_c" => p.omega_c = v,
        "alpha" => *p = p.with_alpha(v),
        "g" => p.g = v,
        "g_c" => p.g_c = v,
        "g_phys" => {
            p.g = v;
            p.g_c = v;
        }
        "g_prime" => p.g_prime = v,
        "g_prime_c" => p.g_prime_c = v,
        "g_prime_phys" => {
            p.g_prime = v;
            p.g_prime_c = v;
        }
        "eta" => *p = p.with_eta(v),
        _ => unreachable!("scan key checked at load"),
    }
}

fn scanned_models(file: &ScenarioFile) -> Result<(String, Vec<(f64, ModelParams)>)> {
    let (key, grid) = file.scan_grid()?;
    let base = file.model_params()?;
    let rows = grid
        .into_iter()
        .map(|v| {
            let mut p = base;
            apply_scan(&mut p, &key, v);
            (v, p)
        })
        .collect();
    Ok((key, rows))
}

fn bare_ancilla_energy(scheme: Scheme, p: &ModelParams, n: usize) -> f64 {
    let atom = match scheme {
        Scheme::Vee => p.epsilon + p.epsilon_prime,
        _ => -p.epsilon_prime,
    };
    atom + n as f64 * p.omega_c
}

/// Labeled energies over the scan grid; a label absent from a row is `nan`.
/// Three-level schemes also get the uncoupled `|n u⟩` lines.
pub fn cmd_spectrum(file: &ScenarioFile, out: &Path) -> Result<()> {
    let scheme = file.scheme()?;
    let (key, grid) = file.scan_grid()?;
    let basis = scheme.basis(file.numerics.n_max);
    let rows = spectrum_scan(scheme, &file.model_params()?, &basis, &grid, |p, v| apply_scan(p, &key, v))?;

    let mut columns: Vec<Label> = Vec::new();
    for r in &rows {
        for l in &r.labels {
            if !columns.contains(l) {
                columns.push(*l);
            }
        }
    }
    columns.sort();
    let bare: Vec<usize> = if scheme == Scheme::Rabi {
        Vec::new()
    } else {
        (0..=file.numerics.n_max).collect()
    };
    let mut header = vec![key.clone()];
    header.extend(columns.iter().map(|l| format!("E_{l}")));
    header.extend(bare.iter().map(|n| format!("bare_{n}u")));

    let mut table = Table::create(out, &file.digest(), &header)?;
    for r in &rows {
        let mut p = file.model_params()?;
        apply_scan(&mut p, &key, r.value);
        let mut fields = vec![fmt_f64(r.value)];
        fields.extend(columns.iter().map(|l| fmt_f64(r.energy(*l).unwrap_or(f64::NAN))));
        fields.extend(bare.iter().map(|&n| fmt_f64(bare_ancilla_energy(scheme, &p, n))));
        table.row(&fields)?;
    }
    table.finish()
}

/// `(numerical, oracle, deviation)`; the deviation is relative, or absolute
/// when the oracle vanishes.
fn compare(num: f64, oracle: Option<f64>) -> [f64; 3] {
    match oracle {
        Some(o) if o != 0.0 => [num, o, (num - o) / o.abs()],
        Some(o) => [num, o, num - o],
        None => [num, f64::NAN, f64::NAN],
    }
}

/// Dressed Rabi amplitudes against their oracles, and for three-level
/// schemes the Stokes element in the full basis and an excitation subspace.
pub fn cmd_amplitudes(file: &ScenarioFile, out: &Path) -> Result<()> {
    let scheme = file.scheme()?;
    let branch = file.branch()?;
    let (key, rows) = scanned_models(file)?;
    let n_max = file.numerics.n_max;
    let rabi_basis = Scheme::Rabi.basis(n_max);
    let three_level = scheme != Scheme::Rabi;
    let cutoff = file.numerics.excitation_cutoff.unwrap_or(match scheme {
        Scheme::Vee => 6,
        _ => 4,
    });

    let mut header = vec![key.clone()];
    for name in ["c00", "c02", "d1m2", "d1p2"] {
        for suffix in ["num", "pert", "dev"] {
            header.push(format!("{name}_{suffix}"));
        }
    }
    if three_level {
        header.push("stokes_full".into());
        header.push(format!("stokes_n{cutoff}"));
    }
    let mut table = Table::create(out, &file.digest(), &header)?;

    for (v, p) in rows {
        let rabi = ModelParams {
            epsilon: p.epsilon,
            epsilon_prime: 0.0,
            omega_c: p.omega_c,
            g: p.g,
            g_c: p.g_c,
            g_prime: 0.0,
            g_prime_c: 0.0,
        };
        let spec = label_states(Scheme::Rabi, &rabi_basis, &rabi)?;
        let amp = |label: Label, s: BasisState| -> Result<f64> {
            // Without coupling the doublets are bare products with no |2e⟩ part.
            if !spec.contains(label) {
                return Ok(0.0);
            }
            Ok(spec.amplitude(label, s)?)
        };
        // The closed form takes the |1g⟩ component of a doublet as positive;
        // tracked vectors fix the |0e⟩ component instead.
        let doublet_amp = |label: Label, s: BasisState| -> Result<f64> {
            let sign = amp(label, BasisState::new(1, Level::G))?.signum();
            Ok(sign * amp(label, s)?)
        };
        let ground = perturbative_ground_amplitudes(&rabi).ok();
        let doublet = perturbative_doublet_amplitudes(&rabi).ok();
        let e2 = BasisState::new(2, Level::E);
        let minus = Label::Doublet { n: 1, branch: Branch::Minus };
        let plus = Label::Doublet { n: 1, branch: Branch::Plus };
        let cols = [
            compare(amp(Label::Ground, BasisState::new(0, Level::G))?, ground.map(|g| g.0)),
            compare(amp(Label::Ground, BasisState::new(2, Level::G))?, ground.map(|g| g.1)),
            compare(doublet_amp(minus, e2)?, doublet.map(|d| d.0)),
            compare(doublet_amp(plus, e2)?, doublet.map(|d| d.1)),
        ];
        let mut fields = vec![fmt_f64(v)];
        fields.extend(cols.iter().flatten().map(|x| fmt_f64(*x)));
        if three_level {
            let full = stokes_matrix_element(scheme, &p, Subspace::Photons(n_max), branch)
                .with_context(|| format!("Stokes element at {key} = {v}"))?;
            let sub = stokes_matrix_element(scheme, &p, Subspace::Excitations(cutoff), branch)
                .with_context(|| format!("subspace Stokes element at {key} = {v}"))?;
            fields.push(fmt_f64(full));
            fields.push(fmt_f64(sub));
        }
        table.row(&fields)?;
    }
    table.finish()
}

fn summary_text(digest: &str, r: &StirapResult) -> String {
    let s = r.summary();
    let d = &s.diagnostics;
    let mut t = provenance(digest);
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(t, "{k} = {v}");
    };
    kv("initial", r.roles.initial.to_string());
    kv("intermediate", r.roles.intermediate.to_string());
    kv("target", r.roles.target.to_string());
    kv("final_initial", fmt_f64(s.final_initial));
    kv("final_target", fmt_f64(s.final_target));
    kv("final_intermediate", fmt_f64(s.final_intermediate));
    kv("final_other", fmt_f64(s.final_other));
    let photons: Vec<String> = r.final_photon_distribution.iter().map(|p| fmt_f64(*p)).collect();
    kv("photon_distribution", format!("[{}]", photons.join(", ")));
    kv("pump_peak", fmt_f64(d.pump_peak));
    kv("stokes_peak", fmt_f64(d.stokes_peak));
    kv("pump_carrier", fmt_f64(d.pump_carrier));
    kv("stokes_carrier", fmt_f64(d.stokes_carrier));
    kv("pump_scale", fmt_f64(d.pump_scale));
    kv("omega_p", fmt_f64(d.omega_p));
    kv("omega_s", fmt_f64(d.omega_s));
    kv("omega_p_T", fmt_f64(d.omega_p_t));
    kv("omega_s_T", fmt_f64(d.omega_s_t));
    kv("adiabatic", d.adiabatic.to_string());
    kv("selectivity_A", fmt_f64(d.selectivity.unwrap_or(f64::NAN)));
    kv("stark_detuning_peak", fmt_f64(d.stark_detuning_peak));
    kv("max_intermediate", fmt_f64(d.max_intermediate));
    kv("norm_drift", fmt_f64(d.norm_drift));
    kv("steps", d.steps.to_string());
    kv("truncation_top_occupation", fmt_f64(d.truncation.max_top_occupation));
    t
}

/// Population history plus a sibling summary file.
pub fn cmd_stirap(file: &ScenarioFile, out: &Path) -> Result<StirapSummary> {
    let scenario = file.scenario()?;
    let result = run(&scenario)?;
    let digest = file.digest();
    let h = &result.history;
    let header: Vec<String> = ["t", "P_initial", "P_target", "P_intermediate", "P_other"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut table = Table::create(out, &digest, &header)?;
    let series = [
        h.series(result.roles.initial)?,
        h.series(result.roles.target)?,
        h.series(result.roles.intermediate)?,
        &h.other[..],
    ];
    for (i, t) in h.times.iter().enumerate() {
        let mut fields = vec![fmt_f64(*t)];
        fields.extend(series.iter().map(|s| fmt_f64(s[i])));
        table.row(&fields)?;
    }
    table.finish()?;
    let sp = summary_path(out);
    std::fs::write(&sp, summary_text(&digest, &result)).with_context(|| format!("writing {}", sp.display()))?;
    Ok(result.summary())
}

/// One summary row per value; failed rows keep their message.
pub fn cmd_sweep(file: &ScenarioFile, out: &Path) -> Result<usize> {
    let Some(sw) = &file.sweep else {
        bail!("sweep needs a [sweep] section");
    };
    let template = file.scenario()?;
    let rows = sweep(&template, &sw.parameter, &sw.values)?;
    let header: Vec<String> = [
        sw.parameter.as_str(),
        "final_initial",
        "final_target",
        "final_intermediate",
        "final_other",
        "photon_n2",
        "omega_p_T",
        "omega_s_T",
        "adiabatic",
        "selectivity_A",
        "max_intermediate",
        "norm_drift",
        "error",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut table = Table::create(out, &file.digest(), &header)?;
    let mut failed = 0;
    for r in &rows {
        let mut fields = vec![fmt_f64(r.value)];
        match &r.outcome {
            Ok(s) => {
                let d = &s.diagnostics;
                fields.extend(
                    [s.final_initial, s.final_target, s.final_intermediate, s.final_other, s.photon_n2, d.omega_p_t, d.omega_s_t]
                        .map(fmt_f64),
                );
                fields.push(d.adiabatic.to_string());
                fields.extend([d.selectivity.unwrap_or(f64::NAN), d.max_intermediate, d.norm_drift].map(fmt_f64));
                fields.push(String::new());
            }
            Err(msg) => {
                fields.extend((0..7).map(|_| fmt_f64(f64::NAN)));
                fields.push(String::new());
                fields.extend((0..3).map(|_| fmt_f64(f64::NAN)));
                fields.push(msg.clone());
                failed += 1;
            }
        }
        table.row(&fields)?;
    }
    table.finish()?;
    Ok(failed)
}

/// Selectivity `A(α, g/ε, η)` of the model, or over the scan grid.
pub fn cmd_selectivity(file: &ScenarioFile, out: &Path) -> Result<()> {
    let (key, rows) = if file.scan.is_some() {
        scanned_models(file)?
    } else {
        ("row".to_string(), vec![(0.0, file.model_params()?)])
    };
    let first = format!("scan_{key}");
    let header: Vec<String> = [first.as_str(), "alpha", "g_over_eps", "eta", "A", "error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut table = Table::create(out, &file.digest(), &header)?;
    for (v, p) in rows {
        let eta = p.eta().unwrap_or(f64::NAN);
        let x = p.g / p.epsilon;
        let a = match p.eta() {
            Some(eta) => selectivity_a(p.alpha(), x, eta).map_err(|e| e.to_string()),
            None => Err("selectivity is undefined at g = 0".to_string()),
        };
        let (a, err) = match a {
            Ok(a) => (a, String::new()),
            Err(e) => (f64::NAN, e),
        };
        let mut fields: Vec<String> = [v, p.alpha(), x, eta, a].map(fmt_f64).to_vec();
        fields.push(err);
        table.row(&fields)?;
    }
    table.finish()
}
