//! Dressed-state spectra: dense Hermitian diagonalization, labeling by
//! continuation from the Jaynes-Cummings limit, amplitude extraction, the
//! closed-form perturbative amplitudes, and drive matrix elements between
//! dressed states.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{parity_sectors, Basis, BasisState, ExcitationWeights, Level, OperatorMatrix};
use crate::models::{hamiltonian, ModelParams, Scheme};

const HERMITIAN_GATE: f64 = 1e-10;
const DEGENERACY: f64 = 1e-9;

/// Eigenpairs in ascending energy order; eigenvectors are the columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// max_k |H v_k − λ_k v_k|
    pub fn residual(&self, h: &OperatorMatrix) -> f64 {
        let hv = h.matrix() * &self.vectors;
        let mut worst = 0.0_f64;
        for k in 0..self.len() {
            let lam = Complex64::new(self.values[k], 0.0);
            for i in 0..hv.nrows() {
                worst = worst.max((hv[(i, k)] - self.vectors[(i, k)] * lam).norm());
            }
        }
        worst
    }
}

/// Dense Hermitian eigensolve. Real symmetric input takes a real path.
pub fn diagonalize(h: &OperatorMatrix) -> Result<Eigensystem> {
    let asymmetry = h.hermiticity_defect();
    if asymmetry > HERMITIAN_GATE {
        return Err(Error::NonHermitian { asymmetry });
    }
    let n = h.dim();
    let (values, vectors) = if h.max_imag() == 0.0 {
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (h.get(i, j).re + h.get(j, i).re));
        let eig = SymmetricEigen::new(m);
        (eig.eigenvalues, eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let m = (h.matrix() + h.matrix().adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(m);
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(Eigensystem {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]),
    })
}

/// Diagonalizes each invariant block separately and embeds the eigenvectors
/// back, so every eigenvector is supported on exactly one block.
pub fn diagonalize_blocks(h: &OperatorMatrix, blocks: &[Vec<usize>]) -> Result<Eigensystem> {
    let n = h.dim();
    let mut pairs: Vec<(f64, DVector<Complex64>)> = Vec::with_capacity(n);
    for block in blocks.iter().filter(|b| !b.is_empty()) {
        let sub = diagonalize(&h.restrict(block))?;
        for k in 0..sub.len() {
            let mut v = DVector::zeros(n);
            for (r, &i) in block.iter().enumerate() {
                v[i] = sub.vectors[(r, k)];
            }
            pairs.push((sub.values[k], v));
        }
    }
    if pairs.len() != n {
        return Err(Error::DimensionMismatch { left: pairs.len(), right: n });
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| pairs[j].1[i]);
    Ok(Eigensystem { values, vectors })
}

/// Parity sectors when `h` commutes with parity, otherwise one block.
pub fn diagonalize_by_parity(h: &OperatorMatrix, basis: &Basis, weights: &ExcitationWeights) -> Result<Eigensystem> {
    diagonalize_blocks(h, &invariant_blocks(h, basis, |s| weights.excitations(s).map(|n| n.rem_euclid(2)))?)
}

/// Groups basis indices by `key`; falls back to a single block unless `h`
/// has no matrix element between different groups.
fn invariant_blocks(
    h: &OperatorMatrix,
    basis: &Basis,
    key: impl Fn(BasisState) -> Result<i64>,
) -> Result<Vec<Vec<usize>>> {
    let keys: Vec<i64> = basis.states().iter().map(|s| key(*s)).collect::<Result<_>>()?;
    let n = basis.dim();
    let mut leak = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if keys[i] != keys[j] {
                leak = leak.max(h.get(i, j).norm());
            }
        }
    }
    if leak > 0.0 {
        return Ok(vec![(0..n).collect()]);
    }
    let mut distinct: Vec<i64> = keys.clone();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(distinct
        .iter()
        .map(|k| (0..n).filter(|&i| keys[i] == *k).collect())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Minus,
    Plus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Minus => "-",
            Branch::Plus => "+",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "-" | "minus" | "Minus" => Ok(Branch::Minus),
            "+" | "plus" | "Plus" => Ok(Branch::Plus),
            _ => Err(Error::InvalidParameter(format!("unknown branch '{s}'"))),
        }
    }
}

/// JC-limit quantum numbers of a dressed eigenstate.
///
/// `Product` covers states without a JC partner: every doublet state when
/// `g = 0`, and states whose partner was truncated away.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Continuation of `|0g⟩`.
    Ground,
    /// Continuation of the JC doublet built from `|N−1, e⟩` and `|N, g⟩`.
    Doublet { n: usize, branch: Branch },
    /// Continuation of `|n u⟩`.
    Ancilla(usize),
    Product(BasisState),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Ground => f.write_str("0"),
            Label::Doublet { n, branch } => write!(f, "{n}{branch}"),
            Label::Ancilla(n) => write!(f, "{n}u"),
            Label::Product(s) => write!(f, "[{}{}]", s.photon_n, s.level),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    /// Parses the `Display` form: `0`, `1-`, `2+`, `2u`, `[1e]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse label '{s}'"));
        let s = s.trim();
        if s == "0" {
            return Ok(Label::Ground);
        }
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let (num, lev) = inner.split_at(inner.len().checked_sub(1).ok_or_else(bad)?);
            let n = num.parse().map_err(|_| bad())?;
            let level = match lev {
                "u" => Level::U,
                "g" => Level::G,
                "e" => Level::E,
                _ => return Err(bad()),
            };
            return Ok(Label::Product(BasisState::new(n, level)));
        }
        let (num, tail) = s.split_at(s.len().checked_sub(1).ok_or_else(bad)?);
        let n: usize = num.parse().map_err(|_| bad())?;
        match tail {
            "u" => Ok(Label::Ancilla(n)),
            "-" | "+" => Ok(Label::Doublet {
                n,
                branch: tail.parse()?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Knobs for labeling by continuation.
#[derive(Clone, Copy, Debug)]
pub struct LabelOptions {
    /// Ramp steps per stage (at least 20).
    pub steps: usize,
    /// How many times a step may be halved when matching is ambiguous.
    pub max_refinements: usize,
    /// Minimum gap between the best and second-best overlap.
    pub ambiguity: f64,
}

impl Default for LabelOptions {
    fn default() -> Self {
        Self {
            steps: 20,
            max_refinements: 5,
            ambiguity: 1e-3,
        }
    }
}

/// Eigenpairs of an undriven Hamiltonian with continuation labels.
///
/// Each eigenvector is phased so that its overlap with the reference state it
/// was continued from is real and positive at every ramp step; for real
/// Hamiltonians all amplitudes are then real.
#[derive(Clone, Debug)]
pub struct LabeledSpectrum {
    basis: Basis,
    energies: Vec<f64>,
    vectors: DMatrix<Complex64>,
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
}

impl LabeledSpectrum {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn contains(&self, label: Label) -> bool {
        self.index.contains_key(&label)
    }

    pub fn index_of(&self, label: Label) -> Result<usize> {
        self.index.get(&label).copied().ok_or(Error::UnknownLabel(label))
    }

    pub fn energy(&self, label: Label) -> Result<f64> {
        Ok(self.energies[self.index_of(label)?])
    }

    pub fn vector(&self, label: Label) -> Result<DVector<Complex64>> {
        Ok(self.vectors.column(self.index_of(label)?).into_owned())
    }

    /// `⟨state|Ψ_label⟩` (real part; the imaginary part vanishes for the real
    /// Hamiltonians built in this crate).
    pub fn amplitude(&self, label: Label, state: BasisState) -> Result<f64> {
        let k = self.index_of(label)?;
        let i = self.basis.index_of(state).ok_or(Error::InvalidParameter(format!(
            "product state {state} is not in the basis"
        )))?;
        Ok(self.vectors[(i, k)].re)
    }

    /// `V† O V`, the operator in the dressed basis (same ordering as `labels`).
    pub fn dressed(&self, op: &OperatorMatrix) -> DMatrix<Complex64> {
        self.vectors.adjoint() * op.matrix() * &self.vectors
    }

    /// `⟨Ψ_bra|O|Ψ_ket⟩`
    pub fn matrix_element(&self, op: &OperatorMatrix, bra: Label, ket: Label) -> Result<Complex64> {
        let a = self.vector(bra)?;
        let b = self.vector(ket)?;
        Ok(op.braket(&a, &b))
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let mut worst = 0.0_f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest amplitude outside each eigenvector's dominant parity sector.
    pub fn cross_parity_defect(&self, weights: &ExcitationWeights) -> Result<f64> {
        let sectors = parity_sectors(&self.basis, weights)?;
        let mut worst = 0.0_f64;
        for k in 0..self.len() {
            let weight = |s: &Vec<usize>| s.iter().map(|&i| self.vectors[(i, k)].norm_sqr()).sum::<f64>();
            let minor = if weight(&sectors[0]) >= weight(&sectors[1]) { &sectors[1] } else { &sectors[0] };
            for &i in minor {
                worst = worst.max(self.vectors[(i, k)].norm());
            }
        }
        Ok(worst)
    }

    pub fn eigensystem(&self) -> Eigensystem {
        Eigensystem {
            values: self.energies.clone(),
            vectors: self.vectors.clone(),
        }
    }
}

/// Free-function form of [`LabeledSpectrum::amplitude`].
pub fn amplitude(spec: &LabeledSpectrum, label: Label, state: BasisState) -> Result<f64> {
    spec.amplitude(label, state)
}

/// Reference eigenstates of the diagonal part plus the corotating e–g
/// coupling `g`, which splits into 1×1 and 2×2 blocks.
fn reference_states(basis: &Basis, p: &ModelParams) -> (Vec<Label>, DMatrix<Complex64>) {
    let n = basis.dim();
    let mut labels = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    let mut col = 0;
    let mut put = |labels: &mut Vec<Label>, label: Label, entries: &[(usize, f64)]| {
        for &(i, x) in entries {
            vectors[(i, col)] = Complex64::new(x, 0.0);
        }
        labels.push(label);
        col += 1;
    };
    for (i, s) in basis.states().iter().enumerate() {
        match s.level {
            Level::U => put(&mut labels, Label::Ancilla(s.photon_n), &[(i, 1.0)]),
            Level::G if s.photon_n == 0 => put(&mut labels, Label::Ground, &[(i, 1.0)]),
            Level::G => {
                let partner = basis.index_of(BasisState::new(s.photon_n - 1, Level::E));
                match partner {
                    Some(ie) if p.g > 0.0 => {
                        let big_n = s.photon_n;
                        let hee = p.epsilon + (big_n - 1) as f64 * p.omega_c;
                        let hgg = big_n as f64 * p.omega_c;
                        let off = p.g * (big_n as f64).sqrt();
                        let d = 0.5 * (hee - hgg);
                        let r = d.hypot(off);
                        for (branch, xg) in [(Branch::Minus, -r - d), (Branch::Plus, r - d)] {
                            let norm = off.hypot(xg);
                            put(
                                &mut labels,
                                Label::Doublet { n: big_n, branch },
                                &[(ie, off / norm), (i, xg / norm)],
                            );
                        }
                    }
                    _ => put(&mut labels, Label::Product(*s), &[(i, 1.0)]),
                }
            }
            Level::E => {
                let paired = p.g > 0.0 && basis.index_of(BasisState::new(s.photon_n + 1, Level::G)).is_some();
                if !paired {
                    put(&mut labels, Label::Product(*s), &[(i, 1.0)]);
                }
            }
        }
    }
    debug_assert_eq!(col, n);
    (labels, vectors)
}

struct Tracked {
    labels: Vec<Label>,
    vectors: DMatrix<Complex64>,
    energies: Vec<f64>,
}

fn gram_schmidt(vs: &mut [DVector<Complex64>]) {
    for k in 0..vs.len() {
        for j in 0..k {
            let proj = vs[j].dotc(&vs[k]);
            let vj = vs[j].clone();
            vs[k] -= vj * proj;
        }
        let norm = vs[k].norm();
        if norm > 0.0 {
            vs[k] /= Complex64::new(norm, 0.0);
        }
    }
}

fn block_indices_of(vectors: &DMatrix<Complex64>, block: &[usize]) -> Vec<usize> {
    (0..vectors.ncols())
        .filter(|&k| block.iter().map(|&i| vectors[(i, k)].norm_sqr()).sum::<f64>() > 0.5)
        .collect()
}

enum StepOutcome {
    Matched(Tracked),
    Ambiguous {
        first: Label,
        second: Label,
        overlap_first: f64,
        overlap_second: f64,
    },
}

/// Matches the eigenvectors of `h` against the tracked ones, block by block.
fn match_step(h: &OperatorMatrix, blocks: &[Vec<usize>], prev: &Tracked, opts: &LabelOptions) -> Result<StepOutcome> {
    let n = h.dim();
    let mut labels = vec![None; n];
    let mut vectors = DMatrix::zeros(n, n);
    let mut energies = vec![0.0; n];
    for block in blocks {
        let m = block.len();
        let sub = diagonalize(&h.restrict(block))?;
        let owners = block_indices_of(&prev.vectors, block);
        if owners.len() != m {
            return Err(Error::DimensionMismatch { left: owners.len(), right: m });
        }
        let restrict = |k: usize| DVector::from_fn(m, |r, _| prev.vectors[(block[r], k)]);
        let old: Vec<DVector<Complex64>> = owners.iter().map(|&k| restrict(k)).collect();
        let mut new: Vec<DVector<Complex64>> = (0..m).map(|k| sub.vectors.column(k).into_owned()).collect();

        // Inside exactly degenerate clusters, rotate onto the projections of
        // the tracked vectors so that continuation is well defined.
        let mut start = 0;
        while start < m {
            let mut end = start + 1;
            while end < m && sub.values[end] - sub.values[end - 1] < DEGENERACY {
                end += 1;
            }
            if end - start > 1 {
                let cluster: Vec<DVector<Complex64>> = new[start..end].to_vec();
                let project = |v: &DVector<Complex64>| {
                    cluster
                        .iter()
                        .fold(DVector::zeros(m), |acc: DVector<Complex64>, w| acc + w * w.dotc(v))
                };
                let mut cands: Vec<(f64, DVector<Complex64>)> = old
                    .iter()
                    .map(|v| {
                        let pv = project(v);
                        (pv.norm(), pv)
                    })
                    .collect();
                cands.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut picked: Vec<DVector<Complex64>> =
                    cands.into_iter().take(end - start).map(|c| c.1).collect();
                gram_schmidt(&mut picked);
                for (slot, v) in picked.into_iter().enumerate() {
                    if v.norm() > 0.5 {
                        new[start + slot] = v;
                    }
                }
            }
            start = end;
        }

        let mut taken = vec![false; m];
        for (k, w) in new.iter().enumerate() {
            let ov: Vec<Complex64> = old.iter().map(|u| u.dotc(w)).collect();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| ov[b].norm().total_cmp(&ov[a].norm()));
            let best = order[0];
            if m > 1 {
                let second = order[1];
                let gap = ov[best].norm() - ov[second].norm();
                if gap < opts.ambiguity || taken[best] {
                    let rival = if taken[best] { best } else { second };
                    return Ok(StepOutcome::Ambiguous {
                        first: prev.labels[owners[best]],
                        second: prev.labels[owners[rival]],
                        overlap_first: ov[best].norm(),
                        overlap_second: ov[second].norm(),
                    });
                }
            }
            taken[best] = true;
            let phase = ov[best].conj() / ov[best].norm().max(f64::MIN_POSITIVE);
            let col = owners[best];
            for (r, &i) in block.iter().enumerate() {
                vectors[(i, col)] = w[r] * phase;
            }
            labels[col] = Some(prev.labels[col]);
            energies[col] = sub.values[k];
        }
    }
    Ok(StepOutcome::Matched(Tracked {
        labels: labels.into_iter().map(|l| l.expect("every column matched")).collect(),
        vectors,
        energies,
    }))
}

/// Follows the tracked states along `h0 + s (h1 − h0)`, `s: 0 → 1`.
fn continue_along(
    h0: &OperatorMatrix,
    h1: &OperatorMatrix,
    blocks: &[Vec<usize>],
    start: Tracked,
    opts: &LabelOptions,
) -> Result<Tracked> {
    let diff = h1.minus(h0);
    if diff.matrix().iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return Ok(start);
    }
    let steps = opts.steps.max(20);
    let at = |s: f64| h0.plus(&diff.scale(s));
    let mut state = start;
    for k in 1..=steps {
        let s0 = (k - 1) as f64 / steps as f64;
        let s1 = k as f64 / steps as f64;
        state = refine(&at, blocks, state, s0, s1, 0, k, steps, opts)?;
    }
    Ok(state)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    at: &dyn Fn(f64) -> OperatorMatrix,
    blocks: &[Vec<usize>],
    state: Tracked,
    s0: f64,
    s1: f64,
    depth: usize,
    step: usize,
    steps: usize,
    opts: &LabelOptions,
) -> Result<Tracked> {
    match match_step(&at(s1), blocks, &state, opts)? {
        StepOutcome::Matched(next) => Ok(next),
        StepOutcome::Ambiguous {
            first,
            second,
            overlap_first,
            overlap_second,
        } => {
            if depth >= opts.max_refinements {
                return Err(Error::AmbiguousLabel {
                    step,
                    steps,
                    first: first.to_string(),
                    second: second.to_string(),
                    overlap_first,
                    overlap_second,
                });
            }
            let mid = 0.5 * (s0 + s1);
            let half = refine(at, blocks, state, s0, mid, depth + 1, step, steps, opts)?;
            refine(at, blocks, half, mid, s1, depth + 1, step, steps, opts)
        }
    }
}

fn excitation_blocks(basis: &Basis, weights: &ExcitationWeights) -> Result<Vec<Vec<usize>>> {
    let keys: Vec<i64> = basis.states().iter().map(|s| weights.excitations(*s)).collect::<Result<_>>()?;
    let mut distinct = keys.clone();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(distinct
        .iter()
        .map(|k| (0..keys.len()).filter(|&i| keys[i] == *k).collect())
        .collect())
}

/// Diagonalizes the scheme Hamiltonian on `basis` and labels its eigenstates
/// by continuation.
///
/// The ramp has two stages. The corotating stray coupling is switched on
/// first with the excitation number conserved, so each excitation block is
/// followed separately; the counterrotating couplings are then switched on
/// inside each parity sector.
pub fn label_states(scheme: Scheme, basis: &Basis, p: &ModelParams) -> Result<LabeledSpectrum> {
    label_states_with(scheme, basis, p, &LabelOptions::default())
}

pub fn label_states_with(
    scheme: Scheme,
    basis: &Basis,
    p: &ModelParams,
    opts: &LabelOptions,
) -> Result<LabeledSpectrum> {
    p.validate()?;
    let weights = scheme.weights();
    let p_ref = ModelParams {
        g_c: 0.0,
        g_prime: 0.0,
        g_prime_c: 0.0,
        ..*p
    };
    let h_ref = hamiltonian(scheme, basis, &p_ref)?;
    let h_jc = hamiltonian(scheme, basis, &p.rwa())?;
    let h = hamiltonian(scheme, basis, p)?;

    let (labels, vectors) = reference_states(basis, p);
    let energies = (0..basis.dim())
        .map(|k| h_ref.braket(&vectors.column(k).into_owned(), &vectors.column(k).into_owned()).re)
        .collect();
    let start = Tracked {
        labels,
        vectors,
        energies,
    };

    let n_blocks = excitation_blocks(basis, &weights)?;
    let mid = continue_along(&h_ref, &h_jc, &n_blocks, start, opts)?;
    let p_blocks = invariant_blocks(&h, basis, |s| weights.excitations(s).map(|n| n.rem_euclid(2)))?;
    let mut end = continue_along(&h_jc, &h, &p_blocks, mid, opts)?;

    // Columns are still in reference order; make sure they are eigenvectors of
    // the final Hamiltonian even when both ramps were skipped.
    if p_ref == *p {
        end = match match_step(&h, &p_blocks, &end, opts)? {
            StepOutcome::Matched(t) => t,
            StepOutcome::Ambiguous {
                first,
                second,
                overlap_first,
                overlap_second,
            } => {
                return Err(Error::AmbiguousLabel {
                    step: 0,
                    steps: 0,
                    first: first.to_string(),
                    second: second.to_string(),
                    overlap_first,
                    overlap_second,
                })
            }
        };
    }

    let n = basis.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| end.energies[a].total_cmp(&end.energies[b]));
    let labels: Vec<Label> = order.iter().map(|&k| end.labels[k]).collect();
    let index = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    Ok(LabeledSpectrum {
        basis: basis.clone(),
        energies: order.iter().map(|&k| end.energies[k]).collect(),
        vectors: DMatrix::from_fn(n, n, |i, j| end.vectors[(i, order[j])]),
        labels,
        index,
    })
}

/// `(c₀₀, c₀₂)` of the dressed Rabi ground state, second order in `g_c`
/// and exact in `g`.
pub fn perturbative_ground_amplitudes(p: &ModelParams) -> Result<(f64, f64)> {
    let w2 = 4.0 * p.omega_c * p.omega_c;
    let den = w2 - 2.0 * p.g * p.g;
    if den <= 0.0 {
        return Err(Error::FormulaDomain(format!(
            "4 omega_c^2 - 2 g^2 = {den} must be positive"
        )));
    }
    let c00 = den / (den * den + p.g_c * p.g_c * (w2 + 2.0 * p.g * p.g)).sqrt();
    let c02 = p.g_c * std::f64::consts::SQRT_2 * p.g / den;
    Ok((c00, c02))
}

/// Leading-order `(d_{1−,2}, d_{1+,2})`, the `|2e⟩` amplitudes of the first
/// doublet.
pub fn perturbative_doublet_amplitudes(p: &ModelParams) -> Result<(f64, f64)> {
    let d = |s: f64| -> Result<f64> {
        let a = 2.0 * p.omega_c + s * p.g;
        let den = a * a - 3.0 * p.g * p.g;
        if den.abs() < 1e-9 {
            return Err(Error::FormulaDomain(format!("doublet denominator {den} vanishes")));
        }
        Ok(-p.g_c * a / den)
    };
    Ok((d(1.0)?, d(-1.0)?))
}

/// Leading stray amplitudes of the Λ scheme `(f₀₁, c₂ᵤ₁, f₂ᵤ₀)`.
pub fn lambda_stray_perturbative(p: &ModelParams) -> Result<(f64, f64, f64)> {
    let det = p.epsilon_prime - p.omega_c;
    if det.abs() < 1e-12 {
        return Err(Error::FormulaDomain("epsilon_prime equals omega_c".into()));
    }
    let den = det * det - p.g * p.g;
    if den.abs() < 1e-12 {
        return Err(Error::FormulaDomain("(epsilon_prime - omega_c)^2 equals g^2".into()));
    }
    let f01 = p.g_prime / det;
    let c2u1 = -std::f64::consts::SQRT_2 * p.g_prime * det / den;
    let f2u0 = p.g_prime_c / (2.0 * p.omega_c) * c2u1;
    Ok((f01, c2u1, f2u0))
}

/// Truncation used for a dressed matrix element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subspace {
    /// States with at most this many excitations.
    Excitations(usize),
    /// Complete basis up to this photon number.
    Photons(usize),
}

impl Subspace {
    pub fn basis(self, scheme: Scheme) -> Result<Basis> {
        match self {
            Subspace::Excitations(c) => scheme.basis(c).restrict_excitations(&scheme.weights(), c),
            Subspace::Photons(n) => Ok(scheme.basis(n)),
        }
    }
}

/// Intermediate state of the V scheme: the first doublet branch, or `|0e⟩`
/// when the doublet does not exist (`g = 0`).
pub fn vee_intermediate(spec: &LabeledSpectrum, branch: Branch) -> Label {
    let d = Label::Doublet { n: 1, branch };
    if spec.contains(d) {
        d
    } else {
        Label::Product(BasisState::new(0, Level::E))
    }
}

/// Stokes-field dipole element between target `|Ψ₂ᵤ⟩` and the intermediate
/// state: `⟨Ψ₀|(|u⟩⟨g| + h.c.)|Ψ₂ᵤ⟩` for Λ, `⟨Ψ₁±|(|u⟩⟨e| + h.c.)|Ψ₂ᵤ⟩`
/// for V. Signed under the continuation phase convention.
pub fn stokes_matrix_element(scheme: Scheme, p: &ModelParams, subspace: Subspace, branch: Branch) -> Result<f64> {
    let (required, from) = match scheme {
        Scheme::Lambda => (4, Level::G),
        Scheme::Vee => (6, Level::E),
        Scheme::Rabi => {
            return Err(Error::InvalidParameter("Stokes element needs a three-level scheme".into()));
        }
    };
    let cutoff = match subspace {
        Subspace::Excitations(c) => c,
        Subspace::Photons(n) => n + 1,
    };
    if cutoff < required {
        return Err(Error::SubspaceTooSmall { cutoff, required });
    }
    let basis = subspace.basis(scheme)?;
    let spec = label_states(scheme, &basis, p)?;
    let mut op = crate::hilbert::atomic_transition(&basis, from, Level::U)?;
    op = op.plus(&op.adjoint());
    let intermediate = match scheme {
        Scheme::Lambda => Label::Ground,
        _ => vee_intermediate(&spec, branch),
    };
    Ok(spec.matrix_element(&op, intermediate, Label::Ancilla(2))?.re)
}

/// One row of a spectrum scan.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub value: f64,
    pub labels: Vec<Label>,
    pub energies: Vec<f64>,
}

impl ScanRow {
    pub fn energy(&self, label: Label) -> Option<f64> {
        self.labels.iter().position(|l| *l == label).map(|i| self.energies[i])
    }
}

/// Labeled spectra over a parameter grid; `set` writes the scanned value
/// into a copy of the template. Rows are computed in parallel and returned
/// in grid order.
pub fn spectrum_scan(
    scheme: Scheme,
    template: &ModelParams,
    basis: &Basis,
    grid: &[f64],
    set: impl Fn(&mut ModelParams, f64) + Sync,
) -> Result<Vec<ScanRow>> {
    grid.par_iter()
        .map(|&v| {
            let mut p = *template;
            set(&mut p, v);
            let spec = label_states(scheme, basis, &p)?;
            Ok(ScanRow {
                value: v,
                labels: spec.labels().to_vec(),
                energies: spec.energies().to_vec(),
            })
        })
        .collect()
}

/// Rabi spectrum over a `g` grid with `g_c = counter_ratio · g`.
pub fn bloch_siegert_scan(g_grid: &[f64], template: &ModelParams, counter_ratio: f64, n_max: usize) -> Result<Vec<ScanRow>> {
    let basis = Scheme::Rabi.basis(n_max);
    spectrum_scan(Scheme::Rabi, template, &basis, g_grid, |p, g| {
        p.g = g;
        p.g_c = counter_ratio * g;
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{drive_operator, DriveScheme};

    fn doublet(n: usize, branch: Branch) -> Label {
        Label::Doublet { n, branch }
    }

    #[test]
    fn eigensolver_contract() {
        let b = Scheme::Lambda.basis(8);
        let h = hamiltonian(Scheme::Lambda, &b, &ModelParams::physical(4.0, 0.25, 0.1)).unwrap();
        let e = diagonalize(&h).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(e.residual(&h) <= 1e-9);
        let g = e.vectors.adjoint() * &e.vectors;
        assert!((g - DMatrix::identity(b.dim(), b.dim())).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let op = OperatorMatrix::from_matrix(m).unwrap();
        match diagonalize(&op) {
            Err(Error::NonHermitian { asymmetry }) => assert!((asymmetry - 1.0).abs() < 1e-15),
            other => panic!("expected NonHermitian, got {other:?}"),
        }
    }

    #[test]
    fn complex_hermitian_path() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        m[(1, 0)] = Complex64::new(0.0, -1.0);
        let op = OperatorMatrix::from_matrix(m).unwrap();
        let e = diagonalize(&op).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!(e.residual(&op) < 1e-12);
    }

    #[test]
    fn label_round_trip() {
        for l in [
            Label::Ground,
            doublet(3, Branch::Minus),
            doublet(12, Branch::Plus),
            Label::Ancilla(2),
            Label::Product(BasisState::new(0, Level::E)),
        ] {
            assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
        }
        assert!("x".parse::<Label>().is_err());
    }

    #[test]
    fn zero_coupling_labels_are_product_names() {
        let b = Scheme::Lambda.basis(3);
        let spec = label_states(Scheme::Lambda, &b, &ModelParams::physical(4.0, 0.0, 0.0)).unwrap();
        for s in b.states() {
            let want = match (s.level, s.photon_n) {
                (Level::U, n) => Label::Ancilla(n),
                (Level::G, 0) => Label::Ground,
                _ => Label::Product(*s),
            };
            assert!((spec.amplitude(want, *s).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn jc_doublets_and_ground() {
        let b = Scheme::Rabi.basis(20);
        let p = ModelParams { g: 0.1, ..ModelParams::rabi(0.0) };
        let spec = label_states(Scheme::Rabi, &b, &p).unwrap();
        assert!(spec.energy(Label::Ground).unwrap().abs() < 1e-14);
        for n in 1..=5 {
            let root = (n as f64).sqrt() * 0.1;
            assert!((spec.energy(doublet(n, Branch::Minus)).unwrap() - (n as f64 - root)).abs() < 1e-12);
            assert!((spec.energy(doublet(n, Branch::Plus)).unwrap() - (n as f64 + root)).abs() < 1e-12);
        }
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let m = doublet(1, Branch::Minus);
        assert!((spec.amplitude(m, BasisState::new(0, Level::E)).unwrap() - half).abs() < 1e-12);
        assert!((spec.amplitude(m, BasisState::new(1, Level::G)).unwrap() + half).abs() < 1e-12);
    }

    #[test]
    fn rabi_ground_continues_from_vacuum() {
        let b = Scheme::Rabi.basis(20);
        let spec = label_states(Scheme::Rabi, &b, &ModelParams::rabi(0.25)).unwrap();
        assert_eq!(spec.labels()[0], Label::Ground);
        let c00 = spec.amplitude(Label::Ground, BasisState::new(0, Level::G)).unwrap();
        assert!(c00 > 0.99);
        assert_eq!(spec.amplitude(Label::Ground, BasisState::new(1, Level::G)).unwrap(), 0.0);
        assert!(spec.orthonormality_defect() < 1e-10);
        assert!(spec.cross_parity_defect(&ExcitationWeights::rabi()).unwrap() <= 1e-10);
    }

    #[test]
    fn bloch_siegert_depresses_first_doublet() {
        let rows = bloch_siegert_scan(&[0.0, 0.25], &ModelParams::rabi(0.0), 1.0, 30).unwrap();
        let l = doublet(1, Branch::Minus);
        assert!(rows[0].energy(l).is_none());
        assert_eq!(rows[0].energy(Label::Ground), Some(0.0));
        assert!(rows[1].energy(l).unwrap() < 1.0 - 0.25);
        assert!(rows[1].energy(Label::Ground).unwrap() < 0.0);
    }

    #[test]
    fn jc_scan_is_linear_in_g() {
        let grid: Vec<f64> = (1..=6).map(|k| 0.05 * k as f64).collect();
        let rows = bloch_siegert_scan(&grid, &ModelParams::rabi(0.0), 0.0, 12).unwrap();
        for r in &rows {
            let e = r.energy(doublet(2, Branch::Plus)).unwrap();
            assert!((e - (2.0 + 2f64.sqrt() * r.value)).abs() < 1e-12);
        }
        assert!(bloch_siegert_scan(&[], &ModelParams::rabi(0.0), 1.0, 5).unwrap().is_empty());
    }

    #[test]
    fn c02_against_oracle_weak_counterrotating() {
        let p = ModelParams { g: 0.25, g_c: 0.05, ..ModelParams::rabi(0.0) };
        let (_, c02) = perturbative_ground_amplitudes(&p).unwrap();
        assert!((c02 - 0.004562).abs() < 1e-6);
        let spec = label_states(Scheme::Rabi, &Scheme::Rabi.basis(30), &p).unwrap();
        let num = spec.amplitude(Label::Ground, BasisState::new(2, Level::G)).unwrap();
        assert!(((num - c02) / c02).abs() < 0.05, "{num} vs {c02}");
    }

    #[test]
    fn perturbative_formulas() {
        let (c00, c02) = perturbative_ground_amplitudes(&ModelParams::rabi(0.25)).unwrap();
        assert!((c02 - 0.25 * 2f64.sqrt() * 0.25 / 3.875).abs() < 1e-15);
        assert!((c02 - 0.0228097).abs() < 5e-7);
        assert!(c00 < 1.0 && c00 > 0.99);
        assert_eq!(
            perturbative_ground_amplitudes(&ModelParams { g: 0.3, ..ModelParams::rabi(0.0) }).unwrap(),
            (1.0, 0.0)
        );
        assert!(perturbative_ground_amplitudes(&ModelParams::rabi(1.5)).is_err());

        let (dm, dp) = perturbative_doublet_amplitudes(&ModelParams::rabi(0.25)).unwrap();
        assert!((dm + 0.115385).abs() < 1e-6);
        assert!((dp + 0.25 * 1.75 / (1.75 * 1.75 - 0.1875)).abs() < 1e-15);
        let (dm0, dp0) = perturbative_doublet_amplitudes(&ModelParams { g: 0.2, ..ModelParams::rabi(0.0) }).unwrap();
        assert_eq!((dm0.abs(), dp0.abs()), (0.0, 0.0));
        let g = 1.0 / (1.0 + 3f64.sqrt());
        assert!(perturbative_doublet_amplitudes(&ModelParams::rabi(2.0 * g)).is_err());

        let p = ModelParams { g_prime: 0.1, ..ModelParams::physical(4.0, 0.25, 0.0) };
        let (f01, c2u1, f2u0) = lambda_stray_perturbative(&p).unwrap();
        assert!((f01 - 0.033333).abs() < 1e-6);
        assert!((c2u1 + 0.047470).abs() < 1e-6);
        assert_eq!(f2u0, 0.0);
        assert!(c02 * c2u1 < 0.0);
        assert_eq!(lambda_stray_perturbative(&ModelParams::physical(4.0, 0.25, 0.0)).unwrap(), (0.0, 0.0, 0.0));
        assert!(lambda_stray_perturbative(&ModelParams::physical(1.0, 0.25, 0.1)).is_err());
    }

    #[test]
    fn c02_quadratic_at_small_g() {
        let c = |g: f64| perturbative_ground_amplitudes(&ModelParams::rabi(g)).unwrap().1;
        assert!((c(0.002) / c(0.001) - 4.0).abs() < 1e-5);
    }

    #[test]
    fn lambda_stokes_element_without_stray() {
        let p = ModelParams::physical(4.0, 0.25, 0.0);
        let el = stokes_matrix_element(Scheme::Lambda, &p, Subspace::Excitations(4), Branch::Minus).unwrap();
        let (_, c02) = perturbative_ground_amplitudes(&p).unwrap();
        assert!(((el - c02) / c02).abs() < 0.1, "{el} vs {c02}");
        assert!(matches!(
            stokes_matrix_element(Scheme::Lambda, &p, Subspace::Excitations(3), Branch::Minus),
            Err(Error::SubspaceTooSmall { cutoff: 3, required: 4 })
        ));
    }

    #[test]
    fn lambda_rwa_stray_channel_open() {
        let p = ModelParams { g_prime: 0.25, ..ModelParams::physical(4.0, 0.0, 0.0) };
        let el = stokes_matrix_element(Scheme::Lambda, &p, Subspace::Photons(10), Branch::Minus).unwrap();
        assert!(el.abs() > 1e-3);
    }

    #[test]
    fn vee_corotating_stokes_vanishes() {
        let usc = ModelParams::vee_physical(1.5, 0.25, 0.25 * 2.0 / 3.0);
        let jc = usc.rwa();
        let a = stokes_matrix_element(Scheme::Vee, &usc, Subspace::Excitations(6), Branch::Minus).unwrap();
        let b = stokes_matrix_element(Scheme::Vee, &jc, Subspace::Excitations(6), Branch::Minus).unwrap();
        assert!(a.abs() > 1e-2);
        assert!(b.abs() <= 1e-6 * a.abs());
    }

    #[test]
    fn vee_ancilla_keeps_label_along_stray_ramp() {
        let b = Scheme::Vee.basis(8);
        for eta in [0.0, 0.3, 2.0 / 3.0, 1.0] {
            let p = ModelParams::vee_physical(1.5, 0.25, eta * 0.25);
            let spec = label_states(Scheme::Vee, &b, &p).unwrap();
            let f = spec.amplitude(Label::Ancilla(0), BasisState::new(0, Level::U)).unwrap();
            assert!(f > 0.95, "eta {eta}: {f}");
        }
    }

    #[test]
    fn dressed_drive_is_hermitian() {
        let b = Scheme::Lambda.basis(6);
        let spec = label_states(Scheme::Lambda, &b, &ModelParams::physical(4.0, 0.25, 0.1)).unwrap();
        let d = spec.dressed(&drive_operator(&b, DriveScheme::LambdaLadder, 0.4).unwrap());
        assert!((d.clone() - d.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn unknown_label_errors() {
        let b = Scheme::Rabi.basis(2);
        let spec = label_states(Scheme::Rabi, &b, &ModelParams::rabi(0.1)).unwrap();
        assert!(matches!(
            spec.energy(Label::Ancilla(0)),
            Err(Error::UnknownLabel(Label::Ancilla(0)))
        ));
    }
}
