//! Truncated atom ⊗ mode product basis and the elementary operators every
//! Hamiltonian in this crate is assembled from.
//!
//! States are ordered with the atomic level varying fastest and the photon
//! number slowest, so `|0 a₀⟩, |0 a₁⟩, …, |1 a₀⟩, …`. The ordering is part of
//! the public contract: matrix dumps are reproducible across runs and builds.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Atomic level. Two-level models use `{g, e}`; the Λ and V schemes add the
/// ancilla `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    U,
    G,
    E,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::U => "u",
            Level::G => "g",
            Level::E => "e",
        };
        f.write_str(s)
    }
}

/// Product state `|n, a⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    pub photon_n: usize,
    pub level: Level,
}

impl BasisState {
    pub const fn new(photon_n: usize, level: Level) -> Self {
        Self { photon_n, level }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{}⟩", self.photon_n, self.level)
    }
}

/// Truncated product basis.
///
/// A basis built with [`Basis::build`] is complete up to the photon cutoff.
/// [`Basis::restrict`] and [`Basis::restrict_excitations`] produce subsets of
/// it that keep the same ordering; operators built on a restricted basis are
/// the projections `P O P` of the full ones.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    n_max: usize,
    levels: Vec<Level>,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
    complete: bool,
}

impl Basis {
    pub fn build(n_max: usize, levels: &[Level]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptyLevels);
        }
        for (i, l) in levels.iter().enumerate() {
            if levels[..i].contains(l) {
                return Err(Error::DuplicateLevel(*l));
            }
        }
        let states: Vec<BasisState> = (0..=n_max)
            .flat_map(|n| levels.iter().map(move |&level| BasisState::new(n, level)))
            .collect();
        Ok(Self::from_states(n_max, levels.to_vec(), states, true))
    }

    fn from_states(n_max: usize, levels: Vec<Level>, states: Vec<BasisState>, complete: bool) -> Self {
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self {
            n_max,
            levels,
            states,
            index,
            complete,
        }
    }

    /// Keeps the states accepted by `keep`, preserving order.
    pub fn restrict(&self, keep: impl Fn(&BasisState) -> bool) -> Basis {
        let states = self.states.iter().copied().filter(|s| keep(s)).collect();
        Self::from_states(self.n_max, self.levels.clone(), states, false)
    }

    /// Subspace of states with excitation number `n + weight(level) <= cutoff`.
    pub fn restrict_excitations(&self, weights: &ExcitationWeights, cutoff: usize) -> Result<Basis> {
        for &l in &self.levels {
            weights.weight(l)?;
        }
        Ok(self.restrict(|s| {
            // weights checked above
            let w = weights.weight(s.level).unwrap_or(0);
            s.photon_n as i64 + w <= cutoff as i64
        }))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn has_level(&self, level: Level) -> bool {
        self.levels.contains(&level)
    }

    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        self.index.get(&state).copied()
    }

    pub fn state(&self, i: usize) -> BasisState {
        self.states[i]
    }

    /// Unit vector on a product state.
    pub fn ket(&self, state: BasisState) -> Option<DVector<Complex64>> {
        let i = self.index_of(state)?;
        let mut v = DVector::zeros(self.dim());
        v[i] = Complex64::new(1.0, 0.0);
        Some(v)
    }

    fn require_level(&self, level: Level) -> Result<()> {
        if self.has_level(level) {
            Ok(())
        } else {
            Err(Error::UnknownLevel(level))
        }
    }
}

/// Dense square operator on a [`Basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                left: m.nrows(),
                right: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub(crate) fn add_real(&mut self, row: usize, col: usize, value: f64) {
        self.0[(row, col)] += Complex64::new(value, 0.0);
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// max |M − M†|
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// max |[A, B]| entrywise
    pub fn commutator_norm(&self, other: &OperatorMatrix) -> f64 {
        let c = &self.0 * &other.0 - &other.0 * &self.0;
        c.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.0 * v
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * Complex64::new(factor, 0.0))
    }

    pub fn plus(&self, other: &OperatorMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn minus(&self, other: &OperatorMatrix) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn product(&self, other: &OperatorMatrix) -> Self {
        Self(&self.0 * &other.0)
    }

    /// Submatrix on the given basis indices (in the given order).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        Self(DMatrix::from_fn(k, k, |i, j| self.0[(indices[i], indices[j])]))
    }

    /// ⟨u|M|v⟩
    pub fn braket(&self, u: &DVector<Complex64>, v: &DVector<Complex64>) -> Complex64 {
        u.dotc(&(&self.0 * v))
    }

    /// Largest |Im M_ij|; zero for the real symmetric operators this crate builds.
    pub fn max_imag(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()))
    }
}

/// Mode annihilation operator `a ⊗ 1`. The top Fock row is truncated.
pub fn annihilation(basis: &Basis) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(basis.dim());
    for (col, s) in basis.states().iter().enumerate() {
        if s.photon_n == 0 {
            continue;
        }
        if let Some(row) = basis.index_of(BasisState::new(s.photon_n - 1, s.level)) {
            m.add_real(row, col, (s.photon_n as f64).sqrt());
        }
    }
    m
}

pub fn creation(basis: &Basis) -> OperatorMatrix {
    annihilation(basis).adjoint()
}

pub fn number_operator(basis: &Basis) -> OperatorMatrix {
    let mut m = OperatorMatrix::zeros(basis.dim());
    for (i, s) in basis.states().iter().enumerate() {
        m.add_real(i, i, s.photon_n as f64);
    }
    m
}

/// `|to⟩⟨from| ⊗ 1`
pub fn atomic_transition(basis: &Basis, from: Level, to: Level) -> Result<OperatorMatrix> {
    basis.require_level(from)?;
    basis.require_level(to)?;
    let mut m = OperatorMatrix::zeros(basis.dim());
    for (col, s) in basis.states().iter().enumerate() {
        if s.level != from {
            continue;
        }
        if let Some(row) = basis.index_of(BasisState::new(s.photon_n, to)) {
            m.add_real(row, col, 1.0);
        }
    }
    Ok(m)
}

/// Integer excitation weight of each atomic level; the excitation number of
/// `|n, a⟩` is `n + weight(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcitationWeights(Vec<(Level, i64)>);

impl ExcitationWeights {
    pub fn new(weights: &[(Level, i64)]) -> Self {
        Self(weights.to_vec())
    }

    /// Two-level Rabi model: `N = a†a + |e⟩⟨e|`.
    pub fn rabi() -> Self {
        Self::new(&[(Level::G, 0), (Level::E, 1)])
    }

    /// Λ scheme: `N = a†a + |g⟩⟨g| + 2|e⟩⟨e|`.
    pub fn lambda() -> Self {
        Self::new(&[(Level::U, 0), (Level::G, 1), (Level::E, 2)])
    }

    /// V scheme: `N = a†a + |e⟩⟨e| + 2|u⟩⟨u|`.
    pub fn vee() -> Self {
        Self::new(&[(Level::G, 0), (Level::E, 1), (Level::U, 2)])
    }

    pub fn weight(&self, level: Level) -> Result<i64> {
        self.0
            .iter()
            .find(|(l, _)| *l == level)
            .map(|(_, w)| *w)
            .ok_or(Error::MissingWeight(level))
    }

    pub fn excitations(&self, state: BasisState) -> Result<i64> {
        Ok(state.photon_n as i64 + self.weight(state.level)?)
    }
}

fn diagonal_from(basis: &Basis, f: impl Fn(BasisState) -> Result<f64>) -> Result<OperatorMatrix> {
    let mut m = OperatorMatrix::zeros(basis.dim());
    for (i, s) in basis.states().iter().enumerate() {
        m.add_real(i, i, f(*s)?);
    }
    Ok(m)
}

/// Diagonal operator `(−1)^(n + weight(level))`.
pub fn parity_operator(basis: &Basis, weights: &ExcitationWeights) -> Result<OperatorMatrix> {
    diagonal_from(basis, |s| {
        let n = weights.excitations(s)?;
        Ok(if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
    })
}

/// Diagonal operator `n + weight(level)`.
pub fn excitation_number(basis: &Basis, weights: &ExcitationWeights) -> Result<OperatorMatrix> {
    diagonal_from(basis, |s| Ok(weights.excitations(s)? as f64))
}

/// Basis indices split by parity of the excitation number (even first).
pub fn parity_sectors(basis: &Basis, weights: &ExcitationWeights) -> Result<[Vec<usize>; 2]> {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (i, s) in basis.states().iter().enumerate() {
        if weights.excitations(*s)?.rem_euclid(2) == 0 {
            even.push(i);
        } else {
            odd.push(i);
        }
    }
    Ok([even, odd])
}

#[cfg(test)]
mod tests {
    use super::*;

    const GE: [Level; 2] = [Level::G, Level::E];
    const UGE: [Level; 3] = [Level::U, Level::G, Level::E];

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_level_ordering_is_atom_fastest() {
        let b = Basis::build(1, &GE).unwrap();
        let names: Vec<String> = b.states().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["|0g⟩", "|0e⟩", "|1g⟩", "|1e⟩"]);
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(*s), Some(i));
        }
    }

    #[test]
    fn vacuum_only_basis() {
        let b = Basis::build(0, &UGE).unwrap();
        assert_eq!(b.dim(), 3);
        assert!(b.states().iter().all(|s| s.photon_n == 0));
    }

    #[test]
    fn vee_subspace_up_to_six_excitations_has_eighteen_states() {
        let full = Basis::build(6, &[Level::G, Level::E, Level::U]).unwrap();
        let sub = full.restrict_excitations(&ExcitationWeights::vee(), 6).unwrap();
        assert_eq!(sub.dim(), 18);
        let lam = Basis::build(4, &UGE).unwrap();
        let sub = lam.restrict_excitations(&ExcitationWeights::lambda(), 4).unwrap();
        assert_eq!(sub.dim(), 12);
        assert_eq!(Basis::build(5, &UGE).unwrap().dim(), 18);
    }

    #[test]
    fn rejects_bad_level_sets() {
        assert!(matches!(Basis::build(2, &[]), Err(Error::EmptyLevels)));
        assert!(matches!(
            Basis::build(2, &[Level::G, Level::G]),
            Err(Error::DuplicateLevel(Level::G))
        ));
    }

    #[test]
    fn ladder_operator_action() {
        let b = Basis::build(2, &[Level::G]).unwrap();
        let a = annihilation(&b);
        let v = a.apply(&b.ket(BasisState::new(2, Level::G)).unwrap());
        assert!((v[1] - c(2f64.sqrt())).norm() < 1e-15);
        assert!(v[0].norm() == 0.0 && v[2].norm() == 0.0);
        let v0 = a.apply(&b.ket(BasisState::new(0, Level::G)).unwrap());
        assert!(v0.iter().all(|z| z.norm() == 0.0));
        assert_eq!(creation(&b), a.adjoint());
    }

    #[test]
    fn number_operator_spectrum() {
        let b = Basis::build(4, &UGE).unwrap();
        let a = annihilation(&b);
        let n = creation(&b).product(&a);
        for (i, s) in b.states().iter().enumerate() {
            assert!((n.get(i, i) - c(s.photon_n as f64)).norm() < 1e-14);
        }
        assert!(n.minus(&number_operator(&b)).matrix().iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn atomic_transition_action() {
        let b = Basis::build(4, &GE).unwrap();
        let sp = atomic_transition(&b, Level::G, Level::E).unwrap();
        let v = sp.apply(&b.ket(BasisState::new(3, Level::G)).unwrap());
        assert_eq!(v, b.ket(BasisState::new(3, Level::E)).unwrap());
        let z = sp.apply(&b.ket(BasisState::new(3, Level::E)).unwrap());
        assert!(z.iter().all(|x| x.norm() == 0.0));
        let sx = sp.plus(&sp.adjoint());
        assert_eq!(sx.hermiticity_defect(), 0.0);
        assert!(matches!(
            atomic_transition(&b, Level::U, Level::G),
            Err(Error::UnknownLevel(Level::U))
        ));
    }

    #[test]
    fn parity_and_excitation_number() {
        let b = Basis::build(3, &GE).unwrap();
        let w = ExcitationWeights::rabi();
        let p = parity_operator(&b, &w).unwrap();
        let i0g = b.index_of(BasisState::new(0, Level::G)).unwrap();
        let i1g = b.index_of(BasisState::new(1, Level::G)).unwrap();
        assert_eq!(p.get(i0g, i0g), c(1.0));
        assert_eq!(p.get(i1g, i1g), c(-1.0));
        assert_eq!(p.product(&p), OperatorMatrix::identity(b.dim()));

        let n = excitation_number(&b, &w).unwrap();
        let i1e = b.index_of(BasisState::new(1, Level::E)).unwrap();
        assert_eq!(n.get(i1e, i1e), c(2.0));

        let bv = Basis::build(2, &[Level::G, Level::E, Level::U]).unwrap();
        let nv = excitation_number(&bv, &ExcitationWeights::vee()).unwrap();
        let i0u = bv.index_of(BasisState::new(0, Level::U)).unwrap();
        assert_eq!(nv.get(i0u, i0u), c(2.0));

        let b3 = Basis::build(1, &UGE).unwrap();
        assert!(matches!(
            parity_operator(&b3, &ExcitationWeights::rabi()),
            Err(Error::MissingWeight(Level::U))
        ));
    }

    #[test]
    fn builders_are_deterministic() {
        let b = Basis::build(5, &UGE).unwrap();
        assert_eq!(annihilation(&b), annihilation(&b));
        assert_eq!(
            parity_operator(&b, &ExcitationWeights::lambda()).unwrap(),
            parity_operator(&b, &ExcitationWeights::lambda()).unwrap()
        );
    }
}
