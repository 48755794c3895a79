//! Undriven Hamiltonians (Rabi, Λ and V three-level extensions) and the
//! dimensionless drive-coupling operators.

use crate::error::{Error, Result};
use crate::hilbert::{Basis, BasisState, ExcitationWeights, Level, OperatorMatrix};

/// Level scheme of the artificial atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Two-level atom `{g, e}`.
    Rabi,
    /// Ancilla `u` below `g` at `−ε′`.
    Lambda,
    /// Ancilla `u` above `e` at `ε + ε′`.
    Vee,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rabi => "rabi",
            Scheme::Lambda => "lambda",
            Scheme::Vee => "vee",
        }
    }

    /// Level ordering used when this crate builds a basis for the scheme.
    pub fn levels(self) -> &'static [Level] {
        match self {
            Scheme::Rabi => &[Level::G, Level::E],
            Scheme::Lambda => &[Level::U, Level::G, Level::E],
            Scheme::Vee => &[Level::G, Level::E, Level::U],
        }
    }

    pub fn weights(self) -> ExcitationWeights {
        match self {
            Scheme::Rabi => ExcitationWeights::rabi(),
            Scheme::Lambda => ExcitationWeights::lambda(),
            Scheme::Vee => ExcitationWeights::vee(),
        }
    }

    pub fn basis(self, n_max: usize) -> Basis {
        // levels() is non-empty and duplicate free
        Basis::build(n_max, self.levels()).expect("static level set")
    }

    fn check_basis(self, basis: &Basis) -> Result<()> {
        let want = self.levels();
        let have = basis.levels();
        let same = want.len() == have.len() && want.iter().all(|l| have.contains(l));
        if same {
            Ok(())
        } else {
            let fmt = |ls: &[Level]| ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",");
            Err(Error::LevelMismatch {
                model: self.name(),
                expected: format!("{{{}}}", fmt(want)),
                found: format!("{{{}}}", fmt(have)),
            })
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rabi" => Ok(Scheme::Rabi),
            "lambda" => Ok(Scheme::Lambda),
            "vee" | "v" => Ok(Scheme::Vee),
            _ => Err(Error::InvalidParameter(format!("unknown scheme '{s}'"))),
        }
    }
}

/// Hamiltonian parameters in units of the mode frequency.
///
/// `alpha()` and `eta()` are derived, so they can never disagree with
/// `epsilon_prime` and `g_prime`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub omega_c: f64,
    pub g: f64,
    pub g_c: f64,
    pub g_prime: f64,
    pub g_prime_c: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            epsilon_prime: 4.0,
            omega_c: 1.0,
            g: 0.0,
            g_c: 0.0,
            g_prime: 0.0,
            g_prime_c: 0.0,
        }
    }
}

impl ModelParams {
    /// Resonant two-level parameters, `g_c = g`.
    pub fn rabi(g: f64) -> Self {
        Self {
            epsilon_prime: 0.0,
            g,
            g_c: g,
            ..Self::default()
        }
    }

    /// Resonant three-level parameters with counterrotating partners equal to
    /// the corotating couplings.
    pub fn physical(epsilon_prime: f64, g: f64, g_prime: f64) -> Self {
        Self {
            epsilon_prime,
            g,
            g_c: g,
            g_prime,
            g_prime_c: g_prime,
            ..Self::default()
        }
    }

    /// V-scheme parameters from the anharmonicity, `ε′ = (1 + α) ε`.
    pub fn vee_physical(alpha: f64, g: f64, g_prime: f64) -> Self {
        Self::physical(1.0 + alpha, g, g_prime)
    }

    /// Same couplings with every counterrotating term removed.
    pub fn rwa(mut self) -> Self {
        self.g_c = 0.0;
        self.g_prime_c = 0.0;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.epsilon_prime = (1.0 + alpha) * self.epsilon;
        self
    }

    /// Sets `g′ = η g` (and `g′_c = η g_c`).
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.g_prime = eta * self.g;
        self.g_prime_c = eta * self.g_c;
        self
    }

    /// Anharmonicity `ε′/ε − 1`.
    pub fn alpha(&self) -> f64 {
        self.epsilon_prime / self.epsilon - 1.0
    }

    /// Stray ratio `g′/g`; `None` when `g = 0`.
    pub fn eta(&self) -> Option<f64> {
        (self.g != 0.0).then(|| self.g_prime / self.g)
    }

    /// Every energy multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            epsilon: self.epsilon * lambda,
            epsilon_prime: self.epsilon_prime * lambda,
            omega_c: self.omega_c * lambda,
            g: self.g * lambda,
            g_c: self.g_c * lambda,
            g_prime: self.g_prime * lambda,
            g_prime_c: self.g_prime_c * lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.epsilon,
            self.epsilon_prime,
            self.omega_c,
            self.g,
            self.g_c,
            self.g_prime,
            self.g_prime_c,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite model parameter".into()));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::InvalidParameter(format!("omega_c must be positive, got {}", self.omega_c)));
        }
        for (name, v) in [
            ("g", self.g),
            ("g_c", self.g_c),
            ("g_prime", self.g_prime),
            ("g_prime_c", self.g_prime_c),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Photon {
    Lower,
    Raise,
}

/// Adds `strength · (a or a†) ⊗ |to⟩⟨from|` and its Hermitian conjugate.
/// Matrix elements leaving the basis are dropped, so on a restricted basis
/// the result is the projected operator.
fn add_coupling(m: &mut OperatorMatrix, basis: &Basis, strength: f64, photon: Photon, from: Level, to: Level) {
    if strength == 0.0 {
        return;
    }
    for (col, s) in basis.states().iter().enumerate() {
        if s.level != from {
            continue;
        }
        let (n, factor) = match photon {
            Photon::Lower if s.photon_n == 0 => continue,
            Photon::Lower => (s.photon_n - 1, (s.photon_n as f64).sqrt()),
            Photon::Raise => (s.photon_n + 1, ((s.photon_n + 1) as f64).sqrt()),
        };
        if let Some(row) = basis.index_of(BasisState::new(n, to)) {
            m.add_real(row, col, strength * factor);
            m.add_real(col, row, strength * factor);
        }
    }
}

fn add_diagonal(m: &mut OperatorMatrix, basis: &Basis, level_energy: impl Fn(Level) -> f64, omega_c: f64) {
    for (i, s) in basis.states().iter().enumerate() {
        m.add_real(i, i, level_energy(s.level) + omega_c * s.photon_n as f64);
    }
}

/// `ε|e⟩⟨e| + ω a†a + g(a|e⟩⟨g| + h.c.) + g_c(a†|e⟩⟨g| + h.c.)`
pub fn rabi_hamiltonian(basis: &Basis, p: &ModelParams) -> Result<OperatorMatrix> {
    Scheme::Rabi.check_basis(basis)?;
    p.validate()?;
    let mut h = OperatorMatrix::zeros(basis.dim());
    add_diagonal(&mut h, basis, |l| if l == Level::E { p.epsilon } else { 0.0 }, p.omega_c);
    add_coupling(&mut h, basis, p.g, Photon::Lower, Level::G, Level::E);
    add_coupling(&mut h, basis, p.g_c, Photon::Raise, Level::G, Level::E);
    Ok(h)
}

/// Λ scheme: `−ε′|u⟩⟨u| + ε|e⟩⟨e| + ω a†a` with e–g couplings `g, g_c` and
/// g–u stray couplings `g′, g′_c`.
pub fn lambda_hamiltonian(basis: &Basis, p: &ModelParams) -> Result<OperatorMatrix> {
    Scheme::Lambda.check_basis(basis)?;
    p.validate()?;
    let mut h = OperatorMatrix::zeros(basis.dim());
    add_diagonal(
        &mut h,
        basis,
        |l| match l {
            Level::U => -p.epsilon_prime,
            Level::G => 0.0,
            Level::E => p.epsilon,
        },
        p.omega_c,
    );
    add_coupling(&mut h, basis, p.g, Photon::Lower, Level::G, Level::E);
    add_coupling(&mut h, basis, p.g_prime, Photon::Lower, Level::U, Level::G);
    add_coupling(&mut h, basis, p.g_c, Photon::Raise, Level::G, Level::E);
    add_coupling(&mut h, basis, p.g_prime_c, Photon::Raise, Level::U, Level::G);
    Ok(h)
}

/// V scheme: `ε|e⟩⟨e| + (ε + ε′)|u⟩⟨u| + ω a†a` with e–g couplings `g, g_c`
/// and u–e stray couplings `g′, g′_c`.
pub fn vee_hamiltonian(basis: &Basis, p: &ModelParams) -> Result<OperatorMatrix> {
    Scheme::Vee.check_basis(basis)?;
    p.validate()?;
    let mut h = OperatorMatrix::zeros(basis.dim());
    add_diagonal(
        &mut h,
        basis,
        |l| match l {
            Level::G => 0.0,
            Level::E => p.epsilon,
            Level::U => p.epsilon + p.epsilon_prime,
        },
        p.omega_c,
    );
    add_coupling(&mut h, basis, p.g, Photon::Lower, Level::G, Level::E);
    add_coupling(&mut h, basis, p.g_prime, Photon::Lower, Level::E, Level::U);
    add_coupling(&mut h, basis, p.g_c, Photon::Raise, Level::G, Level::E);
    add_coupling(&mut h, basis, p.g_prime_c, Photon::Raise, Level::E, Level::U);
    Ok(h)
}

pub fn hamiltonian(scheme: Scheme, basis: &Basis, p: &ModelParams) -> Result<OperatorMatrix> {
    match scheme {
        Scheme::Rabi => rabi_hamiltonian(basis, p),
        Scheme::Lambda => lambda_hamiltonian(basis, p),
        Scheme::Vee => vee_hamiltonian(basis, p),
    }
}

/// Structure of the drive ("dipole") coupling to the atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DriveScheme {
    /// `(|u⟩⟨g| + (1/η)|g⟩⟨e|) + h.c.`
    LambdaLadder,
    /// `(|e⟩⟨u| + (1/η)|e⟩⟨g|) + h.c.`
    VeeLadder,
    /// `|u⟩⟨g| + |g⟩⟨u|`
    UGOnly,
    /// `|u⟩⟨e| + |e⟩⟨u|`
    UEOnly,
    /// `|e⟩⟨g| + |g⟩⟨e|`
    EGOnly,
}

impl DriveScheme {
    pub fn is_ladder(self) -> bool {
        matches!(self, DriveScheme::LambdaLadder | DriveScheme::VeeLadder)
    }
}

impl std::str::FromStr for DriveScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "lambdaladder" => Ok(DriveScheme::LambdaLadder),
            "veeladder" => Ok(DriveScheme::VeeLadder),
            "ugonly" | "ug" => Ok(DriveScheme::UGOnly),
            "ueonly" | "ue" => Ok(DriveScheme::UEOnly),
            "egonly" | "eg" => Ok(DriveScheme::EGOnly),
            _ => Err(Error::InvalidParameter(format!("unknown drive scheme '{s}'"))),
        }
    }
}

fn add_transition(m: &mut OperatorMatrix, basis: &Basis, strength: f64, a: Level, b: Level) -> Result<()> {
    for l in [a, b] {
        if !basis.has_level(l) {
            return Err(Error::UnknownLevel(l));
        }
    }
    for (col, s) in basis.states().iter().enumerate() {
        if s.level != a {
            continue;
        }
        if let Some(row) = basis.index_of(BasisState::new(s.photon_n, b)) {
            m.add_real(row, col, strength);
            m.add_real(col, row, strength);
        }
    }
    Ok(())
}

/// Hermitian dimensionless drive operator `D`; the control Hamiltonian
/// is `W(t) · D`. `eta` is only read by the ladder schemes.
pub fn drive_operator(basis: &Basis, scheme: DriveScheme, eta: f64) -> Result<OperatorMatrix> {
    if scheme.is_ladder() && !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("ladder drive needs eta > 0, got {eta}")));
    }
    let mut d = OperatorMatrix::zeros(basis.dim());
    match scheme {
        DriveScheme::LambdaLadder => {
            add_transition(&mut d, basis, 1.0, Level::G, Level::U)?;
            add_transition(&mut d, basis, 1.0 / eta, Level::E, Level::G)?;
        }
        DriveScheme::VeeLadder => {
            add_transition(&mut d, basis, 1.0, Level::U, Level::E)?;
            add_transition(&mut d, basis, 1.0 / eta, Level::G, Level::E)?;
        }
        DriveScheme::UGOnly => add_transition(&mut d, basis, 1.0, Level::G, Level::U)?,
        DriveScheme::UEOnly => add_transition(&mut d, basis, 1.0, Level::E, Level::U)?,
        DriveScheme::EGOnly => add_transition(&mut d, basis, 1.0, Level::G, Level::E)?,
    }
    Ok(d)
}
