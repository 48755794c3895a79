//! Time-dependent Schrödinger equation `i dψ/dt = [H₀ + W(t) D] ψ`.
//!
//! The drive is not rotating-wave approximated. Integration runs in the
//! interaction picture of `H₀`, where the amplitudes only move under the
//! drive, with an explicit Dormand–Prince 8(5,3) pair and its seventh-order
//! dense output.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::drive::{field_value, DriveConfig};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, OperatorMatrix};
use crate::spectra::{diagonalize, Label, LabeledSpectrum};

/// Integration knobs.
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// Local error per unit time, used as both absolute and relative
    /// tolerance.
    pub tol: f64,
    /// Number of uniformly spaced output samples (endpoints included).
    pub sample_count: usize,
    pub max_steps: usize,
    /// Largest accepted `|‖ψ‖ − 1|`.
    pub norm_gate: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            sample_count: 2000,
            max_steps: 50_000_000,
            norm_gate: 1e-6,
        }
    }
}

/// Sampled solution in the product basis.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
    pub norm_drift: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<Complex64> {
        self.states.last().expect("trajectory has at least two samples")
    }
}

mod tableau {
    pub const C: [f64; 16] = [
        0.0,
        0.526001519587677318785587544488E-01,
        0.789002279381515978178381316732E-01,
        0.118350341907227396726757197510E+00,
        0.281649658092772603273242802490E+00,
        0.333333333333333333333333333333E+00,
        0.25E+00,
        0.307692307692307692307692307692E+00,
        0.651282051282051282051282051282E+00,
        0.6E+00,
        0.857142857142857142857142857142E+00,
        1.0,
        1.0,
        0.1E+00,
        0.2E+00,
        0.777777777777777777777777777778E+00,
    ];

    /// Row `i` holds the coefficients of stage `i + 2`. Stage 13 is the
    /// derivative at the new point and has no row of its own.
    pub const A: [&[f64]; 15] = [
        &[5.26001519587677318785587544488E-2],
        &[1.97250569845378994544595329183E-2, 5.91751709536136983633785987549E-2],
        &[2.95875854768068491816892993775E-2, 0.0, 8.87627564304205475450678981324E-2],
        &[
            2.41365134159266685502369798665E-1,
            0.0,
            -8.84549479328286085344864962717E-1,
            9.24834003261792003115737966543E-1,
        ],
        &[
            3.7037037037037037037037037037E-2,
            0.0,
            0.0,
            1.70828608729473871279604482173E-1,
            1.25467687566822425016691814123E-1,
        ],
        &[
            3.7109375E-2,
            0.0,
            0.0,
            1.70252211019544039314978060272E-1,
            6.02165389804559606850219397283E-2,
            -1.7578125E-2,
        ],
        &[
            3.70920001185047927108779319836E-2,
            0.0,
            0.0,
            1.70383925712239993810214054705E-1,
            1.07262030446373284651809199168E-1,
            -1.53194377486244017527936158236E-2,
            8.27378916381402288758473766002E-3,
        ],
        &[
            6.24110958716075717114429577812E-1,
            0.0,
            0.0,
            -3.36089262944694129406857109825E0,
            -8.68219346841726006818189891453E-1,
            2.75920996994467083049415600797E1,
            2.01540675504778934086186788979E1,
            -4.34898841810699588477366255144E1,
        ],
        &[
            4.77662536438264365890433908527E-1,
            0.0,
            0.0,
            -2.48811461997166764192642586468E0,
            -5.90290826836842996371446475743E-1,
            2.12300514481811942347288949897E1,
            1.52792336328824235832596922938E1,
            -3.32882109689848629194453265587E1,
            -2.03312017085086261358222928593E-2,
        ],
        &[
            -9.3714243008598732571704021658E-1,
            0.0,
            0.0,
            5.18637242884406370830023853209E0,
            1.09143734899672957818500254654E0,
            -8.14978701074692612513997267357E0,
            -1.85200656599969598641566180701E1,
            2.27394870993505042818970056734E1,
            2.49360555267965238987089396762E0,
            -3.0467644718982195003823669022E0,
        ],
        &[
            2.27331014751653820792359768449E0,
            0.0,
            0.0,
            -1.05344954667372501984066689879E1,
            -2.00087205822486249909675718444E0,
            -1.79589318631187989172765950534E1,
            2.79488845294199600508499808837E1,
            -2.85899827713502369474065508674E0,
            -8.87285693353062954433549289258E0,
            1.23605671757943030647266201528E1,
            6.43392746015763530355970484046E-1,
        ],
        &[],
        &[
            5.61675022830479523392909219681E-2,
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
            2.53500210216624811088794765333E-1,
            -2.46239037470802489917441475441E-1,
            -1.24191423263816360469010140626E-1,
            1.5329179827876569731206322685E-1,
            8.20105229563468988491666602057E-3,
            7.56789766054569976138603589584E-3,
            -8.298E-3,
        ],
        &[
            3.18346481635021405060768473261E-2,
            0.0,
            0.0,
            0.0,
            0.0,
            2.83009096723667755288322961402E-2,
            5.35419883074385676223797384372E-2,
            -5.49237485713909884646569340306E-2,
            0.0,
            0.0,
            -1.08347328697249322858509316994E-4,
            3.82571090835658412954920192323E-4,
            -3.40465008687404560802977114492E-4,
            1.41312443674632500278074618366E-1,
        ],
        &[
            -4.28896301583791923408573538692E-1,
            0.0,
            0.0,
            0.0,
            0.0,
            -4.69762141536116384314449447206E0,
            7.68342119606259904184240953878E0,
            4.06898981839711007970213554331E0,
            3.56727187455281109270669543021E-1,
            0.0,
            0.0,
            0.0,
            -1.39902416515901462129418009734E-3,
            2.9475147891527723389556272149E0,
            -9.15095847217987001081870187138E0,
        ],
    ];

    pub const B: [f64; 12] = [
        5.42937341165687622380535766363E-2,
        0.0,
        0.0,
        0.0,
        0.0,
        4.45031289275240888144113950566E0,
        1.89151789931450038304281599044E0,
        -5.8012039600105847814672114227E0,
        3.1116436695781989440891606237E-1,
        -1.52160949662516078556178806805E-1,
        2.01365400804030348374776537501E-1,
        4.47106157277725905176885569043E-2,
    ];

    pub const BHH: [f64; 3] = [
        0.244094488188976377952755905512E+00,
        0.733846688281611857341361741547E+00,
        0.220588235294117647058823529412E-01,
    ];

    pub const E: [f64; 12] = [
        0.1312004499419488073250102996E-01,
        0.0,
        0.0,
        0.0,
        0.0,
        -0.1225156446376204440720569753E+01,
        -0.4957589496572501915214079952E+00,
        0.1664377182454986536961530415E+01,
        -0.3503288487499736816886487290E+00,
        0.3341791187130174790297318841E+00,
        0.8192320648511571246570742613E-01,
        -0.2235530786388629525884427845E-01,
    ];

    pub const D: [[f64; 16]; 4] = [
        [
            -0.84289382761090128651353491142E+01,
            0.0,
            0.0,
            0.0,
            0.0,
            0.56671495351937776962531783590E+00,
            -0.30689499459498916912797304727E+01,
            0.23846676565120698287728149680E+01,
            0.21170345824450282767155149946E+01,
            -0.87139158377797299206789907490E+00,
            0.22404374302607882758541771650E+01,
            0.63157877876946881815570249290E+00,
            -0.88990336451333310820698117400E-01,
            0.18148505520854727256656404962E+02,
            -0.91946323924783554000451984436E+01,
            -0.44360363875948939664310572000E+01,
        ],
        [
            0.10427508642579134603413151009E+02,
            0.0,
            0.0,
            0.0,
            0.0,
            0.24228349177525818288430175319E+03,
            0.16520045171727028198505394887E+03,
            -0.37454675472269020279518312152E+03,
            -0.22113666853125306036270938578E+02,
            0.77334326684722638389603898808E+01,
            -0.30674084731089398182061213626E+02,
            -0.93321305264302278729567221706E+01,
            0.15697238121770843886131091075E+02,
            -0.31139403219565177677282850411E+02,
            -0.93529243588444783865713862664E+01,
            0.35816841486394083752465898540E+02,
        ],
        [
            0.19985053242002433820987653617E+02,
            0.0,
            0.0,
            0.0,
            0.0,
            -0.38703730874935176555105901742E+03,
            -0.18917813819516756882830838328E+03,
            0.52780815920542364900561016686E+03,
            -0.11573902539959630126141871134E+02,
            0.68812326946963000169666922661E+01,
            -0.10006050966910838403183860980E+01,
            0.77771377980534432092869265740E+00,
            -0.27782057523535084065932004339E+01,
            -0.60196695231264120758267380846E+02,
            0.84320405506677161018159903784E+02,
            0.11992291136182789328035130030E+02,
        ],
        [
            -0.25693933462703749003312586129E+02,
            0.0,
            0.0,
            0.0,
            0.0,
            -0.15418974869023643374053993627E+03,
            -0.23152937917604549567536039109E+03,
            0.35763911791061412378285349910E+03,
            0.93405324183624310003907691704E+02,
            -0.37458323136451633156875139351E+02,
            0.10409964950896230045147246184E+03,
            0.29840293426660503123344363579E+02,
            -0.43533456590011143754432175058E+02,
            0.96324553959188282948394950600E+02,
            -0.39177261675615439165231486172E+02,
            -0.14972683625798562581422125276E+03,
        ],
    ];
}

type C64 = Complex64;

/// Right-hand side `f(t, y)` of a complex ODE system.
pub trait ComplexSystem {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[C64], out: &mut [C64]);
}

/// Interaction-picture Schrödinger equation: with `c = e^{iEt} V† ψ`,
/// `dc_i/dt = −i W(t) Σ_j e^{i(E_i − E_j)t} D̃_ij c_j`.
struct InteractionPicture<'a> {
    energies: Vec<f64>,
    dipole_re: Option<DMatrix<f64>>,
    dipole: DMatrix<C64>,
    drive: &'a DriveConfig,
    scratch: std::cell::RefCell<(Vec<C64>, Vec<C64>)>,
}

impl ComplexSystem for InteractionPicture<'_> {
    fn dim(&self) -> usize {
        self.energies.len()
    }

    fn eval(&self, t: f64, y: &[C64], out: &mut [C64]) {
        let w = field_value(self.drive, t);
        if w == 0.0 {
            out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
            return;
        }
        let n = self.energies.len();
        let mut scratch = self.scratch.borrow_mut();
        let (phase, q) = &mut *scratch;
        for j in 0..n {
            let (s, c) = (self.energies[j] * t).sin_cos();
            phase[j] = C64::new(c, s);
            q[j] = y[j] * phase[j].conj();
        }
        match &self.dipole_re {
            Some(d) => {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..n {
                        acc += q[j] * d[(i, j)];
                    }
                    // −i W e^{iE_i t} acc
                    out[i] = acc * phase[i] * C64::new(0.0, -w);
                }
            }
            None => {
                for i in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..n {
                        acc += self.dipole[(i, j)] * q[j];
                    }
                    out[i] = acc * phase[i] * C64::new(0.0, -w);
                }
            }
        }
    }
}

/// Result of an adaptive integration resampled on requested times.
pub struct OdeSolution {
    pub samples: Vec<Vec<C64>>,
    pub steps: usize,
    pub rejected: usize,
    pub norm_drift: f64,
}

fn axpy_stages(y: &[C64], h: f64, row: &[f64], k: &[Vec<C64>], out: &mut [C64]) {
    out.copy_from_slice(y);
    for (j, &a) in row.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let ha = h * a;
        for (o, kj) in out.iter_mut().zip(&k[j]) {
            *o += kj * ha;
        }
    }
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrates `sys` from `t0` to `t1` (either direction) and returns the
/// solution at `sample_times`, which must be monotone in the direction of
/// integration and lie inside `[t0, t1]`.
pub fn integrate_dop853(
    sys: &dyn ComplexSystem,
    t0: f64,
    t1: f64,
    y0: &[C64],
    sample_times: &[f64],
    opts: &EvolveOptions,
) -> Result<OdeSolution> {
    use tableau::*;
    let n = sys.dim();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let tol = opts.tol;
    let norm0 = vec_norm(y0);

    let mut samples: Vec<Vec<C64>> = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;
    while next_sample < sample_times.len() && (sample_times[next_sample] - t0) * dir <= 0.0 {
        samples.push(y0.to_vec());
        next_sample += 1;
    }

    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 16];
    let mut y = y0.to_vec();
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    let mut t = t0;
    sys.eval(t, &y, &mut k[0]);

    // starting step from the size of the derivative
    let fnorm = vec_norm(&k[0]);
    let mut h = if fnorm > 0.0 {
        (0.01 * norm0.max(1e-300) / fnorm).min(span)
    } else {
        span.min(1.0)
    };
    h = h.max(1e-6 * span.min(1.0)) * dir;

    let mut steps = 0;
    let mut rejected = 0;
    let mut norm_drift = 0.0_f64;
    let mut last = false;

    const SAFE: f64 = 0.9;
    const FACL: f64 = 0.333;
    const FACR: f64 = 6.0;
    let expo = 1.0 / 7.0;

    while (t1 - t) * dir > 0.0 {
        if steps + rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                max_steps: opts.max_steps,
                t,
            });
        }
        if (t + h - t1) * dir >= 0.0 {
            h = t1 - t;
            last = true;
        }
        if h.abs() <= 10.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }

        // stages 2..12
        for s in 1..12 {
            axpy_stages(&y, h, A[s - 1], &k[..s], &mut tmp);
            sys.eval(t + C[s] * h, &tmp, &mut k[s]);
        }
        // eighth-order solution
        axpy_stages(&y, h, &B, &k[..12], &mut y_new);

        // error estimate
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..n {
            let sk = tol + tol * y[i].norm().max(y_new[i].norm());
            let mut e5 = C64::new(0.0, 0.0);
            for (j, &ej) in E.iter().enumerate() {
                if ej != 0.0 {
                    e5 += k[j][i] * ej;
                }
            }
            let mut bsum = C64::new(0.0, 0.0);
            for (j, &bj) in B.iter().enumerate() {
                if bj != 0.0 {
                    bsum += k[j][i] * bj;
                }
            }
            let e3 = bsum - k[0][i] * BHH[0] - k[8][i] * BHH[1] - k[11][i] * BHH[2];
            err += (e5 / sk).norm_sqr();
            err2 += (e3 / sk).norm_sqr();
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        // error per unit time: the step's local error divided by |h|
        let err = err * (1.0 / (n as f64 * deno)).sqrt();

        let fac11 = err.powf(expo);
        let fac = (fac11 / SAFE).clamp(1.0 / FACR, 1.0 / FACL);
        let h_new = h / fac;

        if err <= 1.0 {
            steps += 1;
            // derivative at the new point is stage 13
            sys.eval(t + h, &y_new, &mut k[12]);
            let t_new = t + h;
            let wants_dense = next_sample < sample_times.len() && (sample_times[next_sample] - t_new) * dir < 0.0;
            if wants_dense {
                for s in 13..16 {
                    axpy_stages(&y, h, A[s - 1], &k[..s], &mut tmp);
                    sys.eval(t + C[s] * h, &tmp, &mut k[s]);
                }
                let mut r: Vec<[C64; 8]> = vec![[C64::new(0.0, 0.0); 8]; n];
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = k[0][i] * h - ydiff;
                    r[i][0] = y[i];
                    r[i][1] = ydiff;
                    r[i][2] = bspl;
                    r[i][3] = ydiff - k[12][i] * h - bspl;
                    for (row, dr) in D.iter().enumerate() {
                        let mut acc = C64::new(0.0, 0.0);
                        for (j, &dj) in dr.iter().enumerate() {
                            if dj != 0.0 {
                                acc += k[j][i] * dj;
                            }
                        }
                        r[i][4 + row] = acc * h;
                    }
                }
                while next_sample < sample_times.len() && (sample_times[next_sample] - t_new) * dir < 0.0 {
                    let s = (sample_times[next_sample] - t) / h;
                    let s1 = 1.0 - s;
                    let v: Vec<C64> = r
                        .iter()
                        .map(|c| {
                            let conpar = c[4] + (c[5] + (c[6] + c[7] * s) * s1) * s;
                            c[0] + (c[1] + (c[2] + (c[3] + conpar * s1) * s) * s1) * s
                        })
                        .collect();
                    samples.push(v);
                    next_sample += 1;
                }
            }
            std::mem::swap(&mut y, &mut y_new);
            let (head, tail) = k.split_at_mut(12);
            head[0].copy_from_slice(&tail[0]);
            t = t_new;
            norm_drift = norm_drift.max((vec_norm(&y) - norm0).abs());
            if norm_drift > opts.norm_gate {
                return Err(Error::NormDrift {
                    drift: norm_drift,
                    gate: opts.norm_gate,
                    tol,
                });
            }
            while next_sample < sample_times.len() && (sample_times[next_sample] - t) * dir <= 0.0 {
                samples.push(y.clone());
                next_sample += 1;
            }
            if last {
                break;
            }
            h = if h_new.abs() > span { span * dir } else { h_new };
        } else {
            rejected += 1;
            last = false;
            h /= (fac11 / SAFE).min(1.0 / FACL);
        }
    }
    while samples.len() < sample_times.len() {
        samples.push(y.clone());
    }
    Ok(OdeSolution {
        samples,
        steps,
        rejected,
        norm_drift,
    })
}

fn uniform_grid(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| {
            if k + 1 == count {
                t1
            } else {
                t0 + (t1 - t0) * k as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// Evolves `psi0` over the drive window `[t_start, t_end]`.
pub fn evolve(
    h0: &OperatorMatrix,
    dipole: &OperatorMatrix,
    drive: &DriveConfig,
    psi0: &DVector<C64>,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    evolve_between(h0, dipole, drive, psi0, drive.t_start, drive.t_end, opts)
}

/// Evolves `psi0` from `t_from` to `t_to`; `t_to < t_from` integrates
/// backwards in time.
pub fn evolve_between(
    h0: &OperatorMatrix,
    dipole: &OperatorMatrix,
    drive: &DriveConfig,
    psi0: &DVector<C64>,
    t_from: f64,
    t_to: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let n = h0.dim();
    if dipole.dim() != n || psi0.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: if dipole.dim() != n { dipole.dim() } else { psi0.len() },
        });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let eig = diagonalize(h0)?;
    let v = &eig.vectors;
    let dressed = v.adjoint() * dipole.matrix() * v;
    let scale = dressed.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let imag = dressed.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
    let dipole_re = (imag <= 1e-14 * scale.max(1e-300)).then(|| dressed.map(|z| z.re));
    let sys = InteractionPicture {
        energies: eig.values.clone(),
        dipole_re,
        dipole: dressed,
        drive,
        scratch: std::cell::RefCell::new((vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n])),
    };

    let phase_at = |t: f64, c: &[C64], sign: f64| -> DVector<C64> {
        DVector::from_fn(n, |j, _| {
            let (s, co) = (sign * eig.values[j] * t).sin_cos();
            c[j] * C64::new(co, s)
        })
    };
    // c(t_from) = e^{iE t} V† ψ
    let c0v = v.adjoint() * psi0;
    let c0: Vec<C64> = phase_at(t_from, c0v.as_slice(), 1.0).iter().copied().collect();

    let times = uniform_grid(t_from, t_to, opts.sample_count);
    let sol = integrate_dop853(&sys, t_from, t_to, &c0, &times, opts)?;
    let states = times
        .iter()
        .zip(&sol.samples)
        .map(|(&t, c)| v * phase_at(t, c, -1.0))
        .collect();
    Ok(Trajectory {
        times,
        states,
        norm_drift: sol.norm_drift,
        steps: sol.steps,
        rejected: sol.rejected,
    })
}

/// Population series of selected dressed states.
#[derive(Clone, Debug)]
pub struct PopulationHistory {
    pub times: Vec<f64>,
    pub labels: Vec<Label>,
    /// `populations[k][i]` is the population of `labels[k]` at `times[i]`.
    pub populations: Vec<Vec<f64>>,
    /// `1 − Σ_k P_k` at each sample.
    pub other: Vec<f64>,
    /// Photon-number distributions at selected times.
    pub photon_distributions: Vec<(f64, Vec<f64>)>,
}

impl PopulationHistory {
    pub fn series(&self, label: Label) -> Result<&[f64]> {
        let k = self.labels.iter().position(|l| *l == label).ok_or(Error::UnknownLabel(label))?;
        Ok(&self.populations[k])
    }

    pub fn final_population(&self, label: Label) -> Result<f64> {
        Ok(*self.series(label)?.last().unwrap_or(&0.0))
    }
}

/// `P_label(t) = |⟨Ψ_label|ψ(t)⟩|²`; the photon distribution of the final
/// sample is attached.
pub fn project_populations(traj: &Trajectory, spec: &LabeledSpectrum, labels: &[Label]) -> Result<PopulationHistory> {
    let vecs: Vec<DVector<C64>> = labels.iter().map(|l| spec.vector(*l)).collect::<Result<_>>()?;
    let populations: Vec<Vec<f64>> = vecs
        .iter()
        .map(|v| traj.states.iter().map(|psi| v.dotc(psi).norm_sqr()).collect())
        .collect();
    let other = (0..traj.times.len())
        .map(|i| 1.0 - populations.iter().map(|p| p[i]).sum::<f64>())
        .collect();
    let mut photon_distributions = Vec::new();
    if let (Some(&t), Some(psi)) = (traj.times.last(), traj.states.last()) {
        photon_distributions.push((t, photon_distribution(psi, spec.basis())));
    }
    Ok(PopulationHistory {
        times: traj.times.clone(),
        labels: labels.to_vec(),
        populations,
        other,
        photon_distributions,
    })
}

/// `p(n) = Σ_a |⟨n, a|ψ⟩|²` for `n = 0..=n_max`.
pub fn photon_distribution(psi: &DVector<C64>, basis: &Basis) -> Vec<f64> {
    let mut p = vec![0.0; basis.n_max() + 1];
    for (i, s) in basis.states().iter().enumerate() {
        p[s.photon_n] += psi[i].norm_sqr();
    }
    p
}

/// Outcome of the Fock-cutoff guard.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    pub passed: bool,
    pub max_top_occupation: f64,
    pub threshold: f64,
}

/// Largest population held on the two highest photon numbers of the
/// basis over the trajectory.
pub fn truncation_check(traj: &Trajectory, basis: &Basis, threshold: f64) -> TruncationReport {
    let top = basis.n_max();
    let mut worst = 0.0_f64;
    for psi in &traj.states {
        let occ: f64 = basis
            .states()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.photon_n + 1 >= top)
            .map(|(i, _)| psi[i].norm_sqr())
            .sum();
        worst = worst.max(occ);
    }
    TruncationReport {
        passed: worst <= threshold,
        max_top_occupation: worst,
        threshold,
    }
}
