//! Fixed-step propagation of the pair density matrix under either theory.
//!
//! Phenomenological: `drho/dt = -i[H,rho] - kS(rho QS + QS rho) - kT(rho QT + QT rho) - kSR rho`.
//! The trace decays; the surviving population is `N(t) = Tr rho(t)` and obeys
//! `dTr rho/dt = -2 kS S - 2 kT T - kSR Tr rho` with `S = Tr(rho QS)`, `T = Tr(rho QT)`.
//!
//! Quantum measurement: `drho/dt = -i[H,rho] - (kS+kT)(QS rho + rho QS - 2 QS rho QS)
//! - kSR(rho - 1/(4n))`. This is trace-preserving — recombination acts as a
//! continuous singlet/triplet measurement — and is algebraically identical to
//! the two-channel dissipator `kS D[QS] + kT D[QT]` with
//! `D[B] rho = B'B rho + rho B'B - 2 B rho B'` (checked in tests). The
//! population instead decays through per-step jump probabilities
//! `pS = 2 kS <QS> dt`, `pT = 2 kT <QT> dt` evaluated on the current
//! (normalized) state: `N(t) = N(t - dt) (1 - pS - pT)`.
//!
//! Integration is classical RK4 with a fixed step; every step re-Hermitizes
//! the state as `(M + M')/2` so roundoff cannot accumulate in the
//! anti-Hermitian direction.

use crate::error::{Error, Result};
use crate::matrix::{expectation, ComplexMatrix, IM};
use crate::model::{build_hamiltonian, initial_state, CreationRate, Hamiltonian, SimParams, Theory};
use crate::spin::{build_space, SpinOperatorSet, SystemSpec};

/// Right-hand side of the phenomenological master equation.
pub fn rhs_phenomenological(
    rho: &ComplexMatrix,
    h: &ComplexMatrix,
    qs: &ComplexMatrix,
    qt: &ComplexMatrix,
    k_s: f64,
    k_t: f64,
    k_sr: f64,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rho.dim());
    if h.max_abs() != 0.0 {
        let h_rho = h * rho;
        // rho and H are Hermitian, so rho H = (H rho)'.
        out = out - (&h_rho - &h_rho.dagger()) * IM;
    }
    if k_s != 0.0 {
        let qs_rho = qs * rho;
        out = out - (&qs_rho + &qs_rho.dagger()) * k_s;
    }
    if k_t != 0.0 {
        let qt_rho = qt * rho;
        out = out - (&qt_rho + &qt_rho.dagger()) * k_t;
    }
    if k_sr != 0.0 {
        out = out - rho * k_sr;
    }
    out
}

/// Right-hand side of the quantum-measurement master equation.
///
/// `nuclear_multiplicity` fixes the maximally mixed state 1/(4n) that the
/// relaxation term pulls toward. The result is traceless for unit-trace
/// input, so the norm of the state is conserved.
pub fn rhs_quantum(
    rho: &ComplexMatrix,
    h: &ComplexMatrix,
    qs: &ComplexMatrix,
    nuclear_multiplicity: usize,
    k_s: f64,
    k_t: f64,
    k_sr: f64,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rho.dim());
    if h.max_abs() != 0.0 {
        let h_rho = h * rho;
        out = out - (&h_rho - &h_rho.dagger()) * IM;
    }
    let k = k_s + k_t;
    if k != 0.0 {
        let qs_rho = qs * rho;
        let sandwich = &qs_rho * qs;
        out = out - (&(&qs_rho + &qs_rho.dagger()) - &(sandwich * 2.0)) * k;
    }
    if k_sr != 0.0 {
        let dim = rho.dim();
        let uniform = ComplexMatrix::identity(dim) * (1.0 / (4.0 * nuclear_multiplicity as f64));
        out = out - (rho - &uniform) * k_sr;
    }
    out
}

/// One classical Runge–Kutta-4 step; the result is re-Hermitized.
pub fn step_rk4(
    rho: &ComplexMatrix,
    dt: f64,
    rhs: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> ComplexMatrix {
    let k1 = rhs(rho);
    let k2 = rhs(&(rho + &k1 * (0.5 * dt)));
    let k3 = rhs(&(rho + &k2 * (0.5 * dt)));
    let k4 = rhs(&(rho + &k3 * dt));
    let incr = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    (rho + incr).hermitize()
}

/// Per-step singlet/triplet recombination probabilities
/// `pS = 2 kS <QS> dt`, `pT = 2 kT <QT> dt` for the current normalized state.
/// Both are clamped to [0, 1] against roundoff; their sum must stay below 1
/// or the step size is too coarse for the rates.
pub fn jump_probabilities(
    rho: &ComplexMatrix,
    qs: &ComplexMatrix,
    qt: &ComplexMatrix,
    k_s: f64,
    k_t: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    let s = expectation(rho, qs)?.clamp(0.0, 1.0);
    let t = expectation(rho, qt)?.clamp(0.0, 1.0);
    let p_s = (2.0 * k_s * s * dt).clamp(0.0, 1.0);
    let p_t = (2.0 * k_t * t * dt).clamp(0.0, 1.0);
    if p_s + p_t >= 1.0 {
        return Err(Error::JumpProbabilityOverflow { sum: p_s + p_t });
    }
    Ok((p_s, p_t))
}

/// Time series produced by one propagation.
///
/// `singlet`/`triplet` are `<QS>`/`<QT>` of the propagated state: fractions of
/// the *surviving* pairs for the quantum theory (they sum to 1), decaying
/// occupations for the phenomenological theory (they sum to `trace`). `trace`
/// is always the raw trace of the propagated state. `population` is the
/// surviving-pair fraction — the trace (phenomenological) or the jump-recursion
/// N (quantum) — with creation kinetics folded in when a finite creation rate
/// is set; it is what an absorption measurement sees.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub theory: Theory,
    /// Sample times, us; uniform grid starting at 0.
    pub times: Vec<f64>,
    pub singlet: Vec<f64>,
    pub triplet: Vec<f64>,
    pub trace: Vec<f64>,
    pub population: Vec<f64>,
    /// Sparse full-state samples as (grid index, state) pairs.
    pub rho_samples: Vec<(usize, ComplexMatrix)>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The measured transient-absorption signal: proportional to the number
    /// of surviving pairs.
    pub fn absorption(&self) -> &[f64] {
        &self.population
    }

    /// Index of the grid point nearest to `t_us`.
    pub fn index_at_time(&self, t_us: f64) -> usize {
        let dt = self.times.get(1).copied().unwrap_or(1.0);
        ((t_us / dt).round() as usize).min(self.times.len().saturating_sub(1))
    }

    pub fn rho_at_step(&self, step: usize) -> Option<&ComplexMatrix> {
        self.rho_samples
            .iter()
            .find(|(s, _)| *s == step)
            .map(|(_, rho)| rho)
    }
}

/// Propagates the initial singlet state over the configured grid.
pub fn propagate(spec: &SystemSpec, params: &SimParams) -> Result<Trajectory> {
    params.validate()?;
    let ops = build_space(spec)?;
    let h = build_hamiltonian(spec, &ops, params)?;
    propagate_with(&ops, &h, params)
}

/// Same as [`propagate`] for pre-built operators and Hamiltonian.
pub fn propagate_with(
    ops: &SpinOperatorSet,
    h: &Hamiltonian,
    params: &SimParams,
) -> Result<Trajectory> {
    params.validate()?;
    if ops.dim() != h.dim() {
        return Err(Error::DimensionMismatch { left: ops.dim(), right: h.dim() });
    }
    let dt = params.dt_us;
    let n_steps = params.n_steps();
    let qs = ops.singlet_projector();
    let qt = ops.triplet_projector();
    let n_mult = ops.nuclear_multiplicity();

    let mut rho = initial_state(ops);
    let mut population = 1.0_f64;

    let mut traj = Trajectory {
        theory: params.theory,
        times: Vec::with_capacity(n_steps + 1),
        singlet: Vec::with_capacity(n_steps + 1),
        triplet: Vec::with_capacity(n_steps + 1),
        trace: Vec::with_capacity(n_steps + 1),
        population: Vec::with_capacity(n_steps + 1),
        rho_samples: Vec::new(),
    };

    let record = |traj: &mut Trajectory, step: usize, rho: &ComplexMatrix, population: f64| {
        traj.times.push(step as f64 * dt);
        traj.singlet.push(expectation(rho, qs).expect("dims match"));
        traj.triplet.push(expectation(rho, qt).expect("dims match"));
        traj.trace.push(rho.trace().re);
        traj.population.push(population);
        if params.rho_sample_stride != 0 && step % params.rho_sample_stride == 0 {
            traj.rho_samples.push((step, rho.clone()));
        }
    };

    record(&mut traj, 0, &rho, population);

    for step in 1..=n_steps {
        match params.theory {
            Theory::Quantum => {
                let (p_s, p_t) = jump_probabilities(&rho, qs, qt, params.k_s, params.k_t, dt)?;
                population *= 1.0 - p_s - p_t;
                rho = step_rk4(&rho, dt, |r| {
                    rhs_quantum(r, h.matrix(), qs, n_mult, params.k_s, params.k_t, params.k_sr)
                });
            }
            Theory::Phenomenological => {
                rho = step_rk4(&rho, dt, |r| {
                    rhs_phenomenological(r, h.matrix(), qs, qt, params.k_s, params.k_t, params.k_sr)
                });
                population = rho.trace().re;
            }
        }
        if !rho.is_finite() {
            return Err(Error::IntegrationBlowup { step, time_us: step as f64 * dt });
        }
        record(&mut traj, step, &rho, population);
    }

    if let CreationRate::Rate(k_cr) = params.creation {
        traj.population = creation_convolution(&traj.population, k_cr, dt);
    }
    Ok(traj)
}

/// Folds exponential pair creation into an instantaneous-creation signal:
///
/// `out(t) = integral_0^t k_cr exp(-k_cr tau) f(t - tau) dtau`
///
/// i.e. pairs are created at rate `k_cr exp(-k_cr t)` and each cohort follows
/// `f` from its own birth; not-yet-created pairs contribute nothing. The
/// integral is evaluated per grid interval with the exact exponential-kernel
/// mass against a piecewise-linear interpolant of `f`, accumulated by a damped
/// recursion. This reduces to the trapezoid rule as `k_cr * dt -> 0`, is exact
/// for constant `f` (giving `1 - exp(-k_cr t)`), and degrades gracefully into
/// the delta-kernel limit `out = f` when `k_cr * dt >> 1`.
pub fn creation_convolution(signal: &[f64], k_cr: f64, dt: f64) -> Vec<f64> {
    assert!(k_cr > 0.0 && k_cr.is_finite(), "creation rate must be positive");
    assert!(dt > 0.0, "dt must be positive");
    if signal.is_empty() {
        return Vec::new();
    }
    let kh = k_cr * dt;
    let decay = (-kh).exp();
    // Kernel moments over one interval against a linear interpolant:
    // m0 = 1 - e^{-kh} (total mass), m1 = first moment toward the newer sample.
    let m0 = -(-kh).exp_m1();
    let m1 = 1.0 - m0 / kh;
    let (w_old, w_new) = (m0 - m1, m1);

    let mut out = Vec::with_capacity(signal.len());
    let mut acc = 0.0_f64;
    out.push(0.0);
    for j in 1..signal.len() {
        acc = decay * acc + w_old * signal[j - 1] + w_new * signal[j];
        out.push(acc);
    }
    out
}
