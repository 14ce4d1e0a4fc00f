//! Physical model: simulation parameters, the magnetic Hamiltonian, and the
//! initial state.
//!
//! Units throughout: time in microseconds, rates and angular frequencies in
//! 1/us, magnetic fields in microtesla. The electron Zeeman frequency is
//! `omega = 0.014 * |B|` (1/us per uT), i.e. the free-electron gyromagnetic
//! ratio of 1.4 MHz/gauss taken literally as a rate, with no 2*pi folded in;
//! `omega_scale` lets callers test the alternative convention without
//! touching the model.


use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::spin::{SpinOperatorSet, SystemSpec};

/// Electron Zeeman frequency per unit field: 1/us per uT.
pub const ZEEMAN_RATE_PER_UT: f64 = 0.014;

/// Which master equation drives the reaction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theory {
    /// Recombination acts as a pair of decay channels on the density matrix;
    /// the trace decays with the surviving population.
    Phenomenological,
    /// Recombination acts as a continuous singlet/triplet measurement
    /// (trace-preserving); the population decays through jump probabilities.
    Quantum,
}

impl Theory {
    pub fn label(self) -> &'static str {
        match self {
            Theory::Phenomenological => "phenomenological",
            Theory::Quantum => "quantum",
        }
    }
}

/// Radical-pair creation kinetics: pairs either all exist at t = 0 or are
/// created by an exponential process with the given rate (1/us).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CreationRate {
    Instantaneous,
    Rate(f64),
}

/// Everything a single propagation needs besides the spin system itself.
#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    /// Singlet recombination rate, 1/us.
    pub k_s: f64,
    /// Triplet recombination rate, 1/us.
    pub k_t: f64,
    /// Spin relaxation rate, 1/us.
    pub k_sr: f64,
    /// Radical-pair creation kinetics.
    pub creation: CreationRate,
    /// Magnetic field vector, uT.
    pub b_field_ut: [f64; 3],
    pub theory: Theory,
    /// Propagation horizon, us.
    pub t_max_us: f64,
    /// Fixed integrator step, us.
    pub dt_us: f64,
    /// Multiplier on the Zeeman frequency (1.0 = the 0.014/uT/us convention).
    pub omega_scale: f64,
    /// Record the full density matrix every this many steps (0 = never).
    pub rho_sample_stride: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            k_s: 0.0,
            k_t: 0.0,
            k_sr: 0.0,
            creation: CreationRate::Instantaneous,
            b_field_ut: [0.0; 3],
            theory: Theory::Quantum,
            t_max_us: 10.0,
            dt_us: 1e-3,
            omega_scale: 1.0,
            rho_sample_stride: 100,
        }
    }
}

impl SimParams {
    /// Convenience: default grid, given rates/field/theory.
    pub fn new(theory: Theory, k_s: f64, k_t: f64, k_sr: f64, b_z_ut: f64) -> Self {
        SimParams {
            k_s,
            k_t,
            k_sr,
            b_field_ut: [0.0, 0.0, b_z_ut],
            theory,
            ..SimParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_s", self.k_s), ("k_t", self.k_t), ("k_sr", self.k_sr)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if let CreationRate::Rate(k) = self.creation {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::param("k_cr", format!("must be finite and > 0, got {k}")));
            }
        }
        if self.b_field_ut.iter().any(|b| !b.is_finite()) {
            return Err(Error::param("b_field_ut", "components must be finite"));
        }
        if !(self.t_max_us.is_finite() && self.t_max_us > 0.0) {
            return Err(Error::param("t_max_us", format!("must be > 0, got {}", self.t_max_us)));
        }
        if !(self.dt_us.is_finite() && self.dt_us > 0.0) {
            return Err(Error::param("dt_us", format!("must be > 0, got {}", self.dt_us)));
        }
        if !(self.omega_scale.is_finite() && self.omega_scale >= 0.0) {
            return Err(Error::param("omega_scale", "must be finite and >= 0"));
        }
        let n_steps = self.t_max_us / self.dt_us;
        if n_steps > 2e8 {
            return Err(Error::param("dt_us", format!("t_max/dt = {n_steps:.1e} steps is too many")));
        }
        // Rate-stability guard: the fastest decay channel must be resolved.
        let guard = self.dt_us * (2.0 * self.k_s + 2.0 * self.k_t + self.k_sr);
        if guard >= 0.1 {
            return Err(Error::param(
                "dt_us",
                format!("dt * (2 kS + 2 kT + kSR) = {guard:.3} must be < 0.1; reduce dt"),
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max_us / self.dt_us).round().max(1.0) as usize
    }

    /// |B| in uT.
    pub fn field_magnitude_ut(&self) -> f64 {
        let [bx, by, bz] = self.b_field_ut;
        (bx * bx + by * by + bz * bz).sqrt()
    }

    /// Zeeman angular frequency omega = 0.014 * |B| * omega_scale, 1/us.
    pub fn zeeman_frequency(&self) -> f64 {
        ZEEMAN_RATE_PER_UT * self.field_magnitude_ut() * self.omega_scale
    }
}

/// The coherent part of the evolution. Guaranteed Hermitian on construction.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    matrix: ComplexMatrix,
}

impl Hamiltonian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// H = omega (s1 + s2) . b_hat + sum_j I_j . A_j . s_e(j).
///
/// The Zeeman term couples both electrons to the field direction with the
/// frequency from `params`; each nucleus contributes
/// `sum_ab I_a A[a][b] s_b` against the electron it is assigned to.
/// Nuclear Zeeman terms are neglected (three orders of magnitude smaller).
pub fn build_hamiltonian(
    spec: &SystemSpec,
    ops: &SpinOperatorSet,
    params: &SimParams,
) -> Result<Hamiltonian> {
    if spec.dim() != ops.dim() {
        return Err(Error::DimensionMismatch { left: spec.dim(), right: ops.dim() });
    }
    let dim = ops.dim();
    let mut h = ComplexMatrix::zeros(dim);

    let b_mag = params.field_magnitude_ut();
    if b_mag > 0.0 && params.omega_scale > 0.0 {
        let omega = params.zeeman_frequency();
        let b_hat = params.b_field_ut.map(|b| b / b_mag);
        let zeeman = ops.electron1().dot3(b_hat) + ops.electron2().dot3(b_hat);
        h = h + zeeman * omega;
    }

    for (j, nuc) in spec.nuclei.iter().enumerate() {
        let i_ops = ops.nucleus(j);
        let s_ops = ops.electron(nuc.coupled_electron);
        for a in 0..3 {
            for b in 0..3 {
                let coeff = nuc.hyperfine[a][b];
                if coeff != 0.0 {
                    h = h + (i_ops.component(a) * s_ops.component(b)) * coeff;
                }
            }
        }
    }

    let defect = h.hermiticity_defect();
    assert!(
        defect <= 1e-12 * (1.0 + h.max_abs()),
        "Hamiltonian construction lost hermiticity (defect {defect})"
    );
    Ok(Hamiltonian { matrix: h.hermitize() })
}

/// rho(0) = QS / n: the pair is born in the electron singlet with a fully
/// mixed nuclear register. Unit trace by construction.
pub fn initial_state(ops: &SpinOperatorSet) -> ComplexMatrix {
    let n = ops.nuclear_multiplicity() as f64;
    let rho = ops.singlet_projector() * (1.0 / n);
    debug_assert!((rho.trace().re - 1.0).abs() < 1e-12);
    rho
}

/// The reference radical pair used by the low-field panels: one spin-1/2
/// nucleus hyperfine-coupled to the first electron with A = diag(8, 2, 0) /us.
pub fn reference_pair_system() -> SystemSpec {
    use crate::spin::{NucleusSpec, Spin};
    SystemSpec::new(vec![NucleusSpec::diagonal(Spin::HALF, 8.0, 2.0, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{commutator, expectation};
    use crate::spin::{build_space, NucleusSpec, Spin};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn base_params(b_z: f64) -> SimParams {
        SimParams { b_field_ut: [0.0, 0.0, b_z], ..SimParams::default() }
    }

    #[test]
    fn zero_field_zero_coupling_gives_zero_hamiltonian() {
        let spec = SystemSpec::default();
        let ops = build_space(&spec).unwrap();
        let h = build_hamiltonian(&spec, &ops, &base_params(0.0)).unwrap();
        assert_eq!(h.matrix().max_abs(), 0.0);
    }

    #[test]
    fn zeeman_spectrum_no_nuclei() {
        // Field along z, 49 uT: eigenvalues omega * {-1, 0, 0, +1}, omega = 0.686/us.
        let spec = SystemSpec::default();
        let ops = build_space(&spec).unwrap();
        let params = base_params(49.0);
        assert_abs_diff_eq!(params.zeeman_frequency(), 0.686, epsilon = 1e-12);
        let h = build_hamiltonian(&spec, &ops, &params).unwrap();
        let ev = h.matrix().eigenvalues_hermitian();
        let omega = 0.686;
        let expect = [-omega, 0.0, 0.0, omega];
        for (got, want) in ev.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn zeeman_spectrum_scales_linearly_and_with_omega_scale() {
        let spec = SystemSpec::default();
        let ops = build_space(&spec).unwrap();
        for (factor, scale) in [(3.0, 1.0), (1.0, 2.5)] {
            let h1 = build_hamiltonian(&spec, &ops, &base_params(49.0)).unwrap();
            let mut p2 = base_params(49.0 * factor);
            p2.omega_scale = scale;
            let h2 = build_hamiltonian(&spec, &ops, &p2).unwrap();
            let ev1 = h1.matrix().eigenvalues_hermitian();
            let ev2 = h2.matrix().eigenvalues_hermitian();
            for (a, b) in ev1.iter().zip(ev2) {
                assert_abs_diff_eq!(a * factor * scale, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn field_direction_does_not_change_spectrum() {
        // A = 0: rotating the field only rotates the quantization axis.
        let spec = SystemSpec::default();
        let ops = build_space(&spec).unwrap();
        let p_z = base_params(49.0);
        let p_tilted = SimParams {
            b_field_ut: [28.0, -21.0, 35.0], // |B| = 49.497..., direction arbitrary
            ..SimParams::default()
        };
        let h_z = build_hamiltonian(&spec, &ops, &p_z).unwrap();
        let h_t = build_hamiltonian(&spec, &ops, &p_tilted).unwrap();
        let ev_z = h_z.matrix().eigenvalues_hermitian();
        let ev_t = h_t.matrix().eigenvalues_hermitian();
        let ratio = p_tilted.field_magnitude_ut() / 49.0;
        for (a, b) in ev_z.iter().zip(ev_t) {
            assert_abs_diff_eq!(a * ratio, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn zeeman_commutes_with_projectors() {
        let spec = SystemSpec::default();
        let ops = build_space(&spec).unwrap();
        let h = build_hamiltonian(&spec, &ops, &base_params(1234.5)).unwrap();
        assert!(commutator(h.matrix(), ops.singlet_projector()).max_abs() < 1e-12);
        assert!(commutator(h.matrix(), ops.triplet_projector()).max_abs() < 1e-12);
    }

    #[test]
    fn reference_pair_hamiltonian_is_hermitian_traceless() {
        let spec = reference_pair_system();
        let ops = build_space(&spec).unwrap();
        let h = build_hamiltonian(&spec, &ops, &base_params(49.0)).unwrap();
        assert_eq!(h.dim(), 8);
        assert!(h.matrix().hermiticity_defect() < 1e-13);
        assert_abs_diff_eq!(h.matrix().trace().re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.matrix().trace().im, 0.0, epsilon = 1e-15);
        // Hyperfine breaks the singlet/triplet block structure.
        assert!(commutator(h.matrix(), ops.singlet_projector()).max_abs() > 0.1);
    }

    #[test]
    fn hyperfine_couples_to_the_assigned_electron() {
        let mut spec = reference_pair_system();
        spec.nuclei[0].coupled_electron = crate::spin::Electron::Second;
        let ops = build_space(&spec).unwrap();
        let params = base_params(0.0);
        let h2 = build_hamiltonian(&spec, &ops, &params).unwrap();
        // I.A.s2 built by hand: 8 Ix s2x + 2 Iy s2y.
        let by_hand = (ops.nucleus(0).component(0) * ops.electron2().component(0)) * 8.0
            + (ops.nucleus(0).component(1) * ops.electron2().component(1)) * 2.0;
        assert!(h2.matrix().max_abs_diff(&by_hand) < 1e-14);
    }

    #[test]
    fn initial_state_is_normalized_singlet() {
        let spec = reference_pair_system();
        let ops = build_space(&spec).unwrap();
        let rho = initial_state(&ops);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            expectation(&rho, ops.singlet_projector()).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            expectation(&rho, ops.triplet_projector()).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        assert!(rho.min_eigenvalue_hermitian() > -1e-15);
    }

    #[test]
    fn params_validation_catches_bad_values() {
        let ok = SimParams::default();
        assert!(ok.validate().is_ok());
        let mut p = SimParams::default();
        p.k_s = -0.1;
        assert!(p.validate().is_err());
        let mut p = SimParams::default();
        p.creation = CreationRate::Rate(0.0);
        assert!(p.validate().is_err());
        let mut p = SimParams::default();
        p.dt_us = 0.0;
        assert!(p.validate().is_err());
        // Stability guard: dt * (2 kS + 2 kT + kSR) must stay below 0.1.
        let mut p = SimParams::default();
        p.k_t = 60.0;
        p.dt_us = 1e-3;
        assert!(p.validate().is_err());
        p.dt_us = 5e-4;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn omega_uses_field_magnitude() {
        let p = SimParams { b_field_ut: [3.0, 4.0, 0.0], ..SimParams::default() };
        assert_abs_diff_eq!(p.zeeman_frequency(), 0.014 * 5.0, epsilon = 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        /// Any real hyperfine tensor and field give a Hermitian Hamiltonian.
        #[test]
        fn hamiltonian_always_hermitian(
            tensor in proptest::array::uniform3(proptest::array::uniform3(-10.0_f64..10.0)),
            field in proptest::array::uniform3(-5000.0_f64..5000.0),
            second in any::<bool>(),
        ) {
            let spec = SystemSpec::new(vec![NucleusSpec {
                spin: Spin::HALF,
                hyperfine: tensor,
                coupled_electron: if second {
                    crate::spin::Electron::Second
                } else {
                    crate::spin::Electron::First
                },
            }]);
            let ops = build_space(&spec).unwrap();
            let params = SimParams { b_field_ut: field, ..SimParams::default() };
            let h = build_hamiltonian(&spec, &ops, &params).unwrap();
            prop_assert!(h.matrix().hermiticity_defect() < 1e-12 * (1.0 + h.matrix().max_abs()));
            // Traceless: every term is a product of traceless spin components.
            prop_assert!(h.matrix().trace().norm() < 1e-10);
        }
    }
}
