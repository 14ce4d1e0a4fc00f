//! Vectorized form of either master equation, for cross-checking the
//! step-by-step integrator against an independent propagation route.
//!
//! With column-stacking `vec`, products map as `vec(A X B) = (B^T (x) A) vec(X)`,
//! so each right-hand side becomes a single `dim^2 x dim^2` generator `L` with
//! `vec(drho/dt) = L vec(rho)`, and `rho(t) = unvec(exp(L t) vec(rho0))`.
//!
//! The uniform-relaxation term of the quantum theory is affine in `rho`
//! (`-kSR (rho - 1/(4n))`), not linear. On unit-trace states it is identical
//! to the linear map `-kSR (vec(rho) - vec(1) Tr(rho) / (4n))`, which is what
//! `L` encodes; this also makes `vec(1)` an exact left null vector of the
//! quantum generator — the trace is conserved by construction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, IM};
use crate::model::{build_hamiltonian, initial_state, SimParams, Theory};
use crate::spin::{build_space, SystemSpec};

/// Largest Hilbert-space dimension the dense superoperator route accepts
/// (the generator then has `64^2 = 4096` rows).
pub const MAX_SUPEROP_DIM: usize = 64;

/// Column-stacks a square matrix.
fn vec_col(m: &ComplexMatrix) -> DVector<C64> {
    DVector::from_column_slice(m.inner().as_slice())
}

/// Inverse of [`vec_col`].
fn unvec_col(v: &DVector<C64>, dim: usize) -> ComplexMatrix {
    assert_eq!(v.len(), dim * dim);
    ComplexMatrix::from_inner(DMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Builds the generator `L` of the selected theory so that
/// `vec(drho/dt) = L vec(rho)` on unit-trace states.
pub fn liouvillian_matrix(spec: &SystemSpec, params: &SimParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let dim = spec.dim();
    if dim > MAX_SUPEROP_DIM {
        return Err(Error::DimensionCap { dim, cap: MAX_SUPEROP_DIM });
    }
    let ops = build_space(spec)?;
    let h = build_hamiltonian(spec, &ops, params)?;

    let id = ComplexMatrix::identity(dim);
    let hm = h.matrix();
    let qs = ops.singlet_projector();
    let qt = ops.triplet_projector();

    // All factors fit the kron cap: dim <= 64 implies dim^2 <= 4096.
    let right = |a: &ComplexMatrix| crate::matrix::kron(&a.transpose(), &id);
    let left = |a: &ComplexMatrix| crate::matrix::kron(&id, a);
    let both = |a: &ComplexMatrix, b: &ComplexMatrix| crate::matrix::kron(&b.transpose(), a);

    let mut l = (left(hm)? - right(hm)?) * (-IM);

    match params.theory {
        Theory::Phenomenological => {
            if params.k_s != 0.0 {
                l = l - (left(qs)? + right(qs)?) * params.k_s;
            }
            if params.k_t != 0.0 {
                l = l - (left(qt)? + right(qt)?) * params.k_t;
            }
            if params.k_sr != 0.0 {
                l = l - ComplexMatrix::identity(dim * dim) * params.k_sr;
            }
        }
        Theory::Quantum => {
            let k = params.k_s + params.k_t;
            if k != 0.0 {
                l = l - (left(qs)? + right(qs)? - both(qs, qs)? * 2.0) * k;
            }
            if params.k_sr != 0.0 {
                let idvec = vec_col(&id);
                let outer = &idvec * idvec.transpose(); // vec(1) vec(1)^T
                let pull = ComplexMatrix::from_inner(outer)
                    * (1.0 / (4.0 * ops.nuclear_multiplicity() as f64));
                l = l - (ComplexMatrix::identity(dim * dim) - pull) * params.k_sr;
            }
        }
    }
    Ok(l)
}

/// Propagates the initial singlet state to each requested time through
/// `exp(L t)` — no time stepping involved. Returns `(t, rho(t))` pairs.
pub fn propagate_matrix_exponential(
    spec: &SystemSpec,
    params: &SimParams,
    times_us: &[f64],
) -> Result<Vec<(f64, ComplexMatrix)>> {
    let l = liouvillian_matrix(spec, params)?;
    let ops = build_space(spec)?;
    let rho0 = vec_col(&initial_state(&ops));
    let dim = ops.dim();
    times_us
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::param("times_us", format!("must be finite and >= 0, got {t}")));
            }
            let propagator = (&l * t).expm();
            let v = propagator.inner() * &rho0;
            Ok((t, unvec_col(&v, dim)))
        })
        .collect()
}

/// Max-norm of `vec(1)^T L` — exactly zero when the generator conserves trace.
pub fn trace_functional_residue(l: &ComplexMatrix, dim: usize) -> f64 {
    assert_eq!(l.dim(), dim * dim);
    let idvec = vec_col(&ComplexMatrix::identity(dim));
    let row = idvec.transpose() * l.inner();
    row.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_pair_system, CreationRate};
    use crate::propagation::propagate;
    use crate::spin::{Electron, NucleusSpec, Spin};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn vec_unvec_roundtrip() {
        let m = ComplexMatrix::from_fn(3, |i, j| c(i as f64, j as f64));
        let v = vec_col(&m);
        // Column-stacking: the first dim entries are the first column.
        assert_eq!(v[0], c(0.0, 0.0));
        assert_eq!(v[1], c(1.0, 0.0));
        assert_eq!(v[3], c(0.0, 1.0));
        assert_eq!(unvec_col(&v, 3), m);
    }

    #[test]
    fn free_system_has_zero_generator() {
        let spec = SystemSpec::default();
        let params = SimParams { rho_sample_stride: 0, ..SimParams::default() };
        let l = liouvillian_matrix(&spec, &params).unwrap();
        assert_eq!(l.max_abs(), 0.0);
    }

    #[test]
    fn quantum_generator_conserves_trace_even_with_relaxation() {
        let spec = reference_pair_system();
        for k_sr in [0.0, 1.0, 10.0] {
            let params = SimParams {
                k_s: 0.05,
                k_t: 3.5,
                k_sr,
                b_field_ut: [0.0, 0.0, 49.0],
                ..SimParams::default()
            };
            let l = liouvillian_matrix(&spec, &params).unwrap();
            let residue = trace_functional_residue(&l, spec.dim());
            assert!(residue <= 1e-10, "kSR={k_sr}: residue {residue}");
        }
    }

    #[test]
    fn phenomenological_generator_loses_trace_at_recombination_rate() {
        // vec(1)^T L applied to vec(rho) must reproduce the trace law; check
        // the functional against -2 kS vec(QS) - 2 kT vec(QT) (no relaxation).
        let spec = reference_pair_system();
        let params = SimParams {
            k_s: 0.05,
            k_t: 3.5,
            theory: Theory::Phenomenological,
            b_field_ut: [0.0, 0.0, 49.0],
            ..SimParams::default()
        };
        let l = liouvillian_matrix(&spec, &params).unwrap();
        let dim = spec.dim();
        let ops = build_space(&spec).unwrap();
        let idvec = vec_col(&ComplexMatrix::identity(dim));
        let row = idvec.transpose() * l.inner();
        let expect = vec_col(ops.singlet_projector()) * c(-2.0 * params.k_s, 0.0)
            + vec_col(ops.triplet_projector()) * c(-2.0 * params.k_t, 0.0);
        let worst = row
            .iter()
            .zip(expect.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "trace-flux row off by {worst}");
    }

    #[test]
    fn exponential_route_matches_pure_decay_closed_form() {
        // H = 0, kT = 0, phenomenological: rho(t) = exp(-0.1 t) rho0 exactly.
        let spec = SystemSpec::default();
        let params = SimParams {
            k_s: 0.05,
            theory: Theory::Phenomenological,
            ..SimParams::default()
        };
        let states = propagate_matrix_exponential(&spec, &params, &[0.0, 10.0]).unwrap();
        let ops = build_space(&spec).unwrap();
        let rho0 = initial_state(&ops);
        assert!(states[0].1.max_abs_diff(&rho0) < 1e-12);
        let expect = &rho0 * (-1.0_f64).exp();
        assert!(states[1].1.max_abs_diff(&expect) < 1e-12);
    }

    /// RK4 trajectory and matrix-exponential propagation agree elementwise
    /// within 1e-6 at t in {1, 5, 10} us for every dim <= 16 register and
    /// both theories.
    #[test]
    fn rk4_agrees_with_matrix_exponential_for_all_small_registers() {
        let registers: Vec<(&str, SystemSpec)> = vec![
            ("no nuclei (dim 4)", SystemSpec::default()),
            ("one spin-1/2 (dim 8)", reference_pair_system()),
            (
                "one spin-1 (dim 12)",
                SystemSpec::new(vec![NucleusSpec::diagonal(Spin::ONE, 8.0, 2.0, 0.0)]),
            ),
            (
                "two spin-1/2 (dim 16)",
                SystemSpec::new(vec![
                    NucleusSpec::diagonal(Spin::HALF, 8.0, 2.0, 0.0),
                    NucleusSpec {
                        spin: Spin::HALF,
                        hyperfine: [[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 0.5]],
                        coupled_electron: Electron::Second,
                    },
                ]),
            ),
        ];
        let times = [1.0, 5.0, 10.0];
        for (label, spec) in &registers {
            for theory in [Theory::Quantum, Theory::Phenomenological] {
                let params = SimParams {
                    k_s: 0.05,
                    k_t: 3.5,
                    b_field_ut: [0.0, 0.0, 49.0],
                    theory,
                    rho_sample_stride: 1000, // samples at whole microseconds
                    ..SimParams::default()
                };
                let traj = propagate(spec, &params).unwrap();
                let oracle = propagate_matrix_exponential(spec, &params, &times).unwrap();
                for (t, rho_oracle) in &oracle {
                    let step = (t / params.dt_us).round() as usize;
                    let rho_rk4 = traj.rho_at_step(step).unwrap_or_else(|| {
                        panic!("{label}: no sample at t={t}")
                    });
                    let diff = rho_rk4.max_abs_diff(rho_oracle);
                    assert!(
                        diff <= 1e-6,
                        "{label}, {theory:?}, t={t}: routes differ by {diff:.2e}"
                    );
                }
            }
        }
    }

    #[test]
    fn rk4_agrees_with_matrix_exponential_under_quantum_relaxation() {
        let spec = reference_pair_system();
        let params = SimParams {
            k_s: 0.05,
            k_t: 3.5,
            k_sr: 1.0,
            b_field_ut: [0.0, 0.0, 49.0],
            rho_sample_stride: 1000,
            ..SimParams::default()
        };
        let traj = propagate(&spec, &params).unwrap();
        let oracle = propagate_matrix_exponential(&spec, &params, &[2.0]).unwrap();
        let rho_rk4 = traj.rho_at_step(2000).unwrap();
        assert!(rho_rk4.max_abs_diff(&oracle[0].1) <= 1e-6);
    }

    #[test]
    fn creation_kinetics_do_not_affect_the_generator() {
        // The generator describes cohort evolution; creation is a later fold.
        let spec = reference_pair_system();
        let base = SimParams { k_s: 0.05, k_t: 3.5, ..SimParams::default() };
        let with_creation =
            SimParams { creation: CreationRate::Rate(4.0), ..base.clone() };
        let l1 = liouvillian_matrix(&spec, &base).unwrap();
        let l2 = liouvillian_matrix(&spec, &with_creation).unwrap();
        assert_eq!(l1, l2);
    }

    #[test]
    fn superoperator_dimension_cap() {
        // Three spin-2 nuclei: dim = 4 * 125 = 500 > 64.
        let spec = SystemSpec::new(vec![
            NucleusSpec::diagonal(Spin::new(2.0).unwrap(), 1.0, 1.0, 1.0);
            3
        ]);
        let params = SimParams::default();
        match liouvillian_matrix(&spec, &params) {
            Err(Error::DimensionCap { dim: 500, cap: MAX_SUPEROP_DIM }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }
}
