//! Self-contained correctness suite: every headline property of the crate,
//! each as one named check returning pass/fail plus the measured numbers.
//! The CLI `validate` subcommand prints these; the acceptance tests re-run
//! them with pinned regression anchors.

use crate::error::Result;
use crate::experiments::{
    has_sign_change, is_biphasic_positive_first, mfe, relaxation_sweep, run_scenario,
    scenario_by_name, MfeCurve, SIGN_THRESHOLD,
};
use crate::liouville::propagate_matrix_exponential;
use crate::matrix::ComplexMatrix;
use crate::model::{reference_pair_system, CreationRate, SimParams, Theory};
use crate::propagation::propagate;
use crate::spin::{build_space, NucleusSpec, Spin, SystemSpec};

/// Projector identities must hold to machine precision.
pub const TOL_PROJECTOR: f64 = 1e-12;
/// Quantum trace drift allowed over the full grid.
pub const TOL_TRACE: f64 = 1e-9;
/// Relative error allowed for finite-difference and closed-form checks, and
/// the elementwise bound for the two independent propagation routes.
pub const TOL_RELATIVE: f64 = 1e-6;
/// Most negative density-matrix eigenvalue tolerated.
pub const TOL_POSITIVITY: f64 = -1e-8;
/// Largest Hermiticity defect tolerated in a sampled state.
pub const TOL_HERMITICITY: f64 = 1e-10;
/// Agreement demanded between instantaneous creation and the
/// near-delta-kernel convolution, after the kernel has settled.
pub const TOL_DELTA_KERNEL: f64 = 1e-3;

/// Outcome of one named property check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Measured numbers behind the verdict, human-readable.
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }
}

fn guarded(name: &'static str, body: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    body().unwrap_or_else(|e| CheckResult::new(name, false, format!("errored: {e}")))
}

fn rel_err(measured: f64, expected: f64) -> f64 {
    (measured - expected).abs() / expected.abs().max(1e-300)
}

/// The four reference spin registers the algebra checks run over.
fn reference_registers() -> Vec<(&'static str, SystemSpec)> {
    vec![
        ("no nuclei", SystemSpec::default()),
        ("one spin-1/2", reference_pair_system()),
        (
            "one spin-1",
            SystemSpec::new(vec![NucleusSpec::diagonal(Spin::ONE, 8.0, 2.0, 0.0)]),
        ),
        (
            "two spin-1/2",
            SystemSpec::new(vec![
                NucleusSpec::diagonal(Spin::HALF, 8.0, 2.0, 0.0),
                NucleusSpec::diagonal(Spin::HALF, 1.0, 3.0, 0.5),
            ]),
        ),
    ]
}

/// Singlet/triplet projectors are idempotent, orthogonal, complete, and have
/// traces n and 3n, on every reference register.
pub fn check_projector_algebra() -> CheckResult {
    const NAME: &str = "projector-algebra";
    guarded(NAME, || {
        let mut worst: f64 = 0.0;
        for (_, spec) in reference_registers() {
            let ops = build_space(&spec)?;
            let n = ops.nuclear_multiplicity() as f64;
            let qs = ops.singlet_projector();
            let qt = ops.triplet_projector();
            let id = ComplexMatrix::identity(ops.dim());
            worst = worst
                .max((qs * qs - qs).max_abs())
                .max((qt * qt - qt).max_abs())
                .max((qs * qt).max_abs())
                .max((qs + qt - &id).max_abs())
                .max((qs.trace().re - n).abs())
                .max((qt.trace().re - 3.0 * n).abs())
                .max(qs.trace().im.abs())
                .max(qt.trace().im.abs());
        }
        Ok(CheckResult::new(
            NAME,
            worst <= TOL_PROJECTOR,
            format!("worst identity defect {worst:.2e} over 4 registers (tol {TOL_PROJECTOR:.0e})"),
        ))
    })
}

fn lowfield_params(theory: Theory) -> SimParams {
    SimParams {
        k_s: 0.05,
        k_t: 3.5,
        b_field_ut: [0.0, 0.0, 49.0],
        theory,
        rho_sample_stride: 0,
        ..SimParams::default()
    }
}

/// Quantum propagation conserves the trace; phenomenological propagation
/// loses trace at exactly the recombination flux (checked against a 5-point
/// finite-difference derivative at 100 interior grid points).
pub fn check_trace_laws() -> CheckResult {
    const NAME: &str = "trace-laws";
    guarded(NAME, || {
        let spec = reference_pair_system();
        let qt_drift = propagate(&spec, &lowfield_params(Theory::Quantum))?
            .trace
            .iter()
            .fold(0.0_f64, |m, tr| m.max((tr - 1.0).abs()));

        let mut worst_rel: f64 = 0.0;
        for k_sr in [0.0, 1.0] {
            let params = SimParams {
                k_sr,
                ..lowfield_params(Theory::Phenomenological)
            };
            let traj = propagate(&spec, &params)?;
            let dt = params.dt_us;
            let n = traj.len();
            for k in 0..100 {
                let i = 2 + (k * 97) % (n - 4);
                let fd = (-traj.trace[i + 2] + 8.0 * traj.trace[i + 1]
                    - 8.0 * traj.trace[i - 1]
                    + traj.trace[i - 2])
                    / (12.0 * dt);
                let law = -2.0 * params.k_s * traj.singlet[i]
                    - 2.0 * params.k_t * traj.triplet[i]
                    - k_sr * traj.trace[i];
                worst_rel = worst_rel.max(rel_err(fd, law));
            }
        }
        Ok(CheckResult::new(
            NAME,
            qt_drift <= TOL_TRACE && worst_rel <= TOL_RELATIVE,
            format!(
                "quantum |trace-1| <= {qt_drift:.2e} (tol {TOL_TRACE:.0e}); \
                 phenomenological trace-flux law rel err {worst_rel:.2e} (tol {TOL_RELATIVE:.0e})"
            ),
        ))
    })
}

/// The step-by-step integrator and the vectorized matrix-exponential route
/// agree elementwise at t in {1, 5, 10} us for both theories.
pub fn check_oracle_equivalence() -> CheckResult {
    const NAME: &str = "oracle-equivalence";
    guarded(NAME, || {
        let spec = reference_pair_system();
        let times = [1.0, 5.0, 10.0];
        let mut worst: f64 = 0.0;
        for theory in [Theory::Quantum, Theory::Phenomenological] {
            let params = SimParams {
                rho_sample_stride: 1000,
                ..lowfield_params(theory)
            };
            let traj = propagate(&spec, &params)?;
            for (t, oracle) in propagate_matrix_exponential(&spec, &params, &times)? {
                let step = (t / params.dt_us).round() as usize;
                let rho = traj.rho_at_step(step).expect("sampled on whole microseconds");
                worst = worst.max(rho.max_abs_diff(&oracle));
            }
        }
        Ok(CheckResult::new(
            NAME,
            worst <= TOL_RELATIVE,
            format!(
                "two independent routes differ by {worst:.2e} elementwise \
                 at t in {{1,5,10}} us, both theories (tol {TOL_RELATIVE:.0e})"
            ),
        ))
    })
}

/// With H=0, kT=0, kS=0.05 both theories collapse to exp(-0.1 t); the
/// quantum side exercises the population recursion, the phenomenological
/// side the decaying trace.
pub fn check_closed_form_decay() -> CheckResult {
    const NAME: &str = "closed-form-decay";
    guarded(NAME, || {
        let spec = SystemSpec::default();
        let expected = (-1.0_f64).exp();
        // The population recursion is first-order in dt; dt=1e-5 puts its
        // relative error near 5e-7 at t=10, inside the 1e-6 budget.
        let quantum = propagate(
            &spec,
            &SimParams {
                k_s: 0.05,
                k_t: 0.0,
                dt_us: 1e-5,
                theory: Theory::Quantum,
                rho_sample_stride: 0,
                ..SimParams::default()
            },
        )?;
        let phenom = propagate(
            &spec,
            &SimParams {
                k_s: 0.05,
                k_t: 0.0,
                theory: Theory::Phenomenological,
                rho_sample_stride: 0,
                ..SimParams::default()
            },
        )?;
        let rq = rel_err(*quantum.population.last().unwrap(), expected);
        let rp = rel_err(*phenom.population.last().unwrap(), expected);
        Ok(CheckResult::new(
            NAME,
            rq <= TOL_RELATIVE && rp <= TOL_RELATIVE,
            format!(
                "N(10)=exp(-1) rel err: quantum {rq:.2e}, phenomenological {rp:.2e} \
                 (tol {TOL_RELATIVE:.0e})"
            ),
        ))
    })
}

/// Low-field MFE shapes: the quantum 49 uT curve is bi-phasic with the
/// positive lobe first and a larger peak than 39 uT; the phenomenological
/// curve with identical parameters never changes sign.
pub fn check_lowfield_mfe_shape() -> CheckResult {
    const NAME: &str = "lowfield-mfe-shape";
    guarded(NAME, || {
        let quantum = scenario_by_name("fig2b-lowfield")?;
        let phenom = scenario_by_name("fig2c-phenomenological")?;
        let q49 = mfe(&quantum, Theory::Quantum, 49.0, 0.0)?;
        let q39 = mfe(&quantum, Theory::Quantum, 39.0, 0.0)?;
        let p49 = mfe(&phenom, Theory::Phenomenological, 49.0, 0.0)?;
        let biphasic = is_biphasic_positive_first(&q49.values, SIGN_THRESHOLD);
        let ordered = q49.peak_magnitude() > q39.peak_magnitude();
        let monophasic = !has_sign_change(&p49.values, SIGN_THRESHOLD);
        Ok(CheckResult::new(
            NAME,
            biphasic && ordered && monophasic,
            format!(
                "quantum 49 uT bi-phasic(+first)={biphasic}, peaks 49/39 = \
                 {:.3e}/{:.3e} (ordered={ordered}); phenomenological single-signed={monophasic}",
                q49.peak_magnitude(),
                q39.peak_magnitude()
            ),
        ))
    })
}

/// Relaxation washes the quantum MFE out: the sign change at kSR=0
/// disappears by kSR=10, peaks shrink monotonically, and at kSR=10 the two
/// theories land within a factor of two of each other.
pub fn check_relaxation_suppression() -> CheckResult {
    const NAME: &str = "relaxation-suppression";
    guarded(NAME, || {
        let sc = scenario_by_name("fig3-relaxation")?;
        let curves = relaxation_sweep(&sc, &[0.0, 1.0, 10.0])?;
        let by = |th: Theory| -> Vec<&MfeCurve> {
            curves.iter().filter(|c| c.theory == th).collect()
        };
        let q = by(Theory::Quantum);
        let p = by(Theory::Phenomenological);
        let change_at_0 = has_sign_change(&q[0].values, SIGN_THRESHOLD);
        let none_at_10 = !has_sign_change(&q[2].values, SIGN_THRESHOLD);
        let peaks: Vec<f64> = q.iter().map(|c| c.peak_magnitude()).collect();
        let shrinking = peaks.windows(2).all(|w| w[1] <= w[0]);
        let ratio = q[2].peak_magnitude() / p[2].peak_magnitude();
        let comparable = ratio > 0.5 && ratio < 2.0;
        let peaks_str = peaks
            .iter()
            .map(|p| format!("{p:.3e}"))
            .collect::<Vec<_>>()
            .join(", ");
        Ok(CheckResult::new(
            NAME,
            change_at_0 && none_at_10 && shrinking && comparable,
            format!(
                "quantum sign change: kSR=0 {change_at_0}, kSR=10 absent {none_at_10}; \
                 peaks [{peaks_str}] non-increasing={shrinking}; \
                 theory ratio at kSR=10 = {ratio:.3}"
            ),
        ))
    })
}

/// Measured behavior of the closed-channel (kS=0) decay rate r(kT) =
/// -ln N(10us)/10 as the triplet/measurement rate crosses the hyperfine
/// scale.
///
/// The population recursion feeds on the trace-preserving state, so r grows
/// with kT even though the measurement suppresses singlet-to-triplet
/// conversion; the suppression shows up in the time-averaged triplet
/// character instead, and the rate ordering inverts for the
/// survivor-conditioned (phenomenological) population. All three facts are
/// asserted.
pub fn check_zeno_rate_behavior() -> CheckResult {
    const NAME: &str = "zeno-rate-behavior";
    guarded(NAME, || {
        let spec = reference_pair_system();
        let run = |k_t: f64, theory: Theory| -> Result<(f64, f64)> {
            let params = SimParams {
                k_s: 0.0,
                k_t,
                theory,
                rho_sample_stride: 0,
                ..SimParams::default()
            };
            let traj = propagate(&spec, &params)?;
            let rate = -traj.population.last().unwrap().ln() / params.t_max_us;
            let avg_qt = traj.triplet.iter().sum::<f64>() / traj.triplet.len() as f64;
            Ok((rate, avg_qt))
        };
        let (rq4, avg4) = run(4.0, Theory::Quantum)?;
        let (rq40, avg40) = run(40.0, Theory::Quantum)?;
        let (rc4, _) = run(4.0, Theory::Phenomenological)?;
        let (rc40, _) = run(40.0, Theory::Phenomenological)?;
        let recursion_grows = rq40 > rq4;
        let conversion_suppressed = avg40 < avg4;
        let conditioned_inverts = rc40 < rc4;
        Ok(CheckResult::new(
            NAME,
            recursion_grows && conversion_suppressed && conditioned_inverts,
            format!(
                "recursion rate r(4)={rq4:.4}, r(40)={rq40:.4} (grows with the channel \
                 rate); averaged <QT> {avg4:.4} -> {avg40:.4} (conversion suppressed); \
                 survivor-conditioned rate {rc4:.4} -> {rc40:.4} (ordering inverted)"
            ),
        ))
    })
}

/// The 8 mT scenario end-to-end: finite-rate creation, per-field relaxation,
/// an initial negative MFE excursion, and the near-delta creation kernel
/// reproducing the instantaneous-creation run.
pub fn check_highfield_pipeline() -> CheckResult {
    const NAME: &str = "highfield-pipeline";
    guarded(NAME, || {
        let sc = scenario_by_name("fig2d-highfield")?;
        let runs = run_scenario(&sc)?;
        let cells = runs.len();
        let curve = mfe(&sc, Theory::Quantum, 8000.0, 0.0)?;
        let opens_negative =
            crate::experiments::first_significant_sign(&curve.values, SIGN_THRESHOLD)
                == Some(-1.0);
        let recovers_positive = curve.values.iter().any(|v| *v > SIGN_THRESHOLD);

        let hi_params = sc.params_for(Theory::Quantum, 1);
        let instant = propagate(
            &sc.spec,
            &SimParams {
                creation: CreationRate::Instantaneous,
                ..hi_params.clone()
            },
        )?;
        let near_delta = propagate(
            &sc.spec,
            &SimParams {
                creation: CreationRate::Rate(1e6),
                ..hi_params
            },
        )?;
        // Skip t=0, where the convolved signal is identically zero by
        // construction; the kernel has settled by the first grid point.
        let delta_gap = instant
            .population
            .iter()
            .zip(&near_delta.population)
            .skip(1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        Ok(CheckResult::new(
            NAME,
            opens_negative && recovers_positive && delta_gap <= TOL_DELTA_KERNEL,
            format!(
                "{cells} cells ran; MFE opens negative={opens_negative}, turns \
                 positive later={recovers_positive}; kCR=1e6 vs instantaneous gap \
                 {delta_gap:.2e} (tol {TOL_DELTA_KERNEL:.0e})"
            ),
        ))
    })
}

/// Every state sampled across every built-in scenario (plus the closed-
/// channel runs) stays positive semidefinite and Hermitian.
pub fn check_state_quality() -> CheckResult {
    const NAME: &str = "state-quality";
    guarded(NAME, || {
        let mut min_eig = f64::INFINITY;
        let mut worst_herm: f64 = 0.0;
        let mut samples = 0usize;
        let mut scan = |rho: &ComplexMatrix| {
            min_eig = min_eig.min(rho.min_eigenvalue_hermitian());
            worst_herm = worst_herm.max(rho.hermiticity_defect());
            samples += 1;
        };
        for sc in crate::experiments::builtin_scenarios() {
            for run in run_scenario(&sc)? {
                for (_, rho) in &run.trajectory.rho_samples {
                    scan(rho);
                }
            }
        }
        let spec = reference_pair_system();
        for k_t in [4.0, 40.0] {
            let params = SimParams {
                k_s: 0.0,
                k_t,
                rho_sample_stride: 500,
                ..SimParams::default()
            };
            for (_, rho) in &propagate(&spec, &params)?.rho_samples {
                scan(rho);
            }
        }
        Ok(CheckResult::new(
            NAME,
            min_eig >= TOL_POSITIVITY && worst_herm <= TOL_HERMITICITY,
            format!(
                "{samples} sampled states: min eigenvalue {min_eig:.2e} \
                 (tol {TOL_POSITIVITY:.0e}), worst Hermiticity defect {worst_herm:.2e} \
                 (tol {TOL_HERMITICITY:.0e})"
            ),
        ))
    })
}

/// Identical inputs give bitwise-identical trajectories, including across
/// the concurrent scenario runner.
pub fn check_determinism() -> CheckResult {
    const NAME: &str = "determinism";
    guarded(NAME, || {
        let sc = scenario_by_name("fig2b-lowfield")?;
        let first = run_scenario(&sc)?;
        let second = run_scenario(&sc)?;
        let mut identical = first.len() == second.len();
        let mut values = 0usize;
        let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        for (a, b) in first.iter().zip(&second) {
            identical &= bits(&a.trajectory.population) == bits(&b.trajectory.population)
                && bits(&a.trajectory.singlet) == bits(&b.trajectory.singlet)
                && bits(&a.trajectory.triplet) == bits(&b.trajectory.triplet)
                && bits(&a.trajectory.trace) == bits(&b.trajectory.trace)
                && a.mfe_values.as_ref().map(|v| bits(v))
                    == b.mfe_values.as_ref().map(|v| bits(v));
            values += 4 * a.trajectory.len();
        }
        Ok(CheckResult::new(
            NAME,
            identical,
            format!("{values} trajectory values bitwise identical across repeated runs"),
        ))
    })
}

/// Runs every check in a fixed order.
pub fn run_full_suite() -> Vec<CheckResult> {
    vec![
        check_projector_algebra(),
        check_trace_laws(),
        check_oracle_equivalence(),
        check_closed_form_decay(),
        check_lowfield_mfe_shape(),
        check_relaxation_suppression(),
        check_zeno_rate_behavior(),
        check_highfield_pipeline(),
        check_state_quality(),
        check_determinism(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_are_unique_and_stable() {
        let names: Vec<&str> = run_suite_names();
        let mut dedup = names.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), names.len());
        assert_eq!(names.len(), 10);
    }

    fn run_suite_names() -> Vec<&'static str> {
        // Cheap structural probe: only the fast checks actually run here;
        // the full suite is exercised by the acceptance tests and the CLI.
        vec![
            "projector-algebra",
            "trace-laws",
            "oracle-equivalence",
            "closed-form-decay",
            "lowfield-mfe-shape",
            "relaxation-suppression",
            "zeno-rate-behavior",
            "highfield-pipeline",
            "state-quality",
            "determinism",
        ]
    }

    #[test]
    fn projector_algebra_check_passes() {
        let r = check_projector_algebra();
        assert!(r.passed, "{}", r.detail);
    }

    #[test]
    fn guarded_converts_errors_into_failures() {
        let r = guarded("probe", || {
            Err(crate::error::Error::param("x", "boom"))
        });
        assert!(!r.passed);
        assert!(r.detail.contains("boom"));
    }
}
