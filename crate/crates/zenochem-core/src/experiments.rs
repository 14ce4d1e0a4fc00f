//! Named experiment definitions and the derived observables built on top of
//! plain propagation: transient-absorption traces, magnetic-field-effect
//! (MFE) curves, and relaxation-rate sweeps.
//!
//! An MFE curve is the pointwise difference of the absorption signal at a
//! field `B` from the signal at a reference field (usually zero), on the
//! shared time grid. The built-in scenario library hard-codes the parameter
//! sets the rest of the crate treats as ground truth, so each headline result
//! is one CLI command away.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{reference_pair_system, CreationRate, SimParams, Theory};
use crate::propagation::{propagate, Trajectory};
use crate::spin::SystemSpec;

/// What a scenario is expected to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    /// Survival-fraction trace per field.
    TransientAbsorption,
    /// Field-minus-reference difference curve per non-reference field.
    Mfe,
}

/// A named, self-contained experiment: which spin system, which base
/// parameters, which fields to compare, under which theories.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    /// One-line human description for `list-scenarios`.
    pub description: String,
    pub spec: SystemSpec,
    pub params_base: SimParams,
    /// Fields along z, in uT. The first entry is the reference all MFE
    /// curves subtract; it must appear exactly once.
    pub fields_to_compare: Vec<f64>,
    /// Optional per-field relaxation override, aligned with
    /// `fields_to_compare` — lets a scenario apply relaxation only at high
    /// field while the reference stays relaxation-free.
    pub field_k_sr: Option<Vec<f64>>,
    pub theories: Vec<Theory>,
    pub outputs: Vec<OutputKind>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidScenario {
            name: self.name.clone(),
            reason,
        };
        if self.fields_to_compare.is_empty() {
            return Err(bad("fields_to_compare is empty".into()));
        }
        if !self.fields_to_compare.iter().all(|b| b.is_finite()) {
            return Err(bad("fields_to_compare contains a non-finite value".into()));
        }
        let reference = self.fields_to_compare[0];
        let count = self
            .fields_to_compare
            .iter()
            .filter(|&&b| b == reference)
            .count();
        if count != 1 {
            return Err(bad(format!(
                "reference field {reference} uT must be listed exactly once, found {count}"
            )));
        }
        if let Some(ks) = &self.field_k_sr {
            if ks.len() != self.fields_to_compare.len() {
                return Err(bad(format!(
                    "field_k_sr has {} entries for {} fields",
                    ks.len(),
                    self.fields_to_compare.len()
                )));
            }
            if !ks.iter().all(|k| k.is_finite() && *k >= 0.0) {
                return Err(bad("field_k_sr entries must be finite and >= 0".into()));
            }
        }
        if self.theories.is_empty() {
            return Err(bad("no theory selected".into()));
        }
        if self.theories.len() > 1 && self.theories[0] == self.theories[1] {
            return Err(bad("duplicate theory entries".into()));
        }
        if self.outputs.is_empty() {
            return Err(bad("no outputs requested".into()));
        }
        self.spec.validate()?;
        self.params_base.validate()?;
        Ok(())
    }

    /// Index of `field_ut` in `fields_to_compare` (exact match — fields are
    /// declared literals, not computed values).
    pub fn field_index(&self, field_ut: f64) -> Result<usize> {
        self.fields_to_compare
            .iter()
            .position(|&b| b == field_ut)
            .ok_or_else(|| Error::InvalidScenario {
                name: self.name.clone(),
                reason: format!("field {field_ut} uT is not part of this scenario"),
            })
    }

    /// Concrete parameter set for one (theory, field) cell.
    pub fn params_for(&self, theory: Theory, field_index: usize) -> SimParams {
        let mut p = self.params_base.clone();
        p.theory = theory;
        p.b_field_ut = [0.0, 0.0, self.fields_to_compare[field_index]];
        if let Some(ks) = &self.field_k_sr {
            p.k_sr = ks[field_index];
        }
        p
    }
}

/// The measured signal of a trajectory — the surviving-pair fraction.
pub fn transient_absorption(traj: &Trajectory) -> &[f64] {
    traj.absorption()
}

/// Difference of the absorption signal at `field_ut` from the signal at
/// `reference_field_ut`, pointwise on the shared grid.
#[derive(Clone, Debug)]
pub struct MfeCurve {
    pub times_us: Vec<f64>,
    pub values: Vec<f64>,
    pub field_ut: f64,
    pub reference_field_ut: f64,
    pub theory: Theory,
    /// Relaxation rate of the signal-field run (the reference may differ
    /// when the scenario overrides relaxation per field).
    pub k_sr: f64,
}

impl MfeCurve {
    /// Largest |value| over the curve.
    pub fn peak_magnitude(&self) -> f64 {
        peak_magnitude(&self.values)
    }
}

/// Runs both fields of a scenario under one theory and returns their MFE
/// curve. Both fields must be declared by the scenario so per-field
/// relaxation overrides stay well-defined.
pub fn mfe(
    scenario: &Scenario,
    theory: Theory,
    field_ut: f64,
    reference_field_ut: f64,
) -> Result<MfeCurve> {
    scenario.validate()?;
    let fi = scenario.field_index(field_ut)?;
    let ri = scenario.field_index(reference_field_ut)?;
    let params_signal = scenario.params_for(theory, fi);
    let params_reference = scenario.params_for(theory, ri);
    let signal = propagate(&scenario.spec, &params_signal)?;
    let reference = propagate(&scenario.spec, &params_reference)?;
    let values = signal
        .absorption()
        .iter()
        .zip(reference.absorption())
        .map(|(a, b)| a - b)
        .collect();
    Ok(MfeCurve {
        times_us: signal.times.clone(),
        values,
        field_ut,
        reference_field_ut,
        theory,
        k_sr: params_signal.k_sr,
    })
}

/// One completed (theory, field) cell of a scenario.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub theory: Theory,
    pub field_ut: f64,
    pub k_sr: f64,
    pub trajectory: Trajectory,
    /// MFE column against the reference field of the same theory; `None`
    /// for the reference run itself or when the scenario does not ask for
    /// MFE output.
    pub mfe_values: Option<Vec<f64>>,
}

/// Runs every (theory, field) cell of a scenario. Cells are independent
/// propagations and may run concurrently; results are merged by cell index,
/// so the output order (theories outer, fields inner) is deterministic.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<ScenarioRun>> {
    scenario.validate()?;
    let cells: Vec<(Theory, usize)> = scenario
        .theories
        .iter()
        .flat_map(|&th| (0..scenario.fields_to_compare.len()).map(move |fi| (th, fi)))
        .collect();

    let run_cell = |&(theory, fi): &(Theory, usize)| -> Result<(Theory, usize, Trajectory)> {
        let params = scenario.params_for(theory, fi);
        Ok((theory, fi, propagate(&scenario.spec, &params)?))
    };
    #[cfg(feature = "parallel")]
    let trajectories: Vec<(Theory, usize, Trajectory)> =
        cells.par_iter().map(run_cell).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let trajectories: Vec<(Theory, usize, Trajectory)> =
        cells.iter().map(run_cell).collect::<Result<_>>()?;

    let wants_mfe = scenario.outputs.contains(&OutputKind::Mfe);
    let runs = trajectories
        .iter()
        .map(|(theory, fi, traj)| {
            let mfe_values = if wants_mfe && *fi != 0 {
                let reference = trajectories
                    .iter()
                    .find(|(th, ri, _)| th == theory && *ri == 0)
                    .map(|(_, _, t)| t)
                    .expect("reference cell exists for every theory");
                Some(
                    traj.absorption()
                        .iter()
                        .zip(reference.absorption())
                        .map(|(a, b)| a - b)
                        .collect(),
                )
            } else {
                None
            };
            ScenarioRun {
                theory: *theory,
                field_ut: scenario.fields_to_compare[*fi],
                k_sr: scenario.params_for(*theory, *fi).k_sr,
                trajectory: traj.clone(),
                mfe_values,
            }
        })
        .collect();
    Ok(runs)
}

/// Runs the scenario's signal-vs-reference MFE for every requested
/// relaxation rate and every theory the scenario declares. The override is
/// uniform: both fields get the same `k_sr`, replacing any per-field
/// override. Curve order: theories outer, rates inner.
pub fn relaxation_sweep(scenario: &Scenario, k_sr_values: &[f64]) -> Result<Vec<MfeCurve>> {
    scenario.validate()?;
    if scenario.fields_to_compare.len() < 2 {
        return Err(Error::InvalidScenario {
            name: scenario.name.clone(),
            reason: "a sweep needs a signal field besides the reference".into(),
        });
    }
    let cells: Vec<(Theory, f64)> = scenario
        .theories
        .iter()
        .flat_map(|&th| k_sr_values.iter().map(move |&k| (th, k)))
        .collect();
    let run_cell = |&(theory, k_sr): &(Theory, f64)| -> Result<MfeCurve> {
        let mut sc = scenario.clone();
        sc.params_base.k_sr = k_sr;
        sc.field_k_sr = None;
        let field = sc.fields_to_compare[1];
        let reference = sc.fields_to_compare[0];
        mfe(&sc, theory, field, reference)
    };
    #[cfg(feature = "parallel")]
    return cells.par_iter().map(run_cell).collect();
    #[cfg(not(feature = "parallel"))]
    cells.iter().map(run_cell).collect()
}

/// Threshold below which a curve value counts as numerical dust rather than
/// signal, for sign-pattern questions.
pub const SIGN_THRESHOLD: f64 = 1e-6;

/// Largest |value| over a series.
pub fn peak_magnitude(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Sign of the first entry exceeding `threshold` in magnitude.
pub fn first_significant_sign(values: &[f64], threshold: f64) -> Option<f64> {
    values
        .iter()
        .find(|v| v.abs() > threshold)
        .map(|v| v.signum())
}

/// True when the series has significant values of both signs.
pub fn has_sign_change(values: &[f64], threshold: f64) -> bool {
    let mut pos = false;
    let mut neg = false;
    for v in values {
        if *v > threshold {
            pos = true;
        } else if *v < -threshold {
            neg = true;
        }
        if pos && neg {
            return true;
        }
    }
    false
}

/// True when the series rises significantly positive before any significant
/// negative value — the bi-phasic shape with the positive lobe first.
pub fn is_biphasic_positive_first(values: &[f64], threshold: f64) -> bool {
    first_significant_sign(values, threshold) == Some(1.0) && has_sign_change(values, threshold)
}

fn reference_rates(params: SimParams) -> SimParams {
    SimParams {
        k_s: 0.05,
        k_t: 3.5,
        ..params
    }
}

fn lowfield_template(theory: Theory) -> Scenario {
    Scenario {
        name: String::new(),
        description: String::new(),
        spec: reference_pair_system(),
        params_base: reference_rates(SimParams {
            theory,
            ..SimParams::default()
        }),
        fields_to_compare: vec![0.0, 49.0, 39.0],
        field_k_sr: None,
        theories: vec![theory],
        outputs: vec![OutputKind::Mfe],
    }
}

fn fig2b_lowfield() -> Scenario {
    Scenario {
        name: "fig2b-lowfield".into(),
        description: "Low-field MFE of the one-proton pair (kS=0.05, kT=3.5 /us) at 49 \
                      and 39 uT against zero field, measurement theory: bi-phasic response."
            .into(),
        ..lowfield_template(Theory::Quantum)
    }
}

fn fig2c_phenomenological() -> Scenario {
    Scenario {
        name: "fig2c-phenomenological".into(),
        description: "Same pair, rates and fields under the phenomenological theory: the \
                      response keeps a single sign."
            .into(),
        ..lowfield_template(Theory::Phenomenological)
    }
}

fn fig2d_highfield() -> Scenario {
    Scenario {
        name: "fig2d-highfield".into(),
        description: "High-field transients at 8 mT with finite-rate pair creation \
                      (kCR=4 /us) and relaxation applied at high field only (kSR=1 /us): \
                      the MFE starts with a negative excursion."
            .into(),
        spec: reference_pair_system(),
        params_base: reference_rates(SimParams {
            creation: CreationRate::Rate(4.0),
            dt_us: 2.5e-4,
            ..SimParams::default()
        }),
        fields_to_compare: vec![0.0, 8000.0],
        field_k_sr: Some(vec![0.0, 1.0]),
        theories: vec![Theory::Quantum, Theory::Phenomenological],
        outputs: vec![OutputKind::TransientAbsorption, OutputKind::Mfe],
    }
}

fn fig3_relaxation() -> Scenario {
    Scenario {
        name: "fig3-relaxation".into(),
        description: "Relaxation sweep template: 49 uT MFE for both theories, meant for \
                      `sweep --ksr 0,1,10` — relaxation suppresses the bi-phasic shape."
            .into(),
        spec: reference_pair_system(),
        params_base: reference_rates(SimParams::default()),
        fields_to_compare: vec![0.0, 49.0],
        field_k_sr: None,
        theories: vec![Theory::Quantum, Theory::Phenomenological],
        outputs: vec![OutputKind::Mfe],
    }
}

/// Every scenario shipped with the crate.
pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![
        fig2b_lowfield(),
        fig2c_phenomenological(),
        fig2d_highfield(),
        fig3_relaxation(),
    ]
}

/// Looks a built-in scenario up by its exact name.
pub fn scenario_by_name(name: &str) -> Result<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}
