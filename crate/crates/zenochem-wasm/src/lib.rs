//! Browser bindings: a slider-sized surface over the core library, fixed to
//! the reference radical pair (one spin-1/2 nucleus, A = diag(8, 2, 0) /us).
//!
//! Every curve function returns the sampled values only; the time axis is
//! implicit, `t_i = i * dt_us`, so callers rebuild it without shipping a
//! second array across the boundary.

use wasm_bindgen::prelude::*;

use zenochem_core::model::{reference_pair_system, SimParams, Theory};
use zenochem_core::propagation::propagate;

#[wasm_bindgen(start)]
pub fn start() {
    #[cfg(target_arch = "wasm32")]
    console_error_panic_hook::set_once();
}

fn parse_theory(name: &str) -> Result<Theory, String> {
    match name {
        "quantum" => Ok(Theory::Quantum),
        "phenomenological" => Ok(Theory::Phenomenological),
        other => Err(format!(
            "unknown theory {other:?}; use \"quantum\" or \"phenomenological\""
        )),
    }
}

fn params(
    theory: Theory,
    k_s: f64,
    k_t: f64,
    k_sr: f64,
    b_ut: f64,
    t_max_us: f64,
    dt_us: f64,
) -> SimParams {
    SimParams {
        k_s,
        k_t,
        k_sr,
        b_field_ut: [0.0, 0.0, b_ut],
        theory,
        t_max_us,
        dt_us,
        rho_sample_stride: 0,
        ..SimParams::default()
    }
}

fn absorption_curve_impl(
    theory: &str,
    k_s: f64,
    k_t: f64,
    k_sr: f64,
    b_ut: f64,
    t_max_us: f64,
    dt_us: f64,
) -> Result<Vec<f64>, String> {
    let spec = reference_pair_system();
    let p = params(parse_theory(theory)?, k_s, k_t, k_sr, b_ut, t_max_us, dt_us);
    let traj = propagate(&spec, &p).map_err(|e| e.to_string())?;
    Ok(traj.population)
}

fn mfe_curve_impl(
    theory: &str,
    k_s: f64,
    k_t: f64,
    k_sr: f64,
    b_ut: f64,
    b_ref_ut: f64,
    t_max_us: f64,
    dt_us: f64,
) -> Result<Vec<f64>, String> {
    let signal = absorption_curve_impl(theory, k_s, k_t, k_sr, b_ut, t_max_us, dt_us)?;
    let reference = absorption_curve_impl(theory, k_s, k_t, k_sr, b_ref_ut, t_max_us, dt_us)?;
    Ok(signal
        .iter()
        .zip(&reference)
        .map(|(a, b)| a - b)
        .collect())
}

/// [recursion rate −ln N(10)/10, time-averaged triplet weight,
/// survivor-conditioned rate] for kS = 0, B = 0 over a 10 us horizon — the
/// three numbers of the measurement-suppression story.
fn conversion_metrics_impl(k_t: f64, dt_us: f64) -> Result<Vec<f64>, String> {
    let spec = reference_pair_system();
    let run = |theory: Theory| -> Result<(f64, f64), String> {
        let p = params(theory, 0.0, k_t, 0.0, 0.0, 10.0, dt_us);
        let traj = propagate(&spec, &p).map_err(|e| e.to_string())?;
        let rate = -traj.population.last().unwrap().ln() / p.t_max_us;
        let avg_qt = traj.triplet.iter().sum::<f64>() / traj.triplet.len() as f64;
        Ok((rate, avg_qt))
    };
    let (recursion_rate, avg_qt) = run(Theory::Quantum)?;
    let (conditioned_rate, _) = run(Theory::Phenomenological)?;
    Ok(vec![recursion_rate, avg_qt, conditioned_rate])
}

/// Surviving-pair population (the transient-absorption signal) on the grid
/// `t_i = i * dt_us` up to `t_max_us`.
#[wasm_bindgen]
pub fn absorption_curve(
    theory: &str,
    k_s: f64,
    k_t: f64,
    k_sr: f64,
    b_ut: f64,
    t_max_us: f64,
    dt_us: f64,
) -> Result<Vec<f64>, JsValue> {
    absorption_curve_impl(theory, k_s, k_t, k_sr, b_ut, t_max_us, dt_us)
        .map_err(|e| JsValue::from_str(&e))
}

/// Magnetic field effect: absorption at `b_ut` minus absorption at
/// `b_ref_ut`, pointwise on the same grid.
#[wasm_bindgen]
pub fn mfe_curve(
    theory: &str,
    k_s: f64,
    k_t: f64,
    k_sr: f64,
    b_ut: f64,
    b_ref_ut: f64,
    t_max_us: f64,
    dt_us: f64,
) -> Result<Vec<f64>, JsValue> {
    mfe_curve_impl(theory, k_s, k_t, k_sr, b_ut, b_ref_ut, t_max_us, dt_us)
        .map_err(|e| JsValue::from_str(&e))
}

/// Zeno explorer: how the triplet channel rate `k_t` shapes recombination
/// when it is the only open channel. Returns three numbers, see
/// [`conversion_metrics_impl`]'s order.
#[wasm_bindgen]
pub fn conversion_metrics(k_t: f64, dt_us: f64) -> Result<Vec<f64>, JsValue> {
    conversion_metrics_impl(k_t, dt_us).map_err(|e| JsValue::from_str(&e))
}
