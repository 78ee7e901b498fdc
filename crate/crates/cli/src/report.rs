//! JSON documents for the report-style subcommands. Keys carry their unit as a suffix.

use omit_core::darkmode::{adiabatic_elimination, dark_mode_broken, hybridize_two_mode, predict_linewidth};
use omit_core::nmode::normal_modes_for;
use omit_core::oracle::OracleComparison;
use omit_core::steady::{solve_steady_state, SteadyState};
use omit_core::{Cx, OmitError, Result, SystemConfig64};
use serde_json::{json, Value};

/// Relative size of the weaker dressed coupling below which the dark mode counts as intact.
const BROKEN_TOLERANCE: f64 = 1e-9;

fn c(z: Cx<f64>) -> Value {
    json!([z.re, z.im])
}

fn steady_json(s: &SteadyState<f64>) -> Value {
    json!({
        "alpha": c(s.alpha),
        "betas": s.betas.iter().copied().map(c).collect::<Vec<_>>(),
        "photon_number": s.photon_number(),
        "delta_eff_rad_s": s.delta_eff,
        "delta_c_rad_s": s.delta_c,
        "converged": s.converged,
        "iterations": s.iterations,
        "residual": s.residual,
        "multistable": s.multistable,
    })
}

/// Sections that do not apply to the configuration carry `{"unavailable": reason}`.
fn section(r: Result<Value>) -> Result<Value> {
    match r {
        Ok(v) => Ok(v),
        Err(e @ (OmitError::UnsupportedTopology(_) | OmitError::RegimeViolation(_))) => Ok(json!({ "unavailable": e.to_string() })),
        Err(e) => Err(e),
    }
}

pub fn darkmode(config: &SystemConfig64) -> Result<Value> {
    let steady = solve_steady_state(config)?;
    let hybrid = section(hybridize_two_mode(config, &steady).map(|r| {
        json!({
            "omega_plus_rad_s": r.omega_plus,
            "omega_minus_rad_s": r.omega_minus,
            "zeta_rad_s": r.zeta,
            "g_plus_rad_s": r.g_plus,
            "f": r.f,
            "h": r.h,
            "g_tilde_plus_rad_s": c(r.g_tilde_plus),
            "g_tilde_minus_rad_s": c(r.g_tilde_minus),
            "omega_tilde_plus_rad_s": r.omega_tilde_plus,
            "omega_tilde_minus_rad_s": r.omega_tilde_minus,
            "symmetric_check_relative": r.symmetric_check,
        })
    }))?;
    let broken = section(dark_mode_broken(config, &steady, BROKEN_TOLERANCE).map(|(b, weakest)| {
        json!({ "broken": b, "weakest_coupling_rad_s": weakest })
    }))?;
    let adiabatic = section(adiabatic_elimination(config, &steady).map(|a| {
        json!({
            "xi1_rad_s": a.xi1.map(c),
            "xi2_rad_s": a.xi2.map(c),
            "gamma_opt_rad_s": a.gamma_opt,
            "omega_opt_rad_s": a.omega_opt,
            "gamma_eff_rad_s": a.gamma_eff,
            "omega_eff_rad_s": a.omega_eff,
        })
    }))?;
    let linewidth = section(predict_linewidth(config, &steady, config.n_modes()).map(|g| json!({ "gamma_eff_rad_s": g })))?;
    Ok(json!({
        "steady_state": steady_json(&steady),
        "linearized_couplings_rad_s": steady.linearized_couplings(config),
        "hybridization": hybrid,
        "dark_mode": broken,
        "adiabatic": adiabatic,
        "predicted_linewidth": linewidth,
    }))
}

pub fn basis(config: &SystemConfig64) -> Result<Value> {
    let steady = solve_steady_state(config)?;
    let b = normal_modes_for(config, &steady)?;
    let t = &b.transform;
    Ok(json!({
        "n": b.n,
        "frequencies_rad_s": b.frequencies,
        "transform_row_major": (0..t.rows()).map(|i| t.row(i).iter().copied().map(c).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "effective_couplings_rad_s": b.effective_couplings.iter().copied().map(c).collect::<Vec<_>>(),
        "phase_accumulator_rad": b.phase_accumulator,
        "unitarity_defect": t.unitarity_defect(),
    }))
}

pub fn oracle(rows: &[OracleComparison<f64>], omega_ref: f64) -> Value {
    let max = |f: fn(&OracleComparison<f64>) -> Option<f64>| rows.iter().filter_map(f).fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "omega_over_omega_m": r.omega / omega_ref,
                "a1_minus_frequency_domain": c(r.a1_minus_freq),
                "a1_minus_time_domain": c(r.demod.a1_minus),
                "a1_relative_error": r.err_a1,
                "a2_minus_frequency_domain": r.a2_minus_freq.map(c),
                "a2_minus_time_domain": c(r.demod.a2_minus),
                "a2_relative_error": r.err_a2,
                "demodulation_residual": r.demod.residual,
                "periods": r.demod.periods,
                "reliable": r.demod.reliable(),
            })
        })
        .collect();
    json!({
        "comparisons": table,
        "max_a1_relative_error": max(|r| Some(r.err_a1)),
        "max_a2_relative_error": max(|r| r.err_a2),
    })
}
