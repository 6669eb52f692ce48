//! Implementations of the four subcommands on top of the core engine.

use rayon::prelude::*;
use std::path::PathBuf;

use qsdc_core::analysis::{capacity_point, cutoff_round_trip_db, expected_statistics};
use qsdc_core::estimators::{validate_decoy_levels, EstimatorKind};
use qsdc_core::rate::Cutoff;
use qsdc_core::sim::{fringe_sweep, fringe_visibility_from_counts, run_session};
use qsdc_core::{Error, Result};

use crate::config::{GridSpec, RunConfig};

/// Formats a number with nine significant digits, the fixed precision of
/// every numeric CSV field.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes `text` to the path when given, otherwise to stdout.
fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Inconsistent(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Prints a human-readable summary line without corrupting CSV piped to
/// stdout: summaries go to stderr unless the CSV went to a file.
fn note(line: &str, csv_to_file: bool) {
    if csv_to_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub const SWEEP_HEADER: &str =
    "attenuation_db,mu,estimator,i_ab,i_ae_1,i_ae_2,i_ae_3plus,c_s,c_s_clamped";

pub struct SweepRequest {
    pub config: RunConfig,
    pub estimator: EstimatorKind,
    pub mus: Vec<f64>,
    pub grid: GridSpec,
    pub include_two_photon_term: Option<bool>,
    pub out: Option<PathBuf>,
}

/// Tabulates the capacity breakdown over the attenuation grid for each
/// intensity, then reports where each curve crosses zero.
pub fn capacity_sweep(request: &SweepRequest) -> Result<()> {
    let options = request.config.capacity_options(request.include_two_photon_term);
    let nus = match request.estimator {
        EstimatorKind::Decoy => Some(request.config.decoy_nus()),
        EstimatorKind::Gllp => None,
    };
    let alphas = request.grid.values();
    let mut points = Vec::with_capacity(request.mus.len() * alphas.len());
    for &mu in &request.mus {
        for &alpha in &alphas {
            points.push((mu, alpha));
        }
    }
    let rows: Vec<String> = points
        .into_par_iter()
        .map(|(mu, alpha)| -> Result<String> {
            let params = request.config.system_params(mu, alpha)?;
            let cap = capacity_point(&params, request.estimator, nus, &options)?;
            Ok(format!(
                "{},{},{},{},{},{},{},{},{}",
                sig9(alpha),
                sig9(mu),
                request.estimator,
                sig9(cap.i_ab),
                sig9(cap.i_ae_1),
                sig9(cap.i_ae_2),
                sig9(cap.i_ae_3plus),
                sig9(cap.c_s),
                sig9(cap.c_s_clamped()),
            ))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    emit(&csv, &request.out)?;

    let csv_to_file = request.out.is_some();
    if request.grid.stop <= request.grid.start {
        note("cutoff search skipped: the grid has no extent", csv_to_file);
        return Ok(());
    }
    for &mu in &request.mus {
        let params = request.config.system_params(mu, request.grid.start)?;
        let cutoff = cutoff_round_trip_db(
            &params,
            request.estimator,
            nus,
            &options,
            request.grid.start,
            request.grid.stop,
            1e-3,
        )?;
        let line = match cutoff {
            Cutoff::At(db) => format!(
                "cutoff mu={} estimator={}: {} dB round trip",
                sig9(mu),
                request.estimator,
                sig9(db)
            ),
            Cutoff::Beyond(db) => format!(
                "cutoff mu={} estimator={}: still positive at {} dB round trip",
                sig9(mu),
                request.estimator,
                sig9(db)
            ),
            Cutoff::NonePositive => format!(
                "cutoff mu={} estimator={}: capacity never positive on the grid",
                sig9(mu),
                request.estimator
            ),
        };
        note(&line, csv_to_file);
    }
    Ok(())
}

pub const SIMULATE_HEADER: &str = "mu,attenuation_db,pulses,seed,aborted,\
q_ba_mc,dber_mc,q_bab_mc,qber_mc,q_ba_analytic,dber_analytic,q_bab_analytic,qber_analytic";

pub struct SimulateRequest {
    pub config: RunConfig,
    pub mus: Vec<f64>,
    pub pulses: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn z_score(mc: f64, p: f64, n: u64) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    if sigma > 0.0 {
        Some((mc - p) / sigma)
    } else {
        None
    }
}

fn z_text(z: Option<f64>) -> String {
    match z {
        Some(z) => format!("{z:+.2}"),
        None => "n/a".into(),
    }
}

/// Runs one seeded session per intensity and prints the estimated rates
/// next to their closed-form expectations with binomial z-scores.
pub fn simulate(request: &SimulateRequest) -> Result<()> {
    let alpha = request.config.attenuation_db;
    let mut csv = String::from(SIMULATE_HEADER);
    csv.push('\n');
    for &mu in &request.mus {
        let session = request.config.session_config(mu, alpha)?;
        let stats = run_session(&session, request.pulses, request.seed)?;
        let expected = expected_statistics(&session.params)?;
        println!(
            "simulate mu={} alpha_rt_db={} pulses={} seed={}",
            sig9(mu),
            sig9(alpha),
            request.pulses,
            request.seed
        );
        let rows = [
            ("q_ba", stats.q_ba_hat(), expected.q_ba, stats.n_pulses, stats.q_ba_ci95()),
            ("dber", stats.dber_hat(), expected.e_ba, stats.matched_clicks, stats.dber_ci95()),
            ("q_bab", stats.q_bab_hat(), expected.q_bab, stats.n_pulses, stats.q_bab_ci95()),
            ("qber", stats.qber_hat(), expected.e_bab, stats.check_clicks, stats.qber_ci95()),
        ];
        for (name, mc, analytic, n, ci) in rows {
            println!(
                "  {name:<5} mc={} analytic={} z={} ci95=[{}, {}]",
                sig9(mc),
                sig9(analytic),
                z_text(z_score(mc, analytic, n)),
                sig9(ci.0),
                sig9(ci.1)
            );
        }
        if stats.aborted {
            println!(
                "  aborted=true (dber {} above threshold {})",
                sig9(stats.dber_hat()),
                sig9(session.dber_abort_threshold)
            );
        } else {
            println!("  aborted=false");
        }
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            sig9(mu),
            sig9(alpha),
            request.pulses,
            request.seed,
            stats.aborted,
            sig9(stats.q_ba_hat()),
            sig9(stats.dber_hat()),
            sig9(stats.q_bab_hat()),
            sig9(stats.qber_hat()),
            sig9(expected.q_ba),
            sig9(expected.e_ba),
            sig9(expected.q_bab),
            sig9(expected.e_bab),
        ));
    }
    if request.out.is_some() {
        emit(&csv, &request.out)?;
    }
    Ok(())
}

pub struct FringeRequest {
    pub config: RunConfig,
    pub out: Option<PathBuf>,
}

/// Tabulates the interferometer fringe over the voltage grid and reports
/// the visibility recovered from its extrema.
pub fn fringe(request: &FringeRequest) -> Result<()> {
    let c = &request.config;
    let points = fringe_sweep(
        c.v_start,
        c.v_stop,
        c.v_step,
        c.v_pi,
        c.visibility_bab,
        c.c_max,
        c.phase_offset,
    )?;
    let mut csv = format!(
        "# v_pi={} visibility={} c_max={} phase_offset={}\nvoltage_v,counts\n",
        sig9(c.v_pi),
        sig9(c.visibility_bab),
        sig9(c.c_max),
        sig9(c.phase_offset)
    );
    for (v, counts) in &points {
        csv.push_str(&format!("{},{}\n", sig9(*v), sig9(*counts)));
    }
    emit(&csv, &request.out)?;
    let recovered = fringe_visibility_from_counts(&points)?;
    let periods = (c.v_stop - c.v_start) / c.v_pi;
    note(
        &format!(
            "fringe: recovered visibility {} over {} half-wave periods ({} points)",
            sig9(recovered),
            sig9(periods),
            points.len()
        ),
        request.out.is_some(),
    );
    Ok(())
}

pub struct ValidateRequest {
    pub config: RunConfig,
    pub mus: Vec<f64>,
}

/// Checks each intensity quadruple against the feasibility clauses and
/// reports every clause verdict. Returns whether all quadruples passed.
pub fn validate_decoy(request: &ValidateRequest) -> Result<bool> {
    let (nu1, nu2, nu3) = request.config.decoy_nus();
    let mut all_ok = true;
    for &mu in &request.mus {
        let report = validate_decoy_levels(mu, nu1, nu2, nu3)?;
        println!(
            "validate-decoy mu={} nu1={} nu2={} nu3={}",
            sig9(mu),
            sig9(nu1),
            sig9(nu2),
            sig9(nu3)
        );
        for clause in &report.clauses {
            let verdict = if clause.passed { "PASS" } else { "FAIL" };
            println!("  {verdict} {}: {}", clause.name, clause.detail);
        }
        let ok = report.all_passed();
        println!("result: {}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    }
    Ok(all_ok)
}
