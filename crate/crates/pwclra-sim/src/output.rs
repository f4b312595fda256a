//! Result serialization: a self-describing CSV of per-trial rows plus a TOML
//! sidecar (`<out>.meta.toml`) recording exactly what produced them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::runner::{ResultRow, RunOutcome};
use crate::scenario::Scenario;

/// First line of every results file; bump on any column change.
pub const CSV_SCHEMA: &str = "# pwclra-results schema v1";
/// Column order, fixed.
pub const CSV_COLUMNS: &str =
    "scenario,method,q,z,snr_db,d_x_rb_m,m_ris,geometry,trial,nmse_linear,nmse_db";

/// Render rows as CSV. Floats print in shortest round-trip form, so files
/// compare byte-for-byte across runs when the numbers match exactly.
pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 2));
    s.push_str(CSV_SCHEMA);
    s.push('\n');
    s.push_str(CSV_COLUMNS);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.method.as_str(),
            r.q,
            r.z,
            r.snr_db,
            r.d_x_rb_m,
            r.m_ris,
            r.geometry,
            r.trial,
            r.nmse_linear,
            r.nmse_db
        )
        .expect("string write");
    }
    s
}

#[derive(Serialize)]
struct Generator {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct RunMeta {
    trials: usize,
    base_seed: u64,
    parallel: usize,
    rows: usize,
    rank_cap_events: u64,
    refinement_steps_checked: u64,
    refinement_violations: u64,
}

#[derive(Serialize)]
struct Conventions {
    snr: &'static str,
    distance: &'static str,
}

#[derive(Serialize)]
struct Meta<'a> {
    generator: Generator,
    run: RunMeta,
    conventions: Conventions,
    scenario: &'a Scenario,
}

/// Sidecar text for one finished run.
pub fn meta_string(scenario: &Scenario, outcome: &RunOutcome, parallel: usize) -> String {
    let meta = Meta {
        generator: Generator { name: "pwclra-sim", version: env!("CARGO_PKG_VERSION") },
        run: RunMeta {
            trials: scenario.trials,
            base_seed: scenario.base_seed,
            parallel,
            rows: outcome.rows.len(),
            rank_cap_events: outcome.rank_cap_events,
            refinement_steps_checked: outcome.jo_checked_steps,
            refinement_violations: outcome.jo_violations,
        },
        conventions: Conventions {
            snr: "snr_db is the per-user receive SNR with an all-ones panel, \
                  averaged over users; transmit power is calibrated per trial",
            distance: "power calibration always uses the reference distance, so \
                       distance sweeps change geometry only",
        },
        scenario,
    };
    toml::to_string_pretty(&meta).expect("metadata serializes")
}

/// Path of the sidecar for a given results path.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".meta.toml");
    PathBuf::from(p)
}

/// Write `<out>` (CSV) and `<out>.meta.toml`.
pub fn write_outputs(
    out: &Path,
    scenario: &Scenario,
    outcome: &RunOutcome,
    parallel: usize,
) -> CliResult<()> {
    std::fs::write(out, csv_string(&outcome.rows))
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", out.display())))?;
    let mp = meta_path(out);
    std::fs::write(&mp, meta_string(scenario, outcome, parallel))
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", mp.display())))?;
    Ok(())
}
