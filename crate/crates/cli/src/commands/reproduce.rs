use std::path::Path;

use nonlocal_lab::acceptance::{all_gating_passed, run_all, AcceptanceConfig, CriterionReport};
use nonlocal_lab::lhv::CellComparison;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{csv_string, json_string};
use crate::McArgs;

/// Below this sample count the 5σ comparisons lose most of their power.
const UNDERPOWERED_N: u64 = 100_000;

#[derive(Serialize)]
struct Report<'a> {
    config: AcceptanceConfig,
    all_gating_passed: bool,
    criteria: &'a [CriterionReport],
}

#[derive(Serialize)]
struct TableRow<'a> {
    criterion: u8,
    table: &'a str,
    #[serde(flatten)]
    cell: &'a CellComparison,
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

pub fn run(out: &Path, mc: &McArgs) -> Result<bool, CliError> {
    if mc.n < UNDERPOWERED_N {
        eprintln!(
            "warning: n = {} is underpowered; sigma tests need about {UNDERPOWERED_N} samples to detect model errors",
            mc.n
        );
    }
    let cfg = AcceptanceConfig {
        n: mc.n,
        n_barrett: mc.n.saturating_mul(10),
        seed: mc.seed,
    };
    let reports = run_all(&cfg);
    let passed = all_gating_passed(&reports);

    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write(
        out,
        "report.json",
        &json_string(&Report {
            config: cfg,
            all_gating_passed: passed,
            criteria: &reports,
        }),
    )?;
    let rows = reports.iter().flat_map(|r| {
        r.tables.iter().flat_map(move |t| {
            t.rows.iter().map(move |cell| TableRow {
                criterion: r.id,
                table: &t.name,
                cell,
            })
        })
    });
    write(out, "tables.csv", &csv_string(rows)?)?;
    let mut summary: String = reports.iter().map(|r| r.line() + "\n").collect();
    summary += if passed { "all gating criteria passed\n" } else { "some gating criteria FAILED\n" };
    write(out, "summary.txt", &summary)?;
    print!("{summary}");
    Ok(passed)
}
