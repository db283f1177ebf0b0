use std::path::Path;

use nonlocal_lab::filters::{hidden_nonlocality_scan, popescu_protocol, FilterFamily, DEFAULT_EPSILONS};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{csv_string, emit, json_string};
use crate::{Format, ScanFamily};

#[derive(Debug, Serialize)]
struct PopescuRow {
    d: usize,
    success_prob: f64,
    chsh: f64,
    chsh_optimal: f64,
    closed_form_deviation: f64,
}

fn render<R: Serialize>(rows: Vec<R>, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(json_string(&rows)),
        Format::Csv => csv_string(rows),
    }
}

pub fn run(
    family: ScanFamily,
    q: f64,
    d: Option<usize>,
    eps_grid: Option<Vec<f64>>,
    format: Format,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let text = match family {
        ScanFamily::Popescu => {
            let dims: Vec<usize> = d.map_or_else(|| (3..=8).collect(), |d| vec![d]);
            let rows = dims
                .into_iter()
                .map(|d| {
                    let r = popescu_protocol(d)?;
                    Ok(PopescuRow {
                        d,
                        success_prob: r.success_prob,
                        chsh: r.chsh,
                        chsh_optimal: r.chsh_optimal,
                        closed_form_deviation: r.closed_form_deviation,
                    })
                })
                .collect::<Result<Vec<_>, nonlocal_lab::Error>>()?;
            render(rows, format)?
        }
        ScanFamily::RhoG | ScanFamily::RhoGPrime => {
            let fam = if family == ScanFamily::RhoG {
                FilterFamily::RhoG
            } else {
                FilterFamily::RhoGPrime
            };
            let grid = eps_grid.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
            render(hidden_nonlocality_scan(fam, q, &grid)?, format)?
        }
    };
    emit(&text, out)?;
    Ok(true)
}
