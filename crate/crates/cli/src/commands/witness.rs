use std::path::Path;

use nonlocal_lab::qmat::{hermitian_eig, partial_transpose};
use nonlocal_lab::states::{flip_witness, twirl};
use nonlocal_lab::Side;
use serde::Serialize;

use crate::error::CliError;
use crate::output::{csv_string, emit, json_string};
use crate::state_spec::resolve;
use crate::{Format, StateArgs};

/// Entries of `ρ` and its twirl closer than this count as equal.
const WERNER_TOL: f64 = 1e-10;
/// Eigenvalues below `−NEG_TOL` count as negative.
const NEG_TOL: f64 = 1e-12;

#[derive(Debug, Serialize)]
struct WitnessReport {
    state: String,
    #[serde(rename = "dA")]
    da: usize,
    #[serde(rename = "dB")]
    db: usize,
    /// `tr(Vρ)`; absent when the local dimensions differ.
    flip_witness: Option<f64>,
    werner_family: bool,
    witness_verdict: &'static str,
    ppt_min_eigenvalue: f64,
    ppt_verdict: &'static str,
}

fn witness_verdict(phi: Option<f64>, werner: bool) -> &'static str {
    match phi {
        None => "not applicable",
        Some(phi) if werner => {
            if phi >= -NEG_TOL {
                "separable"
            } else {
                "entangled"
            }
        }
        Some(phi) if phi < -NEG_TOL => "entangled",
        Some(_) => "witness inconclusive",
    }
}

fn ppt_verdict(min_eig: f64, da: usize, db: usize) -> &'static str {
    if min_eig < -NEG_TOL {
        "entangled (npt)"
    } else if da * db <= 6 {
        "separable (ppt)"
    } else {
        "ppt (inconclusive)"
    }
}

pub fn run(args: &StateArgs, format: Format, out: Option<&Path>) -> Result<bool, CliError> {
    let resolved = resolve(args)?;
    let rho = &resolved.state;
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let (phi, werner) = if da == db {
        let phi = flip_witness(rho)?;
        let werner = twirl(rho.matrix(), da)?.matrix().max_abs_diff(rho.matrix()) < WERNER_TOL;
        (Some(phi), werner)
    } else {
        (None, false)
    };
    let pt = partial_transpose(rho.matrix(), da, db, Side::B)?;
    let min_eig = hermitian_eig(&pt)?.min_eigenvalue();
    let report = WitnessReport {
        state: resolved.label,
        da,
        db,
        flip_witness: phi,
        werner_family: werner,
        witness_verdict: witness_verdict(phi, werner),
        ppt_min_eigenvalue: min_eig,
        ppt_verdict: ppt_verdict(min_eig, da, db),
    };
    let text = match format {
        Format::Json => json_string(&report),
        Format::Csv => csv_string([report])?,
    };
    emit(&text, out)?;
    Ok(true)
}
