//! Building a state from command-line flags or a JSON file.

use clap::ValueEnum;
use nonlocal_lab::states::{self, DensityMatrix};

use crate::error::CliError;
use crate::StateArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Singlet,
    /// Werner state with flip expectation `--phi` (needs `--d`).
    Werner,
    /// The locally simulable Werner state (`--d`).
    WernerLocal,
    /// `α|Ψ₋⟩⟨Ψ₋| + (1 − α)I/4` (`--alpha`).
    Werner2x2,
    /// Barrett's POVM-local state (`--d`).
    Barrett,
    RhoG,
    RhoGPrime,
    RhoE,
    RhoELifted,
}

fn need<T: Copy>(value: Option<T>, flag: &str, kind: StateKind) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("state {kind:?} needs --{flag}")))
}

/// The state plus a label and whether it is known to be a Werner state.
pub struct Resolved {
    pub label: String,
    pub state: DensityMatrix,
}

pub fn resolve(args: &StateArgs) -> Result<Resolved, CliError> {
    if let Some(path) = &args.state_file {
        if args.kind.is_some() {
            return Err(CliError::Usage("give either a state name or --state-file, not both".into()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok(Resolved {
            label: path.display().to_string(),
            state: DensityMatrix::from_json(&text)?,
        });
    }
    let kind = args
        .kind
        .ok_or_else(|| CliError::Usage("no state given; name one or pass --state-file".into()))?;
    let state = match kind {
        StateKind::Singlet => states::singlet(),
        StateKind::Werner => states::werner_phi(need(args.d, "d", kind)?, need(args.phi, "phi", kind)?)?,
        StateKind::WernerLocal => states::werner_local(need(args.d, "d", kind)?)?,
        StateKind::Werner2x2 => states::werner2x2(need(args.alpha, "alpha", kind)?)?,
        StateKind::Barrett => states::barrett_state(need(args.d, "d", kind)?)?,
        StateKind::RhoG => states::rho_g(need(args.q, "q", kind)?)?,
        StateKind::RhoGPrime => states::rho_g_prime(need(args.q, "q", kind)?)?,
        StateKind::RhoE => states::rho_e(need(args.q, "q", kind)?)?,
        StateKind::RhoELifted => states::rho_e_lifted(need(args.q, "q", kind)?)?,
    };
    let label = kind.to_possible_value().expect("no skipped variants").get_name().to_string();
    Ok(Resolved { label, state })
}
