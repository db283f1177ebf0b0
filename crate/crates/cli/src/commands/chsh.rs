use std::path::Path;

use nonlocal_lab::bell::{chsh_with_settings, optimal_settings};
use nonlocal_lab::ChshSettings;

use crate::error::CliError;
use crate::output::{emit, json_string};
use crate::state_spec::resolve;
use crate::{SettingsArgs, StateArgs};

fn explicit_settings(s: &SettingsArgs) -> Result<Option<ChshSettings>, CliError> {
    match (s.x, s.x2, s.y, s.y2) {
        (None, None, None, None) => Ok(None),
        (Some(x), Some(x_prime), Some(y), Some(y_prime)) => Ok(Some(ChshSettings {
            x,
            x_prime,
            y,
            y_prime,
        })),
        _ => Err(CliError::Usage("give all of --x, --x2, --y and --y2, or none".into())),
    }
}

pub fn run(state: &StateArgs, settings: &SettingsArgs, optimal: bool, out: Option<&Path>) -> Result<bool, CliError> {
    let rho = resolve(state)?.state;
    let settings = match (explicit_settings(settings)?, optimal) {
        (Some(_), true) => return Err(CliError::Usage("--optimal cannot be combined with explicit settings".into())),
        (Some(s), false) => s,
        (None, _) => optimal_settings(&rho)?,
    };
    let result = chsh_with_settings(&rho, settings)?;
    emit(&json_string(&result), out)?;
    Ok(true)
}
