//! JSON report writing. All numeric fields carry units in their key names;
//! dimensionless quantities use ratio/factor/fraction naming.

use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Compute(format!("cannot create {}: {e}", dir.display())))?;
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Compute(format!("serialize {}: {e}", path.display())))?;
    std::fs::write(path, text.as_bytes())
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Compute(format!("bad JSON in {}: {e}", path.display())))
}
