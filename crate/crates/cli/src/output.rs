//! Writing reports to caller-chosen paths.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::failure::{CmdResult, Failure};

pub fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// Creates `path`, hands the writer to `fill`, and flushes.
pub fn write_with<F>(path: &Path, fill: F) -> CmdResult<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> CmdResult<()>,
{
    let mut w = create(path)?;
    fill(&mut w)?;
    w.flush().map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// Refuses outputs that would overwrite one of the inputs.
pub fn guard(output: &Path, inputs: &[&Path]) -> CmdResult<()> {
    let Ok(out) = output.canonicalize() else {
        return Ok(());
    };
    for input in inputs {
        if input.canonicalize().is_ok_and(|i| i == out) {
            return Err(Failure::validation(format!(
                "output {} would overwrite an input",
                output.display()
            )));
        }
    }
    Ok(())
}

/// Directory an output manifest lives in.
pub fn parent_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|d| !d.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn check_variant_name(name: &str) -> CmdResult<()> {
    if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        Ok(())
    } else {
        Err(Failure::validation(format!(
            "variant name {name:?} must be non-empty and use only letters, digits, '_' or '-'"
        )))
    }
}
