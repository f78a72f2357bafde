//! `spectrum` and `sweep` subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use permagg::sweep::coupling_axis;
use permagg::{compute_spectrum, sweep, Method};

use crate::config::{RunConfig, Scale};
use crate::error::CliError;

/// CSV table for every method in `cfg.output.methods`.
pub fn run_spectrum(cfg: &RunConfig) -> Result<String, CliError> {
    let model = cfg.model()?;
    let agg = cfg.aggregate()?;
    let grid = cfg.grid()?;
    let methods = cfg.methods()?;
    Ok(compute_spectrum(&methods, &model, &agg, &grid)?.to_csv())
}

/// Long-format CSV over the `[sweep]` coupling axis.
pub fn run_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    let method: Method = s
        .method
        .parse()
        .map_err(|e| CliError::Config(format!("sweep.method: {e}")))?;
    let axis = coupling_axis(s.start, s.stop, s.count)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let surface = sweep(
        &cfg.model()?,
        &cfg.aggregate()?,
        cfg.sweep_omega_v()?,
        &axis,
        &cfg.grid()?,
        method,
    )?;
    Ok(match s.scale {
        Scale::Log10 => surface.to_long_csv(),
        Scale::Linear => surface.to_linear_csv(),
    })
}

/// Write `text` to `path` through a sibling temporary file and a rename, so a
/// failed run never leaves a partial file behind. `None` means stdout.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            // a closed reader (`| head`) is not an error
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError::Io(format!("stdout: {e}")))
            }
            _ => Ok(()),
        };
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Err(e) = fs::write(&tmp, text) {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}
