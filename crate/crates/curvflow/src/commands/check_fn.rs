use std::io::Write;
use std::path::Path;

use curvflow_core::symfun::{check_condition1, parse_function, CertReport};
use curvflow_core::CurvatureSpec64;

use super::{create_dir, write_file, write_json};
use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct CheckFnArgs {
    pub expr: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub beta: f64,
}

/// Samples the structural conditions for the function. With `out`, writes
/// `cert.json` and `cert.csv` there.
pub fn cmd_check_fn(args: &CheckFnArgs, out: Option<&Path>) -> Result<CertReport, CliError> {
    let f = parse_function::<f64>(&args.expr).map_err(|e| CliError::invalid("expr", e.to_string()))?;
    let spec = CurvatureSpec64::new(f, args.n, args.beta).map_err(|e| CliError::invalid("expr", e.to_string()))?;
    if args.samples == 0 {
        return Err(CliError::invalid("samples", "must be positive".into()));
    }
    let report = check_condition1(&spec, args.samples, args.seed);
    if let Some(dir) = out {
        create_dir(dir)?;
        write_json(&dir.join("cert.json"), &report)?;
        write_file(&dir.join("cert.csv"), |w| {
            writeln!(w, "condition,pass,worst,threshold,failures,sampled_only")?;
            for e in &report.entries {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    e.condition, e.pass, e.worst, e.threshold, e.failures, e.sampled_only
                )?;
            }
            Ok(())
        })?;
    }
    Ok(report)
}
