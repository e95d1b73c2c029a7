//! Distribution function slice along t at a fixed radial point.

use clap::{ArgMatches, Command};
use fewzero_core::{DistCache, RadialPoint};

use super::{config_flag, flag, out_flag};
use crate::config::Args;
use crate::{out, run_err, CliError};

pub fn command() -> Command {
    Command::new("dist")
        .about("Tabulate D(t, rho) with its t and rho derivatives along t")
        .arg(flag("m", Some("1"), "number of radial variables"))
        .arg(flag("rho", Some("0.5"), "radial point, comma-separated, m entries"))
        .arg(flag("t-min", Some("0"), "left end of the t grid"))
        .arg(flag("t-max", None, "right end of the t grid; default is the range top"))
        .arg(flag("steps", Some("201"), "grid points, at least 2"))
        .arg(out_flag("output file; stdout when omitted"))
        .arg(config_flag())
}

pub fn run(matches: &ArgMatches) -> Result<(), CliError> {
    let args = Args::new(matches)?;
    let m: usize = args.get("m")?;
    let rho: Vec<f64> = args.get_list("rho")?;
    let lo: f64 = args.get("t-min")?;
    let hi: Option<f64> = args.get_opt("t-max")?;
    let steps: usize = args.get("steps")?;
    let path: Option<String> = args.get_opt("out")?;

    if rho.len() != m {
        return Err(CliError::Usage(format!(
            "--rho needs {m} entries, got {}",
            rho.len()
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("need steps >= 2, got {steps}")));
    }
    let point = RadialPoint::new(rho).map_err(run_err)?;
    let cache = DistCache::new(&point).map_err(run_err)?;
    let hi = hi.unwrap_or_else(|| cache.bmax());
    if !(lo < hi) {
        return Err(CliError::Usage(format!(
            "need t-min < t-max, got {lo} and {hi}"
        )));
    }

    let mut head = vec!["t".to_string(), "D".to_string(), "dD_dt".to_string()];
    head.extend((0..m).map(|p| format!("dD_drho_{p}")));
    let mut lines = vec![head.join(",")];
    let h = (hi - lo) / (steps - 1) as f64;
    for k in 0..steps {
        let t = lo + k as f64 * h;
        let ev = cache.eval(t);
        let mut row = vec![out::sci(t), out::sci(ev.value), out::sci(ev.dt)];
        row.extend(ev.drho.iter().map(|&d| out::sci(d)));
        lines.push(out::csv(&row));
    }
    out::write_text(path.as_deref(), &(lines.join("\n") + "\n"))?;
    Ok(())
}
