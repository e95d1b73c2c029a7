//! Monte Carlo check of the radial density: sampled root histogram against
//! the analytic curve, plus the total-mass identity.

use clap::{ArgMatches, Command};
use fewzero_core::density::radial_density;
use fewzero_core::ensemble::{empirical_radial, expected_span_exact};
use num_traits::ToPrimitive;

use super::{config_flag, flag, out_flag};
use crate::config::Args;
use crate::{out, run_err, CliError};

pub fn command() -> Command {
    Command::new("mc-zeros")
        .about("Compare a sampled root histogram against the analytic density")
        .long_about(
            "Draws random sparse polynomials, bins log|z|^2 of their roots, and \
             writes one CSV row per bin next to the analytic value; summary \
             statistics go to stderr. Exits nonzero when the histogram or the \
             total mass strays outside three standard errors.",
        )
        .arg(flag("deg", Some("200"), "polynomial degree"))
        .arg(flag("n", Some("4"), "terms per polynomial, at least 2"))
        .arg(flag("samples", Some("2000"), "polynomials to draw"))
        .arg(flag("bins", Some("24"), "histogram bins"))
        .arg(flag("rho-min", Some("-6"), "left edge of the histogram"))
        .arg(flag("rho-max", Some("6"), "right edge of the histogram"))
        .arg(flag("seed", Some("7"), "RNG seed; reruns are bit-identical"))
        .arg(out_flag("CSV destination; default stdout"))
        .arg(config_flag())
}

pub fn run(matches: &ArgMatches) -> Result<(), CliError> {
    let args = Args::new(matches)?;
    let deg: u32 = args.get("deg")?;
    let n: u32 = args.get("n")?;
    let samples: usize = args.get("samples")?;
    let bins: usize = args.get("bins")?;
    let lo: f64 = args.get("rho-min")?;
    let hi: f64 = args.get("rho-max")?;
    let seed: u64 = args.get("seed")?;
    let dest: Option<String> = args.get_opt("out")?;

    if n < 2 {
        return Err(CliError::Usage("--n must be at least 2".into()));
    }
    if samples < 2 || bins < 1 {
        return Err(CliError::Usage(
            "--samples needs at least 2 and --bins at least 1".into(),
        ));
    }
    if !(lo < hi) {
        return Err(CliError::Usage("--rho-min must be below --rho-max".into()));
    }

    let hist = empirical_radial(deg, n, samples, bins, lo, hi, seed).map_err(run_err)?;

    let mut lines = vec!["rho_lo,rho_hi,empirical,stderr,analytic".to_string()];
    let mut analytic = Vec::with_capacity(bins);
    for k in 0..bins {
        let mid = 0.5 * (hist.edges[k] + hist.edges[k + 1]);
        let a = radial_density(n, mid).map_err(run_err)?;
        analytic.push(a);
        lines.push(out::csv(&[
            out::sci(hist.edges[k]),
            out::sci(hist.edges[k + 1]),
            out::sci(hist.density[k]),
            out::sci(hist.stderr[k]),
            out::sci(a),
        ]));
    }
    out::write_text(dest.as_deref(), &(lines.join("\n") + "\n"))?;

    let mut inside = 0usize;
    for k in 0..bins {
        let z = (hist.density[k] - analytic[k]).abs() / hist.stderr[k];
        if z <= 3.0 {
            inside += 1;
        } else {
            eprintln!(
                "bin [{:.3}, {:.3}): empirical {:.5} vs analytic {:.5}, {:.1} sigma",
                hist.edges[k],
                hist.edges[k + 1],
                hist.density[k],
                analytic[k],
                z
            );
        }
    }
    let expected = expected_span_exact(deg, n)
        .map_err(run_err)?
        .to_f64()
        .expect("finite expectation")
        / deg as f64;
    let mass_z = (hist.total_mass - expected).abs() / hist.mass_stderr;
    eprintln!(
        "bins within 3 sigma: {inside}/{bins}; total mass {:.6} vs expected {:.6} ({:.1} sigma); \
         {} samples kept, {} discarded",
        hist.total_mass, expected, mass_z, hist.samples, hist.failed
    );

    let enough_bins = inside * 100 >= bins * 95;
    if !enough_bins || mass_z > 3.0 {
        return Err(run_err("histogram disagrees with the analytic density"));
    }
    Ok(())
}
