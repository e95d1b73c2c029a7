//! Density table over a radial grid.

use clap::{ArgMatches, Command};
use fewzero_core::density::DensityTable;
use fewzero_core::RadialPoint;

use super::{config_flag, flag, out_flag};
use crate::config::{grid, Args};
use crate::{out, run_err, svg, CliError};

pub fn command() -> Command {
    Command::new("density")
        .about("Tabulate F, its derivatives, and the zero density on a grid")
        .long_about(
            "Tabulates the potential F, its derivatives, and the zero density \
             over an evenly spaced radial grid. For m >= 2 the grid runs along \
             the diagonal and the density is the determinant-normalized one.",
        )
        .arg(flag("m", Some("1"), "number of radial variables"))
        .arg(flag("n", Some("4"), "sparsity (number of monomials), at least 2"))
        .arg(flag("rho-min", Some("-6"), "left end of the grid"))
        .arg(flag("rho-max", Some("6"), "right end of the grid"))
        .arg(flag("steps", Some("241"), "grid points, at least 2"))
        .arg(flag("format", Some("csv"), "csv or svg (svg needs m = 1)"))
        .arg(out_flag("output file; stdout when omitted"))
        .arg(config_flag())
}

pub fn run(matches: &ArgMatches) -> Result<(), CliError> {
    let args = Args::new(matches)?;
    let m: usize = args.get("m")?;
    let n: u32 = args.get("n")?;
    let lo: f64 = args.get("rho-min")?;
    let hi: f64 = args.get("rho-max")?;
    let steps: usize = args.get("steps")?;
    let format: String = args.get("format")?;
    let path: Option<String> = args.get_opt("out")?;

    if m < 1 {
        return Err(CliError::Usage("need m >= 1".into()));
    }
    if n < 2 {
        return Err(CliError::Usage(format!("need n >= 2, got {n}")));
    }
    let axis = grid(lo, hi, steps)?;
    let points: Vec<RadialPoint> = axis
        .iter()
        .map(|&r| RadialPoint::new(vec![r; m]).map_err(run_err))
        .collect::<Result<_, _>>()?;
    let table = DensityTable::compute(n, &points).map_err(run_err)?;

    match format.as_str() {
        "csv" => {
            let text = render_csv(&axis, &table);
            out::write_text(path.as_deref(), &text)?;
        }
        "svg" => {
            if m != 1 {
                return Err(CliError::Usage("svg output needs m = 1".into()));
            }
            let plot = svg::line_plot(
                &format!("Radial zero density, n = {n}"),
                "rho",
                "density",
                &[
                    svg::Series {
                        label: "full ensemble".into(),
                        points: axis.iter().copied().zip(table.fs_density.iter().copied()).collect(),
                    },
                    svg::Series {
                        label: format!("n = {n}"),
                        points: axis.iter().copied().zip(table.density.iter().copied()).collect(),
                    },
                ],
            );
            out::write_text(path.as_deref(), &plot)?;
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown format {other:?}; use csv or svg"
            )))
        }
    }
    Ok(())
}

fn render_csv(axis: &[f64], table: &DensityTable<f64>) -> String {
    let m = table.m;
    let mut lines = Vec::with_capacity(axis.len() + 1);
    if m == 1 {
        lines.push("rho,F,dF,d2F,density,fs_density".to_string());
    } else {
        let mut head: Vec<String> = (0..m).map(|p| format!("rho_{p}")).collect();
        head.push("F".into());
        head.extend((0..m).map(|p| format!("dF_{p}")));
        head.push("density".into());
        head.push("fs_density".into());
        lines.push(head.join(","));
    }
    for k in 0..axis.len() {
        let mut row = Vec::new();
        if m == 1 {
            row.push(out::sci(axis[k]));
            row.push(out::sci(table.f[k]));
            row.push(out::sci(table.grad[k][0]));
            row.push(out::sci(table.hess[k][(0, 0)]));
        } else {
            row.extend(table.grid[k].coords().iter().map(|&c| out::sci(c)));
            row.push(out::sci(table.f[k]));
            row.extend(table.grad[k].iter().map(|&g| out::sci(g)));
        }
        row.push(out::sci(table.density[k]));
        row.push(out::sci(table.fs_density[k]));
        lines.push(out::csv(&row));
    }
    lines.join("\n") + "\n"
}
