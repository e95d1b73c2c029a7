//! Density family figures: the curves, their quotient by the full-ensemble
//! reference, and the mass-normalized family.

use std::str::FromStr;

use clap::{ArgMatches, Command};
use fewzero_core::density::{expected_mass, DensityTable};
use fewzero_core::RadialPoint;
use num_traits::ToPrimitive;

use super::{config_flag, flag, out_flag};
use crate::config::{grid, Args};
use crate::{out, run_err, svg, CliError};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// The densities as they are.
    Before,
    /// Divided pointwise by the full-ensemble density.
    Quotient,
    /// Divided by total mass, so every curve integrates to one.
    After,
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "before-normalization" => Ok(Variant::Before),
            "quotient" => Ok(Variant::Quotient),
            "after-normalization" => Ok(Variant::After),
            other => Err(format!(
                "unknown variant {other:?}; use before-normalization, quotient, \
                 or after-normalization"
            )),
        }
    }
}

pub struct FigureData {
    pub axis: Vec<f64>,
    pub reference: Vec<f64>,
    pub curves: Vec<(u32, Vec<f64>)>,
}

/// Computes the family on a shared grid with the variant transform applied.
pub fn compute(
    ns: &[u32],
    lo: f64,
    hi: f64,
    steps: usize,
    variant: Variant,
) -> Result<FigureData, CliError> {
    let axis = grid(lo, hi, steps)?;
    let points: Vec<RadialPoint> = axis
        .iter()
        .map(|&r| RadialPoint::new(vec![r]).map_err(run_err))
        .collect::<Result<_, _>>()?;
    let mut reference = Vec::new();
    let mut curves = Vec::new();
    for &n in ns {
        let table = DensityTable::compute(n, &points).map_err(run_err)?;
        if reference.is_empty() {
            reference = match variant {
                Variant::Quotient => vec![1.0; axis.len()],
                _ => table.fs_density.clone(),
            };
        }
        let curve = match variant {
            Variant::Before => table.density,
            Variant::Quotient => table
                .density
                .iter()
                .zip(&table.fs_density)
                .map(|(&d, &fs)| d / fs)
                .collect(),
            Variant::After => {
                let mass = expected_mass(n).to_f64().expect("small rational");
                table.density.iter().map(|&d| d / mass).collect()
            }
        };
        curves.push((n, curve));
    }
    Ok(FigureData {
        axis,
        reference,
        curves,
    })
}

pub fn command() -> Command {
    Command::new("figure")
        .about("Emit the density family as CSV and SVG")
        .long_about(
            "Computes the density curves for every n in --n-list plus the \
             full-ensemble reference and writes PREFIX.csv and PREFIX.svg.",
        )
        .arg(flag(
            "which",
            Some("before-normalization"),
            "before-normalization, quotient, or after-normalization",
        ))
        .arg(flag("n-list", Some("2,4,8,32,128"), "curves to draw"))
        .arg(flag("rho-min", Some("-6"), "left end of the grid"))
        .arg(flag("rho-max", Some("6"), "right end of the grid"))
        .arg(flag("steps", Some("241"), "grid points, at least 2"))
        .arg(out_flag("output prefix; default figure"))
        .arg(config_flag())
}

pub fn run(matches: &ArgMatches) -> Result<(), CliError> {
    let args = Args::new(matches)?;
    let variant: Variant = args.get("which")?;
    let ns: Vec<u32> = args.get_list("n-list")?;
    let lo: f64 = args.get("rho-min")?;
    let hi: f64 = args.get("rho-max")?;
    let steps: usize = args.get("steps")?;
    let prefix: String = args.get_opt("out")?.unwrap_or_else(|| "figure".to_string());

    if ns.is_empty() || ns.iter().any(|&n| n < 2) {
        return Err(CliError::Usage("--n-list needs entries >= 2".into()));
    }
    let data = compute(&ns, lo, hi, steps, variant)?;

    let mut head = vec!["rho".to_string(), "fs_density".to_string()];
    head.extend(data.curves.iter().map(|(n, _)| format!("n{n}")));
    let mut lines = vec![head.join(",")];
    for k in 0..data.axis.len() {
        let mut row = vec![out::sci(data.axis[k]), out::sci(data.reference[k])];
        row.extend(data.curves.iter().map(|(_, c)| out::sci(c[k])));
        lines.push(out::csv(&row));
    }
    std::fs::write(format!("{prefix}.csv"), lines.join("\n") + "\n")?;

    let title = match variant {
        Variant::Before => "Radial zero densities",
        Variant::Quotient => "Densities over the full-ensemble reference",
        Variant::After => "Mass-normalized radial zero densities",
    };
    let mut series = vec![svg::Series {
        label: "full ensemble".into(),
        points: data.axis.iter().copied().zip(data.reference.iter().copied()).collect(),
    }];
    for (n, curve) in &data.curves {
        series.push(svg::Series {
            label: format!("n = {n}"),
            points: data.axis.iter().copied().zip(curve.iter().copied()).collect(),
        });
    }
    std::fs::write(
        format!("{prefix}.svg"),
        svg::line_plot(title, "rho", "density", &series),
    )?;
    Ok(())
}
