//! Subcommand definitions and entry points.

use clap::Arg;

pub mod density;
pub mod dist;
pub mod figure;
pub mod mc_zeros;
pub mod verify;

/// String-typed flag; parsing happens in `config::Args` so the config file
/// and the command line share one code path.
fn flag(name: &'static str, default: Option<&'static str>, help: &'static str) -> Arg {
    let mut a = Arg::new(name)
        .long(name)
        .num_args(1)
        .allow_negative_numbers(true)
        .help(help);
    if let Some(d) = default {
        a = a.default_value(d);
    }
    a
}

fn config_flag() -> Arg {
    flag(
        "config",
        None,
        "key=value file supplying defaults for any flag not given explicitly",
    )
}

fn out_flag(help: &'static str) -> Arg {
    flag("out", None, help)
}
