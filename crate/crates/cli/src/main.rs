#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod selfcheck;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde::Serialize;

use crate::commands::{Ctx, Outcome};
use crate::config::{CommandSpec, Key, Settings, GLOBAL};
use crate::error::CliError;

fn key_arg(k: &Key) -> Arg {
    let arg = Arg::new(k.name).long(k.name).help(k.help).global(GLOBAL.iter().any(|g| g.name == k.name));
    if k.switch {
        arg.action(ArgAction::SetTrue)
    } else {
        arg.value_name("VALUE").allow_negative_numbers(true)
    }
}

fn cli(specs: &[CommandSpec]) -> Command {
    let mut cmd = Command::new("carleman")
        .about("Carleman weights, inequality batteries and hypothesis certificates on warped ends")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .global(true)
                .help("key = value settings with [command] sections; flags take precedence"),
        )
        .arg(
            Arg::new("dry-run")
                .long("dry-run")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("validate and print the resolved plan without computing"),
        );
    for k in GLOBAL {
        cmd = cmd.arg(key_arg(k));
    }
    for spec in specs {
        let mut sub = Command::new(spec.name).about(spec.about);
        for k in &spec.keys {
            match spec.positional.iter().position(|p| *p == k.name) {
                Some(i) => sub = sub.arg(Arg::new(k.name).index(i + 1).value_name("EXPR").help(k.help)),
                None => sub = sub.arg(key_arg(k)),
            }
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn explicit_flags(spec: &CommandSpec, m: &ArgMatches) -> BTreeMap<&'static str, String> {
    let mut flags = BTreeMap::new();
    for k in GLOBAL.iter().chain(&spec.keys) {
        if k.switch {
            if m.get_flag(k.name) {
                flags.insert(k.name, "true".to_string());
            }
        } else if let Some(v) = m.get_one::<String>(k.name) {
            flags.insert(k.name, v.clone());
        }
    }
    flags
}

#[derive(Serialize)]
struct DryRun<'a> {
    command: &'a str,
    settings: BTreeMap<&'static str, String>,
    artifacts: Vec<String>,
}

fn write_outputs(out: Option<&Path>, outcome: &Outcome) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::stage("output", format!("cannot create {}: {e}", dir.display())))?;
            for a in &outcome.artifacts {
                let path = dir.join(a.name);
                std::fs::write(&path, &a.content)
                    .map_err(|e| CliError::stage("output", format!("cannot write {}: {e}", path.display())))?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            if let Some(a) = outcome.artifacts.first() {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(a.content.as_bytes())
                    .map_err(|e| CliError::stage("output", e))?;
            }
        }
    }
    Ok(())
}

fn execute(spec: &CommandSpec, m: &ArgMatches) -> Result<(), CliError> {
    let file = match m.get_one::<String>("config") {
        Some(p) => Some(config::load(Path::new(p), &config::commands())?),
        None => None,
    };
    let settings = Settings::resolve(spec, file.as_ref(), &explicit_flags(spec, m));
    let ctx = Ctx::from_settings(&settings)?;
    let jobs = match settings.raw("jobs") {
        Some(_) => Some(settings.usize("jobs")?).filter(|&j| j > 0).ok_or_else(|| CliError::usage("--jobs must be at least 1"))?,
        None => 0,
    };
    let out = settings.raw("out").map(PathBuf::from);
    let planned = commands::plan(&settings)?;

    if m.get_flag("dry-run") {
        let plan = DryRun {
            command: spec.name,
            settings: settings.recorded(),
            artifacts: planned
                .artifacts
                .iter()
                .map(|a| match &out {
                    Some(d) => d.join(a).display().to_string(),
                    None => format!("stdout ({a})"),
                })
                .collect(),
        };
        let text = carleman_core::report::to_json(&plan).map_err(|e| CliError::stage("report", e))?;
        print!("{text}");
        return Ok(());
    }

    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::stage("threads", e))?;
    }
    let outcome = (planned.run)(&ctx)?;
    write_outputs(out.as_deref(), &outcome)?;
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let specs = config::commands();
    let mut cmd = cli(&specs);
    let matches = match cmd.try_get_matches_from_mut(std::env::args_os()) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let spec = specs.iter().find(|s| s.name == name).expect("registered subcommand");
    match execute(spec, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("carleman {name}: {e}");
            if let CliError::Usage(_) = e {
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    eprintln!("\n{}", sub.render_help());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
