mod cli;
mod commands;
mod input;

use std::fs;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::Value;

use crate::cli::Cli;
use crate::commands::{Output, EXIT_INPUT};

/// Adds the run timestamp. It sits outside the canonical body, so two runs
/// differ only in this field.
fn stamped(body: &Value) -> Value {
    let mut v = body.clone();
    if let Value::Object(map) = &mut v {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        map.insert("generated_at".into(), Value::from(secs));
    }
    v
}

fn emit(cli: &Cli, out: &Output) -> Result<()> {
    let text = serde_json::to_string_pretty(&stamped(&out.body))?;
    if let Some(path) = &cli.out {
        fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.json {
        println!("{text}");
    } else {
        println!("{}", out.summary);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::dispatch(&cli.command).and_then(|out| emit(&cli, &out).map(|()| out.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
