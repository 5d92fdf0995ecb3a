use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use lineshape::report::{render_csv, render_text, rows_from_results};
use lineshape::FitResult;
use serde::{Deserialize, Serialize};

use super::{create, open};
use crate::failure::{Classify, Outcome};
use crate::manifest::RunManifest;

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Fit documents written by `fit`, single FitResult JSONs, or arrays of them
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the table here instead of standard output
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ReportInput {
    Document { analytic: FitResult, lorentzian: FitResult },
    Many(Vec<FitResult>),
    One(Box<FitResult>),
}

#[derive(Serialize)]
struct ReportConfig {
    format: Format,
    rows: usize,
}

pub fn run(args: ReportArgs) -> Outcome<()> {
    let mut results = Vec::new();
    for path in &args.inputs {
        let input: ReportInput = lineshape::io::read_json(open(path)?)
            .with_context(|| format!("{} is not a fit document or FitResult", path.display()))
            .runtime()?;
        match input {
            ReportInput::Document { analytic, lorentzian } => results.extend([analytic, lorentzian]),
            ReportInput::Many(many) => results.extend(many),
            ReportInput::One(one) => results.push(*one),
        }
    }
    let rows = rows_from_results(&results);
    let table = match args.format {
        Format::Text => render_text(&rows),
        Format::Csv => render_csv(&rows),
    };

    match &args.output {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(table.as_bytes()).runtime()?;
            stdout.flush().runtime()?;
        }
        Some(path) => {
            let mut out = create(path)?;
            out.write_all(table.as_bytes()).runtime()?;
            out.flush().runtime()?;
            let config = ReportConfig {
                format: args.format,
                rows: rows.len(),
            };
            let manifest = args
                .inputs
                .iter()
                .fold(RunManifest::new("report", &config).runtime()?, |m, p| m.input(p));
            manifest.output(path).write_beside(path).runtime()?;
        }
    }
    Ok(())
}
