//! Reference evaluator for the line protocol: answers every request with
//! `loss = max_i |x_i|`, regardless of budget.
//!
//! `--fail <mode>` makes it misbehave on the request with id `--fail-at`
//! (default: the first request), for exercising error handling:
//! `nan` (loss "NaN"), `garbage` (a non-JSON line), `wrong-id`, `sleep`
//! (never answers), `exit` (terminates).

use std::io::{self, BufRead, Write};
use std::time::Duration;

use anyhow::{bail, Context};
use clap::Parser;
use serde::Deserialize;

#[derive(Parser)]
struct Args {
    #[arg(long)]
    fail: Option<String>,
    #[arg(long)]
    fail_at: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Request {
    id: u64,
    point: Vec<f64>,
    budget: u64,
    prior_budget: u64,
}

fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut first = true;
    for line in stdin.lock().lines() {
        let line = line.context("reading request")?;
        let req: Request = serde_json::from_str(&line).with_context(|| format!("bad request {line:?}"))?;
        if req.budget <= req.prior_budget {
            bail!("request {} does not increase the budget", req.id);
        }
        let trigger = match args.fail_at {
            Some(id) => id == req.id,
            None => first,
        };
        first = false;
        let loss = req.point.iter().map(|v| v.abs()).fold(0.0, f64::max);
        match args.fail.as_deref().filter(|_| trigger) {
            None => writeln!(out, "{}", serde_json::json!({"id": req.id, "loss": loss}))?,
            Some("nan") => writeln!(out, "{}", serde_json::json!({"id": req.id, "loss": "NaN"}))?,
            Some("garbage") => writeln!(out, "loss is about {loss}")?,
            Some("wrong-id") => writeln!(out, "{}", serde_json::json!({"id": req.id + 1, "loss": loss}))?,
            Some("sleep") => std::thread::sleep(Duration::from_secs(3600)),
            Some("exit") => std::process::exit(3),
            Some(other) => bail!("unknown failure mode {other}"),
        }
        out.flush()?;
    }
    Ok(())
}
