// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use electrodiffusion::verify::{run as run_suite, Check, Suite};
use serde::Serialize;

use crate::output::{Document, Run};
use crate::Outcome;

pub const SCHEMA: &str = "electrodiffusion.verify.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteArg {
    Group,
    Residuals,
    Reservoir,
    Airy,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Group => Suite::Group,
            SuiteArg::Residuals => Suite::Residuals,
            SuiteArg::Reservoir => Suite::Reservoir,
            SuiteArg::Airy => Suite::Airy,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    /// Also write the table as JSON to this path
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerifyConfig {
    suite: SuiteArg,
}

#[derive(Serialize)]
struct VerifyResult<'a> {
    passed: usize,
    failed: usize,
    checks: &'a [Check],
}

pub fn table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!(
            "{verdict}  {:<9}  {:<width$}  {:>10.3e}  (tol {:.0e})\n",
            c.suite, c.name, c.value, c.tolerance
        ));
    }
    s
}

pub fn run(args: VerifyArgs) -> Result<Outcome> {
    let mut run = Run::start(None);
    let checks = run_suite(args.suite.into());
    print!("{}", table(&checks));
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {} failed", checks.len(), failed);
    if let Some(out) = &args.out {
        let result = VerifyResult { passed: checks.len() - failed, failed, checks: &checks };
        run.json(out, &Document { schema: SCHEMA, config: &VerifyConfig { suite: args.suite }, result: &result })?;
        run.finish(out)?;
    }
    Ok(if failed == 0 { Outcome::Success } else { Outcome::VerifyFailed })
}
