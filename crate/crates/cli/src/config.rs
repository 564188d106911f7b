use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use hkorbit_core::algebra::AlgebraContext;

use crate::suites::{checks, Suite};
use crate::CliError;

/// Everything that determines a verification run. Echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub case: String,
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    pub trials: u64,
    pub seed: u64,
    /// Effective tolerance of every selected check, by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub suites: Vec<String>,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn new(n: usize, k: usize, kappa: f64, trials: u64, seed: u64) -> Self {
        let mut cfg = RunConfig {
            case: "grassmannian".into(),
            n,
            k,
            kappa,
            trials,
            seed,
            tolerances: BTreeMap::new(),
            suites: Suite::ALL.iter().map(|s| s.name().to_string()).collect(),
            out: None,
        };
        cfg.reset_tolerances();
        cfg
    }

    /// Restricts the run to the named suites.
    pub fn with_suites(mut self, names: &[String]) -> Result<Self, CliError> {
        for name in names {
            Suite::parse(name).ok_or_else(|| CliError::Config(format!("unknown suite `{name}`")))?;
        }
        self.suites = names.to_vec();
        self.reset_tolerances();
        Ok(self)
    }

    /// Overrides tolerances. Dashes in names are read as underscores.
    pub fn with_tolerances(mut self, overrides: &[(String, f64)]) -> Result<Self, CliError> {
        for (name, value) in overrides {
            let key = name.replace('-', "_");
            match self.tolerances.get_mut(&key) {
                Some(slot) => *slot = *value,
                None => return Err(CliError::Config(format!("unknown tolerance `{name}` for the selected suites"))),
            }
        }
        Ok(self)
    }

    fn reset_tolerances(&mut self) {
        self.tolerances = self
            .selected()
            .iter()
            .flat_map(|s| checks(*s).iter().map(|c| (c.name.to_string(), c.tolerance)))
            .collect();
    }

    pub fn selected(&self) -> Vec<Suite> {
        self.suites.iter().filter_map(|s| Suite::parse(s)).collect()
    }

    pub fn context(&self) -> Result<AlgebraContext, CliError> {
        if self.case != "grassmannian" {
            return Err(CliError::Config(format!("unsupported case `{}`", self.case)));
        }
        for name in &self.suites {
            Suite::parse(name).ok_or_else(|| CliError::Config(format!("unknown suite `{name}`")))?;
        }
        Ok(AlgebraContext::new(self.n, self.k, self.kappa)?)
    }
}

/// Splits `--tol-<name> <value>` and `--tol-<name>=<value>` out of an
/// argument list, since their names are open-ended.
pub fn extract_tolerances(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, f64)>), CliError> {
    let mut rest = Vec::new();
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol-") else {
            rest.push(arg);
            continue;
        };
        let (name, raw) = match spec.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Config(format!("missing value for --tol-{spec}")))?;
                (spec.to_string(), v)
            }
        };
        let value: f64 = raw
            .parse()
            .map_err(|_| CliError::Config(format!("bad tolerance `{raw}` for --tol-{name}")))?;
        tols.push((name, value));
    }
    Ok((rest, tols))
}
