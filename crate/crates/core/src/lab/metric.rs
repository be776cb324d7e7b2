//! Loss selection for pairwise experiments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::loss::KernelSpec;

/// Kernel bandwidth, either fixed or equal to the qubit count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    Qubits,
}

impl Bandwidth {
    pub fn value(&self, n: u32) -> f64 {
        match *self {
            Bandwidth::Fixed(s) => s,
            Bandwidth::Qubits => n as f64,
        }
    }
}

/// A loss between two instances. Text forms: `sd`, `l1`, `tvd`,
/// `mmd2:<sigma>` and `mmd2:n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MetricSpec {
    Sd,
    Mmd2(Bandwidth),
    L1,
    Tvd,
}

impl MetricSpec {
    /// Column label without the bandwidth.
    pub fn label(&self) -> &'static str {
        match self {
            MetricSpec::Sd => "sd",
            MetricSpec::Mmd2(_) => "mmd2",
            MetricSpec::L1 => "l1",
            MetricSpec::Tvd => "tvd",
        }
    }

    /// Bandwidth at `n` qubits, for kernel losses.
    pub fn sigma(&self, n: u32) -> Option<f64> {
        match self {
            MetricSpec::Mmd2(b) => Some(b.value(n)),
            _ => None,
        }
    }

    pub(crate) fn kernel(&self, n: u32) -> Result<Option<KernelSpec>> {
        self.sigma(n).map(KernelSpec::new).transpose()
    }

    /// Builds a metric from a bare name and an optional bandwidth, as given
    /// on the command line (`--metric mmd2 --sigma 1`).
    pub fn from_parts(name: &str, sigma: Option<&str>) -> Result<Self> {
        match (name, sigma) {
            ("mmd2", Some(s)) => format!("mmd2:{s}").parse(),
            ("mmd2", None) => domain("metric mmd2 needs a bandwidth"),
            (other, _) => other.parse(),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::Mmd2(Bandwidth::Fixed(s)) => write!(f, "mmd2:{s}"),
            MetricSpec::Mmd2(Bandwidth::Qubits) => write!(f, "mmd2:n"),
            other => write!(f, "{}", other.label()),
        }
    }
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Ok(match text.trim() {
            "sd" => MetricSpec::Sd,
            "l1" => MetricSpec::L1,
            "tvd" => MetricSpec::Tvd,
            "mmd2:n" => MetricSpec::Mmd2(Bandwidth::Qubits),
            t => match t.strip_prefix("mmd2:") {
                Some(s) => {
                    let sigma: f64 = s.parse().map_err(|_| Error::Domain(format!("invalid bandwidth '{s}'")))?;
                    KernelSpec::new(sigma)?;
                    MetricSpec::Mmd2(Bandwidth::Fixed(sigma))
                }
                None => return domain(format!("unknown metric '{t}'")),
            },
        })
    }
}

impl From<MetricSpec> for String {
    fn from(m: MetricSpec) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for MetricSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}
