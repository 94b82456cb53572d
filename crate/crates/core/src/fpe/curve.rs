use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textio::{fmt_num, lines, parse_num};

/// How an influence curve was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `fpe-dist`, `fpe-tree`, `monte-carlo` or `exact`.
    pub method: String,
    pub node_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cascades: Option<usize>,
}

impl Provenance {
    pub fn new(method: &str, node_count: usize) -> Self {
        Provenance {
            method: method.to_string(),
            node_count,
            tree_width: None,
            solver: None,
            step: None,
            seed: None,
            cascades: None,
        }
    }

    pub fn monte_carlo(node_count: usize, cascades: usize, seed: Option<u64>) -> Self {
        Provenance {
            cascades: Some(cascades),
            seed,
            ..Provenance::new("monte-carlo", node_count)
        }
    }
}

/// Expected active count `sigma(t)` on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceCurve {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub provenance: Provenance,
}

impl InfluenceCurve {
    pub fn node_count(&self) -> usize {
        self.provenance.node_count
    }

    /// Checks the grid is nondecreasing and `0 <= sigma <= K` (up to `1e-9`).
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.sigma.len() || self.times.is_empty() {
            return Err(Error::Domain("curve needs one sigma per time".into()));
        }
        // written negated so NaN times are rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if self.times.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Domain("curve times must be nondecreasing".into()));
        }
        let k = self.node_count() as f64;
        if let Some(s) = self.sigma.iter().find(|&&s| !(s >= -1e-9 && s <= k + 1e-9)) {
            return Err(Error::Domain(format!("influence {s} outside [0, {k}]")));
        }
        Ok(())
    }
}

/// Writes `t,sigma` rows preceded by `# nodes=K`, `# provenance=<json>` and
/// any extra comment lines.
pub fn write_curve<W: Write>(curve: &InfluenceCurve, mut w: W, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "# nodes={}", curve.node_count())?;
    writeln!(w, "# provenance={}", serde_json::to_string(&curve.provenance)?)?;
    writeln!(w, "t,sigma")?;
    for (t, s) in curve.times.iter().zip(&curve.sigma) {
        writeln!(w, "{},{}", fmt_num(*t), fmt_num(*s))?;
    }
    Ok(())
}

pub fn read_curve<R: BufRead>(reader: R) -> Result<InfluenceCurve> {
    let mut times = Vec::new();
    let mut sigma = Vec::new();
    let mut nodes = None;
    let mut provenance: Option<Provenance> = None;
    for line in lines(reader)? {
        if line.is_comment() {
            let body = line.text.trim_start_matches('#').trim();
            if let Some(v) = body.strip_prefix("nodes=") {
                nodes = Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::format(line.number, format!("bad node count {v:?}")))?,
                );
            } else if let Some(v) = body.strip_prefix("provenance=") {
                provenance = Some(
                    serde_json::from_str(v)
                        .map_err(|e| Error::format(line.number, format!("bad provenance: {e}")))?,
                );
            }
            continue;
        }
        let fields = line.fields();
        if fields == ["t", "sigma"] {
            continue;
        }
        if fields.len() != 2 {
            return Err(Error::format(line.number, "expected t,sigma"));
        }
        times.push(parse_num(fields[0], line.number)?);
        sigma.push(parse_num(fields[1], line.number)?);
    }
    let mut provenance = match (provenance, nodes) {
        (Some(p), _) => p,
        (None, Some(k)) => Provenance::new("unknown", k),
        (None, None) => return Err(Error::format(0, "curve lacks a '# nodes=' header")),
    };
    if let Some(k) = nodes {
        provenance.node_count = k;
    }
    let curve = InfluenceCurve {
        times,
        sigma,
        provenance,
    };
    curve.validate()?;
    Ok(curve)
}
