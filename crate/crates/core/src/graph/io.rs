//! Edge-list and node-attribute text formats.
//!
//! Edge list: one `src,dst,rate` per line, 0-based ids, `#` comment lines.
//! A `# nodes=<K>` comment, when present, fixes the node count; otherwise
//! it is one more than the largest id seen. Node attributes: `node,beta,gamma`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufRead, Write};
use std::path::Path;

use super::PropagationNetwork;
use crate::error::{Error, Result};
use crate::textio::{self, fmt_num, parse_id, parse_num};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeList {
    pub node_count: Option<usize>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    pub fn inferred_node_count(&self) -> usize {
        let max_id = self.edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(0);
        self.node_count.unwrap_or(max_id).max(max_id)
    }
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<EdgeList> {
    let mut list = EdgeList::default();
    let mut seen = HashSet::new();
    for line in textio::lines(reader)? {
        if line.is_comment() {
            if let Some(k) = line.text.trim_start_matches('#').trim().strip_prefix("nodes=") {
                list.node_count = Some(parse_id(k, line.number)?);
            }
            continue;
        }
        let fields = line.fields();
        if fields == ["src", "dst", "rate"] {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::format(line.number, "expected `src,dst,rate`"));
        }
        let i = parse_id(fields[0], line.number)?;
        let j = parse_id(fields[1], line.number)?;
        let rate = parse_num(fields[2], line.number)?;
        if i == j {
            return Err(Error::format(line.number, format!("self-loop on node {i}")));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::format(line.number, format!("rate must be > 0, got {rate}")));
        }
        if !seen.insert((i, j)) {
            return Err(Error::format(line.number, format!("duplicate edge ({i},{j})")));
        }
        list.edges.push((i, j, rate));
    }
    if let Some(k) = list.node_count {
        if let Some(&(i, j, _)) = list.edges.iter().find(|&&(i, j, _)| i >= k || j >= k) {
            return Err(Error::Domain(format!("edge ({i},{j}) outside declared {k} nodes")));
        }
    }
    Ok(list)
}

/// Returns `(beta, gamma)` vectors of length `node_count`; unlisted nodes get zeros.
pub fn parse_node_attributes<R: BufRead>(
    reader: R,
    node_count: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut beta = vec![0.0; node_count];
    let mut gamma = vec![0.0; node_count];
    for line in textio::lines(reader)? {
        if line.is_comment() {
            continue;
        }
        let fields = line.fields();
        if fields == ["node", "beta", "gamma"] {
            continue;
        }
        if fields.len() != 3 {
            return Err(Error::format(line.number, "expected `node,beta,gamma`"));
        }
        let i = parse_id(fields[0], line.number)?;
        if i >= node_count {
            return Err(Error::format(line.number, format!("node {i} out of range")));
        }
        beta[i] = parse_num(fields[1], line.number)?;
        gamma[i] = parse_num(fields[2], line.number)?;
        if beta[i] < 0.0 || gamma[i] < 0.0 {
            return Err(Error::format(line.number, "rates must be nonnegative"));
        }
    }
    Ok((beta, gamma))
}

pub fn read_network(edges: &Path, attributes: Option<&Path>) -> Result<PropagationNetwork> {
    let list = parse_edge_list(BufReader::new(File::open(edges)?))?;
    let mut node_count = list.inferred_node_count();
    let attrs = match attributes {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            // attribute files may mention isolated nodes beyond the edge list
            let max_id = textio::lines(text.as_bytes())?
                .iter()
                .filter(|l| !l.is_comment())
                .filter_map(|l| l.fields().first().and_then(|f| f.parse::<usize>().ok()))
                .map(|i| i + 1)
                .max()
                .unwrap_or(0);
            if list.node_count.is_none() {
                node_count = node_count.max(max_id);
            }
            Some(parse_node_attributes(text.as_bytes(), node_count)?)
        }
        None => None,
    };
    let mut net = PropagationNetwork::from_edges(node_count, list.edges)?;
    if let Some((beta, gamma)) = attrs {
        net = net.with_self_rates(beta)?.with_recovery_rates(gamma)?;
    }
    Ok(net)
}

/// Writes `# nodes=K`, any extra comment lines, then one edge per line.
pub fn write_edge_list<W: Write>(net: &PropagationNetwork, mut w: W, comments: &[String]) -> Result<()> {
    writeln!(w, "# nodes={}", net.node_count())?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    for (i, j, a) in net.edges() {
        writeln!(w, "{i},{j},{}", fmt_num(a))?;
    }
    Ok(())
}

pub fn write_node_attributes<W: Write>(net: &PropagationNetwork, mut w: W) -> Result<()> {
    writeln!(w, "node,beta,gamma")?;
    for i in 0..net.node_count() {
        writeln!(
            w,
            "{i},{},{}",
            fmt_num(net.self_rate(i)),
            fmt_num(net.recovery_rate(i))
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_headers_and_whitespace() {
        let text = "# nodes=5\n# generated\nsrc,dst,rate\n0, 1 ,0.5\n\n3,4,1e-1\n";
        let list = parse_edge_list(text.as_bytes()).unwrap();
        assert_eq!(list.node_count, Some(5));
        assert_eq!(list.edges, vec![(0, 1, 0.5), (3, 4, 0.1)]);
    }

    #[test]
    fn duplicate_edge_is_a_format_error() {
        let err = parse_edge_list("0,1,0.5\n1,2,0.1\n0,1,0.2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 3, .. }), "{err}");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = parse_edge_list("0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
        let err = parse_edge_list("# x\n0,1,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
        let err = parse_edge_list("0,1,-1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }

    #[test]
    fn write_then_read_preserves_network() {
        let net = PropagationNetwork::from_edges(6, [(0, 1, 0.1), (4, 2, 1.0 / 3.0)])
            .unwrap()
            .with_self_rates(vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.25])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("net.csv");
        let a = dir.path().join("attrs.csv");
        write_edge_list(&net, File::create(&e).unwrap(), &["seed=1".into()]).unwrap();
        write_node_attributes(&net, File::create(&a).unwrap()).unwrap();
        let back = read_network(&e, Some(&a)).unwrap();
        assert_eq!(back, net);
    }
}
