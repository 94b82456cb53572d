//! Cascade and density text files.
//!
//! A cascade file holds one or more cascades. Each starts with
//! `# source=<ids>` and `# horizon=<T>` header lines (plus `# nodes=<K>`),
//! followed by one `time,node,kind` line per event, `kind` being
//! `activate` or `recover`.

use std::io::{BufRead, Write};

use super::{Cascade, EmpiricalDensity, Event, EventKind};
use crate::error::{Error, Result};
use crate::textio::{self, fmt_num, parse_id, parse_num};

pub fn write_cascades<W: Write>(cascades: &[Cascade], mut w: W) -> Result<()> {
    for c in cascades {
        let ids: Vec<String> = c.sources.iter().map(|s| s.to_string()).collect();
        writeln!(w, "# source={}", ids.join(","))?;
        writeln!(w, "# horizon={}", fmt_num(c.horizon))?;
        writeln!(w, "# nodes={}", c.node_count)?;
        for e in &c.events {
            let kind = match e.kind {
                EventKind::Activate => "activate",
                EventKind::Recover => "recover",
            };
            writeln!(w, "{},{},{kind}", fmt_num(e.time), e.node)?;
        }
    }
    Ok(())
}

pub fn read_cascades<R: BufRead>(reader: R) -> Result<Vec<Cascade>> {
    let mut out: Vec<Cascade> = Vec::new();
    let mut pending_horizon = false;
    for line in textio::lines(reader)? {
        if line.is_comment() {
            let body = line.text.trim_start_matches('#').trim();
            if let Some(ids) = body.strip_prefix("source=") {
                let sources = ids
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_id(s, line.number))
                    .collect::<Result<Vec<_>>>()?;
                out.push(Cascade {
                    node_count: 0,
                    sources,
                    horizon: f64::NAN,
                    events: Vec::new(),
                });
                pending_horizon = true;
            } else if let Some(t) = body.strip_prefix("horizon=") {
                let c = out
                    .last_mut()
                    .ok_or_else(|| Error::format(line.number, "horizon before source header"))?;
                c.horizon = parse_num(t, line.number)?;
                pending_horizon = false;
            } else if let Some(k) = body.strip_prefix("nodes=") {
                let c = out
                    .last_mut()
                    .ok_or_else(|| Error::format(line.number, "nodes before source header"))?;
                c.node_count = parse_id(k, line.number)?;
            }
            continue;
        }
        if pending_horizon {
            return Err(Error::format(line.number, "missing `# horizon=` header"));
        }
        let c = out
            .last_mut()
            .ok_or_else(|| Error::format(line.number, "event before `# source=` header"))?;
        let fields = line.fields();
        if fields.len() != 3 {
            return Err(Error::format(line.number, "expected `time,node,kind`"));
        }
        let kind = match fields[2] {
            "activate" => EventKind::Activate,
            "recover" => EventKind::Recover,
            other => return Err(Error::format(line.number, format!("unknown event kind {other:?}"))),
        };
        let node = parse_id(fields[1], line.number)?;
        c.events.push(Event {
            time: parse_num(fields[0], line.number)?,
            node: u32::try_from(node).map_err(|_| Error::format(line.number, "node id too large"))?,
            kind,
        });
    }
    for c in &mut out {
        if c.node_count == 0 {
            let max_id = c.events.iter().map(|e| e.node as usize + 1).max().unwrap_or(0);
            c.node_count = max_id.max(c.sources.iter().map(|s| s + 1).max().unwrap_or(0));
        }
    }
    Ok(out)
}

/// `t,rho_0,...,rho_K` with one row per grid time.
pub fn write_density_csv<W: Write>(
    times: &[f64],
    rho: &[Vec<f64>],
    mut w: W,
    comment: Option<&str>,
) -> Result<()> {
    if let Some(c) = comment {
        writeln!(w, "# {c}")?;
    }
    let k = rho.first().map_or(0, |r| r.len());
    let mut header = vec!["t".to_string()];
    header.extend((0..k).map(|i| format!("rho_{i}")));
    writeln!(w, "{}", header.join(","))?;
    for (t, row) in times.iter().zip(rho) {
        let mut fields = vec![fmt_num(*t)];
        fields.extend(row.iter().map(|&p| fmt_num(p)));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

impl EmpiricalDensity {
    pub fn write_csv<W: Write>(&self, w: W, comment: Option<&str>) -> Result<()> {
        write_density_csv(&self.times, &self.rho, w, comment)
    }
}
