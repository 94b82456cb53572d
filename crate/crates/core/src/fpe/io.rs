//! Rate-profile CSV: `t,k,q,r` rows under `# nodes=K` and
//! `# profile=constant|sampled` headers. An empty field marks an
//! undefined rate; `q_K` and `r_0` are written as zero.

use std::io::{BufRead, Write};

use super::{RateProfile, RateSeries};
use crate::error::{Error, Result};
use crate::textio::{fmt_num, lines, parse_id, parse_num};

fn cell(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn write_header<W: Write>(w: &mut W, k: usize, kind: &str, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "# nodes={k}")?;
    writeln!(w, "# profile={kind}")?;
    writeln!(w, "t,k,q,r")?;
    Ok(())
}

fn write_rows<W: Write>(w: &mut W, t: f64, q: &[Option<f64>], r: Option<&[Option<f64>]>) -> Result<()> {
    let k = q.len();
    for j in 0..=k {
        let qj = if j < k { q[j] } else { Some(0.0) };
        let rj = match r {
            Some(r) if j > 0 => r[j - 1],
            _ => Some(0.0),
        };
        writeln!(w, "{},{j},{},{}", fmt_num(t), cell(qj), cell(rj))?;
    }
    Ok(())
}

/// Writes a profile; sampled profiles are written at their sample times.
pub fn write_rate_profile<W: Write>(profile: &RateProfile, mut w: W, comments: &[String]) -> Result<()> {
    let k = profile.node_count();
    if let Some(q) = profile.constant_q() {
        write_header(&mut w, k, "constant", comments)?;
        let q: Vec<Option<f64>> = q.iter().copied().map(Some).collect();
        let r: Option<Vec<Option<f64>>> = profile.constant_r().map(|r| r.iter().copied().map(Some).collect());
        return write_rows(&mut w, 0.0, &q, r.as_deref());
    }
    write_header(&mut w, k, "sampled", comments)?;
    let times = profile.sample_times().expect("sampled profile");
    let mut q = vec![0.0; k];
    let mut r = vec![0.0; k];
    for &t in times {
        profile.rates_at(t, &mut q, &mut r);
        let qs: Vec<Option<f64>> = q.iter().copied().map(Some).collect();
        let rs: Vec<Option<f64>> = r.iter().copied().map(Some).collect();
        write_rows(&mut w, t, &qs, profile.has_recovery().then_some(rs.as_slice()))?;
    }
    Ok(())
}

pub fn write_rate_series<W: Write>(series: &RateSeries, mut w: W, comments: &[String]) -> Result<()> {
    write_header(&mut w, series.node_count(), "sampled", comments)?;
    for (m, &t) in series.times.iter().enumerate() {
        write_rows(&mut w, t, &series.q[m], series.r.as_ref().map(|r| r[m].as_slice()))?;
    }
    Ok(())
}

/// Reads either layout; undefined cells are filled as in [`RateSeries::to_profile`].
pub fn read_rate_profile<R: BufRead>(reader: R) -> Result<RateProfile> {
    let mut nodes = None;
    let mut constant = false;
    let mut times: Vec<f64> = Vec::new();
    let mut q: Vec<Vec<Option<f64>>> = Vec::new();
    let mut r: Vec<Vec<Option<f64>>> = Vec::new();
    for line in lines(reader)? {
        if line.is_comment() {
            let body = line.text.trim_start_matches('#').trim();
            if let Some(v) = body.strip_prefix("nodes=") {
                nodes = Some(parse_id(v, line.number)?);
            } else if let Some(v) = body.strip_prefix("profile=") {
                constant = v.trim() == "constant";
            }
            continue;
        }
        let f = line.fields();
        if f == ["t", "k", "q", "r"] {
            continue;
        }
        let Some(k) = nodes else {
            return Err(Error::format(line.number, "rates file lacks a '# nodes=' header"));
        };
        if f.len() != 4 {
            return Err(Error::format(line.number, "expected t,k,q,r"));
        }
        let t = parse_num(f[0], line.number)?;
        let j = parse_id(f[1], line.number)?;
        if j > k {
            return Err(Error::format(line.number, format!("state {j} exceeds node count {k}")));
        }
        if times.last() != Some(&t) {
            if times.last().is_some_and(|&last| t < last) {
                return Err(Error::format(line.number, "times must be nondecreasing"));
            }
            times.push(t);
            q.push(vec![None; k]);
            r.push(vec![None; k]);
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse_num(s, line.number).map(Some)
            }
        };
        let m = times.len() - 1;
        if j < k {
            q[m][j] = opt(f[2])?;
        }
        if j > 0 {
            r[m][j - 1] = opt(f[3])?;
        }
    }
    if times.is_empty() {
        return Err(Error::format(0, "rates file has no rows"));
    }
    let has_r = r.iter().flatten().any(|v| v.is_some_and(|v| v != 0.0));
    if constant {
        let q: Vec<f64> = q[0].iter().map(|v| v.unwrap_or(0.0)).collect();
        return if has_r {
            RateProfile::constant_with_recovery(q, r[0].iter().map(|v| v.unwrap_or(0.0)).collect())
        } else {
            RateProfile::constant(q)
        };
    }
    RateSeries {
        times,
        q,
        r: has_r.then_some(r),
    }
    .to_profile()
}
