//! Plain-text histogram and query-set files.
//!
//! Histogram: a header line `domain_lo domain_hi bin_count`, then one count
//! per line. Query set: one query per line, whitespace-separated weights.
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{Histogram, LinearQuery};
use crate::error::{Error, Result};

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::ConfigParse {
        line,
        message: format!("`{tok}` is not a number"),
    })
}

pub fn parse_histogram(text: &str) -> Result<Histogram> {
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or(Error::ConfigParse {
        line: 1,
        message: "missing header `domain_lo domain_hi bin_count`".into(),
    })?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 3 {
        return Err(Error::ConfigParse {
            line: hline,
            message: "header must be `domain_lo domain_hi bin_count`".into(),
        });
    }
    let lo: f64 = parse_num(hline, toks[0])?;
    let hi: f64 = parse_num(hline, toks[1])?;
    let bins: usize = parse_num(hline, toks[2])?;
    let counts = lines.map(|(n, l)| parse_num::<f64>(n, l)).collect::<Result<Vec<_>>>()?;
    if counts.len() != bins {
        return Err(Error::InvalidParameter(format!(
            "header declares {bins} bins but {} counts follow",
            counts.len()
        )));
    }
    Histogram::new(lo, hi, counts)
}

pub fn parse_queries(text: &str) -> Result<Vec<LinearQuery>> {
    data_lines(text)
        .map(|(n, l)| {
            let w = l.split_whitespace().map(|t| parse_num::<f64>(n, t)).collect::<Result<Vec<_>>>()?;
            LinearQuery::new(w)
        })
        .collect()
}

pub fn load_histogram(path: &Path) -> Result<Histogram> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_histogram(&text)
}

pub fn load_queries(path: &Path) -> Result<Vec<LinearQuery>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_queries(&text)
}

pub fn write_histogram(h: &Histogram, path: &Path) -> Result<()> {
    let mut s = format!("{} {} {}\n", h.domain_lo(), h.domain_hi(), h.bin_count());
    for c in h.counts() {
        let _ = writeln!(s, "{c}");
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_histogram_file() {
        let h = parse_histogram("# speeds\n0 100 4\n1\n2.5\n0\n3\n").unwrap();
        assert_eq!(h.bin_count(), 4);
        assert_eq!(h.counts(), &[1.0, 2.5, 0.0, 3.0]);
        assert!(parse_histogram("0 100 3\n1\n2\n").is_err());
        assert!(matches!(parse_histogram("0 100 x\n"), Err(Error::ConfigParse { line: 1, .. })));
    }

    #[test]
    fn parses_queries() {
        let qs = parse_queries("1 0 0\n0 1 -1\n").unwrap();
        assert_eq!(qs.len(), 2);
        assert!(parse_queries("2 0\n").is_err());
    }

    #[test]
    fn histogram_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.txt");
        let h = Histogram::new(0.0, 1000.0, vec![3.0, 0.5, 7.25]).unwrap();
        write_histogram(&h, &p).unwrap();
        assert_eq!(load_histogram(&p).unwrap(), h);
    }
}
