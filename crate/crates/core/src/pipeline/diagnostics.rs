use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use crate::error::Result;
use crate::geometry::Pixel;

/// Line-delimited `kind key=value ...` records, in emission order.
///
/// Timings are kept apart from the records so that the records of two runs
/// over the same inputs compare byte-for-byte.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    records: Vec<String>,
    timings: Vec<(String, Duration)>,
}

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, kind: &str, fields: &[(&str, String)]) {
        let mut line = kind.to_string();
        for (k, v) in fields {
            let _ = write!(line, " {k}={}", sanitize(v));
        }
        self.records.push(line);
    }

    pub fn time(&mut self, stage: &str, elapsed: Duration) {
        self.timings.push((stage.to_string(), elapsed));
    }

    pub fn records(&self) -> &[String] {
        &self.records
    }

    /// Records whose kind is `kind`.
    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.records
            .iter()
            .filter(move |r| r.split(' ').next() == Some(kind))
            .map(String::as_str)
    }

    pub fn timings(&self) -> &[(String, Duration)] {
        &self.timings
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    pub fn timings_text(&self) -> String {
        let mut s = String::new();
        for (stage, d) in &self.timings {
            let _ = writeln!(s, "timing stage={stage} ms={:.3}", d.as_secs_f64() * 1e3);
        }
        s
    }

    pub fn write(&self, records: &Path, timings: Option<&Path>) -> Result<()> {
        std::fs::write(records, self.to_text())?;
        if let Some(t) = timings {
            std::fs::write(t, self.timings_text())?;
        }
        Ok(())
    }
}

/// Value of `key` in a record line.
pub fn field<'a>(record: &'a str, key: &str) -> Option<&'a str> {
    record.split(' ').skip(1).find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn sanitize(v: &str) -> String {
    v.replace(|c: char| c.is_whitespace(), "_")
}

pub(crate) fn fmt_corners(c: &[Pixel; 4]) -> String {
    c.iter().map(|p| format!("{},{}", p.u, p.v)).collect::<Vec<_>>().join(";")
}

/// Inverse of the corner formatting used in records.
pub fn parse_corners(s: &str) -> Option<[Pixel; 4]> {
    let pts: Vec<Pixel> = s
        .split(';')
        .map(|p| {
            let (u, v) = p.split_once(',')?;
            Some(Pixel::new(u.parse().ok()?, v.parse().ok()?))
        })
        .collect::<Option<_>>()?;
    pts.try_into().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_are_single_lines() {
        let mut d = Diagnostics::new();
        d.record("error", &[("stage", "mask".into()), ("message", "two words\nand more".into())]);
        d.time("mask", Duration::from_millis(3));
        assert_eq!(d.to_text(), "error stage=mask message=two_words_and_more\n");
        assert_eq!(field(&d.records()[0], "stage"), Some("mask"));
        assert!(d.timings_text().starts_with("timing stage=mask ms=3"));
    }

    #[test]
    fn corner_format_round_trips() {
        let c = [Pixel::new(0.1, -2.0), Pixel::new(1e-17, 3.5), Pixel::new(640.0, 1.0 / 3.0), Pixel::new(7.0, 8.0)];
        assert_eq!(parse_corners(&fmt_corners(&c)), Some(c));
    }
}
