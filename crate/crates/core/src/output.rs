//! Deterministic text formats shared by the exporters.

use std::io::Write;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parameter record written as the first line of every CSV: `# k=v k=v ...`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvHeader {
    entries: Vec<(String, String)>,
}

impl CsvHeader {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_f64(self, key: &str, value: f64) -> Self {
        self.with(key, fmt_f64(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        let line: Vec<String> = self.entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# {}", line.join(" "))
    }

    /// Parses a line produced by [`CsvHeader::write`].
    pub fn parse(line: &str) -> Option<Self> {
        let body = line.strip_prefix('#')?.trim();
        let entries = body
            .split_whitespace()
            .filter_map(|kv| kv.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())))
            .collect();
        Some(Self { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_round_trip() {
        let h = CsvHeader::new().with_f64("t", 7.65).with("convention", "wall-anchored");
        let mut buf = Vec::new();
        h.write(&mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with("# t=7.6500000000000004e0 convention=wall-anchored"));
        assert_eq!(CsvHeader::parse(line.trim_end()).unwrap(), h);
    }

    proptest! {
        #[test]
        fn formatted_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let s = fmt_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
