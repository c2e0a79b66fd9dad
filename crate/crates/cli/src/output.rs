//! Text output shared by the subcommands.
//!
//! Every output starts with `#` lines: the command and schema version, the
//! resolved configuration, and the seed. Numbers are printed with six
//! decimals so that outputs are byte-stable.

use std::fmt::Write as _;

/// Bumped whenever a column or key changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Six-decimal rendering; `NA` for non-finite values, no negative zero.
pub fn fx(v: f64) -> String {
    if !v.is_finite() {
        return "NA".into();
    }
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

pub struct Document {
    text: String,
}

impl Document {
    pub fn new(command: &str, config: &str, seed: Option<u64>) -> Self {
        let mut text = String::new();
        writeln!(text, "# asymqkd {command} schema={SCHEMA_VERSION}").unwrap();
        writeln!(text, "# config: {config}").unwrap();
        match seed {
            Some(s) => writeln!(text, "# seed: {s}").unwrap(),
            None => writeln!(text, "# seed: none").unwrap(),
        }
        Self { text }
    }

    pub fn comment(&mut self, line: &str) {
        writeln!(self.text, "# {line}").unwrap();
    }

    /// Appends CSV rows; the first row is the header.
    pub fn csv<I, R, S>(&mut self, rows: I)
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut w = csv::WriterBuilder::new()
            .flexible(false)
            .from_writer(Vec::new());
        for row in rows {
            w.write_record(row).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        self.text
            .push_str(std::str::from_utf8(&bytes).expect("utf-8 input"));
    }

    pub fn line(&mut self, line: &str) {
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Canonical q-form of a channel.
pub fn channel_config(ch: &asymqkd_core::PauliRates) -> String {
    format!(
        "q_i={} q_x={} q_y={} q_z={}",
        fx(ch.q_i()),
        fx(ch.q_x()),
        fx(ch.q_y()),
        fx(ch.q_z())
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_decimals() {
        assert_eq!(fx(0.5), "0.500000");
        assert_eq!(fx(-1e-9), "0.000000");
        assert_eq!(fx(f64::NAN), "NA");
        assert_eq!(fx(0.1234567), "0.123457");
    }

    #[test]
    fn document_layout() {
        let mut d = Document::new("demo", "a=1", Some(3));
        d.csv([["x", "y"], ["1", "2"]]);
        assert_eq!(
            d.finish(),
            "# asymqkd demo schema=1\n# config: a=1\n# seed: 3\nx,y\n1,2\n"
        );
    }
}
