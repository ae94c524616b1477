//! CSV documents with a `#` provenance header.

use std::fmt::Write as _;

pub struct Csv {
    text: String,
}

impl Csv {
    /// Starts a document with the tool version, the command line and the
    /// scenario hash.
    pub fn new(command: &str, scenario: &str) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# mhdpol {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# command: {command}");
        let _ = writeln!(text, "# scenario: {scenario}");
        Self { text }
    }

    pub fn comment(&mut self, key: &str, value: &str) {
        let _ = writeln!(self.text, "# {key}: {value}");
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.text.push_str(&names.join(","));
        self.text.push('\n');
    }

    /// Writes one row at 17 significant digits.
    pub fn row(&mut self, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{v:.16e}");
        }
        self.text.push('\n');
    }

    pub fn raw(&mut self, body: &str) {
        self.text.push_str(body);
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
