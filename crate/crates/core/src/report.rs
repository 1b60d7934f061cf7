//! Plain-text reports with a fixed layout.
//!
//! A report is a list of `[section]` blocks of `key = value` lines, written
//! in insertion order. Reals use `{:.16e}` (17 significant digits), so two
//! runs with the same inputs produce the same bytes.

use std::fmt::Write as _;

use crate::sampling::Stratum;

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn reals(xs: &[f64]) -> String {
    xs.iter().map(|&x| real(x)).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Section {
    name: String,
    entries: Vec<(String, String)>,
}

impl Section {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn text(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string().replace('\n', " ");
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn real(&mut self, key: &str, x: f64) -> &mut Self {
        self.text(key, real(x))
    }

    pub fn reals(&mut self, key: &str, xs: &[f64]) -> &mut Self {
        self.text(key, reals(xs))
    }

    pub fn opt_real(&mut self, key: &str, x: Option<f64>) -> &mut Self {
        match x {
            Some(x) => self.real(key, x),
            None => self.text(key, "none"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    sections: Vec<Section>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Section {
        self.sections.push(Section {
            name: name.to_string(),
            entries: Vec::new(),
        });
        self.sections.last_mut().unwrap()
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn find(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Adds a `name` section with one line per stratum.
    pub fn strata(&mut self, name: &str, strata: &[Stratum]) {
        let s = self.section(name);
        for (k, st) in strata.iter().enumerate() {
            s.text(
                &format!("k{k:02}"),
                format!(
                    "scale = {}, pairs = {}, max = {}",
                    real(st.scale),
                    st.pairs,
                    real(st.max_quotient)
                ),
            );
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", s.name);
            for (k, v) in &s.entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}
