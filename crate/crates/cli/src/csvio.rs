//! Deterministic CSV output: a `#`-prefixed run manifest (tool, timestamp,
//! resolved config, convention flags) followed by an RFC-4180 table. All
//! floats carry 17 significant digits; two runs of the same config differ
//! only in the timestamp line and the wall_ms column.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

pub enum Field {
    Str(&'static str),
    Owned(String),
    F64(f64),
    U64(u64),
    Usize(usize),
    Bool(bool),
    Empty,
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Str(s) => (*s).into(),
            Field::Owned(s) => s.clone(),
            Field::F64(x) => fmt_f64(*x),
            Field::U64(v) => v.to_string(),
            Field::Usize(v) => v.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Empty => String::new(),
        }
    }
}

pub struct CsvWriter {
    out: Box<dyn Write>,
}

impl CsvWriter {
    pub fn create(
        path: &Path,
        subcommand: &str,
        config_json: &str,
        manifest: &[(&str, String)],
    ) -> Result<Self> {
        let file = std::fs::File::create(path)
            .with_context(|| format!("creating output file {}", path.display()))?;
        let mut out: Box<dyn Write> = Box::new(std::io::BufWriter::new(file));
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(out, "# fermitherm {} v{}", subcommand, env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# generated_unix: {stamp}")?;
        writeln!(out, "# config: {config_json}")?;
        for (k, v) in manifest {
            writeln!(out, "# {k} = {v}")?;
        }
        Ok(Self { out })
    }

    pub fn header(&mut self, cols: &[&str]) -> Result<()> {
        writeln!(self.out, "{}", cols.join(","))?;
        Ok(())
    }

    pub fn row(&mut self, fields: &[Field]) -> Result<()> {
        let line: Vec<String> = fields.iter().map(Field::render).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
