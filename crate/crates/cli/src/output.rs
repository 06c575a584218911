//! Artifact files: comment header, `.partial` while running, renamed on success.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub manifest_sha256: String,
    /// Measure (or barrier operator) JSON.
    pub measure: serde_json::Value,
}

impl Header {
    fn comment_lines(&self) -> String {
        format!(
            "# {} {}\n# command: {}\n# manifest_sha256: {}\n# measure: {}\n",
            self.tool, self.version, self.command, self.manifest_sha256, self.measure
        )
    }
}

/// Fixed 17-significant-digit rendering, so identical runs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pass/fail of one quantity against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    header: &'a Header,
    result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<&'a [Check]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
}

pub struct Artifacts {
    dir: PathBuf,
    header: Header,
    pending: Vec<PathBuf>,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, header: Header) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), header, pending: Vec::new(), written: Vec::new() })
    }

    fn partial(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.partial"))
    }

    /// Opens `name.partial` with the header, before the computation runs.
    pub fn begin(&mut self, name: &str) -> std::io::Result<()> {
        let path = self.partial(name);
        if name.ends_with(".csv") {
            fs::write(&path, self.header.comment_lines())?;
        } else {
            fs::write(&path, serde_json::to_string_pretty(&serde_json::json!({ "header": &self.header }))?)?;
        }
        self.pending.push(self.dir.join(name));
        Ok(())
    }

    fn commit(&mut self, name: &str, body: &[u8]) -> std::io::Result<()> {
        let target = self.dir.join(name);
        if !self.pending.contains(&target) {
            self.begin(name)?;
        }
        let partial = self.partial(name);
        fs::write(&partial, body)?;
        fs::rename(&partial, &target)?;
        self.pending.retain(|p| p != &target);
        self.written.push(target);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(self.header.comment_lines().into_bytes());
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r)?;
        }
        let body = w.into_inner().map_err(|e| e.into_error())?;
        self.commit(name, &body)
    }

    /// Summary JSON; the header is the first field.
    pub fn json<T: Serialize>(&mut self, name: &str, result: T, checks: Option<&[Check]>) -> std::io::Result<()> {
        let pass = checks.map(|c| c.iter().all(|c| c.pass));
        let summary = Summary { header: &self.header, result, checks, pass };
        let mut body = serde_json::to_vec_pretty(&summary)?;
        body.push(b'\n');
        self.commit(name, &body)
    }

    /// Appends the failure to every unfinished `.partial` file.
    pub fn abandon(&self, reason: &str) {
        for p in self.pending.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
            let partial = PathBuf::from(format!("{}.partial", p.display()));
            if let Ok(mut f) = fs::OpenOptions::new().append(true).open(&partial) {
                let _ = writeln!(f, "\n# failed: {reason}");
            }
        }
    }
}
