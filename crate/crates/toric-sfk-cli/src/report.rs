//! Aggregated verification reports. The timestamp lives in a header object
//! so two runs of the same configuration produce byte-identical `report`
//! bodies.

use serde::Serialize;
use serde_json::Value;
use std::path::Path;

#[derive(Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch; the only nondeterministic field.
    pub timestamp: u64,
}

impl Header {
    pub fn now() -> Header {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Header {
            tool: "toric-sfk",
            version: env!("CARGO_PKG_VERSION"),
            timestamp,
        }
    }
}

#[derive(Serialize)]
pub struct Suite {
    pub name: &'static str,
    pub pass: bool,
    pub details: Value,
}

#[derive(Serialize)]
pub struct Report {
    pub header: Header,
    pub body: Value,
}

/// Ordered suite collection; `finish` folds the overall verdict in.
#[derive(Default)]
pub struct SuiteSet {
    suites: Vec<Suite>,
}

impl SuiteSet {
    pub fn push(&mut self, name: &'static str, pass: bool, details: Value) {
        self.suites.push(Suite { name, pass, details });
    }

    pub fn all_pass(&self) -> bool {
        self.suites.iter().all(|s| s.pass)
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.suites.iter().find(|s| !s.pass).map(|s| s.name)
    }

    pub fn print_lines(&self) {
        for s in &self.suites {
            println!(
                "  {:<24} {}",
                s.name,
                if s.pass { "pass" } else { "FAIL" }
            );
        }
    }

    pub fn into_value(self, context: Value) -> Value {
        let pass = self.all_pass();
        serde_json::json!({
            "context": context,
            "suites": self.suites,
            "pass": pass,
        })
    }
}

/// Writes `{header, body}` as pretty JSON with a trailing newline.
pub fn write_report(path: &Path, body: Value) -> anyhow::Result<()> {
    let report = Report {
        header: Header::now(),
        body,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
