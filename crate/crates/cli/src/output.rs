//! Result files: CSV tables prefixed by a `#` header holding the resolved
//! scenario and seed, plus one JSON manifest per run.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cranopt::scenario::ScenarioFile;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub struct RunOutput {
    dir: PathBuf,
    command: &'static str,
    header: String,
    files: Vec<String>,
}

impl RunOutput {
    pub fn create(
        dir: &Path,
        command: &'static str,
        scenario: &ScenarioFile,
        threads: usize,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut header = format!(
            "# cranopt {} {command}\n# threads = {threads} (results do not depend on it)\n# ga.seed = {}\n# sim.seed = {}\n",
            env!("CARGO_PKG_VERSION"),
            scenario.ga.seed,
            scenario.sim.seed
        );
        for line in scenario.to_toml().lines() {
            header.push_str("# ");
            header.push_str(line);
            header.push('\n');
        }
        Ok(Self { dir: dir.to_path_buf(), command, header, files: Vec::new() })
    }

    /// Writes one CSV record per row to `name` inside the output directory.
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        file.write_all(self.header.as_bytes()).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(file);
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// Writes `manifest.json` with the resolved scenario and a command summary.
    pub fn manifest(&self, scenario: &ScenarioFile, summary: Value) -> Result<PathBuf, CliError> {
        let path = self.dir.join("manifest.json");
        let doc = json!({
            "tool": "cranopt",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "scenario": scenario,
            "files": self.files,
            "summary": summary,
        });
        let text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
