//! Atomic file output and run manifests.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Record of one run. All lines except `body` are comments, so a simulate
/// manifest (whose body is the rendered configuration) is itself a valid
/// `--config` file.
pub struct Manifest {
    lines: Vec<String>,
    outputs: Vec<String>,
    body: String,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            lines: vec![
                "# tailqueue run manifest".to_string(),
                format!("# command: {command}"),
                format!("# tailqueue-cli: {}", env!("CARGO_PKG_VERSION")),
                format!("# tailqueue: {}", tailqueue::VERSION),
            ],
            outputs: Vec::new(),
            body: String::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("# {key}: {value}"));
    }

    pub fn body(&mut self, body: String) {
        self.body = body;
    }

    pub fn output(&mut self, name: impl Into<String>) {
        self.outputs.push(name.into());
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        for o in &self.outputs {
            out.push_str(&format!("# output: {o}\n"));
        }
        out.push_str(&self.body);
        out
    }

    pub fn write(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join("manifest");
        write_atomic(&path, self.render().as_bytes())?;
        Ok(path)
    }
}
