//! `key = value` run configuration and the per-run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

/// Settings read from a config file, in file order. Blank lines and `#`
/// comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub entries: Vec<(String, String)>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = read(path)?;
        Self::parse(&text).map_err(|m| CliError::Data(format!("{}: {m}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

/// Records written files and their digests.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    manifest: String,
    written: Vec<(String, String)>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: "manifest.txt".into(),
            written: Vec::new(),
        })
    }

    /// For commands that produce a single named file: its directory is the
    /// output directory and the manifest sits next to it as
    /// `<file>.manifest.txt`.
    pub fn for_file(path: &Path) -> Result<(Self, String), CliError> {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut out = Self::create(dir)?;
        out.manifest = format!("{name}.manifest.txt");
        Ok((out, name))
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.written.retain(|(n, _)| n != name);
        self.written.push((name.to_string(), sha256(contents.as_bytes())));
        Ok(())
    }

    /// The manifest: command, config echo, then one `sha256  file` line per
    /// artifact.
    pub fn finish(mut self, command: &str, config: &str) -> Result<(), CliError> {
        let mut text = format!(
            "command={command}\nversion={}\n{config}",
            env!("CARGO_PKG_VERSION")
        );
        if !text.ends_with('\n') {
            text.push('\n');
        }
        text.push_str("[artifacts]\n");
        for (name, digest) in &self.written {
            text.push_str(&format!("{digest}  {name}\n"));
        }
        let path = self.dir.join(&self.manifest);
        fs::write(&path, text)
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        self.written.clear();
        Ok(())
    }
}

pub fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let s = Settings::parse("# run\nseed = 7\n\nepochs=10 # short\nseed=8\n").unwrap();
        assert_eq!(s.get("seed"), Some("8"));
        assert_eq!(s.get("epochs"), Some("10"));
        assert_eq!(s.get("out"), None);
        assert!(Settings::parse("seed 7").is_err());
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
