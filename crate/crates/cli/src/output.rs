use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const RESOLVED_CONFIG: &str = "resolved_config.json";
pub const MANIFEST: &str = "manifest.csv";

/// An output directory that records every file written into it.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<(String, u64, &'static str)>,
}

impl OutputDir {
    /// Creates `root`; refuses a non-empty existing directory unless `force`.
    pub fn create(root: &Path, force: bool) -> CliResult<Self> {
        if root.exists() {
            let occupied = fs::read_dir(root)
                .map_err(|e| CliError::io(format!("reading {}", root.display()), e))?
                .next()
                .is_some();
            if occupied && !force {
                return Err(CliError::OutputExists(root.to_owned()));
            }
        }
        fs::create_dir_all(root).map_err(|e| CliError::io(format!("creating {}", root.display()), e))?;
        Ok(Self { root: root.to_owned(), files: Vec::new() })
    }

    /// Writes `name` through `fill` and adds it to the manifest.
    pub fn write_with(
        &mut self,
        name: &str,
        description: &'static str,
        fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> CliResult<()> {
        debug_assert!(!name.contains(',') && !description.contains(','));
        let path = self.root.join(name);
        let ctx = || format!("writing {}", path.display());
        let file = fs::File::create(&path).map_err(|e| CliError::io(ctx(), e))?;
        let mut w = BufWriter::new(file);
        fill(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(ctx(), e))?;
        let bytes = fs::metadata(&path).map_err(|e| CliError::io(ctx(), e))?.len();
        self.files.push((name.to_owned(), bytes, description));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, description: &'static str, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).expect("report serializes");
        self.write_with(name, description, |w| writeln!(w, "{text}"))
    }

    /// Writes the resolved configuration and the manifest of all files.
    pub fn finish<T: Serialize>(mut self, resolved: &T) -> CliResult<PathBuf> {
        self.write_json(RESOLVED_CONFIG, "resolved run configuration", resolved)?;
        let files = std::mem::take(&mut self.files);
        self.write_with(MANIFEST, "", |w| {
            writeln!(w, "file,bytes,description")?;
            for (name, bytes, description) in &files {
                writeln!(w, "{name},{bytes},{description}")?;
            }
            Ok(())
        })?;
        Ok(self.root)
    }
}
