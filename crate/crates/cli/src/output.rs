use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::args::OutArgs;

/// Output directory that refuses to overwrite files unless forced.
pub struct OutDir {
    root: PathBuf,
    force: bool,
}

impl OutDir {
    pub fn new(args: &OutArgs) -> Self {
        Self { root: args.out.clone(), force: args.force }
    }

    /// Checks every planned file before anything is computed or written.
    pub fn claim<S: AsRef<Path>>(&self, files: &[S]) -> Result<()> {
        if self.force {
            return Ok(());
        }
        for f in files {
            let p = self.root.join(f);
            if p.exists() {
                bail!("{} exists; pass --force to overwrite", p.display());
            }
        }
        Ok(())
    }

    /// Path of `rel`, with its parent directories created.
    pub fn path(&self, rel: impl AsRef<Path>) -> Result<PathBuf> {
        let p = self.root.join(rel);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(p)
    }

    pub fn write(&self, rel: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<()> {
        let p = self.path(rel)?;
        std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }
}
