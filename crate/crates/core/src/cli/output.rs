use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::kv::render_kv;

pub const MANIFEST: &str = "manifest.txt";

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn entry(key: impl Into<String>, value: impl ToString) -> (String, String) {
    (key.into(), value.to_string())
}

/// Output directory that refuses to clobber existing files unless forced.
#[derive(Debug)]
pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    /// Creates `dir` if needed and checks that none of `names` (plus the manifest)
    /// exist yet, so a refused run leaves nothing half-written.
    pub fn open(dir: &Path, names: &[&str], force: bool) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        if !force {
            for name in names.iter().chain(&[MANIFEST]) {
                let path = dir.join(name);
                if path.exists() {
                    return Err(Error::WouldOverwrite(path));
                }
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(name.to_owned());
        Ok(())
    }

    /// Records a file written by someone else so the manifest lists it.
    pub fn record(&mut self, name: &str) {
        self.written.push(name.to_owned());
    }

    /// Writes `manifest.txt`: the given entries, then digests of every input and output.
    pub fn finish(mut self, entries: Vec<(String, String)>, inputs: &[PathBuf]) -> Result<()> {
        let mut pairs: Vec<(String, String)> = vec![
            ("kgmix_version".into(), env!("CARGO_PKG_VERSION").into()),
            (
                "checkpoint_format".into(),
                crate::training::CHECKPOINT_VERSION.to_string(),
            ),
        ];
        pairs.extend(entries);
        for path in inputs {
            pairs.push((
                format!("input.{}", path.display()),
                format!("sha256:{}", file_digest(path)?),
            ));
        }
        self.written.sort();
        self.written.dedup();
        for name in &self.written {
            pairs.push((
                format!("output.{name}"),
                format!("sha256:{}", file_digest(&self.path(name))?),
            ));
        }
        let text = render_kv(pairs.iter().map(|(k, v)| (k.as_str(), v.clone())));
        self.write(MANIFEST, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_existing_files_without_force() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutDir::open(tmp.path(), &["a.csv"], false).unwrap();
        out.write("a.csv", "x\n").unwrap();
        out.finish(vec![entry("command", "t")], &[]).unwrap();
        let err = OutDir::open(tmp.path(), &["a.csv"], false).unwrap_err();
        assert!(matches!(err, Error::WouldOverwrite(_)));
        assert!(OutDir::open(tmp.path(), &["a.csv"], true).is_ok());
        let manifest = fs::read_to_string(tmp.path().join(MANIFEST)).unwrap();
        // sha256("x\n")
        assert!(manifest.contains(
            "output.a.csv = sha256:73cb3858a687a8494ca3323053016282f3dad39d42cf62ca4e79dda2aac7d9ac"
        ));
    }
}
