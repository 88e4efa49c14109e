//! Output files are produced in memory, then written to temporary files in
//! their target directories and renamed into place only once every output
//! of the command is ready. A failing command leaves nothing behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// One finished output: a file, or standard output when `dest` is `None`.
#[derive(Debug)]
pub struct Artifact {
    pub dest: Option<PathBuf>,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(dest: Option<&Path>, bytes: Vec<u8>) -> Self {
        Artifact {
            dest: dest.map(Path::to_path_buf),
            bytes,
        }
    }
}

fn directory_of(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Fails early, before any computation, when `path` cannot be created.
pub fn check_writable(path: &Path) -> Result<()> {
    let dir = directory_of(path);
    if !dir.is_dir() {
        return Err(CliError::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "output directory does not exist",
            ),
        ));
    }
    if path.is_dir() {
        return Err(CliError::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::IsADirectory,
                "output path is a directory",
            ),
        ));
    }
    Ok(())
}

fn temp_file_in(dir: &Path) -> std::io::Result<tempfile::NamedTempFile> {
    let mut builder = tempfile::Builder::new();
    builder.prefix(".qdiode-");
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    builder.tempfile_in(dir)
}

/// Writes every artifact; files first (all-or-nothing up to the final
/// renames), then standard output in order.
pub fn commit(artifacts: Vec<Artifact>) -> Result<()> {
    let mut staged = Vec::new();
    let mut stdout_parts = Vec::new();
    for a in artifacts {
        match a.dest {
            Some(path) => {
                let mut tmp =
                    temp_file_in(directory_of(&path)).map_err(|e| CliError::io(&path, e))?;
                tmp.write_all(&a.bytes)
                    .and_then(|_| tmp.as_file().sync_all())
                    .map_err(|e| CliError::io(&path, e))?;
                staged.push((tmp, path));
            }
            None => stdout_parts.push(a.bytes),
        }
    }
    for (tmp, path) in staged {
        tmp.persist(&path)
            .map_err(|e| CliError::io(&path, e.error))?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for bytes in stdout_parts {
        lock.write_all(&bytes)
            .map_err(|e| CliError::io("<stdout>", e))?;
    }
    lock.flush().map_err(|e| CliError::io("<stdout>", e))
}

/// Renders into a byte buffer with a `Write` closure.
pub fn render(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commits_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        commit(vec![
            Artifact::new(Some(&a), b"one\n".to_vec()),
            Artifact::new(Some(&b), b"two\n".to_vec()),
        ])
        .unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), b"one\n");
        assert_eq!(std::fs::read(&b).unwrap(), b"two\n");
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(".qdiode-"))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn missing_directory_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.csv");
        let bad = dir.path().join("missing").join("bad.csv");
        assert!(check_writable(&bad).is_err());
        assert!(check_writable(&good).is_ok());
        let err = commit(vec![
            Artifact::new(Some(&good), b"x".to_vec()),
            Artifact::new(Some(&bad), b"y".to_vec()),
        ])
        .unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_DATA);
        assert!(!good.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn directory_as_output_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(check_writable(dir.path()).is_err());
    }
}
