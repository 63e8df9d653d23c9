use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Writes through a temporary sibling and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().with_context(|| format!("{} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Files named directly plus every `*.ext` inside named directories, sorted and de-duplicated.
pub fn collect(paths: &[PathBuf], ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in fs::read_dir(p).with_context(|| format!("listing {}", p.display()))? {
                let entry = entry?.path();
                if entry.is_file() && entry.extension().is_some_and(|e| e == ext) {
                    out.push(entry);
                }
            }
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            bail!(crate::Usage(format!("{} does not exist", p.display())));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// `*.ext` files of a directory keyed by file stem.
pub fn by_stem(dir: &Path, ext: &str) -> Result<BTreeMap<String, PathBuf>> {
    if !dir.is_dir() {
        bail!(crate::Usage(format!("{} is not a directory", dir.display())));
    }
    Ok(collect(&[dir.to_path_buf()], ext)?
        .into_iter()
        .map(|p| (stem(&p), p))
        .collect())
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.txt");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    }

    #[test]
    fn collects_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.seg", "a.seg", "c.txt"] {
            fs::write(dir.path().join(name), "").unwrap();
        }
        let files = collect(&[dir.path().to_path_buf(), dir.path().join("a.seg")], "seg").unwrap();
        let names: Vec<String> = files.iter().map(|p| stem(p)).collect();
        assert_eq!(names, vec!["a", "b"]);
        assert!(collect(&[dir.path().join("missing")], "seg").is_err());
    }
}
