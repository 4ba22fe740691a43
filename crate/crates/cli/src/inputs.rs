use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Files with extension `ext` in `dir`, sorted by name.
pub fn list_dir(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("{}", dir.display()))? {
        let path = entry.with_context(|| format!("{}", dir.display()))?.path();
        if path.is_file() && has_extension(&path, ext) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Expands directories to their `*.ext` files; plain files pass through.
pub fn expand(inputs: &[PathBuf], ext: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            files.extend(list_dir(input, ext)?);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        bail!("no .{ext} inputs found");
    }
    Ok(files)
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// `<stem>.<ext>` in `out_dir`, or next to each input when no directory is
/// given. Fails when two inputs would write the same file.
pub fn output_paths(inputs: &[PathBuf], out_dir: Option<&Path>, ext: &str) -> Result<Vec<PathBuf>> {
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
    }
    let mut seen = BTreeMap::new();
    let mut outputs = Vec::with_capacity(inputs.len());
    for input in inputs {
        let dir = match out_dir {
            Some(d) => d.to_path_buf(),
            None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        let out = dir.join(format!("{}.{ext}", stem(input)));
        if let Some(prev) = seen.insert(out.clone(), input.clone()) {
            bail!(
                "{} and {} would both write {}",
                prev.display(),
                input.display(),
                out.display()
            );
        }
        outputs.push(out);
    }
    Ok(outputs)
}

/// Prints every per-file failure and fails if there was at least one.
pub fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    let total = results.len();
    let mut ok = Vec::with_capacity(total);
    let mut failed = 0;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                eprintln!("error: {e:#}");
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {total} inputs failed");
    }
    Ok(ok)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let ctx = || format!("{}", path.display());
    let mut out = BufWriter::new(File::create(path).with_context(ctx)?);
    serde_json::to_writer_pretty(&mut out, value).with_context(ctx)?;
    out.write_all(b"\n").with_context(ctx)?;
    out.flush().with_context(ctx)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("{}", path.display()))
}
