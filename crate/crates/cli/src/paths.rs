use std::path::{Component, Path, PathBuf};

use anyhow::{bail, Result};

/// Environment variable naming the workspace root for relative paths.
pub const WORKSPACE_ENV: &str = "EMTK_WORKSPACE";

/// Where relative paths are anchored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    /// Explicit root; relative paths must stay inside it.
    pub root: Option<PathBuf>,
    pub cwd: PathBuf,
}

impl Workspace {
    pub fn from_env() -> Result<Self> {
        let cwd = std::env::current_dir()?;
        let root = std::env::var_os(WORKSPACE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        Ok(Workspace { root: root.map(|r| if r.is_absolute() { r } else { cwd.join(r) }), cwd })
    }

    pub fn resolve(&self, path: &Path) -> Result<PathBuf> {
        resolve_shared_path(path, self.root.as_deref(), &self.cwd)
    }
}

/// Resolves `path` against the workspace root when one is set, or `cwd`
/// otherwise. Absolute paths are returned unchanged. Under a set root a
/// relative path may not climb above it with `..`.
pub fn resolve_shared_path(path: &Path, root: Option<&Path>, cwd: &Path) -> Result<PathBuf> {
    if path.is_absolute() {
        return Ok(path.to_path_buf());
    }
    let base = root.unwrap_or(cwd);
    let mut out = base.to_path_buf();
    let mut depth = 0usize;
    for c in path.components() {
        match c {
            Component::Normal(part) => {
                out.push(part);
                depth += 1;
            }
            Component::ParentDir => {
                if depth == 0 {
                    if root.is_some() {
                        bail!("`{}` escapes the workspace root {}", path.display(), base.display());
                    }
                    out.pop();
                } else {
                    out.pop();
                    depth -= 1;
                }
            }
            Component::CurDir => {}
            Component::RootDir | Component::Prefix(_) => unreachable!("relative paths have no root"),
        }
    }
    Ok(out)
}
