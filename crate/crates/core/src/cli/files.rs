//! Instance and schedule files.
//!
//! Instances are JSON of the shape
//! `{"joint_cost":"1","tie_permutation":[0,1],"items":[{"id":0,"weight":"1/3"}],
//!   "requests":[{"id":0,"item":0,"arrival":0,"deadline":2,"predicted":2}]}`
//! with weights as `p/q` or integer strings and times as JSON integers.
//! A missing or empty `tie_permutation` means the identity. Schedules are
//! `{"services":[{"time":0,"items":[0,1],"served":[0,3]}]}`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{validate_instance, Instance, InstanceViolation};
use crate::schedule::Schedule;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid instance {path}:{}", render_violations(.violations))]
    Invalid {
        path: PathBuf,
        violations: Vec<InstanceViolation>,
    },
}

fn render_violations(violations: &[InstanceViolation]) -> String {
    violations.iter().map(|v| format!("\n  - {v}")).collect()
}

/// Reads, normalizes (identity permutation when omitted) and validates an
/// instance file.
pub fn read_instance(path: &Path) -> Result<Instance, FileError> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut instance: Instance =
        serde_json::from_str(&text).map_err(|source| FileError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
    if instance.tie_permutation.is_empty() {
        instance.tie_permutation = (0..instance.items.len() as u32).collect();
    }
    let violations = validate_instance(&instance);
    if !violations.is_empty() {
        return Err(FileError::Invalid {
            path: path.to_path_buf(),
            violations,
        });
    }
    Ok(instance)
}

pub fn write_instance(path: &Path, instance: &Instance) -> Result<(), FileError> {
    write_json(path, instance)
}

pub fn read_schedule(path: &Path) -> Result<Schedule, FileError> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FileError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_schedule(path: &Path, schedule: &Schedule) -> Result<(), FileError> {
    write_json(path, schedule)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}
