//! Output plumbing: payloads go to stdout, or to a file accompanied by a
//! run manifest (`<out>.manifest.json`) recording how to reproduce them.
//! Timestamps live only in the manifest, so output files themselves are
//! byte-stable across reruns.

use chrono::{SecondsFormat, Utc};
use corrupted_compass::analysis::to_json_string;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    argv: Vec<String>,
    seed: Option<u64>,
    version: &'a str,
    started: &'a str,
    finished: String,
    outputs: Vec<String>,
}

pub struct Emitter {
    started: String,
    argv: Vec<String>,
}

impl Emitter {
    pub fn new() -> Self {
        Emitter {
            started: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
            argv: std::env::args().collect(),
        }
    }

    /// Print `payload`, or write it to `out` together with its manifest.
    pub fn emit(
        &self,
        command: &str,
        seed: Option<u64>,
        out: Option<&Path>,
        payload: &str,
    ) -> Result<(), CliError> {
        let Some(path) = out else {
            let mut stdout = std::io::stdout().lock();
            let written = stdout.write_all(payload.as_bytes()).and_then(|()| {
                if payload.ends_with('\n') {
                    Ok(())
                } else {
                    stdout.write_all(b"\n")
                }
            });
            return match written {
                // A closed read end (e.g. piping into `head`) is not a failure.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => Ok(other?),
            };
        };
        fs::write(path, payload)?;
        let manifest = RunManifest {
            command,
            argv: self.argv.clone(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            started: &self.started,
            finished: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
            outputs: vec![path.display().to_string()],
        };
        let manifest_path = format!("{}.manifest.json", path.display());
        fs::write(manifest_path, to_json_string(&manifest))?;
        Ok(())
    }
}
