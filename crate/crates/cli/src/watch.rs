//! File-watch mode: every save of the input re-runs it from a fresh engine.

use std::path::{Path, PathBuf};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use notify::{RecursiveMode, Watcher};
use qrefine::engine::process_file;
use qrefine::Config;

const SETTLE: Duration = Duration::from_millis(50);

/// Processes `input` once, then again after each change, until `stop` fires or disconnects.
pub fn serve(input: &Path, output: &Path, config: &Config, stop: Receiver<()>) -> notify::Result<()> {
    let input = absolute(input);
    let dir = input.parent().map(Path::to_path_buf).unwrap_or_else(|| ".".into());
    let (tx, rx) = channel();
    let mut watcher = notify::recommended_watcher(tx)?;
    // The directory is watched so editors that replace the file are still seen.
    watcher.watch(&dir, RecursiveMode::NonRecursive)?;
    refresh(&input, output, config);
    loop {
        match stop.try_recv() {
            Ok(()) | Err(std::sync::mpsc::TryRecvError::Disconnected) => return Ok(()),
            Err(std::sync::mpsc::TryRecvError::Empty) => {}
        }
        let ev = match rx.recv_timeout(Duration::from_millis(100)) {
            Ok(ev) => ev,
            Err(RecvTimeoutError::Timeout) => continue,
            Err(RecvTimeoutError::Disconnected) => return Ok(()),
        };
        if !touches(&ev, &input) {
            continue;
        }
        // Coalesce the burst of events a single save produces.
        let mut quiet_until = Instant::now() + SETTLE;
        while let Some(left) = quiet_until.checked_duration_since(Instant::now()) {
            match rx.recv_timeout(left) {
                Ok(ev) if touches(&ev, &input) => quiet_until = Instant::now() + SETTLE,
                Ok(_) => {}
                Err(_) => break,
            }
        }
        refresh(&input, output, config);
    }
}

fn touches(ev: &notify::Result<notify::Event>, input: &Path) -> bool {
    match ev {
        Ok(ev) => {
            !ev.kind.is_access() && ev.paths.iter().any(|p| p.file_name() == input.file_name())
        }
        Err(e) => {
            log::warn!("watch error: {e}");
            false
        }
    }
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

fn refresh(input: &Path, output: &Path, config: &Config) {
    match process_file(input, output, config) {
        Ok(report) => log::info!(
            "processed {} commands, {} failed",
            report.entries.len(),
            report.failures
        ),
        Err(e) => {
            log::error!("{}: {e}", input.display());
            if let Err(w) = std::fs::write(output, format!("Error: {}: {e}\n", input.display())) {
                log::error!("cannot write {}: {w}", output.display());
            }
        }
    }
}
