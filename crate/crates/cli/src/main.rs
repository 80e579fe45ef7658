use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qrefine::{Config, Engine, Mode};
use qrefine_cli::{api, watch};

#[derive(Parser)]
#[command(name = "qrefine", version, about = "Refinement engine for quantum programs")]
struct Cli {
    /// TOML file with tolerances, simulation options and injected operators.
    #[arg(long, global = true, env = "QREFINE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a script, stopping at the first failing command.
    Run {
        script: PathBuf,
        /// Report failures and keep going instead of stopping.
        #[arg(long)]
        keep_going: bool,
    },
    /// Re-run `input` on every save and write goals and diagnostics to `output`.
    Serve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Serve the HTTP/WebSocket session API.
    Api {
        #[arg(long, default_value_t = 8017)]
        port: u16,
        /// Address to bind.
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory of static files (the web UI) served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Read commands from standard input.
    Repl,
}

/// Failures that map to exit code 2.
struct Fatal(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.into())
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Fatal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every command succeeded.
fn dispatch(cli: Cli) -> Result<bool, Fatal> {
    let config = load_config(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Run { script, keep_going } => {
            let src = std::fs::read_to_string(&script)
                .with_context(|| format!("reading {}", script.display()))?;
            let mut engine = Engine::new(config)?;
            let mode = if keep_going { Mode::Interactive } else { Mode::Batch };
            let report = engine.run_script(&src, mode);
            let mut out = std::io::stdout().lock();
            for e in &report.entries {
                if e.ok {
                    if !e.output.is_empty() {
                        writeln!(out, "{}", e.output)?;
                    }
                } else {
                    eprintln!(
                        "{}:{}:{}: {}",
                        script.display(),
                        e.span.line,
                        e.span.col,
                        e.output
                    );
                }
            }
            Ok(report.ok())
        }
        Cmd::Serve { input, output } => {
            // Never fires; the server runs until the process is stopped.
            let (_keep, stop) = std::sync::mpsc::channel();
            eprintln!("watching {} -> {}", input.display(), output.display());
            watch::serve(&input, &output, &config, stop)?;
            Ok(true)
        }
        Cmd::Api {
            port,
            host,
            static_dir,
        } => {
            let engine = Engine::new(config)?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let addr = SocketAddr::new(host, port);
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .with_context(|| format!("binding {addr}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                let app = api::router(api::Shared::new(engine), static_dir);
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
            Ok(true)
        }
        Cmd::Repl => {
            let mut engine = Engine::new(config)?;
            let mut all_ok = true;
            let mut buf = String::new();
            for line in std::io::stdin().lock().lines() {
                let line = line?;
                buf.push_str(&line);
                buf.push('\n');
                // Commands end with a period; wait for more input otherwise.
                if !line.trim_end().ends_with('.') {
                    continue;
                }
                let report = engine.run_script(&std::mem::take(&mut buf), Mode::Interactive);
                all_ok &= report.ok();
                print!("{}", report.render());
                std::io::stdout().flush()?;
            }
            Ok(all_ok)
        }
    }
}
