//! `rscsim` command-line front end.
//!
//! Every run writes a [`RunManifest`] next to its primary output (or to
//! stderr when that output goes to stdout). `rscsim replay <manifest>`
//! re-runs it and compares output checksums.

pub mod args;
mod commands;
mod manifest;

use std::ffi::OsString;

use anyhow::{bail, Context};
use clap::Parser;

pub use args::Cli;
pub use commands::{execute, resolve, Artifact, Outcome, Resolved, Status};
pub use manifest::{sha256_hex, FileDigest, RunManifest};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;
pub const EXIT_NO_CROSSING: u8 = 4;

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return u8::try_from(e.exit_code()).unwrap_or(EXIT_USAGE);
        }
    };
    let argv: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli, argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(f)),
        None => Ok(f()),
    }
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Ok => EXIT_OK,
        Status::NoCrossing => EXIT_NO_CROSSING,
    }
}

fn dispatch(cli: Cli, mut argv: Vec<String>) -> anyhow::Result<u8> {
    if let args::Command::Replay(replay) = &cli.command {
        return replay_manifest(&replay.manifest, cli.threads);
    }
    let resolved = resolve(cli.command)?;
    if let Some(seed) = resolved.drawn_seed {
        eprintln!("seed: {seed}");
        argv.extend(["--seed".to_string(), seed.to_string()]);
    }
    let command = resolved.command;
    let outcome = in_pool(cli.threads, || execute(&command))??;

    let mut outputs = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for artifact in &outcome.artifacts {
        outputs.push(artifact.digest());
        artifact.write(&mut stdout)?;
    }
    drop(stdout);

    let manifest = RunManifest::new(&command, argv, cli.threads, resolved.inputs, outputs)?;
    match outcome.artifacts.first().and_then(|a| a.path.as_ref()) {
        Some(primary) => {
            let mut path = primary.clone().into_os_string();
            path.push(".manifest.json");
            std::fs::write(&path, manifest.to_json()?).with_context(|| format!("writing {path:?}"))?;
        }
        None => eprintln!("{}", manifest.to_json()?),
    }
    Ok(exit_code(outcome.status))
}

fn replay_manifest(path: &std::path::Path, threads: Option<usize>) -> anyhow::Result<u8> {
    let manifest = RunManifest::read(path)?;
    if manifest.subcommand == "replay" {
        bail!("cannot replay a replay");
    }
    let mut full = vec!["rscsim".to_string()];
    full.extend(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(&full).context("manifest argv no longer parses")?;
    for input in &manifest.inputs {
        let now = FileDigest::of_file(std::path::Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            bail!("input {} changed since the manifest was written", input.path);
        }
    }
    let resolved = resolve(cli.command)?;
    if resolved.drawn_seed.is_some() {
        bail!("manifest does not pin a seed");
    }
    let command = resolved.command;
    let outcome = in_pool(threads.or(cli.threads), || execute(&command))??;
    let produced: Vec<FileDigest> = outcome.artifacts.iter().map(Artifact::digest).collect();

    let mut all_match = produced.len() == manifest.outputs.len();
    for (want, got) in manifest.outputs.iter().zip(&produced) {
        let ok = want == got;
        all_match &= ok;
        println!("{} {} {}", if ok { "match" } else { "MISMATCH" }, want.path, got.sha256);
    }
    if !all_match {
        eprintln!("replay differs from {}", path.display());
        return Ok(EXIT_RUNTIME);
    }
    Ok(exit_code(outcome.status))
}
