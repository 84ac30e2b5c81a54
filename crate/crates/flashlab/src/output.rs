//! Files written by the command line: atomic JSON and CSV, number formatting.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use flashlab_core::models::{Flash, ModelError};
use flashlab_core::{seed, Frame, ModelParams, OutcomeModel, SettingPair, Side};
use serde::Serialize;
use tempfile::NamedTempFile;

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic_with<F>(path: &Path, fill: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    write_atomic_with(path, |w| w.write_all(bytes))
}

/// Pretty JSON with full `f64` precision and a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub const CSV_HEADER: [&str; 7] = [
    "run_id", "region", "t_lab", "x_lab", "t_frame", "channel", "index",
];

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

/// Writes every flash of `n` runs as CSV rows, inconclusive runs included.
/// Runs use the same seeds as the outcome counts of the `run` subcommand.
#[allow(clippy::too_many_arguments)]
pub fn write_flash_csv<M: OutcomeModel + ?Sized>(
    path: &Path,
    model: &M,
    params: &ModelParams,
    settings: SettingPair,
    frame: Frame,
    n: u64,
    master_seed: u64,
) -> io::Result<()> {
    let mut failure: Option<ModelError> = None;
    write_atomic_with(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        for i in 0..n {
            let flashes: Vec<Flash> =
                match model.run(settings, frame, seed::mix(master_seed, i), params) {
                    Ok(run) => run.flashes,
                    Err(ModelError::Inconclusive { flashes }) => flashes,
                    Err(e) => {
                        failure = Some(e);
                        return Err(io::Error::other("model error"));
                    }
                };
            for f in flashes {
                let region = match f.region {
                    Side::A => "A",
                    Side::B => "B",
                };
                out.write_record([
                    i.to_string(),
                    region.to_owned(),
                    f.event.t.to_string(),
                    f.event.x.to_string(),
                    frame.time_of(f.event).to_string(),
                    f.channel.sign().to_string(),
                    f.index.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        out.flush()
    })
    .map_err(|e| match failure.take() {
        Some(m) => io::Error::other(m),
        None => e,
    })
}

/// `x` with six significant digits, in exponent form outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_owned();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Left-aligned plain-text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_owned()
    };
    let mut out = String::new();
    out.push_str(&line(header.to_vec()));
    out.push('\n');
    out.push_str(&line(
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .iter()
            .map(|s| s.as_str())
            .collect(),
    ));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
        out.push('\n');
    }
    out
}
