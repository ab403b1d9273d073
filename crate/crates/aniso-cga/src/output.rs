//! CSV and PGM emission.
//!
//! All numbers are written with plain `.`-decimal formatting so files are
//! byte-identical across runs and locales.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::grid::TorusGrid;
use crate::niching::{LineageCell, LineageCounts};
use crate::qap::SweepRow;
use crate::stats::Summary;

/// Binary (P5) PGM, one byte per cell.
pub fn write_pgm(path: &Path, width: u32, height: u32, pixels: &[u8]) -> io::Result<()> {
    assert_eq!(pixels.len(), width as usize * height as usize);
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(pixels)?;
    w.flush()
}

/// Takeover palette: null fitness black, best copies white.
pub fn takeover_pixels(grid: &TorusGrid<u8>) -> Vec<u8> {
    grid.cells().iter().map(|&v| if v == 0 { 0 } else { 255 }).collect()
}

/// Niching palette: empty white, lineage A light grey, lineage B dark grey.
pub fn lineage_pixels(grid: &TorusGrid<LineageCell>) -> Vec<u8> {
    grid.cells()
        .iter()
        .map(|c| match c {
            LineageCell::Empty => 255,
            LineageCell::LineageA => 160,
            LineageCell::LineageB => 64,
        })
        .collect()
}

/// `generation,n_best,delta` per generation of one replicate.
pub fn write_growth_csv(path: &Path, n_of_t: &[u32]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "generation,n_best,delta")?;
    let mut prev = None;
    for (t, &n) in n_of_t.iter().enumerate() {
        let delta = prev.map_or(0i64, |p: u32| n as i64 - p as i64);
        writeln!(w, "{t},{n},{delta}")?;
        prev = Some(n);
    }
    w.flush()
}

/// Aggregated growth curve with fractional counts.
pub fn write_mean_growth_csv(path: &Path, mean_curve: &[f64]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "generation,n_best,delta")?;
    let mut prev = None;
    for (t, &n) in mean_curve.iter().enumerate() {
        let delta = prev.map_or(0.0, |p: f64| n - p);
        writeln!(w, "{t},{n:.4},{delta:.4}")?;
        prev = Some(n);
    }
    w.flush()
}

/// `label,avg,std,min,max,replicates`, one row per entry.
pub fn write_summary_csv(path: &Path, rows: &[(String, Summary, usize)]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "label,avg,std,min,max,replicates")?;
    for (label, s, replicates) in rows {
        writeln!(w, "{label},{:.4},{:.4},{},{},{replicates}", s.mean, s.std, s.min, s.max)?;
    }
    w.flush()
}

/// `generation,count_a,count_b,count_empty,mixing_index` per recorded row.
pub fn write_niching_csv(path: &Path, rows: &[LineageCounts]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "generation,count_a,count_b,count_empty,mixing_index")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{:.6}",
            r.generation, r.count_a, r.count_b, r.count_empty, r.mixing_index
        )?;
    }
    w.flush()
}

/// `alpha,mean_best,std_best,min_best,runs` per sweep row.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "alpha,mean_best,std_best,min_best,runs")?;
    for r in rows {
        writeln!(w, "{},{:.4},{:.4},{},{}", r.alpha, r.mean_best, r.std_best, r.min_best, r.runs)?;
    }
    w.flush()
}

/// `generation,global_best_cost` for one optimizer run.
pub fn write_trace_csv(path: &Path, best_per_generation: &[f64]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "generation,global_best_cost")?;
    for (t, cost) in best_per_generation.iter().enumerate() {
        writeln!(w, "{t},{cost}")?;
    }
    w.flush()
}

/// `target,alpha,mean_takeover,replicates` for equivalence searches.
pub fn write_equivalence_csv(
    path: &Path,
    rows: &[(f64, f64, f64, u32)],
) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "target,alpha,mean_takeover,replicates")?;
    for (target, alpha, mean, replicates) in rows {
        writeln!(w, "{target},{alpha:.6},{mean:.4},{replicates}")?;
    }
    w.flush()
}
