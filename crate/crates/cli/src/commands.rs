//! The four subcommands. Each writes its CSV artifacts under the output
//! directory and reports how many rows failed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hom_superres::densities::{pc_density, pd_density, total_coincidence_prob};
use hom_superres::estimator::{batch_precision, fmt_num, precision_csv_row, BatchSpec, PrecisionReport, PRECISION_CSV_HEADER};
use hom_superres::fisher::{fisher_for_strategy, precision_bound, qfi_numeric_sld, qfi_reference};
use hom_superres::sampler::{bin_events, sample_events_with, sample_until_coincidences, write_events_csv, BinnedEvents, Histogram2d};
use hom_superres::{Exec, FisherMatrix, Parameter, SourceScene, Strategy};

use crate::config::{QfiMethod, Scenario};

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub rows: usize,
    pub failed_rows: usize,
}

/// Run-wide options from the command line.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Overrides `sampling.seed`.
    pub seed: Option<u64>,
    pub exec: Exec,
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

/// Error text safe inside a CSV cell.
fn status_of(err: &hom_superres::Error) -> String {
    format!("error: {err}").replace([',', '\n', '\r', '"'], ";")
}

fn qfi(scenario: &Scenario, scene: &SourceScene) -> Result<FisherMatrix, hom_superres::Error> {
    match scenario.qfi {
        QfiMethod::Reference => Ok(qfi_reference(scene)),
        QfiMethod::Numeric => qfi_numeric_sld(scene, &scenario.sld),
    }
}

pub const FISHER_SCAN_HEADER: &str =
    "eps,visibility,model,strategy,fi_x0x0,fi_x0eps,fi_epseps,crb_x0,crb_eps,qcrb_x0,qcrb_eps,status";

/// Fisher matrices for every `(visibility, eps, strategy)` in the scenario.
pub fn cmd_fisher_scan(scenario: &Scenario, opts: &RunOptions) -> Result<RunSummary> {
    let mut points = Vec::new();
    for &v in &scenario.visibility {
        for &e in &scenario.eps {
            for &s in &scenario.strategies {
                points.push((scenario.scene(e, v), s));
            }
        }
    }
    let rows = opts.exec.map(points.len(), |i| {
        let (scene, strategy) = points[i];
        let q = qfi(scenario, &scene);
        let f = fisher_for_strategy(strategy, &scene, scenario.model, &scenario.quadrature);
        (scene, strategy, f, q)
    });

    let (path, mut w) = create(&opts.out_dir, &scenario.output.fisher_scan)?;
    writeln!(w, "{FISHER_SCAN_HEADER}")?;
    let mut failed = 0;
    for (scene, strategy, f, q) in &rows {
        let (qx, qe) = match q {
            Ok(q) => (fmt_num(precision_bound(q, Parameter::Centroid)), fmt_num(precision_bound(q, Parameter::Separation))),
            Err(_) => (String::new(), String::new()),
        };
        let lead = format!("{},{},{},{}", fmt_num(scene.eps()), fmt_num(scene.visibility()), scenario.model, strategy);
        match (f, q) {
            (Ok(f), Ok(_)) => writeln!(
                w,
                "{lead},{},{},{},{},{},{qx},{qe},ok",
                fmt_num(f.x0_x0()),
                fmt_num(f.x0_eps()),
                fmt_num(f.eps_eps()),
                fmt_num(precision_bound(f, Parameter::Centroid)),
                fmt_num(precision_bound(f, Parameter::Separation)),
            )?,
            (Err(e), _) | (_, Err(e)) => {
                failed += 1;
                eprintln!("fisher-scan: eps={} V={} {strategy}: {e}", scene.eps(), scene.visibility());
                writeln!(w, "{lead},,,,,,{qx},{qe},{}", status_of(e))?;
            }
        }
    }
    w.flush()?;
    Ok(RunSummary { files: vec![path], rows: rows.len(), failed_rows: failed })
}

/// Grid coordinates of the density map.
pub fn density_grid(scenario: &Scenario, scene: &SourceScene) -> Vec<f64> {
    let (lo, hi) = scene.window(scenario.density_map.half_width);
    let n = scenario.density_map.points;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn write_grid(path: &Path, w: &mut impl Write, xs: &[f64], f: impl Fn(f64, f64) -> f64) -> Result<()> {
    write!(w, "x1\\x2")?;
    for &x in xs {
        write!(w, ",{}", fmt_num(x))?;
    }
    writeln!(w)?;
    for &a in xs {
        write!(w, "{}", fmt_num(a))?;
        for &b in xs {
            write!(w, ",{}", fmt_num(f(a, b)))?;
        }
        writeln!(w)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

/// `pc` and `pd` sampled on a square grid; rows are `x1`, columns `x2`.
pub fn cmd_density_map(scenario: &Scenario, opts: &RunOptions) -> Result<RunSummary> {
    let scene = scenario.single_scene("density-map")?;
    let xs = density_grid(scenario, &scene);
    let model = scenario.model;
    let (pc_path, mut pc) = create(&opts.out_dir, &scenario.output.density_pc)?;
    write_grid(&pc_path, &mut pc, &xs, |a, b| pc_density(a, b, &scene, model))?;
    let (pd_path, mut pd) = create(&opts.out_dir, &scenario.output.density_pd)?;
    write_grid(&pd_path, &mut pd, &xs, |a, b| pd_density(a, b, &scene, model))?;
    eprintln!(
        "density-map: {n}x{n} grid, P_c = {}",
        total_coincidence_prob(&scene, model),
        n = xs.len()
    );
    Ok(RunSummary { files: vec![pc_path, pd_path], rows: 2 * xs.len(), failed_rows: 0 })
}

pub const BINNED_CSV_HEADER: &str = "kind,i,j,count";
pub const REGIONS_CSV_HEADER: &str = "kind,region1,region2,count";

fn write_histogram(w: &mut impl Write, code: char, h: &Histogram2d) -> std::io::Result<()> {
    for i in 0..h.bins {
        for j in 0..h.bins {
            writeln!(w, "{code},{i},{j},{}", h.get(i, j))?;
        }
    }
    // off-detector events
    writeln!(w, "{code},-1,-1,{}", h.overflow)
}

fn write_binned(dir: &Path, scenario: &Scenario, b: &BinnedEvents) -> Result<Vec<PathBuf>> {
    let (path, mut w) = create(dir, &scenario.output.binned)?;
    writeln!(w, "{BINNED_CSV_HEADER}")?;
    write_histogram(&mut w, 'C', &b.coincidences)?;
    write_histogram(&mut w, 'D', &b.doubles)?;
    w.flush()?;
    let mut files = vec![path];
    if let Some(r) = &b.regions {
        let (path, mut w) = create(dir, &scenario.output.regions)?;
        writeln!(w, "{REGIONS_CSV_HEADER}")?;
        for (code, table) in [('C', &r.coincidences), ('D', &r.doubles)] {
            for a in 0..r.n_regions {
                for c in 0..r.n_regions {
                    writeln!(w, "{code},{a},{c},{}", table[a * r.n_regions + c])?;
                }
            }
        }
        w.flush()?;
        files.push(path);
    }
    Ok(files)
}

/// Samples pairs (or pairs up to a coincidence count) and writes the event
/// list, plus detector histograms when a detector is configured.
pub fn cmd_simulate(scenario: &Scenario, opts: &RunOptions) -> Result<RunSummary> {
    let scene = scenario.single_scene("simulate")?;
    let sampling = &scenario.sampling;
    let seed = opts.seed.unwrap_or(sampling.seed);
    let events = if sampling.condition_on_coincidences {
        sample_until_coincidences(&scene, scenario.model, sampling.n_pairs, seed, opts.exec)
    } else {
        sample_events_with(&scene, scenario.model, sampling.n_pairs, seed, opts.exec)
    }
    .context("sampling events")?;
    let (path, mut w) = create(&opts.out_dir, &scenario.output.events)?;
    write_events_csv(&mut w, &events)?;
    w.flush()?;
    let mut files = vec![path];
    if let Some(d) = &scenario.detector {
        files.extend(write_binned(&opts.out_dir, scenario, &bin_events(&events, d))?);
    }
    eprintln!("simulate: {} pairs written", events.len());
    Ok(RunSummary { files, rows: events.len(), failed_rows: 0 })
}

pub const FIG2_CSV_HEADER_EXTRA: &str = "qcrb_eps,qcrb_x0,status";

/// Batch settings for one strategy. Direct-imaging batches hold as many
/// photons as the two-photon batches are expected to.
pub fn batch_spec(scenario: &Scenario, scene: &SourceScene, strategy: Strategy, seed: u64) -> BatchSpec {
    let s = &scenario.sampling;
    let mut spec = BatchSpec::new(s.batch_size, s.n_batches, seed);
    spec.condition_on_coincidences = s.condition_on_coincidences;
    spec.quadrature = scenario.quadrature;
    spec.fit = scenario.fit;
    if strategy == Strategy::DirectImaging {
        let pairs = if s.condition_on_coincidences {
            (s.batch_size as f64 / total_coincidence_prob(scene, scenario.model)).round() as usize
        } else {
            s.batch_size
        };
        spec.batch_size = 2 * pairs;
    }
    spec
}

/// One row of the precision table and its outcome.
pub type Fig2Row = (SourceScene, Strategy, Result<PrecisionReport, hom_superres::Error>);

/// Batch precision for every `(eps, strategy)`; rows run one after another,
/// batches inside a row run on `opts.exec`.
pub fn reproduce_fig2_rows(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<Fig2Row>> {
    anyhow::ensure!(
        scenario.visibility.len() == 1,
        "reproduce-fig2 needs a single `scene.visibility`"
    );
    let seed = opts.seed.unwrap_or(scenario.sampling.seed);
    let mut rows = Vec::new();
    for &e in &scenario.eps {
        let scene = scenario.scene(e, scenario.visibility[0]);
        for &strategy in &scenario.strategies {
            let mut spec = batch_spec(scenario, &scene, strategy, seed);
            spec.exec = opts.exec;
            let r = batch_precision(&scene, scenario.model, strategy, &spec);
            match &r {
                Ok(r) => eprintln!(
                    "reproduce-fig2: eps={e} {strategy}: {} batches, {} failed, {} at eps=0",
                    r.n_batches, r.n_failed, r.n_zero_boundary
                ),
                Err(err) => eprintln!("reproduce-fig2: eps={e} {strategy}: {err}"),
            }
            rows.push((scene, strategy, r));
        }
    }
    Ok(rows)
}

/// The precision table: one row per `(eps, strategy)` with the Fisher and
/// quantum bounds alongside.
pub fn cmd_reproduce_fig2(scenario: &Scenario, opts: &RunOptions) -> Result<RunSummary> {
    let rows = reproduce_fig2_rows(scenario, opts)?;
    let (path, mut w) = create(&opts.out_dir, &scenario.output.precision)?;
    writeln!(w, "{PRECISION_CSV_HEADER},{FIG2_CSV_HEADER_EXTRA}")?;
    let mut failed = 0;
    for (scene, strategy, r) in &rows {
        let (qe, qx) = match qfi(scenario, scene) {
            Ok(q) => (fmt_num(precision_bound(&q, Parameter::Separation)), fmt_num(precision_bound(&q, Parameter::Centroid))),
            Err(_) => (String::new(), String::new()),
        };
        match r {
            Ok(r) => writeln!(w, "{},{qe},{qx},ok", precision_csv_row(r))?,
            Err(e) => {
                failed += 1;
                writeln!(w, "{},{strategy},,,,,,,,,{qe},{qx},{}", fmt_num(scene.eps()), status_of(e))?;
            }
        }
    }
    w.flush()?;
    Ok(RunSummary { files: vec![path], rows: rows.len(), failed_rows: failed })
}
