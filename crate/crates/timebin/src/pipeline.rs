//! The measurement pipeline: simulate the phase-setting runs, reduce each
//! stream to histograms and a coincidence table, reconstruct the state.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use timebin_core::analyzer::joint_distribution;
use timebin_core::engine::{
    ArrivalHistogram, ChannelOffsets, CoincidenceTable, HistogramBuilder, TripleAudit, TripleExtractor,
};
use timebin_core::simulator::{simulate_run, Channel, EventRecord, EventStream};
use timebin_core::source::emitted_density_matrix;
use timebin_core::tomography::{full_report, ReportOptions, TomographyResult};

use crate::config::{ExperimentConfig, PhaseSetting};
use crate::error::{Error, Result};
use crate::formats::{self, AuditJson, ResultJson, BASIS_LABELS};
use crate::tagfile;

pub const MANIFEST: &str = "manifest.json";
pub const TABLES: &str = "tables.json";
pub const RESULT: &str = "result.json";

/// Runs `f` on a pool of `jobs` threads (0 picks the core count).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub struct SimulatedRun {
    pub setting: PhaseSetting,
    pub seed: u64,
    pub events: EventStream,
}

/// One stream per phase setting, seeded `run.seed + index`.
pub fn simulate_runs(cfg: &ExperimentConfig) -> Result<Vec<SimulatedRun>> {
    cfg.validate()?;
    cfg.phase_settings
        .par_iter()
        .enumerate()
        .map(|(i, &setting)| {
            let seed = cfg.seed_for(i);
            let run = timebin_core::simulator::RunConfig { seed, ..cfg.run };
            let events = simulate_run(&cfg.source, setting.phase(), &run)?;
            Ok(SimulatedRun { setting, seed, events })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub phi_xx_deg: f64,
    pub phi_x_deg: f64,
    pub seed: u64,
    pub records: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub base_seed: u64,
    pub n_pulses: u64,
    pub runs: Vec<ManifestEntry>,
}

pub fn run_file_name(setting: &PhaseSetting) -> String {
    format!("run_{}.tbe", setting.label())
}

/// Writes one time-tag file and one model outcome distribution per run,
/// the manifest and the effective configuration.
pub fn write_runs(cfg: &ExperimentConfig, runs: &[SimulatedRun], dir: &Path) -> Result<Manifest> {
    ensure_dir(dir)?;
    let rho = emitted_density_matrix(&cfg.source)?;
    let mut entries = Vec::with_capacity(runs.len());
    for r in runs {
        let file = run_file_name(&r.setting);
        tagfile::write_file(&dir.join(&file), &r.events)?;
        let dist = joint_distribution(&rho, r.setting.phase());
        formats::write_distribution_csv(&dir.join(format!("joint_distribution_{}.csv", r.setting.label())), &dist)?;
        info!("{file}: {} records (seed {})", r.events.len(), r.seed);
        entries.push(ManifestEntry {
            file,
            phi_xx_deg: r.setting.phi_xx_deg,
            phi_x_deg: r.setting.phi_x_deg,
            seed: r.seed,
            records: r.events.len() as u64,
        });
    }
    let manifest = Manifest { base_seed: cfg.run.seed, n_pulses: cfg.run.n_pulses, runs: entries };
    formats::write_json(&dir.join(MANIFEST), &manifest)?;
    cfg.save(&dir.join("config.json"))?;
    Ok(manifest)
}

pub fn cmd_simulate(cfg: &ExperimentConfig, jobs: usize) -> Result<Manifest> {
    let runs = with_jobs(jobs, || simulate_runs(cfg))??;
    write_runs(cfg, &runs, &cfg.output_dir)
}

/// Histograms, slot offsets and the coincidence table of one run.
#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub setting: PhaseSetting,
    pub histograms: Vec<ArrivalHistogram>,
    pub offsets: ChannelOffsets,
    pub table: CoincidenceTable,
    pub audit: TripleAudit,
}

fn histogram_builder(cfg: &ExperimentConfig) -> HistogramBuilder {
    HistogramBuilder::new(&Channel::PHOTON, cfg.analysis.bin_width, cfg.run.rep_period)
}

fn extractor(cfg: &ExperimentConfig, offsets: &ChannelOffsets, setting: &PhaseSetting) -> TripleExtractor {
    TripleExtractor::new(cfg.source.pump.bin_delay, cfg.analysis.window, offsets, setting.phase())
}

/// Two passes over a stream: arrival histograms to calibrate the slot
/// offsets, then triple extraction.
pub fn analyze_events(events: &[EventRecord], setting: PhaseSetting, cfg: &ExperimentConfig) -> RunAnalysis {
    let mut hb = histogram_builder(cfg);
    events.iter().for_each(|&e| hb.push(e));
    let histograms = hb.finish();
    let offsets = ChannelOffsets::from_histograms(&histograms, cfg.source.pump.bin_delay);
    let mut ex = extractor(cfg, &offsets, &setting);
    events.iter().for_each(|&e| ex.push(e));
    let (table, audit) = ex.finish();
    RunAnalysis { setting, histograms, offsets, table, audit }
}

/// Same as [`analyze_events`], streaming the file twice.
pub fn analyze_file(path: &Path, setting: PhaseSetting, cfg: &ExperimentConfig) -> Result<RunAnalysis> {
    let mut hb = histogram_builder(cfg);
    tagfile::for_each_record(path, |e| hb.push(e))?;
    let histograms = hb.finish();
    let offsets = ChannelOffsets::from_histograms(&histograms, cfg.source.pump.bin_delay);
    let mut ex = extractor(cfg, &offsets, &setting);
    tagfile::for_each_record(path, |e| ex.push(e))?;
    let (table, audit) = ex.finish();
    Ok(RunAnalysis { setting, histograms, offsets, table, audit })
}

/// Phase setting encoded in a `run_phi_<xx>_<x>.tbe` file name.
pub fn setting_from_path(path: &Path) -> Result<PhaseSetting> {
    path.file_name()
        .and_then(|n| n.to_str())
        .and_then(PhaseSetting::from_label)
        .ok_or_else(|| Error::format(path, "file name does not encode a phase setting (run_phi_<xx>_<x>.tbe)"))
}

/// Time-tag files listed in `dir/manifest.json`.
pub fn manifest_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let m: Manifest = formats::read_json(&dir.join(MANIFEST))?;
    Ok(m.runs.into_iter().map(|r| dir.join(r.file)).collect())
}

pub fn analyze_files(files: &[PathBuf], cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<RunAnalysis>> {
    for f in files {
        if !f.is_file() {
            return Err(Error::io(f, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file")));
        }
    }
    let settings = files.iter().map(|f| setting_from_path(f)).collect::<Result<Vec<_>>>()?;
    with_jobs(jobs, || {
        files.par_iter().zip(settings).map(|(f, s)| analyze_file(f, s, cfg)).collect::<Result<Vec<_>>>()
    })?
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub label: String,
    pub phi_xx_deg: f64,
    pub phi_x_deg: f64,
    pub table: String,
    pub exposure: u64,
    pub offsets_ps: Vec<(String, i64)>,
    pub audit: AuditJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesJson {
    pub runs: Vec<TableEntry>,
}

/// Writes `histogram_<channel>.csv` for each photon channel,
/// `five_peaks.csv`, one `table_<label>.csv` per run and `tables.json`.
pub fn write_analysis(cfg: &ExperimentConfig, runs: &[RunAnalysis], dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    let labels: Vec<String> = runs.iter().map(|r| r.setting.label()).collect();
    for (ci, channel) in Channel::PHOTON.iter().enumerate() {
        let hs: Vec<&ArrivalHistogram> = runs.iter().map(|r| &r.histograms[ci]).collect();
        formats::write_histogram_csv(&dir.join(format!("histogram_{}.csv", channel.name())), &labels, &hs)?;
    }

    let pair = cfg.analysis.port_pair()?;
    let mut peaks = String::from("run,group,slot_sum,count\n");
    for r in runs {
        for (s, c) in r.table.five_peaks(pair).iter().enumerate() {
            writeln!(peaks, "{},peak,{s},{c}", r.setting.label()).unwrap();
        }
        writeln!(peaks, "{},cross_pulse,2,{}", r.setting.label(), r.table.cross_pulse(pair)).unwrap();
    }
    let path = dir.join("five_peaks.csv");
    fs::write(&path, peaks).map_err(|e| Error::io(&path, e))?;

    let mut entries = Vec::with_capacity(runs.len());
    for r in runs {
        let label = r.setting.label();
        let table = format!("table_{label}.csv");
        formats::write_table_csv(&dir.join(&table), &r.table)?;
        info!(
            "{label}: {} SYNC cycles, {} triples (table total {}), {} rejected, {} extra",
            r.audit.sync_cycles,
            r.audit.coincident_cycles,
            r.table.total(),
            r.audit.rejected,
            r.audit.extra_accepted
        );
        entries.push(TableEntry {
            label,
            phi_xx_deg: r.setting.phi_xx_deg,
            phi_x_deg: r.setting.phi_x_deg,
            table,
            exposure: r.table.exposure,
            offsets_ps: Channel::PHOTON
                .iter()
                .map(|&c| (c.name().to_string(), (r.offsets.get(c) * 1e12).round() as i64))
                .collect(),
            audit: r.audit.into(),
        });
    }
    formats::write_json(&dir.join(TABLES), &TablesJson { runs: entries })
}

pub fn cmd_analyze(files: &[PathBuf], cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<RunAnalysis>> {
    let runs = analyze_files(files, cfg, jobs)?;
    write_analysis(cfg, &runs, &cfg.output_dir)?;
    Ok(runs)
}

/// Coincidence tables described by `dir/tables.json`.
pub fn load_tables(dir: &Path) -> Result<Vec<CoincidenceTable>> {
    let index: TablesJson = formats::read_json(&dir.join(TABLES))?;
    index
        .runs
        .iter()
        .map(|e| {
            let mut t = CoincidenceTable::new(PhaseSetting::new(e.phi_xx_deg, e.phi_x_deg).phase());
            formats::read_table_csv(&dir.join(&e.table), &mut t)?;
            t.exposure = e.exposure;
            Ok(t)
        })
        .collect()
}

pub fn tomography(
    tables: &[CoincidenceTable],
    cfg: &ExperimentConfig,
    mc_runs: usize,
    seed: u64,
) -> Result<TomographyResult> {
    let opts =
        ReportOptions { pair: cfg.analysis.port_pair()?, mc_runs, seed, target_phase: cfg.source.pump.pump_phase };
    Ok(full_report(tables, &opts)?)
}

/// Writes `result.json` and the bar-chart CSVs `density_matrix.csv` and
/// `density_matrix_raw.csv`.
pub fn write_result(result: &TomographyResult, mc_runs: usize, dir: &Path) -> Result<ResultJson> {
    ensure_dir(dir)?;
    let json = ResultJson::new(result, mc_runs);
    formats::write_json(&dir.join(RESULT), &json)?;
    formats::write_density_csv(&dir.join("density_matrix.csv"), result.rho.matrix())?;
    formats::write_density_csv(&dir.join("density_matrix_raw.csv"), &result.raw)?;
    Ok(json)
}

pub fn cmd_tomography(
    tables: &[CoincidenceTable],
    cfg: &ExperimentConfig,
    mc_runs: usize,
    seed: u64,
) -> Result<ResultJson> {
    let result = tomography(tables, cfg, mc_runs, seed)?;
    write_result(&result, mc_runs, &cfg.output_dir)
}

pub fn render_report(r: &ResultJson) -> String {
    let m = &r.metrics;
    let mut s = String::new();
    writeln!(s, "port pair    {}", r.port_pair).unwrap();
    writeln!(s, "Monte Carlo  {} runs", r.mc_runs).unwrap();
    writeln!(s).unwrap();
    writeln!(s, "visibility").unwrap();
    for v in &r.visibilities {
        writeln!(s, "  {:<6} {:.4} +- {:.4}", v.basis, v.value, v.sigma).unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s, "fidelity     {:.4} +- {:.4}", m.fidelity, m.sigma_fidelity).unwrap();
    writeln!(s, "concurrence  {:.4} +- {:.4}", m.concurrence, m.sigma_concurrence).unwrap();
    writeln!(s, "tangle       {:.4} +- {:.4}", m.tangle, m.sigma_tangle).unwrap();
    for (name, part) in [("Re rho", &r.rho.re), ("Im rho", &r.rho.im)] {
        writeln!(s).unwrap();
        writeln!(s, "{name:<8}{}", BASIS_LABELS.map(|l| format!("{l:>9}")).join("")).unwrap();
        for (label, row) in BASIS_LABELS.iter().zip(part) {
            let cells: String = row.iter().map(|x| format!("{x:>9.4}")).collect();
            writeln!(s, "{label:<8}{cells}").unwrap();
        }
    }
    s
}
