//! JSON and CSV representations of states, tables and reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use timebin_core::analyzer::{JointDistribution, OutcomeKey, Port};
use timebin_core::engine::{ArrivalHistogram, CoincidenceTable, TripleAudit, VisibilityEstimate};
use timebin_core::linalg::ComplexMatrix;
use timebin_core::state::{validate_density_matrix, DensityMatrix};
use timebin_core::tomography::TomographyResult;
use timebin_core::Complex64;

use crate::error::{Error, Result};

pub const BASIS_LABELS: [&str; 4] = ["00", "01", "10", "11"];

/// `{"dim":4,"re":[[..]],"im":[[..]]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let row = |i: usize, f: fn(Complex64) -> f64| (0..n).map(|j| f(m[(i, j)])).collect();
        Self { dim: n, re: (0..n).map(|i| row(i, |z| z.re)).collect(), im: (0..n).map(|i| row(i, |z| z.im)).collect() }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Option<ComplexMatrix> {
        let n = self.dim;
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !(square(&self.re) && square(&self.im)) {
            return None;
        }
        let data = (0..n * n).map(|k| Complex64::new(self.re[k / n][k % n], self.im[k / n][k % n])).collect();
        ComplexMatrix::from_vec(n, n, data).ok()
    }

    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        let m = self.to_matrix().ok_or_else(|| Error::Config(format!("malformed {}x{} matrix", self.dim, self.dim)))?;
        Ok(validate_density_matrix(&m)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsJson {
    pub fidelity: f64,
    pub concurrence: f64,
    pub tangle: f64,
    pub sigma_fidelity: f64,
    pub sigma_concurrence: f64,
    pub sigma_tangle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityJson {
    pub basis: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionJson {
    pub xx: String,
    pub x: String,
    pub count: u64,
    pub weight: f64,
    pub exposure: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub port_pair: String,
    pub rho: MatrixJson,
    pub rho_raw: MatrixJson,
    pub metrics: MetricsJson,
    pub visibilities: Vec<VisibilityJson>,
    pub projections: Vec<ProjectionJson>,
    pub mc_runs: usize,
}

pub fn pair_label(xx: Port, x: Port) -> String {
    format!("XX{}-X{}", xx.number(), x.number())
}

impl ResultJson {
    pub fn new(r: &TomographyResult, mc_runs: usize) -> Self {
        let p = &r.projections;
        Self {
            port_pair: pair_label(p.pair.xx, p.pair.x),
            rho: r.rho.matrix().into(),
            rho_raw: (&r.raw).into(),
            metrics: MetricsJson {
                fidelity: r.metrics.fidelity,
                concurrence: r.metrics.concurrence,
                tangle: r.metrics.tangle,
                sigma_fidelity: r.sigmas.fidelity,
                sigma_concurrence: r.sigmas.concurrence,
                sigma_tangle: r.sigmas.tangle,
            },
            visibilities: r
                .visibilities
                .iter()
                .map(|(b, VisibilityEstimate { value, sigma })| VisibilityJson {
                    basis: b.label().to_string(),
                    value: *value,
                    sigma: *sigma,
                })
                .collect(),
            projections: (0..16)
                .map(|m| {
                    let (xx, x) = p.label(m);
                    let e = &p.entries[m];
                    ProjectionJson {
                        xx: xx.into(),
                        x: x.into(),
                        count: e.count,
                        weight: e.weight,
                        exposure: e.exposure,
                    }
                })
                .collect(),
            mc_runs,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json { path: path.into(), source: e })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json { path: path.into(), source: e })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Csv { path: path.into(), source: e })
}

fn finish_csv(path: &Path, mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Fig-5 style bar chart data: one line per matrix element.
pub fn write_density_csv(path: &Path, rho: &ComplexMatrix) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| Error::Csv { path: path.into(), source: e };
    w.write_record(["row", "col", "re", "im"]).map_err(err)?;
    for i in 0..rho.rows() {
        for j in 0..rho.cols() {
            let z = rho[(i, j)];
            w.write_record([BASIS_LABELS[i], BASIS_LABELS[j], &z.re.to_string(), &z.im.to_string()]).map_err(err)?;
        }
    }
    finish_csv(path, w)
}

pub fn write_distribution_csv(path: &Path, dist: &JointDistribution) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| Error::Csv { path: path.into(), source: e };
    w.write_record(["port_xx", "slot_xx", "port_x", "slot_x", "probability"]).map_err(err)?;
    for (k, p) in dist.iter() {
        w.write_record([
            k.port_xx.number().to_string(),
            k.slot_xx.to_string(),
            k.port_x.number().to_string(),
            k.slot_x.to_string(),
            p.to_string(),
        ])
        .map_err(err)?;
    }
    finish_csv(path, w)
}

#[derive(Debug, Serialize, Deserialize)]
struct CellRow {
    port_xx: u8,
    slot_xx: u8,
    port_x: u8,
    slot_x: u8,
    count: u64,
}

pub fn write_table_csv(path: &Path, table: &CoincidenceTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    for k in OutcomeKey::all() {
        let row = CellRow {
            port_xx: k.port_xx.number(),
            slot_xx: k.slot_xx,
            port_x: k.port_x.number(),
            slot_x: k.slot_x,
            count: table.get(k),
        };
        w.serialize(row).map_err(|e| Error::Csv { path: path.into(), source: e })?;
    }
    finish_csv(path, w)
}

/// Reads the 36 cells of a table CSV into `table.counts`.
pub fn read_table_csv(path: &Path, table: &mut CoincidenceTable) -> Result<()> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Csv { path: path.into(), source: e })?;
    let mut seen = 0;
    for row in r.deserialize::<CellRow>() {
        let row = row.map_err(|e| Error::Csv { path: path.into(), source: e })?;
        let (Some(pxx), Some(px)) = (Port::from_number(row.port_xx), Port::from_number(row.port_x)) else {
            return Err(Error::format(path, format!("bad port in {row:?}")));
        };
        if row.slot_xx > 2 || row.slot_x > 2 {
            return Err(Error::format(path, format!("bad slot in {row:?}")));
        }
        table.counts[OutcomeKey::new(pxx, row.slot_xx, px, row.slot_x).index()] = row.count;
        seen += 1;
    }
    if seen != OutcomeKey::COUNT {
        return Err(Error::format(path, format!("expected {} cells, found {seen}", OutcomeKey::COUNT)));
    }
    Ok(())
}

/// Histograms of one channel from several runs side by side:
/// `t_ps,<label1>,<label2>,...`.
pub fn write_histogram_csv(path: &Path, labels: &[String], histograms: &[&ArrivalHistogram]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let io = |e| Error::io(path, e);
    writeln!(f, "t_ps,{}", labels.join(",")).map_err(io)?;
    let bins = histograms.iter().map(|h| h.counts.len()).max().unwrap_or(0);
    for i in 0..bins {
        let t_ps = histograms.first().map_or(0.0, |h| h.bin_start(i) * 1e12).round() as u64;
        write!(f, "{t_ps}").map_err(io)?;
        for h in histograms {
            write!(f, ",{}", h.counts.get(i).copied().unwrap_or(0)).map_err(io)?;
        }
        writeln!(f).map_err(io)?;
    }
    f.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditJson {
    pub sync_cycles: u64,
    pub coincident_cycles: u64,
    pub accepted_xx: u64,
    pub accepted_x: u64,
    pub extra_accepted: u64,
    pub rejected: u64,
    pub before_sync: u64,
}

impl From<TripleAudit> for AuditJson {
    fn from(a: TripleAudit) -> Self {
        Self {
            sync_cycles: a.sync_cycles,
            coincident_cycles: a.coincident_cycles,
            accepted_xx: a.accepted_xx,
            accepted_x: a.accepted_x,
            extra_accepted: a.extra_accepted,
            rejected: a.rejected,
            before_sync: a.before_sync,
        }
    }
}
