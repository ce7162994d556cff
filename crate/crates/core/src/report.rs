//! Result files: campaign CSV, wall-loss sweep CSV and per-cell JSON.

use std::io::{self, Write};
use std::path::Path;

use crate::engine::AggregateResult;

pub const CAMPAIGN_HEADER: &str = "spectrumMode,syncMode,factoryEmbb_Mbps,wallLoss_dB,targetSnr_dB,nFactoryBS,\
availDl_pct,availUl_pct,thrDl_Mbps,thrUl_Mbps,\
availDl_ci95,availUl_ci95,thrDl_ci95,thrUl_ci95,converged";

pub const WALL_SWEEP_HEADER: &str = "wallLoss_dB,targetSnr_dB,availabilityDl_pct,availabilityUl_pct";

pub fn write_campaign_csv<W: Write>(mut w: W, rows: &[AggregateResult]) -> io::Result<()> {
    writeln!(w, "{CAMPAIGN_HEADER}")?;
    for r in rows {
        let s = &r.scenario;
        writeln!(
            w,
            "{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
            s.spectrum.label(),
            s.sync.label(),
            s.factory_embb_mbps,
            s.wall.perpendicular_loss_db,
            s.target_snr_db(),
            s.n_factory_bs(),
            r.availability_dl_pct.mean,
            r.availability_ul_pct.mean,
            r.throughput_dl_mbps.mean,
            r.throughput_ul_mbps.mean,
            r.availability_dl_pct.ci95,
            r.availability_ul_pct.ci95,
            r.throughput_dl_mbps.ci95,
            r.throughput_ul_mbps.ci95,
            r.converged
        )?;
    }
    Ok(())
}

pub fn write_wall_sweep_csv<W: Write>(mut w: W, rows: &[AggregateResult]) -> io::Result<()> {
    writeln!(w, "{WALL_SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:.4},{:.4}",
            r.scenario.wall.perpendicular_loss_db,
            r.scenario.target_snr_db(),
            r.availability_dl_pct.mean,
            r.availability_ul_pct.mean
        )?;
    }
    Ok(())
}

pub fn aggregate_json(r: &AggregateResult) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("aggregate results serialize");
    s.push('\n');
    s
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Smallest wall loss at which both directions reach 100 % for the given
/// target SNR, from a sweep.
pub fn required_wall_loss(rows: &[AggregateResult], target_snr_db: f64) -> Option<f64> {
    let mut pts: Vec<&AggregateResult> = rows.iter().filter(|r| r.scenario.target_snr_db() == target_snr_db).collect();
    pts.sort_by(|a, b| a.scenario.wall.perpendicular_loss_db.total_cmp(&b.scenario.wall.perpendicular_loss_db));
    pts.iter()
        .find(|r| r.availability_dl_pct.mean >= 100.0 && r.availability_ul_pct.mean >= 100.0)
        .map(|r| r.scenario.wall.perpendicular_loss_db)
}
