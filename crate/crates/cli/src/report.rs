//! Aggregates transfer, speed-up and noise CSVs into `summary.json` plus
//! plot-ready tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qtransfer::donor::{SpeedupRow, SPEEDUP_REGIMES};
use qtransfer::noise::SweepRow;
use qtransfer::stats::{mean, BoxStats};

use crate::artifact::{self, csv_reader, Header};
use crate::ReportArgs;

#[derive(Debug, Deserialize)]
struct TransferCsvRow {
    acceptor_id: String,
    #[allow(dead_code)]
    donor_id: u64,
    distance: f64,
    r_avg: f64,
    r_native: Option<f64>,
    regime: String,
}

#[derive(Debug, Serialize)]
struct TransferPair {
    source: String,
    acceptor_id: String,
    nearest_distance: f64,
    nearest_r_avg: f64,
    farthest_distance: f64,
    farthest_r_avg: f64,
    r_native: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SpeedupLine {
    iterations: usize,
    transferred: bool,
    graphs: usize,
    mean_wall_time_s: f64,
    mean_speedup: f64,
    mean_ratio: f64,
}

fn label(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv_reader(path)?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

fn transfer_pairs(path: &Path) -> Result<Vec<TransferPair>> {
    let rows: Vec<TransferCsvRow> = read_rows(path)?;
    let mut by_acceptor: BTreeMap<String, (Option<TransferCsvRow>, Option<TransferCsvRow>)> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        let slot = by_acceptor.entry(r.acceptor_id.clone()).or_insert_with(|| {
            order.push(r.acceptor_id.clone());
            (None, None)
        });
        match r.regime.as_str() {
            "nearest" => slot.0 = Some(r),
            "farthest" => slot.1 = Some(r),
            _ => {}
        }
    }
    let source = label(path);
    Ok(order
        .into_iter()
        .filter_map(|id| match by_acceptor.remove(&id) {
            Some((Some(n), Some(f))) => Some(TransferPair {
                source: source.clone(),
                acceptor_id: id,
                nearest_distance: n.distance,
                nearest_r_avg: n.r_avg,
                farthest_distance: f.distance,
                farthest_r_avg: f.r_avg,
                r_native: n.r_native,
            }),
            _ => None,
        })
        .collect())
}

fn transfer_summary(source: &str, pairs: &[TransferPair]) -> Value {
    let near: Vec<f64> = pairs.iter().map(|p| p.nearest_r_avg).collect();
    let far: Vec<f64> = pairs.iter().map(|p| p.farthest_r_avg).collect();
    let wins = pairs.iter().filter(|p| p.nearest_r_avg > p.farthest_r_avg).count();
    let native: Vec<f64> = pairs.iter().filter_map(|p| p.r_native).collect();
    json!({
        "source": source,
        "acceptors": pairs.len(),
        "mean_nearest_r_avg": mean(&near),
        "mean_farthest_r_avg": mean(&far),
        "gap": mean(&near) - mean(&far),
        "win_fraction": wins as f64 / pairs.len().max(1) as f64,
        "mean_r_native": if native.is_empty() { Value::Null } else { json!(mean(&native)) },
    })
}

fn speedup_table(rows: &[SpeedupRow]) -> Vec<SpeedupLine> {
    SPEEDUP_REGIMES
        .iter()
        .filter_map(|&(iterations, transferred)| {
            let group: Vec<&SpeedupRow> = rows
                .iter()
                .filter(|r| r.iterations == iterations && r.transferred == transferred)
                .collect();
            if group.is_empty() {
                return None;
            }
            let avg = |f: fn(&SpeedupRow) -> f64| mean(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            Some(SpeedupLine {
                iterations,
                transferred,
                graphs: group.len(),
                mean_wall_time_s: avg(|r| r.wall_time_s),
                mean_speedup: avg(|r| r.speedup),
                mean_ratio: avg(|r| r.ratio),
            })
        })
        .collect()
}

fn noise_boxes(rows: &[SweepRow]) -> Vec<(f64, &'static str, BoxStats)> {
    let mut scales: Vec<f64> = rows.iter().map(|r| r.scale).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    let mut out = Vec::new();
    for s in scales {
        let at: Vec<&SweepRow> = rows.iter().filter(|r| r.scale == s).collect();
        let abs: Vec<f64> = at.iter().map(|r| r.delta_e).collect();
        let rel: Vec<f64> = at.iter().map(|r| r.rel_err).collect();
        if let Some(b) = BoxStats::from_values(&abs) {
            out.push((s, "delta_e", b));
        }
        if let Some(b) = BoxStats::from_values(&rel) {
            out.push((s, "rel_err", b));
        }
    }
    out
}

pub fn report(a: &ReportArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let header = Header::new("report", 0, a);
    let mut summary = serde_json::to_value(&header)?;

    let mut transfer = Vec::new();
    let mut all_pairs = Vec::new();
    for path in &a.transfer {
        let pairs = transfer_pairs(path)?;
        transfer.push(transfer_summary(&label(path), &pairs));
        all_pairs.extend(pairs);
    }
    if !a.transfer.is_empty() {
        let mut f = artifact::create(&a.out.join("transfer_pairs.csv"))?;
        header.write_comments(&mut f)?;
        let mut w = csv::Writer::from_writer(&mut f);
        for p in &all_pairs {
            w.serialize(p)?;
        }
        w.flush()?;
    }

    let mut speedup_rows: Vec<SpeedupRow> = Vec::new();
    for path in &a.speedup {
        speedup_rows.extend(read_rows::<SpeedupRow>(path)?);
    }
    let table = speedup_table(&speedup_rows);
    if !a.speedup.is_empty() {
        let mut f = artifact::create(&a.out.join("speedup_table.csv"))?;
        header.write_comments(&mut f)?;
        let mut w = csv::Writer::from_writer(&mut f);
        for line in &table {
            w.serialize(line)?;
        }
        w.flush()?;
    }

    let mut noise_rows: Vec<SweepRow> = Vec::new();
    for path in &a.noise {
        noise_rows.extend(read_rows::<SweepRow>(path)?);
    }
    let boxes = noise_boxes(&noise_rows);
    if !a.noise.is_empty() {
        let mut f = artifact::create(&a.out.join("noise_box.csv"))?;
        header.write_comments(&mut f)?;
        let mut w = csv::Writer::from_writer(&mut f);
        w.write_record(["scale", "metric", "mean", "median", "q1", "q3", "lo_whisker", "hi_whisker", "n_outliers"])?;
        for (s, metric, b) in &boxes {
            w.write_record([
                s.to_string(),
                metric.to_string(),
                b.mean.to_string(),
                b.median.to_string(),
                b.q1.to_string(),
                b.q3.to_string(),
                b.lo_whisker.to_string(),
                b.hi_whisker.to_string(),
                b.n_outliers.to_string(),
            ])?;
        }
        w.flush()?;
    }

    let map = summary.as_object_mut().expect("header is an object");
    map.insert("transfer".into(), json!(transfer));
    map.insert("speedup".into(), serde_json::to_value(&table)?);
    map.insert(
        "noise".into(),
        json!(boxes
            .iter()
            .map(|(s, metric, b)| json!({"scale": s, "metric": metric, "stats": b}))
            .collect::<Vec<_>>()),
    );
    let mut f = artifact::create(&a.out.join("summary.json"))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&summary)?)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scale: f64, delta_e: f64) -> SweepRow {
        SweepRow {
            graph_id: "0".into(),
            scale,
            e_ideal: 1.0,
            e_noisy: 1.0 - delta_e,
            stderr: 0.0,
            delta_e,
            rel_err: delta_e,
        }
    }

    #[test]
    fn noise_boxes_group_by_scale() {
        let rows = vec![row(2.0, 0.3), row(1.0, 0.1), row(1.0, 0.2)];
        let boxes = noise_boxes(&rows);
        assert_eq!(boxes.len(), 4);
        assert_eq!((boxes[0].0, boxes[0].1), (1.0, "delta_e"));
        assert!((boxes[0].2.mean - 0.15).abs() < 1e-12);
        assert_eq!(boxes[2].0, 2.0);
    }

    #[test]
    fn speedup_table_follows_regime_order() {
        let mk = |iterations, transferred, speedup| SpeedupRow {
            graph_id: "g".into(),
            iterations,
            transferred,
            evals: 1,
            wall_time_s: 1.0,
            speedup,
            energy: 1.0,
            ratio: 0.5,
        };
        let rows = vec![mk(0, true, 300.0), mk(1000, false, 1.0), mk(0, true, 100.0)];
        let t = speedup_table(&rows);
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].iterations, t[0].transferred), (1000, false));
        assert_eq!((t[1].graphs, t[1].mean_speedup), (2, 200.0));
    }
}
