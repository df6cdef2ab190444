//! `report`: a Markdown digest of whatever stages have run under the root.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::config::RunConfig;
use super::manifest::{OutputDir, RunManifest};
use super::predict::load_report;
use crate::error::{Error, Result};
use crate::scalar::quantile;

fn read_rows(path: &Path) -> Result<Vec<BTreeMap<String, String>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    })?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    r.records()
        .map(|rec| Ok(header.iter().cloned().zip(rec?.iter().map(str::to_owned)).collect()))
        .collect()
}

fn median(values: &mut [f64]) -> String {
    quantile(values, 0.5).map_or_else(|| "-".into(), |m| format!("{m:.1}"))
}

pub fn render_report(root: &Path) -> Result<String> {
    let mut s = String::from("# Cascade motif analysis\n");
    let mut any = false;

    let types = root.join("ingest").join("types.csv");
    if types.exists() {
        any = true;
        let rows = read_rows(&types)?;
        let mut by_type: BTreeMap<String, usize> = BTreeMap::new();
        for r in &rows {
            let t = r["type"].clone();
            *by_type.entry(if t.is_empty() { "unclassified".into() } else { t }).or_default() += 1;
        }
        let _ = writeln!(s, "\n## Corpus\n\n{} cascades after size filtering.\n", rows.len());
        let _ = writeln!(s, "| type | cascades |\n|---|---|");
        for (t, n) in &by_type {
            let _ = writeln!(s, "| {t} | {n} |");
        }
    }

    let analyze = root.join("analyze");
    if analyze.join("lifecycle.csv").exists() {
        any = true;
        let rows = read_rows(&analyze.join("lifecycle.csv"))?;
        let mut status: BTreeMap<String, usize> = BTreeMap::new();
        let (mut steep, mut inhib, mut target) = (Vec::new(), Vec::new(), Vec::new());
        for r in &rows {
            *status.entry(r["status"].clone()).or_default() += 1;
            if r["status"] == "analysed" {
                steep.extend(r["steep_network"].parse::<f64>().ok());
                inhib.extend(r["inhib_network"].parse::<f64>().ok());
                target.extend(r["target_edges"].parse::<f64>().ok());
            }
        }
        let _ = writeln!(s, "\n## Lifecycle\n\n| status | cascades |\n|---|---|");
        for (k, n) in &status {
            let _ = writeln!(s, "| {k} | {n} |");
        }
        let _ = writeln!(
            s,
            "\nMedian steep network {}, median inhibition network {}, median |E| at inhibition {}.",
            median(&mut steep),
            median(&mut inhib),
            median(&mut target)
        );
        let z = analyze.join("zscore_summary.csv");
        if z.exists() {
            let mut rows: Vec<_> = read_rows(&z)?.into_iter().filter(|r| r["offset"] == "-1").collect();
            let key = |r: &BTreeMap<String, String>| r["median"].parse::<f64>().unwrap_or(f64::NEG_INFINITY);
            rows.sort_by(|a, b| key(b).total_cmp(&key(a)).then(a["pattern_id"].cmp(&b["pattern_id"])));
            let _ = writeln!(s, "\n### Highest median z-scores in the network before inhibition\n");
            let _ = writeln!(s, "| pattern | median z | q1 | q3 |\n|---|---|---|---|");
            for r in rows.iter().take(5) {
                let _ = writeln!(s, "| {} | {} | {} | {} |", r["pattern_id"], r["median"], r["q1"], r["q3"]);
            }
        }
    }

    if root.join("predict").join("predict_report.json").exists() {
        any = true;
        let report = load_report(root)?;
        let mut by_st: BTreeMap<usize, Vec<(f64, &str)>> = BTreeMap::new();
        for (name, per_st) in &report {
            for (st, score) in per_st {
                by_st.entry(*st).or_default().push((score.mae, name));
            }
        }
        let _ = writeln!(s, "\n## Prediction\n\nLowest cross-validated MAE per interval start.\n");
        let _ = writeln!(s, "| st | best | MAE | runner-up | MAE | baseline MAE |\n|---|---|---|---|---|---|");
        for (st, mut v) in by_st {
            v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
            let base = report.get(super::predict::BASELINE_SET).and_then(|m| m.get(&st)).map(|x| x.mae);
            let cell = |i: usize| v.get(i).map_or(("-".to_owned(), "-".to_owned()), |(m, n)| (n.to_string(), format!("{m:.3}")));
            let (b, bm) = cell(0);
            let (r, rm) = cell(1);
            let base = base.map_or("-".into(), |m| format!("{m:.3}"));
            let _ = writeln!(s, "| {st} | {b} | {bm} | {r} | {rm} | {base} |");
        }
    }

    if !any {
        return Err(Error::Config(format!("nothing to report under {}", root.display())));
    }
    Ok(s)
}

pub fn cmd_report(config: &RunConfig, root: &Path) -> Result<RunManifest> {
    let manifest = RunManifest::new("report", config);
    let text = render_report(root)?;
    let mut out = OutputDir::create(root.join("report"))?;
    let path = out.path("report.md")?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    out.finish(manifest)
}
