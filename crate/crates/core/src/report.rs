//! Machine-readable reports.
//!
//! JSON output goes through `serde_json::Value`, whose maps keep keys
//! sorted, and floats are printed in shortest round-trip form. Writing the
//! same report twice gives identical bytes, and parsing it back recovers
//! every float exactly. Non-finite floats become `null`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::explorer::ScanReport;
use crate::solver::MultistartReport;

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v: Value = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Scenario(format!("flushing csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Scenario(format!("csv output is not utf-8: {e}")))
}

/// One row per cluster: `seed, n_starts, cluster_id, J, u_0, …`.
///
/// Cluster ids follow the report order (ascending `J`).
pub fn multistart_csv(report: &MultistartReport) -> Result<String> {
    let dim = report
        .clusters
        .first()
        .map_or(0, |c| c.representative.len());
    let mut header: Vec<String> = ["seed", "n_starts", "cluster_id", "J"]
        .map(String::from)
        .to_vec();
    header.extend((0..dim).map(|i| format!("u_{i}")));
    let mut rows = vec![header];
    for (id, c) in report.clusters.iter().enumerate() {
        let mut row = vec![
            report.seed.to_string(),
            report.n_starts.to_string(),
            id.to_string(),
            c.j.to_string(),
        ];
        row.extend(c.representative.iter().map(f64::to_string));
        rows.push(row);
    }
    csv_string(rows)
}

/// One row per scanned target: the axis coordinates, then `multiplicity`
/// and `J`.
pub fn scan_csv(report: &ScanReport) -> Result<String> {
    let mut header = report.labels.clone();
    header.push("multiplicity".into());
    header.push("J".into());
    let mut rows = vec![header];
    for c in &report.cells {
        let mut row: Vec<String> = c.coords.iter().map(f64::to_string).collect();
        row.push(c.multiplicity.to_string());
        row.push(c.j_best.to_string());
        rows.push(row);
    }
    csv_string(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::ScanCell;
    use crate::solver::Cluster;
    use proptest::prelude::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Sample {
        zeta: Vec<f64>,
        alpha: f64,
        label: String,
    }

    fn sample_report() -> MultistartReport {
        MultistartReport {
            seed: 42,
            n_starts: 8,
            converged_starts: 8,
            failed_starts: 0,
            total_iterations: 100,
            clusters: vec![
                Cluster {
                    representative: vec![0.5, -0.25],
                    j: 0.5,
                    members: 4,
                },
                Cluster {
                    representative: vec![-0.5, 0.1],
                    j: 0.5000000000000001,
                    members: 4,
                },
            ],
            n_global: 2,
        }
    }

    #[test]
    fn json_keys_are_sorted_and_stable() {
        let s = Sample {
            zeta: vec![0.1, 1.0 / 3.0],
            alpha: -2.5e-300,
            label: "x".into(),
        };
        let a = to_json_string(&s).unwrap();
        assert!(a.find("alpha").unwrap() < a.find("label").unwrap());
        assert!(a.find("label").unwrap() < a.find("zeta").unwrap());
        assert_eq!(a, to_json_string(&s).unwrap());
        let back: Sample = serde_json::from_str(&a).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn multistart_csv_layout() {
        let csv = multistart_csv(&sample_report()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "seed,n_starts,cluster_id,J,u_0,u_1");
        assert_eq!(lines.next().unwrap(), "42,8,0,0.5,0.5,-0.25");
        assert_eq!(lines.next().unwrap(), "42,8,1,0.5000000000000001,-0.5,0.1");
        assert!(lines.next().is_none());
    }

    #[test]
    fn scan_csv_layout() {
        let r = ScanReport {
            labels: vec!["y_d".into(), "u_d".into()],
            cells: vec![
                ScanCell {
                    coords: vec![1.0, 0.0],
                    multiplicity: 2,
                    j_best: 0.5,
                },
                ScanCell {
                    coords: vec![1.0, 0.25],
                    multiplicity: 1,
                    j_best: 0.4,
                },
            ],
            exceptional_set: vec![vec![1.0, 0.0]],
        };
        let csv = scan_csv(&r).unwrap();
        assert_eq!(csv, "y_d,u_d,multiplicity,J\n1,0,2,0.5\n1,0.25,1,0.4\n");
    }

    proptest! {
        #[test]
        fn report_json_round_trips(
            reps in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..5),
            js in prop::collection::vec(0.0f64..1e3, 5),
            seed in any::<u64>(),
        ) {
            let mut r = sample_report();
            r.seed = seed;
            r.clusters = reps
                .into_iter()
                .zip(js)
                .map(|(representative, j)| Cluster { representative, j, members: 1 })
                .collect();
            let text = to_json_string(&r).unwrap();
            let back: MultistartReport = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(to_json_string(&back).unwrap(), text);
        }
    }
}
