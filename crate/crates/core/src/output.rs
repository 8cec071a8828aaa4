//! Text serializations of node sets, matrices and result records.
//!
//! Node and matrix values are written with 17 significant digits so that
//! files round-trip to the same `f64`. Nothing time- or host-dependent is
//! written, so equal inputs give byte-identical output.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{OcsError, Result};
use crate::patterns::NodeSet;
use crate::zernike::DiskPoint;

/// `v` with 17 significant digits, or `inf` / `-inf` / `nan`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// CSV with header `index,rho,theta,x,y`.
pub fn nodes_csv(nodes: &NodeSet) -> String {
    let mut out = String::from("index,rho,theta,x,y\n");
    for (i, p) in nodes.points.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            format_f64(p.rho),
            format_f64(p.theta),
            format_f64(p.x),
            format_f64(p.y)
        ));
    }
    out
}

#[derive(Serialize)]
struct NodeRecord<'a> {
    index: usize,
    #[serde(flatten)]
    point: &'a DiskPoint,
}

#[derive(Serialize)]
struct NodesDocument<'a> {
    source: String,
    nodes: Vec<NodeRecord<'a>>,
}

pub fn nodes_json(nodes: &NodeSet) -> Result<String> {
    let doc = NodesDocument {
        source: nodes.source.to_string(),
        nodes: nodes
            .points
            .iter()
            .enumerate()
            .map(|(index, point)| NodeRecord { index, point })
            .collect(),
    };
    to_json(&doc)
}

/// Row-major CSV without header.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_f64(m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Lebesgue function samples as `x,y,l` rows.
pub fn mesh_csv(values: &[(DiskPoint, f64)]) -> String {
    let mut out = String::from("x,y,l\n");
    for (p, l) in values {
        out.push_str(&format!(
            "{},{},{}\n",
            format_f64(p.x),
            format_f64(p.y),
            format_f64(*l)
        ));
    }
    out
}

/// Flat records as CSV with a header taken from the field names.
pub fn records_csv<T: Serialize>(records: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        writer
            .serialize(r)
            .map_err(|e| OcsError::Serialization(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| OcsError::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| OcsError::Serialization(e.to_string()))
}

/// Pretty JSON with a trailing newline. Non-finite numbers become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| OcsError::Serialization(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::TracePoint;
    use crate::patterns::{ocs_pattern, realize_nodes};

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI, 1e300] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn nodes_csv_layout() {
        let nodes = realize_nodes(&ocs_pattern(2).unwrap());
        let csv = nodes_csv(&nodes);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,rho,theta,x,y");
        assert_eq!(lines.len(), 7);
        let fields: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields[1], nodes.points[0].rho);
        assert_eq!(fields[3], nodes.points[0].x);
    }

    #[test]
    fn nodes_json_fields() {
        let nodes = realize_nodes(&ocs_pattern(1).unwrap());
        let v: serde_json::Value = serde_json::from_str(&nodes_json(&nodes).unwrap()).unwrap();
        assert_eq!(v["source"], "ocs");
        assert_eq!(v["nodes"].as_array().unwrap().len(), 3);
        assert_eq!(v["nodes"][2]["index"], 2);
        assert!(v["nodes"][0]["rho"].is_f64());
    }

    #[test]
    fn matrix_csv_row_major() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let text = matrix_csv(&m);
        let first: Vec<f64> = text
            .lines()
            .next()
            .unwrap()
            .split(',')
            .map(|f| f.parse().unwrap())
            .collect();
        assert_eq!(first, vec![1.0, 2.0]);
    }

    #[test]
    fn trace_csv_header() {
        let trace = [TracePoint {
            evaluation: 1,
            best_kappa2: 2.5,
        }];
        assert_eq!(
            records_csv(&trace).unwrap(),
            "evaluation,best_kappa2\n1,2.5\n"
        );
    }
}
