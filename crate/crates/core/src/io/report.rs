//! Per-image metric reports as CSV.
//!
//! Floats are written with 17 significant digits in scientific notation, which
//! round-trips every `f64` exactly. An undefined `d2_iou` is an empty cell.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{EstimatorKind, GedReport};

use super::atomic_write;

pub const REPORT_HEADER: [&str; 10] = [
    "image_id",
    "model",
    "d2_ged",
    "d2_iou",
    "d2_det",
    "n_ann",
    "n_pred",
    "p_empty_ann",
    "p_empty_pred",
    "estimator",
];

/// One `(image, model)` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image_id: String,
    pub model: String,
    pub metrics: GedReport,
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn encode_report(rows: &[ReportRow]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let wrap = |source| Error::Csv {
        path: "<report>".into(),
        source,
    };
    w.write_record(REPORT_HEADER).map_err(wrap)?;
    for row in rows {
        let m = &row.metrics;
        w.write_record([
            row.image_id.clone(),
            row.model.clone(),
            format_float(m.d2_ged),
            m.d2_iou.map(format_float).unwrap_or_default(),
            format_float(m.d2_det),
            m.n_annotations.to_string(),
            m.n_predictions.to_string(),
            format_float(m.p_empty_ann),
            format_float(m.p_empty_pred),
            m.estimator.as_str().to_string(),
        ])
        .map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| Error::io("<report>", e.into_error()))
}

pub fn write_report(rows: &[ReportRow], path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &encode_report(rows)?)
}

pub fn decode_report(bytes: &[u8], path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let header = r.headers().map_err(wrap)?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::UnknownHeader {
            path: path.to_path_buf(),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(wrap)?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = |i: usize| record.get(i).unwrap_or("");
        let bad = |i: usize| Error::BadCell {
            path: path.to_path_buf(),
            line,
            column: REPORT_HEADER[i],
            value: cell(i).to_string(),
        };
        let float = |i: usize| -> Result<f64> {
            cell(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(i))
        };
        let count = |i: usize| -> Result<usize> { cell(i).parse().map_err(|_| bad(i)) };
        let d2_iou = if cell(3).is_empty() {
            None
        } else {
            Some(float(3)?)
        };
        let estimator: EstimatorKind = cell(9).parse().map_err(|_| bad(9))?;
        rows.push(ReportRow {
            image_id: cell(0).to_string(),
            model: cell(1).to_string(),
            metrics: GedReport {
                d2_ged: float(2)?,
                d2_iou,
                d2_det: float(4)?,
                n_annotations: count(5)?,
                n_predictions: count(6)?,
                p_empty_ann: float(7)?,
                p_empty_pred: float(8)?,
                estimator,
            },
        });
    }
    Ok(rows)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_report(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(id: &str, iou: Option<f64>) -> ReportRow {
        ReportRow {
            image_id: id.into(),
            model: "unet".into(),
            metrics: GedReport {
                d2_ged: 0.1 + 0.2,
                d2_iou: iou,
                d2_det: 1.0 / 3.0,
                n_annotations: 4,
                n_predictions: 16,
                p_empty_ann: 0.25,
                p_empty_pred: 0.0,
                estimator: EstimatorKind::Unbiased,
            },
        }
    }

    #[test]
    fn header_only_for_no_rows() {
        let bytes = encode_report(&[]).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "image_id,model,d2_ged,d2_iou,d2_det,n_ann,n_pred,p_empty_ann,p_empty_pred,estimator\n"
        );
    }

    #[test]
    fn undefined_iou_is_an_empty_cell() {
        let bytes = encode_report(&[row("img1", None)]).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line.split(',').nth(3), Some(""));
        let back = decode_report(&bytes, Path::new("r.csv")).unwrap();
        assert_eq!(back[0].metrics.d2_iou, None);
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(0.1 + 0.2), "3.0000000000000004e-1");
    }

    #[test]
    fn unknown_header() {
        let bytes = b"image,model\nx,y\n";
        assert!(matches!(
            decode_report(bytes, Path::new("r.csv")),
            Err(Error::UnknownHeader { .. })
        ));
    }

    #[test]
    fn non_numeric_cell() {
        let mut bytes = encode_report(&[]).unwrap();
        bytes.extend(b"img,unet,abc,,0,4,4,0,0,inclusive\n");
        match decode_report(&bytes, Path::new("r.csv")) {
            Err(Error::BadCell { column, line, .. }) => {
                assert_eq!(column, "d2_ged");
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
        let mut bytes = encode_report(&[]).unwrap();
        bytes.extend(b"img,unet,0,,0,4,4,0,0,median\n");
        assert!(matches!(
            decode_report(&bytes, Path::new("r.csv")),
            Err(Error::BadCell {
                column: "estimator",
                ..
            })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let rows = vec![row("a", Some(0.7)), row("b, with comma", None)];
        write_report(&rows, &path).unwrap();
        assert_eq!(read_report(&path).unwrap(), rows);
    }

    proptest! {
        #[test]
        fn floats_round_trip_bit_exactly(g in 0.0f64..4.0, i in proptest::option::of(0.0f64..2.0), d in 0.0f64..2.0, pa in 0.0f64..1.0) {
            let mut r = row("x", i);
            r.metrics.d2_ged = g;
            r.metrics.d2_det = d;
            r.metrics.p_empty_ann = pa;
            let back = decode_report(&encode_report(std::slice::from_ref(&r)).unwrap(), Path::new("r")).unwrap();
            prop_assert_eq!(back, vec![r]);
        }
    }
}
