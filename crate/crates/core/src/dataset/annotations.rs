use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::BoundingBox;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Parses `x,y,w,h` records. `nan,nan,nan,nan` yields `None` when `allow_missing` is set.
fn parse_records(text: &str, path: &Path, allow_missing: bool) -> Result<Vec<Option<BoundingBox>>> {
    let mut boxes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() {
            // trailing blank lines are tolerated; interior ones are not
            if text.lines().skip(i).all(|l| l.trim().is_empty()) {
                break;
            }
            return Err(parse_err(path, line_no, "empty record"));
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 4 comma-separated fields `x,y,w,h`, found {}", fields.len()),
            ));
        }
        let mut vals = [0.0; 4];
        for (slot, f) in vals.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .map_err(|_| parse_err(path, line_no, format!("`{f}` is not a number")))?;
        }
        if vals.iter().all(|v| v.is_nan()) {
            if allow_missing {
                boxes.push(None);
                continue;
            }
            return Err(parse_err(path, line_no, "missing box in ground truth"));
        }
        let bb = BoundingBox::new(vals[0], vals[1], vals[2], vals[3])
            .map_err(|e| parse_err(path, line_no, e.to_string()))?;
        boxes.push(Some(bb));
    }
    if boxes.is_empty() {
        return Err(parse_err(path, 0, "no records"));
    }
    Ok(boxes)
}

pub fn parse_groundtruth_str(text: &str, path: &Path) -> Result<Vec<BoundingBox>> {
    Ok(parse_records(text, path, false)?
        .into_iter()
        .map(|b| b.expect("ground truth never yields missing boxes"))
        .collect())
}

/// Reads a `groundtruth.txt`: one `x,y,w,h` record per line, LF or CRLF.
pub fn parse_groundtruth(path: impl AsRef<Path>) -> Result<Vec<BoundingBox>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_groundtruth_str(&text, path)
}

/// Reads prediction records; `nan,nan,nan,nan` marks a lost frame.
pub fn parse_prediction_boxes(path: impl AsRef<Path>) -> Result<Vec<Option<BoundingBox>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(&text, path, true)
}

/// LF-terminated `x,y,w,h` lines; `None` is written as `nan,nan,nan,nan`.
pub fn format_boxes<'a>(boxes: impl IntoIterator<Item = Option<&'a BoundingBox>>) -> String {
    let mut out = String::new();
    for b in boxes {
        match b {
            Some(b) => writeln!(out, "{},{},{},{}", b.x, b.y, b.w, b.h),
            None => writeln!(out, "nan,nan,nan,nan"),
        }
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn write_groundtruth(boxes: &[BoundingBox], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_boxes(boxes.iter().map(Some))).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("groundtruth.txt")
    }

    #[test]
    fn parses_integer_and_real_records() {
        let boxes = parse_groundtruth_str("10,20,30,40\r\n1.5, 2.5,3,4\n0,0,1,1\n\n", p()).unwrap();
        assert_eq!(boxes.len(), 3);
        assert_eq!(boxes[0], BoundingBox::new(10.0, 20.0, 30.0, 40.0).unwrap());
        assert_eq!(boxes[1], BoundingBox::new(1.5, 2.5, 3.0, 4.0).unwrap());
    }

    #[test]
    fn arity_error_names_line() {
        let err = parse_groundtruth_str("10,20,30", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_groundtruth_str("1,2,3,4\n1,2,x,4", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_groundtruth_str("1,2,3,4\n\n1,2,3,4", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_and_nan_rejected_for_groundtruth() {
        assert!(parse_groundtruth_str("", p()).is_err());
        assert!(parse_groundtruth_str("\n\n", p()).is_err());
        assert!(parse_groundtruth_str("nan,nan,nan,nan", p()).is_err());
        assert!(parse_groundtruth_str("0,0,-1,2", p()).is_err());
    }

    #[test]
    fn nan_record_is_lost_frame_in_predictions() {
        let boxes = parse_records("1,2,3,4\nnan,nan,nan,nan\n", p(), true).unwrap();
        assert_eq!(boxes[1], None);
        let text = format_boxes(boxes.iter().map(Option::as_ref));
        assert_eq!(text, "1,2,3,4\nnan,nan,nan,nan\n");
    }
}
