//! Detection records, one per line:
//!
//! ```text
//! frame_id modality class_id score mu_x mu_y mu_w mu_h var_x var_y var_w var_h
//! ```
//!
//! `modality` is `rgb` or `depth`; reals are written as `{:.16e}` (17
//! significant digits), which reads back to the identical `f64`. Blank lines
//! and lines starting with `#` are skipped.

use std::fmt::Write as _;
use std::path::Path;

use super::{context, parse_f64, read_text, write_file};
use crate::geometry::{GaussianBox, Modality};
use crate::{Error, Result};

const FIELDS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub frame_id: String,
    pub bbox: GaussianBox,
}

pub fn render_detections(records: &[DetectionRecord]) -> Result<String> {
    let mut s = String::new();
    for r in records {
        if r.frame_id.is_empty() || r.frame_id.contains(char::is_whitespace) || r.frame_id.starts_with('#') {
            return Err(Error::InvalidValue(format!("unusable frame id {:?}", r.frame_id)));
        }
        let b = &r.bbox;
        write!(s, "{} {} {} {:.16e}", r.frame_id, b.modality, b.class_id, b.score).unwrap();
        for v in b.mean.iter().chain(&b.var) {
            write!(s, " {v:.16e}").unwrap();
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn write_detections(path: &Path, records: &[DetectionRecord]) -> Result<()> {
    write_file(path, render_detections(records)?.as_bytes())
}

pub fn read_detections(path: &Path) -> Result<Vec<DetectionRecord>> {
    parse_detections(&read_text(path)?, &context(path))
}

/// Strict parse: the first malformed line aborts with its line number.
pub fn parse_detections(text: &str, ctx: &str) -> Result<Vec<DetectionRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != FIELDS {
            return Err(Error::parse(
                ctx,
                line_no,
                format!("expected {FIELDS} fields, found {}", toks.len()),
            ));
        }
        let modality: Modality = toks[1]
            .parse()
            .map_err(|e: Error| Error::parse(ctx, line_no, e.to_string()))?;
        let class_id: u8 = toks[2]
            .parse()
            .map_err(|_| Error::parse(ctx, line_no, format!("bad class id {:?}", toks[2])))?;
        let score = parse_f64(toks[3], ctx, line_no, "score")?;
        let mut nums = [0.0; 8];
        for (k, tok) in toks[4..].iter().enumerate() {
            nums[k] = parse_f64(tok, ctx, line_no, "box")?;
        }
        let bbox = GaussianBox::new(
            [nums[0], nums[1], nums[2], nums[3]],
            [nums[4], nums[5], nums[6], nums[7]],
            score,
            class_id,
            modality,
        )
        .map_err(|e| Error::parse(ctx, line_no, e.to_string()))?;
        out.push(DetectionRecord {
            frame_id: toks[0].to_string(),
            bbox,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(score: f64) -> DetectionRecord {
        DetectionRecord {
            frame_id: "000007".into(),
            bbox: GaussianBox::new([10.0, 20.0, 4.0, 8.0], [0.25, 1.0 / 3.0, 2.0, 1e-300], score, 1, Modality::Depth)
                .unwrap(),
        }
    }

    #[test]
    fn exact_line_layout() {
        let s = render_detections(&[rec(0.9)]).unwrap();
        assert_eq!(
            s,
            "000007 depth 1 9.0000000000000002e-1 1.0000000000000000e1 2.0000000000000000e1 \
             4.0000000000000000e0 8.0000000000000000e0 2.5000000000000000e-1 3.3333333333333331e-1 \
             2.0000000000000000e0 1.0000000000000000e-300\n"
        );
        assert_eq!(parse_detections(&s, "t").unwrap(), vec![rec(0.9)]);
    }

    #[test]
    fn line_numbered_errors() {
        let good = render_detections(&[rec(0.5)]).unwrap();
        let text = format!("# header\n{good}{}\n", good.trim().replace("depth", "lidar"));
        let e = parse_detections(&text, "d.txt").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_detections("a rgb 0 0.5 1 1 1\n", "d.txt").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let bad_var = good.replace("2.5000000000000000e-1", "-1");
        assert!(parse_detections(&bad_var, "d").is_err());
        let nan = good.replace("2.5000000000000000e-1", "NaN");
        assert!(parse_detections(&nan, "d").is_err());
    }

    #[test]
    fn frame_ids_must_be_tokens() {
        let mut r = rec(0.5);
        r.frame_id = "a b".into();
        assert!(render_detections(&[r]).is_err());
    }
}
