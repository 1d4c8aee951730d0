//! Ground-truth corpus text, one object per line:
//!
//! ```text
//! frame_id class_name x_min y_min x_max y_max
//! ```
//!
//! A frame without objects is written as the bare `frame_id`. Coordinates use
//! the shortest decimal that reads back to the same `f64`. Lines of a frame are
//! contiguous; frames keep file order.

use std::fmt::Write as _;
use std::path::Path;

use super::{context, parse_f64, read_text, write_file};
use crate::eval::{class_id, class_name, GroundTruthFrame, GtObject};
use crate::geometry::CornerBox;
use crate::{Error, Result};

pub fn render_corpus(frames: &[GroundTruthFrame]) -> Result<String> {
    let mut s = String::new();
    for f in frames {
        if f.frame_id.is_empty() || f.frame_id.contains(char::is_whitespace) || f.frame_id.starts_with('#') {
            return Err(Error::InvalidValue(format!("unusable frame id {:?}", f.frame_id)));
        }
        f.validate()?;
        if f.objects.is_empty() {
            writeln!(s, "{}", f.frame_id).unwrap();
        }
        for o in &f.objects {
            let b = &o.bbox;
            writeln!(
                s,
                "{} {} {} {} {} {}",
                f.frame_id,
                class_name(o.class_id),
                b.x_min,
                b.y_min,
                b.x_max,
                b.y_max
            )
            .unwrap();
        }
    }
    Ok(s)
}

pub fn write_corpus(path: &Path, frames: &[GroundTruthFrame]) -> Result<()> {
    write_file(path, render_corpus(frames)?.as_bytes())
}

pub fn read_corpus(path: &Path) -> Result<Vec<GroundTruthFrame>> {
    parse_corpus(&read_text(path)?, &context(path))
}

pub fn parse_corpus(text: &str, ctx: &str) -> Result<Vec<GroundTruthFrame>> {
    let mut frames: Vec<GroundTruthFrame> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        let id = toks[0];
        let new_frame = frames.last().is_none_or(|f| f.frame_id != id);
        if new_frame {
            if frames.iter().any(|f| f.frame_id == id) {
                return Err(Error::parse(ctx, line_no, format!("frame {id} is not contiguous")));
            }
            frames.push(GroundTruthFrame {
                frame_id: id.to_string(),
                objects: Vec::new(),
            });
        }
        match toks.len() {
            1 if new_frame => continue,
            6 => {}
            n => return Err(Error::parse(ctx, line_no, format!("expected 6 fields, found {n}"))),
        }
        let cid = class_id(toks[1])
            .ok_or_else(|| Error::parse(ctx, line_no, format!("unknown class {:?}", toks[1])))?;
        let mut c = [0.0; 4];
        for (k, tok) in toks[2..].iter().enumerate() {
            c[k] = parse_f64(tok, ctx, line_no, "box")?;
        }
        let bbox = CornerBox::new(c[0], c[1], c[2], c[3]).map_err(|e| Error::parse(ctx, line_no, e.to_string()))?;
        frames
            .last_mut()
            .expect("frame pushed above")
            .objects
            .push(GtObject { class_id: cid, bbox });
    }
    Ok(frames)
}
