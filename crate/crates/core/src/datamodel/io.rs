//! Text file formats.
//!
//! A sequence directory holds:
//!
//! ```text
//! sequence.txt        header + one detector candidate per line
//! saliency/000000.txt one file per frame, row-major decimals, one image row per line
//! groundtruth.txt     optional label container
//! ```
//!
//! `sequence.txt` starts with `key: value` lines (`frame_count`, `width`,
//! `height`, `descriptor_dim`) followed by records of whitespace-separated fields:
//!
//! ```text
//! frame x y w h objectness source counts descriptor
//! 0 1 0 2 1 0.9 detector 1,2,1 0.5,-0.25
//! ```
//!
//! `source` is `detector` or `propagated:<id>`; `counts` and `descriptor` are
//! comma-separated. A label container (`groundtruth.txt`, `labels.txt`) has a
//! `frame_count`/`width`/`height` header and `frame instance_id counts` records.
//! The provenance sidecar lists `frame instance_id kind total_score candidate`
//! where kind is `assigned` or `spawned` (score `-`) and candidate is a detector
//! index or `propagated:<id>`. Blank lines and `#` comments are ignored everywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::rle::RleMask;
use super::types::*;

pub const SEQUENCE_FILE: &str = "sequence.txt";
pub const SALIENCY_DIR: &str = "saliency";
pub const GROUND_TRUTH_FILE: &str = "groundtruth.txt";
pub const LABELS_FILE: &str = "labels.txt";
pub const PROVENANCE_FILE: &str = "provenance.txt";

pub fn saliency_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(SALIENCY_DIR).join(format!("{frame:06}.txt"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then_some((i + 1, l))
    })
}

struct Header {
    values: BTreeMap<String, (usize, String)>,
}

impl Header {
    fn get<V: std::str::FromStr>(&self, file: &str, key: &str) -> Result<V> {
        let (line, raw) = self
            .values
            .get(key)
            .ok_or_else(|| Error::parse(file, 0, format!("missing header key `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::parse(file, *line, format!("bad value `{raw}` for `{key}`")))
    }
}

/// Splits a file into its `key: value` header and the remaining record lines.
fn split_header<'a>(
    file: &str,
    text: &'a str,
    allowed: &[&str],
) -> Result<(Header, Vec<(usize, &'a str)>)> {
    let mut values = BTreeMap::new();
    let mut records = Vec::new();
    for (n, line) in content_lines(text) {
        let first = line.split_whitespace().next().unwrap_or("");
        if let Some(key) = first.strip_suffix(':') {
            if !records.is_empty() {
                return Err(Error::parse(file, n, "header line after records"));
            }
            if !allowed.contains(&key) {
                return Err(Error::parse(file, n, format!("unknown header key `{key}`")));
            }
            let value = line[first.len()..].trim().to_string();
            if values.insert(key.to_string(), (n, value)).is_some() {
                return Err(Error::parse(file, n, format!("duplicate header key `{key}`")));
            }
        } else {
            records.push((n, line));
        }
    }
    Ok((Header { values }, records))
}

fn field<V: std::str::FromStr>(file: &str, line: usize, name: &str, raw: &str) -> Result<V> {
    raw.parse()
        .map_err(|_| Error::parse(file, line, format!("bad {name} `{raw}`")))
}

fn list<V: std::str::FromStr>(file: &str, line: usize, name: &str, raw: &str) -> Result<Vec<V>> {
    raw.split(',')
        .map(|v| field(file, line, name, v.trim()))
        .collect()
}

fn join<V: std::fmt::Display>(values: &[V]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn parse_source(file: &str, line: usize, raw: &str) -> Result<CandidateSource> {
    if raw == "detector" {
        return Ok(CandidateSource::Detector);
    }
    if let Some(id) = raw.strip_prefix("propagated:") {
        let id: u32 = field(file, line, "instance id", id)?;
        if id == 0 {
            return Err(Error::parse(file, line, "instance id must be positive"));
        }
        return Ok(CandidateSource::Propagated(InstanceId(id)));
    }
    Err(Error::parse(file, line, format!("bad source tag `{raw}`")))
}

fn format_source(source: CandidateSource) -> String {
    match source {
        CandidateSource::Detector => "detector".into(),
        CandidateSource::Propagated(id) => format!("propagated:{id}"),
    }
}

fn check_frame_count(file: &str, frame_count: usize) -> Result<()> {
    if frame_count == 0 {
        return Err(Error::parse(file, 0, "frame_count must be at least 1"));
    }
    Ok(())
}

/// Parses `sequence.txt` contents (without saliency or ground truth).
/// Frame size, descriptor dimension and per-frame detector candidates.
pub type CandidateFile<T> = (FrameSize, usize, Vec<Vec<CandidateProposal<T>>>);

pub fn parse_candidates<T: Scalar>(file: &str, text: &str) -> Result<CandidateFile<T>> {
    let (header, records) = split_header(
        file,
        text,
        &["frame_count", "width", "height", "descriptor_dim"],
    )?;
    let frame_count: usize = header.get(file, "frame_count")?;
    check_frame_count(file, frame_count)?;
    let size = FrameSize::new(header.get(file, "width")?, header.get(file, "height")?);
    let descriptor_dim: usize = header.get(file, "descriptor_dim")?;
    if descriptor_dim == 0 {
        return Err(Error::parse(file, 0, "descriptor_dim must be at least 1"));
    }
    let mut frames: Vec<Vec<CandidateProposal<T>>> = vec![Vec::new(); frame_count];
    for (n, line) in records {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 9 {
            return Err(Error::parse(
                file,
                n,
                format!("expected 9 fields, found {}", tokens.len()),
            ));
        }
        let frame: usize = field(file, n, "frame index", tokens[0])?;
        if frame >= frame_count {
            return Err(Error::parse(
                file,
                n,
                format!("frame index {frame} outside 0..{frame_count}"),
            ));
        }
        let coord = |i: usize, name: &str| field::<T>(file, n, name, tokens[i]);
        let bbox = BoundingBox::new(coord(1, "x")?, coord(2, "y")?, coord(3, "w")?, coord(4, "h")?)
            .map_err(|e| Error::parse(file, n, e.to_string()))?;
        let objectness: T = coord(5, "objectness")?;
        let source = parse_source(file, n, tokens[6])?;
        let counts: Vec<u32> = list(file, n, "run length", tokens[7])?;
        let mask = RleMask::from_counts(size.width, size.height, counts)
            .map_err(|e| Error::parse(file, n, e.to_string()))?;
        let descriptor: Vec<T> = list(file, n, "descriptor value", tokens[8])?;
        let candidate = CandidateProposal {
            frame_index: frame,
            bbox,
            mask,
            objectness,
            descriptor,
            source,
        };
        candidate
            .validate(size, descriptor_dim)
            .map_err(|e| Error::parse(file, n, e.to_string()))?;
        frames[frame].push(candidate);
    }
    Ok((size, descriptor_dim, frames))
}

pub fn format_candidates<T: Scalar>(
    size: FrameSize,
    descriptor_dim: usize,
    frames: &[Vec<CandidateProposal<T>>],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "frame_count: {}", frames.len());
    let _ = writeln!(s, "width: {}", size.width);
    let _ = writeln!(s, "height: {}", size.height);
    let _ = writeln!(s, "descriptor_dim: {descriptor_dim}");
    s.push_str("# frame x y w h objectness source counts descriptor\n");
    for c in frames.iter().flatten() {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {}",
            c.frame_index,
            c.bbox.x,
            c.bbox.y,
            c.bbox.w,
            c.bbox.h,
            c.objectness,
            format_source(c.source),
            join(c.mask.counts()),
            join(&c.descriptor)
        );
    }
    s
}

pub fn parse_saliency<T: Scalar>(file: &str, text: &str, size: FrameSize) -> Result<SaliencyMap<T>> {
    let mut values = Vec::with_capacity(size.pixels());
    for (n, line) in content_lines(text) {
        for tok in line.split_whitespace() {
            values.push(field::<T>(file, n, "saliency value", tok)?);
        }
    }
    SaliencyMap::new(size.width, size.height, values).map_err(|e| Error::parse(file, 0, e.to_string()))
}

pub fn format_saliency<T: Scalar>(map: &SaliencyMap<T>) -> String {
    let mut s = String::new();
    for row in map.values().chunks(map.width() as usize) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s
}

pub fn parse_label_maps(file: &str, text: &str) -> Result<(FrameSize, Vec<LabelMap>)> {
    let (header, records) = split_header(file, text, &["frame_count", "width", "height"])?;
    let frame_count: usize = header.get(file, "frame_count")?;
    check_frame_count(file, frame_count)?;
    let size = FrameSize::new(header.get(file, "width")?, header.get(file, "height")?);
    let mut maps = vec![LabelMap::new(size); frame_count];
    for (n, line) in records {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::parse(
                file,
                n,
                format!("expected 3 fields, found {}", tokens.len()),
            ));
        }
        let frame: usize = field(file, n, "frame index", tokens[0])?;
        if frame >= frame_count {
            return Err(Error::parse(
                file,
                n,
                format!("frame index {frame} outside 0..{frame_count}"),
            ));
        }
        let id: u32 = field(file, n, "instance id", tokens[1])?;
        let counts: Vec<u32> = list(file, n, "run length", tokens[2])?;
        let mask = RleMask::from_counts(size.width, size.height, counts)
            .map_err(|e| Error::parse(file, n, e.to_string()))?;
        maps[frame]
            .insert(InstanceId(id), mask)
            .map_err(|e| Error::parse(file, n, e.to_string()))?;
    }
    Ok((size, maps))
}

pub fn format_label_maps(size: FrameSize, maps: &[LabelMap]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "frame_count: {}", maps.len());
    let _ = writeln!(s, "width: {}", size.width);
    let _ = writeln!(s, "height: {}", size.height);
    s.push_str("# frame instance_id counts\n");
    for (f, map) in maps.iter().enumerate() {
        for (id, mask) in map.iter() {
            let _ = writeln!(s, "{f} {id} {}", join(mask.counts()));
        }
    }
    s
}

pub fn parse_provenance<T: Scalar>(file: &str, text: &str) -> Result<Vec<ProvenanceRecord<T>>> {
    let mut out = Vec::new();
    for (n, line) in content_lines(text) {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(Error::parse(
                file,
                n,
                format!("expected 5 fields, found {}", tokens.len()),
            ));
        }
        let frame: usize = field(file, n, "frame index", tokens[0])?;
        let id: u32 = field(file, n, "instance id", tokens[1])?;
        if id == 0 {
            return Err(Error::parse(file, n, "instance id must be positive"));
        }
        let kind = match (tokens[2], tokens[3]) {
            ("assigned", score) => ProvenanceKind::Assigned {
                total_score: field(file, n, "total score", score)?,
            },
            ("spawned", "-") => ProvenanceKind::Spawned,
            (k, s) => {
                return Err(Error::parse(file, n, format!("bad kind/score `{k} {s}`")));
            }
        };
        let candidate = match tokens[4].strip_prefix("propagated:") {
            Some(src) => MatchedCandidate::Propagated(InstanceId(field(file, n, "instance id", src)?)),
            None => MatchedCandidate::Detector(field(file, n, "candidate index", tokens[4])?),
        };
        out.push(ProvenanceRecord {
            frame,
            instance: InstanceId(id),
            kind,
            candidate,
        });
    }
    Ok(out)
}

pub fn format_provenance<T: Scalar>(records: &[ProvenanceRecord<T>]) -> String {
    let mut s = String::from("# frame instance_id kind total_score candidate\n");
    for r in records {
        let (kind, score) = match r.kind {
            ProvenanceKind::Assigned { total_score } => ("assigned", total_score.to_string()),
            ProvenanceKind::Spawned => ("spawned", "-".to_string()),
        };
        let candidate = match r.candidate {
            MatchedCandidate::Detector(i) => i.to_string(),
            MatchedCandidate::Propagated(id) => format!("propagated:{id}"),
        };
        let _ = writeln!(s, "{} {} {kind} {score} {candidate}", r.frame, r.instance);
    }
    s
}

/// Reads a label container from a file, or from `<dir>/<default_name>` when given a directory.
pub fn load_label_maps(path: &Path, default_name: &str) -> Result<(FrameSize, Vec<LabelMap>)> {
    let file = if path.is_dir() {
        path.join(default_name)
    } else {
        path.to_path_buf()
    };
    parse_label_maps(&file.display().to_string(), &read(&file)?)
}

pub fn load_sequence<T: Scalar>(dir: &Path) -> Result<SequenceInput<T>> {
    let seq_path = dir.join(SEQUENCE_FILE);
    let (size, descriptor_dim, candidates) =
        parse_candidates(&seq_path.display().to_string(), &read(&seq_path)?)?;
    let mut saliency = Vec::with_capacity(candidates.len());
    for frame in 0..candidates.len() {
        let p = saliency_path(dir, frame);
        if !p.is_file() {
            return Err(Error::MissingFrame {
                frame,
                what: format!("no saliency file {}", p.display()),
            });
        }
        saliency.push(parse_saliency(&p.display().to_string(), &read(&p)?, size)?);
    }
    let gt_path = dir.join(GROUND_TRUTH_FILE);
    let ground_truth = if gt_path.is_file() {
        let (gt_size, maps) = load_label_maps(&gt_path, GROUND_TRUTH_FILE)?;
        let file = gt_path.display().to_string();
        if gt_size != size {
            return Err(Error::parse(file, 0, "ground-truth frame size differs from sequence"));
        }
        if maps.len() != candidates.len() {
            return Err(Error::MissingFrame {
                frame: maps.len().min(candidates.len()),
                what: format!("{file} has {} frames, expected {}", maps.len(), candidates.len()),
            });
        }
        Some(maps)
    } else {
        None
    };
    let input = SequenceInput {
        frame_size: size,
        descriptor_dim,
        candidates,
        saliency,
        ground_truth,
    };
    input.validate()?;
    Ok(input)
}

pub fn save_sequence<T: Scalar>(input: &SequenceInput<T>, dir: &Path) -> Result<()> {
    write(
        &dir.join(SEQUENCE_FILE),
        &format_candidates(input.frame_size, input.descriptor_dim, &input.candidates),
    )?;
    for (f, map) in input.saliency.iter().enumerate() {
        write(&saliency_path(dir, f), &format_saliency(map))?;
    }
    if let Some(gt) = &input.ground_truth {
        write(&dir.join(GROUND_TRUTH_FILE), &format_label_maps(input.frame_size, gt))?;
    }
    Ok(())
}

pub fn save_result<T: Scalar>(result: &SequenceResult<T>, dir: &Path) -> Result<()> {
    write(&dir.join(LABELS_FILE), &format_label_maps(result.frame_size, &result.labels))?;
    write(&dir.join(PROVENANCE_FILE), &format_provenance(&result.provenance))
}

pub fn load_result<T: Scalar>(dir: &Path) -> Result<SequenceResult<T>> {
    let (frame_size, labels) = load_label_maps(&dir.join(LABELS_FILE), LABELS_FILE)?;
    let prov_path = dir.join(PROVENANCE_FILE);
    let provenance = parse_provenance(&prov_path.display().to_string(), &read(&prov_path)?)?;
    Ok(SequenceResult {
        frame_size,
        labels,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_FRAMES: &str = "\
frame_count: 2
width: 4
height: 1
descriptor_dim: 2
0 1 0 2 1 0.9 detector 1,2,1 0.5,-0.25
1 2 0 2 1 0.8 detector 2,2 0.5,0
";

    #[test]
    fn parses_two_frame_fixture() {
        let (size, dim, frames) = parse_candidates::<f64>("t", TWO_FRAMES).unwrap();
        assert_eq!(size, FrameSize::new(4, 1));
        assert_eq!(dim, 2);
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[1][0].mask.decode().indices(), vec![2, 3]);
        assert_eq!(frames[0][0].descriptor, vec![0.5, -0.25]);
    }

    #[test]
    fn bad_run_sum_is_parse_error() {
        let text = TWO_FRAMES.replace("1,2,1", "1,2,2");
        match parse_candidates::<f64>("t", &text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn invariant_violations_rejected() {
        for (from, to) in [
            ("0.9 detector", "1.5 detector"),
            ("0.5,-0.25", "0.5"),
            (" 2 1 0.9", " 0 1 0.9"),
            ("0 1 0 2", "5 1 0 2"),
            ("detector 1,2,1", "tracker 1,2,1"),
            ("frame_count: 2", "frame_count: 0"),
        ] {
            let text = TWO_FRAMES.replacen(from, to, 1);
            assert!(parse_candidates::<f64>("t", &text).is_err(), "{from} -> {to}");
        }
        assert!(parse_saliency::<f64>("s", "0.5 1.2 0 0", FrameSize::new(4, 1)).is_err());
        assert!(parse_saliency::<f64>("s", "0.5 0.2 0", FrameSize::new(4, 1)).is_err());
    }

    #[test]
    fn overlapping_labels_rejected() {
        let text = "frame_count: 1\nwidth: 4\nheight: 1\n0 1 0,2,2\n0 2 1,1,2\n";
        assert!(parse_label_maps("g", text).is_err());
        let text = "frame_count: 1\nwidth: 4\nheight: 1\n0 0 0,2,2\n";
        assert!(parse_label_maps("g", text).is_err());
    }

    #[test]
    fn provenance_roundtrip() {
        let records = vec![
            ProvenanceRecord {
                frame: 0,
                instance: InstanceId(1),
                kind: ProvenanceKind::Spawned,
                candidate: MatchedCandidate::Detector(0),
            },
            ProvenanceRecord {
                frame: 1,
                instance: InstanceId(1),
                kind: ProvenanceKind::Assigned { total_score: 0.9125 },
                candidate: MatchedCandidate::Propagated(InstanceId(1)),
            },
        ];
        let text = format_provenance(&records);
        assert_eq!(parse_provenance::<f64>("p", &text).unwrap(), records);
    }
}
