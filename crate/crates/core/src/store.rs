//! On-disk formats: manifests, prediction-set directories, correction tables
//! and the annotation journal.
//!
//! A prediction-set directory holds three files:
//!
//! ```text
//! meta.json   {"format_version":1, "model_id", "method_id", "replicate_index",
//!              "dataset_id", "num_images", "num_classes",
//!              "dtype":"f32le", "layout":"row-major"}
//! ids.txt     one image id per line (LF, UTF-8); the only source of row order
//! scores.bin  num_images * num_classes IEEE-754 binary32, little-endian,
//!             row-major, no header, no padding
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ClassVocabulary, DatasetManifest, ErrorAnnotation, ImageRecord, LabelCorrectionTable, PredictionSet, RunInfo,
};

pub const FORMAT_VERSION: u32 = 1;
pub const META_FILE: &str = "meta.json";
pub const IDS_FILE: &str = "ids.txt";
pub const SCORES_FILE: &str = "scores.bin";

const DTYPE: &str = "f32le";
const LAYOUT: &str = "row-major";

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    format_version: u32,
    dataset_id: String,
    classes: Vec<String>,
    images: Vec<ImageRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionMeta {
    format_version: u32,
    model_id: String,
    method_id: String,
    replicate_index: u32,
    dataset_id: String,
    num_images: usize,
    num_classes: usize,
    dtype: String,
    layout: String,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::MalformedJson {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let file: ManifestFile = read_json(path)?;
    if file.format_version != FORMAT_VERSION {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            message: format!("format_version {}", file.format_version),
        });
    }
    let vocabulary = ClassVocabulary::new(file.classes)?;
    DatasetManifest::new(file.dataset_id, vocabulary, file.images)
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let file = ManifestFile {
        format_version: FORMAT_VERSION,
        dataset_id: manifest.dataset_id().to_string(),
        classes: manifest.vocabulary().names().to_vec(),
        images: manifest.records().to_vec(),
    };
    write_json(path, &file)
}

/// Loads a prediction-set directory and validates it against `manifest`.
pub fn load_prediction_set(dir: &Path, manifest: &DatasetManifest) -> Result<PredictionSet> {
    let meta_path = dir.join(META_FILE);
    let meta: PredictionMeta = read_json(&meta_path)?;
    let unsupported = |message: String| Error::UnsupportedFormat {
        path: meta_path.clone(),
        message,
    };
    if meta.format_version != FORMAT_VERSION {
        return Err(unsupported(format!("format_version {}", meta.format_version)));
    }
    if meta.dtype != DTYPE {
        return Err(unsupported(format!("dtype {:?}", meta.dtype)));
    }
    if meta.layout != LAYOUT {
        return Err(unsupported(format!("layout {:?}", meta.layout)));
    }
    if meta.dataset_id != manifest.dataset_id() {
        return Err(Error::DatasetIdMismatch {
            expected: manifest.dataset_id().to_string(),
            found: meta.dataset_id,
        });
    }
    if meta.num_classes != manifest.num_classes() {
        return Err(Error::ShapeMismatch(format!(
            "meta.json declares {} classes, manifest has {}",
            meta.num_classes,
            manifest.num_classes()
        )));
    }

    let ids_path = dir.join(IDS_FILE);
    let ids_bytes = fs::read(&ids_path).map_err(|e| Error::io(&ids_path, e))?;
    let ids_text = String::from_utf8(ids_bytes).map_err(|_| Error::UnsupportedFormat {
        path: ids_path.clone(),
        message: "not UTF-8".into(),
    })?;
    let image_ids = parse_ids(&ids_text);
    if image_ids.len() != meta.num_images {
        return Err(Error::ShapeMismatch(format!(
            "ids.txt has {} lines, meta.json declares {} images",
            image_ids.len(),
            meta.num_images
        )));
    }

    let scores_path = dir.join(SCORES_FILE);
    let mut file = File::open(&scores_path).map_err(|e| Error::io(&scores_path, e))?;
    let actual = file.metadata().map_err(|e| Error::io(&scores_path, e))?.len();
    let expected = (meta.num_images * meta.num_classes * 4) as u64;
    if actual != expected {
        return Err(Error::SizeMismatch { expected, actual });
    }
    let mut raw = Vec::with_capacity(expected as usize);
    file.read_to_end(&mut raw).map_err(|e| Error::io(&scores_path, e))?;
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();

    let info = RunInfo {
        model_id: meta.model_id,
        method_id: meta.method_id,
        replicate_index: meta.replicate_index,
        dataset_id: meta.dataset_id,
    };
    let ps = PredictionSet::from_rows(info, image_ids, meta.num_classes, values)?;
    ps.validate_against(manifest)?;
    Ok(ps)
}

fn parse_ids(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').map(String::from).collect()
}

/// Writes `ps` as a prediction-set directory, creating `dir` if needed and
/// overwriting any previous dump there.
pub fn write_prediction_set(ps: &PredictionSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let info = ps.info();
    let meta = PredictionMeta {
        format_version: FORMAT_VERSION,
        model_id: info.model_id.clone(),
        method_id: info.method_id.clone(),
        replicate_index: info.replicate_index,
        dataset_id: info.dataset_id.clone(),
        num_images: ps.num_images(),
        num_classes: ps.num_classes(),
        dtype: DTYPE.into(),
        layout: LAYOUT.into(),
    };
    write_json(&dir.join(META_FILE), &meta)?;

    let mut ids = String::new();
    for id in ps.image_ids() {
        ids.push_str(id);
        ids.push('\n');
    }
    let ids_path = dir.join(IDS_FILE);
    fs::write(&ids_path, ids).map_err(|e| Error::io(&ids_path, e))?;

    let scores_path = dir.join(SCORES_FILE);
    let file = File::create(&scores_path).map_err(|e| Error::io(&scores_path, e))?;
    let mut out = BufWriter::new(file);
    for v in ps.scores().iter() {
        out.write_all(&v.to_le_bytes()).map_err(|e| Error::io(&scores_path, e))?;
    }
    out.flush().map_err(|e| Error::io(&scores_path, e))
}

pub fn load_corrections(path: &Path) -> Result<LabelCorrectionTable> {
    read_json(path)
}

pub fn write_corrections(table: &LabelCorrectionTable, path: &Path) -> Result<()> {
    write_json(path, table)
}

/// Appends one annotation to the JSONL journal and fsyncs before returning.
///
/// Only one writer may append at a time. A torn final line left by a crashed
/// writer is cut off first, since it was never a committed record.
pub fn append_annotation(log: &Path, annotation: &ErrorAnnotation) -> Result<()> {
    let mut line = serde_json::to_vec(annotation).map_err(|e| Error::Invalid(e.to_string()))?;
    line.push(b'\n');

    let mut file = OpenOptions::new()
        .create(true)
        .read(true)
        .append(true)
        .open(log)
        .map_err(|e| Error::io(log, e))?;
    repair_tail(&mut file, log)?;
    file.write_all(&line).map_err(|e| Error::io(log, e))?;
    file.sync_data().map_err(|e| Error::io(log, e))
}

fn repair_tail(file: &mut File, log: &Path) -> Result<()> {
    let len = file.metadata().map_err(|e| Error::io(log, e))?.len();
    if len == 0 {
        return Ok(());
    }
    let mut contents = Vec::with_capacity(len as usize);
    file.seek(SeekFrom::Start(0)).map_err(|e| Error::io(log, e))?;
    file.read_to_end(&mut contents).map_err(|e| Error::io(log, e))?;
    if contents.last() == Some(&b'\n') {
        return Ok(());
    }
    let start = contents.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    let tail = &contents[start..];
    if serde_json::from_slice::<ErrorAnnotation>(tail).is_ok() {
        file.write_all(b"\n").map_err(|e| Error::io(log, e))?;
    } else {
        log::warn!("{}: discarding torn final line ({} bytes)", log.display(), tail.len());
        file.set_len(start as u64).map_err(|e| Error::io(log, e))?;
    }
    Ok(())
}

/// Reads every committed annotation in journal order. A missing journal is
/// empty; an unterminated final line that does not parse is discarded.
pub fn read_annotations(log: &Path) -> Result<Vec<ErrorAnnotation>> {
    let bytes = match fs::read(log) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(log, e)),
    };
    let malformed = |line: usize, message: String| Error::MalformedJournal {
        path: log.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    let mut rest = &bytes[..];
    let mut line_no = 0;
    while !rest.is_empty() {
        line_no += 1;
        let (line, terminated) = match rest.iter().position(|&b| b == b'\n') {
            Some(p) => {
                let l = &rest[..p];
                rest = &rest[p + 1..];
                (l, true)
            }
            None => {
                let l = rest;
                rest = &[];
                (l, false)
            }
        };
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        match serde_json::from_slice::<ErrorAnnotation>(line) {
            Ok(a) => out.push(a),
            Err(_) if !terminated => {
                log::warn!("{}: ignoring partially written final line", log.display());
            }
            Err(e) => return Err(malformed(line_no, e.to_string())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ErrorClass, Split};
    use chrono::{TimeZone, Utc};
    use tempfile::tempdir;

    fn manifest_json(body: &str) -> tempfile::TempDir {
        let dir = tempdir().unwrap();
        fs::write(dir.path().join("m.json"), body).unwrap();
        dir
    }

    const MINIMAL: &str = r#"{"format_version":1,"dataset_id":"d","classes":["a","b"],
        "images":[{"image_id":"i1","label_index":0,"split":"test"},
                  {"image_id":"i2","label_index":1,"split":"train","image_path":"x/i2.jpg"},
                  {"image_id":"i3","label_index":1,"split":"test"}]}"#;

    #[test]
    fn minimal_manifest() {
        let dir = manifest_json(MINIMAL);
        let m = load_manifest(&dir.path().join("m.json")).unwrap();
        assert_eq!(m.num_classes(), 2);
        assert_eq!(m.len(), 3);
        assert_eq!(m.record("i2").unwrap().image_path.as_deref(), Some("x/i2.jpg"));
        assert_eq!(m.record("i2").unwrap().split, Split::Train);
    }

    #[test]
    fn manifest_errors_are_named() {
        let dir = manifest_json("{not json");
        assert!(matches!(load_manifest(&dir.path().join("m.json")), Err(Error::MalformedJson { .. })));

        let dup = MINIMAL.replace("\"i3\"", "\"i1\"");
        let dir = manifest_json(&dup);
        assert!(matches!(load_manifest(&dir.path().join("m.json")), Err(Error::DuplicateImageId(id)) if id == "i1"));

        let oob = MINIMAL.replace("\"label_index\":1,\"split\":\"test\"", "\"label_index\":2,\"split\":\"test\"");
        let dir = manifest_json(&oob);
        assert!(matches!(
            load_manifest(&dir.path().join("m.json")),
            Err(Error::LabelOutOfRange { image_id, .. }) if image_id == "i3"
        ));

        let v2 = MINIMAL.replace("\"format_version\":1", "\"format_version\":2");
        let dir = manifest_json(&v2);
        assert!(matches!(load_manifest(&dir.path().join("m.json")), Err(Error::UnsupportedFormat { .. })));
    }

    fn small_set() -> (DatasetManifest, PredictionSet) {
        let dir = manifest_json(MINIMAL);
        let m = load_manifest(&dir.path().join("m.json")).unwrap();
        let info = RunInfo {
            model_id: "r0".into(),
            method_id: "m".into(),
            replicate_index: 0,
            dataset_id: "d".into(),
        };
        let ps = PredictionSet::from_rows(info, vec!["i3".into(), "i1".into()], 2, vec![0.5, -1.0, 2.0, 1e-40])
            .unwrap();
        (m, ps)
    }

    #[test]
    fn writes_three_files_and_reloads() {
        let (m, ps) = small_set();
        let dir = tempdir().unwrap();
        let target = dir.path().join("run");
        write_prediction_set(&ps, &target).unwrap();
        let mut names: Vec<_> = fs::read_dir(&target)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        assert_eq!(names, ["ids.txt", "meta.json", "scores.bin"]);
        assert_eq!(fs::metadata(target.join(SCORES_FILE)).unwrap().len(), 16);
        assert_eq!(fs::read_to_string(target.join(IDS_FILE)).unwrap(), "i3\ni1\n");
        let back = load_prediction_set(&target, &m).unwrap();
        assert!(back.bit_identical(&ps));
        // second write over the same directory is a no-op in content
        write_prediction_set(&ps, &target).unwrap();
        assert!(load_prediction_set(&target, &m).unwrap().bit_identical(&ps));
    }

    #[test]
    fn load_errors() {
        let (m, ps) = small_set();
        let dir = tempdir().unwrap();
        let target = dir.path().join("run");
        write_prediction_set(&ps, &target).unwrap();

        let bin = target.join(SCORES_FILE);
        let full = fs::read(&bin).unwrap();
        fs::write(&bin, &full[..15]).unwrap();
        assert!(matches!(
            load_prediction_set(&target, &m),
            Err(Error::SizeMismatch { expected: 16, actual: 15 })
        ));

        let mut nan = full.clone();
        nan[8..12].copy_from_slice(&f32::NAN.to_le_bytes());
        fs::write(&bin, &nan).unwrap();
        assert!(matches!(
            load_prediction_set(&target, &m),
            Err(Error::NonFiniteScore { row: 1, column: 0 })
        ));
        fs::write(&bin, &full).unwrap();

        fs::write(target.join(IDS_FILE), "i3\nzzz\n").unwrap();
        assert!(matches!(load_prediction_set(&target, &m), Err(Error::UnknownImageId(id)) if id == "zzz"));
        fs::write(target.join(IDS_FILE), "i3\ni3\n").unwrap();
        assert!(matches!(load_prediction_set(&target, &m), Err(Error::DuplicateImageId(_))));
        fs::write(target.join(IDS_FILE), "i3\ni1\n").unwrap();

        let meta = fs::read_to_string(target.join(META_FILE)).unwrap();
        fs::write(target.join(META_FILE), meta.replace("\"d\"", "\"other\"")).unwrap();
        assert!(matches!(load_prediction_set(&target, &m), Err(Error::DatasetIdMismatch { .. })));
    }

    #[test]
    fn write_into_unwritable_target_fails() {
        let (_, ps) = small_set();
        let dir = tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        assert!(matches!(write_prediction_set(&ps, &blocker.join("run")), Err(Error::Io { .. })));
    }

    fn ann(id: &str, class: ErrorClass, secs: u32) -> ErrorAnnotation {
        ErrorAnnotation::new(id, class, "tester", Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, secs).unwrap(), None)
    }

    #[test]
    fn journal_appends_in_order() {
        let dir = tempdir().unwrap();
        let log = dir.path().join("annotations.jsonl");
        assert!(read_annotations(&log).unwrap().is_empty());
        append_annotation(&log, &ann("a", ErrorClass::Other, 1)).unwrap();
        assert_eq!(fs::read_to_string(&log).unwrap().lines().count(), 1);
        append_annotation(&log, &ann("b", ErrorClass::PoorQuality, 2)).unwrap();
        let text = fs::read_to_string(&log).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
        let entries = read_annotations(&log).unwrap();
        assert_eq!(entries.iter().map(|a| a.image_id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn journal_tolerates_torn_tail() {
        let dir = tempdir().unwrap();
        let log = dir.path().join("annotations.jsonl");
        append_annotation(&log, &ann("a", ErrorClass::Other, 1)).unwrap();
        let committed = fs::read(&log).unwrap();
        let mut f = OpenOptions::new().append(true).open(&log).unwrap();
        f.write_all(br#"{"image_id":"b","error_cl"#).unwrap();
        drop(f);
        assert_eq!(read_annotations(&log).unwrap().len(), 1);

        append_annotation(&log, &ann("c", ErrorClass::Other, 3)).unwrap();
        let text = fs::read(&log).unwrap();
        assert!(text.starts_with(&committed));
        let ids: Vec<_> = read_annotations(&log).unwrap().into_iter().map(|a| a.image_id).collect();
        assert_eq!(ids, ["a", "c"]);
    }

    #[test]
    fn journal_rejects_malformed_committed_line() {
        let dir = tempdir().unwrap();
        let log = dir.path().join("annotations.jsonl");
        fs::write(
            &log,
            "{\"image_id\":\"a\",\"error_class\":\"Blurry\",\"annotator\":\"x\",\"timestamp\":\"2026-01-01T00:00:00.000Z\"}\n",
        )
        .unwrap();
        assert!(matches!(read_annotations(&log), Err(Error::MalformedJournal { line: 1, .. })));
    }
}
