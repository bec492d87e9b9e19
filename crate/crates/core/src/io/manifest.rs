//! Dataset manifests: CSV with header `subject_id,modality,image_path`.
//!
//! An optional first line `# version=1` pins the format version. Relative image
//! paths resolve against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;
const HEADER: [&str; 3] = ["subject_id", "modality", "image_path"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Modality {
    Skull,
    Face,
    DistractorFace,
}

impl Modality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Modality::Skull => "skull",
            Modality::Face => "face",
            Modality::DistractorFace => "distractor_face",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "skull" => Some(Modality::Skull),
            "face" => Some(Modality::Face),
            "distractor_face" => Some(Modality::DistractorFace),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRecord {
    pub subject_id: String,
    pub modality: Modality,
    /// Path as written in the manifest.
    pub image_path: String,
    /// `image_path` resolved against the manifest directory.
    pub resolved_path: PathBuf,
}

/// Validation applied while parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifestRules {
    /// Every skull/face subject has exactly one skull and one face record.
    MatedPairs,
    /// Any number of face and distractor-face records per identity; skull
    /// records are kept but play no role in enrollment.
    Gallery,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatedPair {
    pub subject_id: String,
    pub skull: PathBuf,
    pub face: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub version: u32,
    pub records: Vec<ManifestRecord>,
}

impl DatasetManifest {
    /// Mated pairs ordered by subject id.
    pub fn mated_pairs(&self) -> Vec<MatedPair> {
        let mut by_subject: BTreeMap<&str, (Option<&PathBuf>, Option<&PathBuf>)> = BTreeMap::new();
        for r in &self.records {
            let slot = by_subject.entry(&r.subject_id).or_default();
            match r.modality {
                Modality::Skull => slot.0 = Some(&r.resolved_path),
                Modality::Face => slot.1 = Some(&r.resolved_path),
                Modality::DistractorFace => {}
            }
        }
        by_subject
            .into_iter()
            .filter_map(|(id, pair)| match pair {
                (Some(s), Some(f)) => Some(MatedPair {
                    subject_id: id.to_string(),
                    skull: s.clone(),
                    face: f.clone(),
                }),
                _ => None,
            })
            .collect()
    }

    /// Distractor-face records in file order.
    pub fn distractors(&self) -> Vec<(String, PathBuf)> {
        self.records_with(&[Modality::DistractorFace])
    }

    /// Every face and distractor-face record in file order.
    pub fn gallery_faces(&self) -> Vec<(String, PathBuf)> {
        self.records_with(&[Modality::Face, Modality::DistractorFace])
    }

    fn records_with(&self, kinds: &[Modality]) -> Vec<(String, PathBuf)> {
        self.records
            .iter()
            .filter(|r| kinds.contains(&r.modality))
            .map(|r| (r.subject_id.clone(), r.resolved_path.clone()))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for r in &self.records {
            w.write_record([
                r.subject_id.as_str(),
                r.modality.as_str(),
                r.image_path.as_str(),
            ])
            .expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 input");
        format!("# version={}\n{body}", self.version)
    }
}

pub fn load_manifest(path: &Path, rules: ManifestRules) -> Result<DatasetManifest> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(file, path.parent(), rules)
}

pub fn parse_manifest(
    mut reader: impl Read,
    base_dir: Option<&Path>,
    rules: ManifestRules,
) -> Result<DatasetManifest> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::Manifest {
            line: 0,
            message: format!("unreadable input: {e}"),
        })?;

    let mut version = MANIFEST_VERSION;
    let mut body = text.as_str();
    let mut line_offset = 0;
    if let Some(first) = text
        .lines()
        .next()
        .filter(|l| l.trim_start().starts_with('#'))
    {
        let tag = first.trim_start().trim_start_matches('#').trim();
        let v = tag
            .strip_prefix("version=")
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| Error::Manifest {
                line: 1,
                message: format!("expected `# version=<n>`, found `{first}`"),
            })?;
        if v != MANIFEST_VERSION {
            return Err(Error::Manifest {
                line: 1,
                message: format!("unsupported manifest version {v} (expected {MANIFEST_VERSION})"),
            });
        }
        version = v;
        body = text.split_once('\n').map(|(_, rest)| rest).unwrap_or("");
        line_offset = 1;
    }

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let at =
        |pos: Option<&csv::Position>| pos.map(|p| p.line() as usize).unwrap_or(0) + line_offset;
    let header = rdr.headers().map_err(|e| Error::Manifest {
        line: at(e.position()),
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::Manifest {
            line: 1 + line_offset,
            message: format!("header must be `{}`", HEADER.join(",")),
        });
    }

    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Manifest {
            line: at(e.position()),
            message: e.to_string(),
        })?;
        let line = at(row.position());
        let field = |i: usize| row.get(i).unwrap_or("");
        let (subject_id, modality, image_path) = (field(0), field(1), field(2));
        if subject_id.is_empty() || image_path.is_empty() {
            return Err(Error::Manifest {
                line,
                message: "subject_id and image_path must be non-empty".into(),
            });
        }
        let modality = Modality::parse(modality).ok_or_else(|| Error::Manifest {
            line,
            message: format!("unknown modality `{modality}` (skull, face or distractor_face)"),
        })?;
        let resolved_path = match base_dir {
            Some(dir) if Path::new(image_path).is_relative() => dir.join(image_path),
            _ => PathBuf::from(image_path),
        };
        records.push(ManifestRecord {
            subject_id: subject_id.to_string(),
            modality,
            image_path: image_path.to_string(),
            resolved_path,
        });
    }
    let manifest = DatasetManifest { version, records };
    validate(&manifest, rules)?;
    Ok(manifest)
}

fn validate(m: &DatasetManifest, rules: ManifestRules) -> Result<()> {
    let mut paths = BTreeSet::new();
    for r in &m.records {
        if !paths.insert(&r.image_path) {
            return Err(Error::ManifestContent(format!(
                "path `{}` is listed twice",
                r.image_path
            )));
        }
    }
    let mut counts: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for r in &m.records {
        counts.entry(&r.subject_id).or_default()[r.modality as usize] += 1;
    }
    for (id, [skulls, faces, distractors]) in counts {
        if distractors > 0 && skulls + faces > 0 {
            return Err(Error::ManifestContent(format!(
                "subject `{id}` is both a distractor and a mated subject"
            )));
        }
        if rules == ManifestRules::MatedPairs && distractors == 0 {
            if skulls > 1 {
                return Err(Error::ManifestContent(format!(
                    "subject `{id}` has {skulls} skull records"
                )));
            }
            if faces > 1 {
                return Err(Error::ManifestContent(format!(
                    "subject `{id}` has {faces} face records"
                )));
            }
            if skulls != faces {
                let missing = if skulls == 0 { "skull" } else { "face" };
                return Err(Error::ManifestContent(format!(
                    "subject `{id}` is missing its {missing} mate"
                )));
            }
        }
    }
    Ok(())
}
