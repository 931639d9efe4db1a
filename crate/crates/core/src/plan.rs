//! Packing plans and their JSON form.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::container::Container;
use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::planner::SearchConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fallback {
    /// Packed in the first pass.
    #[default]
    None,
    /// Packed by retrying after the other items were placed.
    Resequenced,
    /// Packed with a perturbed roll/pitch.
    #[serde(rename = "5d")]
    FiveD,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    /// Roll, pitch, yaw (rad).
    pub rpy: [f64; 3],
    /// Translation (m).
    pub xyz: [f64; 3],
}

impl From<&RigidTransform> for TransformRecord {
    fn from(t: &RigidTransform) -> Self {
        TransformRecord {
            rpy: [t.roll, t.pitch, t.yaw],
            xyz: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

impl From<&TransformRecord> for RigidTransform {
    fn from(r: &TransformRecord) -> Self {
        RigidTransform::new(r.rpy[0], r.rpy[1], r.rpy[2], r.xyz.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    /// Index of the item in the request.
    pub item: usize,
    /// Where the item's mesh came from.
    pub mesh: String,
    pub transform: TransformRecord,
    pub score: f64,
    pub fallback: Fallback,
    #[serde(default)]
    pub candidates_generated: usize,
    #[serde(default)]
    pub candidates_checked: usize,
}

impl PlanStep {
    pub fn rigid_transform(&self) -> RigidTransform {
        (&self.transform).into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingPlan {
    pub container: Container,
    /// Position of `container` in the list of containers tried.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub container_index: Option<usize>,
    pub config: SearchConfig,
    pub steps: Vec<PlanStep>,
}

impl PackingPlan {
    pub fn new(container: Container, config: SearchConfig) -> PackingPlan {
        PackingPlan {
            container,
            container_index: None,
            config,
            steps: Vec::new(),
        }
    }

    /// Item indices in placement order.
    pub fn sequence(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.item).collect()
    }

    /// Pretty JSON with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
        self.serialize(&mut ser).expect("plans serialize");
        buf.push(b'\n');
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn from_json(s: &str) -> Result<PackingPlan> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<PackingPlan> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&s).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            location: format!("line {}", e.line()),
            message: e.to_string(),
        })
    }
}

/// Pretty printer that writes floats as `{:.16e}`.
struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}
