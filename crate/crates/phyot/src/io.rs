//! File formats and configuration parsing: annotation CSV, state-trace
//! CSV, and flat `key = value` config files with sections.

use crate::analysis::TurnConstraint;
use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::kalman::{MotionModel, StateVector};
use crate::scalar::Scalar;
use crate::sim::{MotionKind, NoiseSpec, ScenarioSpec};
use crate::tracker::{
    BoundingBox, FusionMode, SensorKind, TrackerConfig, Trajectory, VelocitySource,
};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// One line of an annotation file: a frame's box, or an explicit
/// "absent" marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnotationRecord<T> {
    pub frame_index: u64,
    pub bbox: Option<BoundingBox<T>>,
}

/// Parse annotation CSV: `frame,cx,cy,w,h` per line, `frame,-` for an
/// absent observation, `#` starts a comment. Lines must be sorted by
/// frame with no duplicates.
pub fn parse_annotations<T: Scalar>(text: &str) -> Result<Vec<AnnotationRecord<T>>> {
    let mut records: Vec<AnnotationRecord<T>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let frame: u64 = fields[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad frame index '{}'", fields[0]),
        })?;
        let bbox = if fields.len() == 2 && fields[1] == "-" {
            None
        } else if fields.len() == 5 {
            let mut vals = [0.0f64; 4];
            for (i, f) in fields[1..].iter().enumerate() {
                vals[i] = f.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad numeric field '{f}'"),
                })?;
            }
            let b = BoundingBox::new(
                T::from_f64(vals[0]),
                T::from_f64(vals[1]),
                T::from_f64(vals[2]),
                T::from_f64(vals[3]),
            )
            .map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            Some(b)
        } else {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected 'frame,cx,cy,w,h' or 'frame,-', got {} fields",
                    fields.len()
                ),
            });
        };
        if let Some(last) = records.last() {
            if frame == last.frame_index {
                return Err(Error::DuplicateFrame {
                    line: line_no,
                    frame,
                });
            }
            if frame < last.frame_index {
                return Err(Error::UnsortedFrames { line: line_no });
            }
        }
        records.push(AnnotationRecord {
            frame_index: frame,
            bbox,
        });
    }
    Ok(records)
}

/// Serialize annotations in the canonical form `parse_annotations`
/// accepts.
pub fn write_annotations<T: Scalar>(
    records: &[AnnotationRecord<T>],
    mut w: impl Write,
) -> Result<()> {
    writeln!(w, "# frame,cx,cy,w,h  ('-' marks an absent observation)")?;
    for r in records {
        match r.bbox {
            Some(b) => writeln!(
                w,
                "{},{},{},{},{}",
                r.frame_index,
                b.cx.into_f64(),
                b.cy.into_f64(),
                b.w.into_f64(),
                b.h.into_f64()
            )?,
            None => writeln!(w, "{},-", r.frame_index)?,
        }
    }
    Ok(())
}

pub fn trajectory_to_annotations<T: Scalar>(traj: &Trajectory<T>) -> Vec<AnnotationRecord<T>> {
    traj.entries()
        .iter()
        .map(|e| AnnotationRecord {
            frame_index: e.frame_index,
            bbox: Some(e.bbox),
        })
        .collect()
}

/// Annotations with a box on every frame become a pseudo-trajectory
/// (zero velocity, zero covariance) suitable for evaluation.
pub fn annotations_to_trajectory<T: Scalar>(
    records: &[AnnotationRecord<T>],
) -> Result<Trajectory<T>> {
    use crate::kalman::{Covariance4, StateEstimate};
    use crate::tracker::TrajectoryEntry;
    let mut entries = Vec::with_capacity(records.len());
    let mut last_box: Option<BoundingBox<T>> = None;
    for (i, r) in records.iter().enumerate() {
        if r.frame_index != i as u64 {
            return Err(Error::InvalidInput(format!(
                "annotation frames must be contiguous from 0, got {} at row {i}",
                r.frame_index
            )));
        }
        let bbox = match r.bbox.or(last_box) {
            Some(b) => b,
            None => {
                return Err(Error::InvalidInput(
                    "first annotation record must carry a box".into(),
                ))
            }
        };
        last_box = Some(bbox);
        entries.push(TrajectoryEntry {
            frame_index: r.frame_index,
            bbox,
            estimate: StateEstimate::new(
                StateVector::new(bbox.cx, bbox.cy, T::zero(), T::zero()),
                Covariance4::zeros(),
                r.frame_index,
            ),
            observed: r.bbox.is_some(),
            observation: r.bbox,
        });
    }
    Trajectory::from_entries(entries)
}

/// Annotation stream (with gaps) as a sensor observation vector.
pub fn annotations_to_stream<T: Scalar>(
    records: &[AnnotationRecord<T>],
    frames: usize,
) -> Vec<Option<BoundingBox<T>>> {
    let mut stream = vec![None; frames];
    for r in records {
        if (r.frame_index as usize) < frames {
            stream[r.frame_index as usize] = r.bbox;
        }
    }
    stream
}

/// Full filter trace: per frame the state, the driving acceleration,
/// the observation flag, and the row-major covariance.
pub fn write_state_trace<T: Scalar>(traj: &Trajectory<T>, mut w: impl Write) -> Result<()> {
    write!(w, "frame,px,py,vx,vy,observed")?;
    for i in 0..4 {
        for j in 0..4 {
            write!(w, ",p{i}{j}")?;
        }
    }
    writeln!(w)?;
    for e in traj.entries() {
        let s = e.estimate.state;
        write!(
            w,
            "{},{},{},{},{},{}",
            e.frame_index,
            s.px.into_f64(),
            s.py.into_f64(),
            s.vx.into_f64(),
            s.vy.into_f64(),
            u8::from(e.observed)
        )?;
        for i in 0..4 {
            for j in 0..4 {
                write!(w, ",{}", e.estimate.cov.0 .0[i][j].into_f64())?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Flat sectioned config: `[section]` headers, `key = value` lines,
/// `#` comments.
#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<(String, String), String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            values.insert(
                (section.clone(), key.trim().to_string()),
                value.trim().to_string(),
            );
        }
        Ok(Self { values })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    pub fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("[{section}] {key}: bad number '{s}'"))),
        }
    }

    pub fn get_usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("[{section}] {key}: bad integer '{s}'"))),
        }
    }

    pub fn get_u64(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("[{section}] {key}: bad integer '{s}'"))),
        }
    }
}

/// Scenario from the `[scenario]` section (with `[noise]` read
/// separately via [`noise_from_config`]).
pub fn scenario_from_config<T: Scalar>(cfg: &Config) -> Result<ScenarioSpec<T>> {
    let s = "scenario";
    let motion = match cfg.get(s, "motion").unwrap_or("constant-velocity") {
        "constant-velocity" => MotionKind::ConstantVelocity,
        "constant-acceleration" => MotionKind::ConstantAcceleration {
            ax: T::from_f64(cfg.get_f64(s, "ax", 0.0)?),
            ay: T::from_f64(cfg.get_f64(s, "ay", 0.0)?),
        },
        "turning" => MotionKind::Turning {
            turn_rate: T::from_f64(cfg.get_f64(s, "turn_rate", 0.1)?),
        },
        other => {
            return Err(Error::Config(format!("unknown motion kind '{other}'")));
        }
    };
    let occlusions = match cfg.get(s, "occlusions") {
        None => vec![],
        Some(text) => text
            .split_whitespace()
            .map(|range| {
                let (a, b) = range.split_once('-').ok_or_else(|| {
                    Error::Config(format!("bad occlusion range '{range}', want 'a-b'"))
                })?;
                let a = a
                    .parse()
                    .map_err(|_| Error::Config(format!("bad occlusion start '{a}'")))?;
                let b = b
                    .parse()
                    .map_err(|_| Error::Config(format!("bad occlusion end '{b}'")))?;
                Ok((a, b))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let spec = ScenarioSpec {
        motion,
        init: StateVector::new(
            T::from_f64(cfg.get_f64(s, "px", 64.0)?),
            T::from_f64(cfg.get_f64(s, "py", 64.0)?),
            T::from_f64(cfg.get_f64(s, "vx", 1.0)?),
            T::from_f64(cfg.get_f64(s, "vy", 0.0)?),
        ),
        frames: cfg.get_usize(s, "frames", 40)?,
        width: cfg.get_usize(s, "width", 128)?,
        height: cfg.get_usize(s, "height", 128)?,
        target_w: T::from_f64(cfg.get_f64(s, "target_w", 16.0)?),
        target_h: T::from_f64(cfg.get_f64(s, "target_h", 16.0)?),
        texture_seed: cfg.get_u64(s, "texture_seed", 1)?,
        distractors: cfg.get_usize(s, "distractors", 0)?,
        occlusions,
        seed: cfg.get_u64(s, "seed", 1)?,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn noise_from_config<T: Scalar>(cfg: &Config) -> Result<NoiseSpec<T>> {
    let spec = NoiseSpec {
        sigma: T::from_f64(cfg.get_f64("noise", "sigma", 0.0)?),
        dropout: cfg.get_f64("noise", "dropout", 0.0)?,
        swap: cfg.get_f64("noise", "swap", 0.0)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Tracker from `[kalman]`, `[flow]`, `[mask]`, `[tracker]` sections.
pub fn tracker_from_config<T: Scalar>(cfg: &Config) -> Result<TrackerConfig<T>> {
    let defaults = TrackerConfig::<T>::default();
    let model = MotionModel::diagonal_noise(
        T::from_f64(cfg.get_f64("kalman", "q", 1e-2)?),
        T::from_f64(cfg.get_f64("kalman", "r_pos", 1.0)?),
        T::from_f64(cfg.get_f64("kalman", "r_vel", 0.25)?),
    );
    let flow_params = FlowParams {
        smoothness_weight: T::from_f64(cfg.get_f64(
            "flow",
            "smoothness",
            defaults.flow_params.smoothness_weight.into_f64(),
        )?),
        max_iterations: cfg.get_usize("flow", "iterations", defaults.flow_params.max_iterations)?,
        convergence_eps: T::from_f64(cfg.get_f64(
            "flow",
            "eps",
            defaults.flow_params.convergence_eps.into_f64(),
        )?),
    };
    let turn = TurnConstraint {
        angle_fraction: T::from_f64(cfg.get_f64(
            "mask",
            "angle_fraction",
            defaults.turn.angle_fraction.into_f64(),
        )?),
        floor: T::from_f64(cfg.get_f64("mask", "floor", defaults.turn.floor.into_f64())?),
    };
    let sensor = match cfg.get("tracker", "sensor").unwrap_or("ncc") {
        "ncc" => SensorKind::Ncc {
            min_score: T::from_f64(cfg.get_f64("tracker", "min_score", 0.3)?),
        },
        "stream" => SensorKind::Stream(vec![]),
        other => return Err(Error::Config(format!("unknown sensor '{other}'"))),
    };
    let velocity = match cfg.get("tracker", "velocity").unwrap_or("flow") {
        "flow" => VelocitySource::Flow,
        "disabled" => VelocitySource::Disabled,
        other => return Err(Error::Config(format!("unknown velocity source '{other}'"))),
    };
    let fusion = match cfg.get("tracker", "fusion").unwrap_or("fused") {
        "fused" => FusionMode::Fused,
        "raw" => FusionMode::RawOnly,
        other => return Err(Error::Config(format!("unknown fusion mode '{other}'"))),
    };
    Ok(TrackerConfig {
        model,
        init_cov: T::from_f64(cfg.get_f64("kalman", "init_cov", 10.0)?),
        flow_params,
        turn,
        inflation: T::from_f64(cfg.get_f64("tracker", "inflation", 2.0)?),
        sensor,
        velocity,
        fusion,
    })
}
