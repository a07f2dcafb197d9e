//! One-Pass Evaluation: overlap curves, success plots, and AUC ranking.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{
    corrupt_observations, distractor_trajectories, generate_trajectory, render_scene, NoiseSpec,
    ScenarioSpec,
};
use crate::tracker::{track_sequence, BoundingBox, SensorKind, TrackerConfig, Trajectory};
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Intersection-over-union of two boxes; 0 when disjoint.
pub fn iou<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> T {
    let ix = (a.right().min(b.right()) - a.left().max(b.left())).max(T::zero());
    let iy = (a.bottom().min(b.bottom()) - a.top().max(b.top())).max(T::zero());
    let inter = ix * iy;
    let union = a.w * a.h + b.w * b.h - inter;
    if union <= T::zero() {
        T::zero()
    } else {
        inter / union
    }
}

/// Success rate as a function of overlap threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct SuccessCurve<T> {
    pub thresholds: Vec<T>,
    pub rates: Vec<T>,
}

impl<T: Scalar> SuccessCurve<T> {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds.len() != self.rates.len() {
            return Err(Error::InvalidInput(
                "thresholds and rates must have equal length".into(),
            ));
        }
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("thresholds must be ascending".into()));
        }
        if self
            .rates
            .windows(2)
            .any(|w| w[1] > w[0] + T::from_f64(1e-12))
        {
            return Err(Error::InvalidInput(
                "rates must be non-increasing in threshold".into(),
            ));
        }
        Ok(())
    }
}

/// The standard uniform 101-point threshold grid {0, 0.01, .., 1}.
pub fn standard_thresholds<T: Scalar>() -> Vec<T> {
    (0..=100).map(|i| T::from_f64(i as f64 / 100.0)).collect()
}

fn rates_from_ious<T: Scalar>(ious: &[T], thresholds: &[T]) -> Vec<T> {
    let n = T::from_usize(ious.len().max(1));
    thresholds
        .iter()
        .map(|&tau| {
            let hits = ious.iter().filter(|&&v| v >= tau).count();
            T::from_usize(hits) / n
        })
        .collect()
}

/// Success curve of a predicted trajectory against ground truth.
/// A frame counts as success at threshold tau when iou >= tau.
pub fn success_curve<T: Scalar>(
    pred: &Trajectory<T>,
    truth: &Trajectory<T>,
    thresholds: &[T],
) -> Result<SuccessCurve<T>> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "trajectory length mismatch: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    let ious: Vec<T> = pred
        .entries()
        .iter()
        .zip(truth.entries())
        .map(|(p, t)| iou(&p.bbox, &t.bbox))
        .collect();
    let curve = SuccessCurve {
        thresholds: thresholds.to_vec(),
        rates: rates_from_ious(&ious, thresholds),
    };
    curve.validate()?;
    Ok(curve)
}

/// Mean success rate over the threshold grid (OTB convention).
pub fn auc<T: Scalar>(curve: &SuccessCurve<T>) -> Result<T> {
    if curve.rates.is_empty() {
        return Err(Error::InvalidInput("empty success curve".into()));
    }
    let sum = curve.rates.iter().fold(T::zero(), |s, &r| s + r);
    Ok(sum / T::from_usize(curve.rates.len()))
}

/// A scenario plus the sensor corruption to apply to it.
#[derive(Clone, Debug)]
pub struct EvalScenario<T> {
    pub spec: ScenarioSpec<T>,
    pub noise: NoiseSpec<T>,
}

/// Per-tracker evaluation output.
#[derive(Clone, Debug)]
pub struct TrackerResult<T> {
    pub name: String,
    pub curve: SuccessCurve<T>,
    pub auc: T,
    /// Per-sequence AUC, or the failure message for sequences that
    /// crashed.
    pub per_sequence: Vec<std::result::Result<T, String>>,
}

#[derive(Clone, Debug)]
pub struct EvalReport<T> {
    pub trackers: Vec<TrackerResult<T>>,
    pub scenario_count: usize,
}

impl<T: Scalar> EvalReport<T> {
    pub fn any_failures(&self) -> bool {
        self.trackers
            .iter()
            .any(|t| t.per_sequence.iter().any(|r| r.is_err()))
    }

    /// One row per tracker per threshold: tracker,threshold,rate,auc.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "tracker,threshold,rate,auc")?;
        for t in &self.trackers {
            for (tau, rate) in t.curve.thresholds.iter().zip(&t.curve.rates) {
                writeln!(
                    w,
                    "{},{},{},{}",
                    t.name,
                    tau.into_f64(),
                    rate.into_f64(),
                    t.auc.into_f64()
                )?;
            }
        }
        Ok(())
    }
}

fn eval_one_sequence<T: Scalar>(
    scenario: &EvalScenario<T>,
    tracker: &TrackerConfig<T>,
) -> std::result::Result<Vec<T>, String> {
    let run = || -> Result<Vec<T>> {
        let truth = generate_trajectory(&scenario.spec)?;
        let frames = render_scene(&truth.trajectory, &scenario.spec)?;
        let mut config = tracker.clone();
        if matches!(config.sensor, SensorKind::Stream(_)) {
            let distractors = distractor_trajectories(&scenario.spec);
            let mut obs = corrupt_observations(
                &truth.trajectory,
                &distractors,
                &scenario.noise,
                scenario.spec.seed,
            )?;
            // a position sensor cannot see an occluded target
            for (t, o) in obs.iter_mut().enumerate() {
                if scenario.spec.is_occluded(t) {
                    *o = None;
                }
            }
            config.sensor = SensorKind::Stream(obs);
        }
        let init = truth.trajectory.entries()[0].bbox;
        let pred = track_sequence(&frames, init, &config)?;
        Ok(pred
            .entries()
            .iter()
            .zip(truth.trajectory.entries())
            .map(|(p, t)| iou(&p.bbox, &t.bbox))
            .collect())
    };
    run().map_err(|e| e.to_string())
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PHYOT_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("rayon pool")
}

/// One-Pass Evaluation: initialize each tracker from ground truth at
/// frame 0, run once per sequence with no re-initialization, and
/// aggregate success over all frames of all sequences.
pub fn run_ope<T: Scalar>(
    scenarios: &[EvalScenario<T>],
    trackers: &[(String, TrackerConfig<T>)],
) -> Result<EvalReport<T>> {
    if scenarios.is_empty() || trackers.is_empty() {
        return Err(Error::InvalidInput(
            "run_ope needs at least one scenario and one tracker".into(),
        ));
    }
    let thresholds = standard_thresholds::<T>();
    let pool = thread_pool();
    let results: Vec<TrackerResult<T>> = trackers
        .iter()
        .map(|(name, config)| {
            let per_seq: Vec<std::result::Result<Vec<T>, String>> = pool.install(|| {
                scenarios
                    .par_iter()
                    .map(|s| eval_one_sequence(s, config))
                    .collect()
            });
            let mut all_ious = Vec::new();
            let mut per_sequence = Vec::with_capacity(per_seq.len());
            for r in per_seq {
                match r {
                    Ok(ious) => {
                        let c = SuccessCurve {
                            thresholds: thresholds.clone(),
                            rates: rates_from_ious(&ious, &thresholds),
                        };
                        per_sequence.push(Ok(auc(&c).expect("non-empty grid")));
                        all_ious.extend(ious);
                    }
                    Err(msg) => per_sequence.push(Err(msg)),
                }
            }
            let curve = SuccessCurve {
                thresholds: thresholds.clone(),
                rates: rates_from_ious(&all_ious, &thresholds),
            };
            let overall = auc(&curve)?;
            Ok(TrackerResult {
                name: name.clone(),
                curve,
                auc: overall,
                per_sequence,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport {
        trackers: results,
        scenario_count: scenarios.len(),
    })
}

const PLOT_COLORS: &[&str] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
]
.as_slice();

/// Success plot as a standalone SVG; AUC is reported in the legend.
pub fn write_success_plot<T: Scalar>(report: &EvalReport<T>, mut w: impl Write) -> Result<()> {
    let (width, height) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (60.0, 20.0, 30.0, 50.0);
    let pw = width - ml - mr;
    let ph = height - mt - mb;
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )?;
    writeln!(
        w,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    )?;
    // axes and grid
    for i in 0..=10 {
        let f = i as f64 / 10.0;
        let x = ml + f * pw;
        let y = mt + (1.0 - f) * ph;
        writeln!(
            w,
            "<line x1=\"{x:.1}\" y1=\"{mt}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#eee\"/>",
            mt + ph
        )?;
        writeln!(
            w,
            "<line x1=\"{ml}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#eee\"/>",
            ml + pw
        )?;
        writeln!(
            w,
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{f:.1}</text>",
            mt + ph + 16.0
        )?;
        writeln!(
            w,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{f:.1}</text>",
            ml - 6.0,
            y + 4.0
        )?;
    }
    writeln!(
        w,
        "<rect x=\"{ml}\" y=\"{mt}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>"
    )?;
    writeln!(
        w,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">Overlap threshold</text>",
        ml + pw / 2.0,
        height - 12.0
    )?;
    writeln!(
        w,
        "<text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">Success rate</text>",
        mt + ph / 2.0,
        mt + ph / 2.0
    )?;
    writeln!(
        w,
        "<text x=\"{:.1}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">Success plot of OPE</text>",
        ml + pw / 2.0
    )?;
    for (i, t) in report.trackers.iter().enumerate() {
        let color = PLOT_COLORS[i % PLOT_COLORS.len()];
        let points: Vec<String> = t
            .curve
            .thresholds
            .iter()
            .zip(&t.curve.rates)
            .map(|(&tau, &rate)| {
                format!(
                    "{:.2},{:.2}",
                    ml + tau.into_f64() * pw,
                    mt + (1.0 - rate.into_f64()) * ph
                )
            })
            .collect();
        writeln!(
            w,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            points.join(" ")
        )?;
        let ly = mt + 18.0 + i as f64 * 18.0;
        writeln!(
            w,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            ml + pw - 180.0,
            ml + pw - 150.0
        )?;
        writeln!(
            w,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{} [AUC {:.3}]</text>",
            ml + pw - 144.0,
            ly + 4.0,
            t.name,
            t.auc.into_f64()
        )?;
    }
    writeln!(w, "</svg>")?;
    Ok(())
}

pub fn save_success_plot<T: Scalar>(report: &EvalReport<T>, path: impl AsRef<Path>) -> Result<()> {
    write_success_plot(report, std::fs::File::create(path)?)
}
