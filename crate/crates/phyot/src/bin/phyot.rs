use clap::{Parser, Subcommand};
use phyot::analysis::{attention_mask, TurnConstraint, Velocity2};
use phyot::error::{Error, Result};
use phyot::eval::{
    auc, run_ope, save_success_plot, standard_thresholds, success_curve, EvalReport, EvalScenario,
    TrackerResult,
};
use phyot::flow::estimate_flow;
use phyot::image::GrayImage;
use phyot::io::{
    self, annotations_to_stream, annotations_to_trajectory, parse_annotations,
    trajectory_to_annotations, write_annotations, write_state_trace, AnnotationRecord, Config,
};
use phyot::sim::{
    corrupt_observations, distractor_trajectories, generate_trajectory, render_scene,
};
use phyot::tracker::{track_sequence, BoundingBox, FusionMode, SensorKind, TrackerConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "phyot",
    about = "Physics-informed object tracking toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence: PGM frames, ground-truth CSV,
    /// and a corrupted observation CSV.
    Simulate {
        /// Scenario config ([scenario] and [noise] sections)
        #[arg(long)]
        spec: PathBuf,
        /// Output directory (created if missing)
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Track a target through a directory of PGM frames.
    Track {
        /// Directory of frame_*.pgm images
        #[arg(long)]
        frames: PathBuf,
        /// Initial box as "cx,cy,w,h"
        #[arg(long)]
        init: String,
        /// Tracker config file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Observation CSV for the stream sensor
        #[arg(long)]
        observations: Option<PathBuf>,
        /// Output trajectory CSV
        #[arg(long)]
        out: PathBuf,
        /// Optional full state/covariance trace CSV
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Estimate optical flow between two frames; optionally dump the
    /// attention mask for a prior velocity.
    Flow {
        /// First frame (PGM)
        #[arg(long)]
        a: PathBuf,
        /// Second frame (PGM)
        #[arg(long)]
        b: PathBuf,
        /// Output flow field (PHOF binary)
        #[arg(long)]
        out: PathBuf,
        /// Config file ([flow] and [mask] sections)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Prior velocity "vx,vy" for the attention mask
        #[arg(long)]
        prior: Option<String>,
        /// Attention mask output (PBM), requires --prior
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Score a predicted trajectory against ground truth.
    Eval {
        /// Predicted trajectory CSV
        #[arg(long)]
        pred: PathBuf,
        /// Ground-truth trajectory CSV
        #[arg(long)]
        truth: PathBuf,
        /// Success plot output (SVG)
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Report output (CSV)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare trackers over a batch of synthetic sequences.
    Report {
        /// Scenario config; each sequence offsets its seeds by index
        #[arg(long)]
        spec: PathBuf,
        /// Number of sequences
        #[arg(long, default_value_t = 10)]
        sequences: usize,
        /// Trackers as name=config.cfg (default: fused and raw)
        #[arg(long = "tracker")]
        trackers: Vec<String>,
        /// Base seed offsetting every sequence
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for report.csv and plot.svg
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_csv_floats(text: &str, want: usize, what: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidInput(format!("bad {what} '{text}'")))?;
    if vals.len() != want {
        return Err(Error::InvalidInput(format!(
            "{what} needs {want} comma-separated numbers, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn load_config(path: &Option<PathBuf>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| {
            p.extension().is_some_and(|x| x == "pgm")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("frame_"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no frame_*.pgm files in {}",
            dir.display()
        )));
    }
    Ok(paths)
}

fn cmd_simulate(spec: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let cfg = Config::load(spec)?;
    let mut scenario = io::scenario_from_config::<f64>(&cfg)?;
    let noise = io::noise_from_config::<f64>(&cfg)?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let truth = generate_trajectory(&scenario)?;
    let frames = render_scene(&truth.trajectory, &scenario)?;
    std::fs::create_dir_all(out)?;
    for (i, f) in frames.iter().enumerate() {
        f.save_pgm(out.join(format!("frame_{i:05}.pgm")))?;
    }
    write_annotations(
        &trajectory_to_annotations(&truth.trajectory),
        std::fs::File::create(out.join("truth.csv"))?,
    )?;
    let distractors = distractor_trajectories(&scenario);
    let obs = corrupt_observations(&truth.trajectory, &distractors, &noise, scenario.seed)?;
    let records: Vec<AnnotationRecord<f64>> = obs
        .iter()
        .enumerate()
        .map(|(i, b)| AnnotationRecord {
            frame_index: i as u64,
            bbox: if scenario.is_occluded(i) { None } else { *b },
        })
        .collect();
    write_annotations(
        &records,
        std::fs::File::create(out.join("observations.csv"))?,
    )?;
    println!(
        "wrote {} frames, truth.csv, observations.csv to {}",
        frames.len(),
        out.display()
    );
    Ok(())
}

fn cmd_track(
    frames_dir: &Path,
    init: &str,
    config: &Option<PathBuf>,
    observations: &Option<PathBuf>,
    out: &Path,
    trace: &Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let mut tracker = io::tracker_from_config::<f64>(&cfg)?;
    let paths = frame_paths(frames_dir)?;
    let frames: Vec<GrayImage<f64>> = paths
        .iter()
        .map(GrayImage::load_pgm)
        .collect::<Result<_>>()?;
    if let Some(obs_path) = observations {
        let records = parse_annotations::<f64>(&std::fs::read_to_string(obs_path)?)?;
        tracker.sensor = SensorKind::Stream(annotations_to_stream(&records, frames.len()));
    } else if matches!(tracker.sensor, SensorKind::Stream(_)) {
        return Err(Error::InvalidInput(
            "sensor = stream requires --observations".into(),
        ));
    }
    let v = parse_csv_floats(init, 4, "--init box")?;
    let init_box = BoundingBox::new(v[0], v[1], v[2], v[3])?;
    let traj = track_sequence(&frames, init_box, &tracker)?;
    write_annotations(
        &trajectory_to_annotations(&traj),
        std::fs::File::create(out)?,
    )?;
    if let Some(trace_path) = trace {
        write_state_trace(&traj, std::fs::File::create(trace_path)?)?;
    }
    println!("tracked {} frames -> {}", traj.len(), out.display());
    Ok(())
}

fn cmd_flow(
    a: &Path,
    b: &Path,
    out: &Path,
    config: &Option<PathBuf>,
    prior: &Option<String>,
    mask: &Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let tracker = io::tracker_from_config::<f64>(&cfg)?;
    let img_a = GrayImage::<f64>::load_pgm(a)?;
    let img_b = GrayImage::<f64>::load_pgm(b)?;
    let field = estimate_flow(&img_a, &img_b, &tracker.flow_params)?;
    field.save(out)?;
    println!("wrote flow field {}", out.display());
    if let Some(mask_path) = mask {
        let prior = prior
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("--mask requires --prior \"vx,vy\"".into()))?;
        let v = parse_csv_floats(prior, 2, "--prior velocity")?;
        let m = attention_mask(
            &field,
            Velocity2 { vx: v[0], vy: v[1] },
            &TurnConstraint::default(),
        )?;
        m.save_pbm(mask_path)?;
        println!("wrote attention mask {}", mask_path.display());
    }
    Ok(())
}

fn cmd_eval(
    pred: &Path,
    truth: &Path,
    plot: &Option<PathBuf>,
    csv: &Option<PathBuf>,
) -> Result<()> {
    let pred_traj =
        annotations_to_trajectory::<f64>(&parse_annotations(&std::fs::read_to_string(pred)?)?)?;
    let truth_traj =
        annotations_to_trajectory::<f64>(&parse_annotations(&std::fs::read_to_string(truth)?)?)?;
    let curve = success_curve(&pred_traj, &truth_traj, &standard_thresholds())?;
    let score = auc(&curve)?;
    let report = EvalReport {
        trackers: vec![TrackerResult {
            name: "pred".to_string(),
            curve,
            auc: score,
            per_sequence: vec![Ok(score)],
        }],
        scenario_count: 1,
    };
    if let Some(p) = csv {
        report.write_csv(std::fs::File::create(p)?)?;
    }
    if let Some(p) = plot {
        save_success_plot(&report, p)?;
    }
    println!("AUC {score:.6}");
    Ok(())
}

fn cmd_report(
    spec: &Path,
    sequences: usize,
    trackers: &[String],
    seed: u64,
    out: &Path,
) -> Result<()> {
    let cfg = Config::load(spec)?;
    let base = io::scenario_from_config::<f64>(&cfg)?;
    let noise = io::noise_from_config::<f64>(&cfg)?;
    if sequences == 0 {
        return Err(Error::InvalidInput("--sequences must be at least 1".into()));
    }
    let scenarios: Vec<EvalScenario<f64>> = (0..sequences as u64)
        .map(|i| {
            let mut s = base.clone();
            s.seed = base.seed.wrapping_add(seed).wrapping_add(i);
            s.texture_seed = base.texture_seed.wrapping_add(seed).wrapping_add(i);
            EvalScenario { spec: s, noise }
        })
        .collect();
    let configs: Vec<(String, TrackerConfig<f64>)> = if trackers.is_empty() {
        let fused = TrackerConfig::default();
        let raw = TrackerConfig {
            fusion: FusionMode::RawOnly,
            ..TrackerConfig::default()
        };
        vec![("fused".to_string(), fused), ("raw".to_string(), raw)]
    } else {
        trackers
            .iter()
            .map(|t| {
                let (name, path) = t.split_once('=').ok_or_else(|| {
                    Error::InvalidInput(format!("--tracker wants name=config.cfg, got '{t}'"))
                })?;
                Ok((
                    name.to_string(),
                    io::tracker_from_config::<f64>(&Config::load(path)?)?,
                ))
            })
            .collect::<Result<_>>()?
    };
    let report = run_ope(&scenarios, &configs)?;
    std::fs::create_dir_all(out)?;
    report.write_csv(std::fs::File::create(out.join("report.csv"))?)?;
    save_success_plot(&report, out.join("plot.svg"))?;
    for t in &report.trackers {
        let failures = t.per_sequence.iter().filter(|r| r.is_err()).count();
        println!(
            "{}: AUC {:.6} ({} sequences, {} failed)",
            t.name, t.auc, report.scenario_count, failures
        );
    }
    if report.any_failures() {
        return Err(Error::InvalidInput("one or more sequences failed".into()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate { spec, out, seed } => cmd_simulate(spec, out, *seed),
        Command::Track {
            frames,
            init,
            config,
            observations,
            out,
            trace,
        } => cmd_track(frames, init, config, observations, out, trace),
        Command::Flow {
            a,
            b,
            out,
            config,
            prior,
            mask,
        } => cmd_flow(a, b, out, config, prior, mask),
        Command::Eval {
            pred,
            truth,
            plot,
            csv,
        } => cmd_eval(pred, truth, plot, csv),
        Command::Report {
            spec,
            sequences,
            trackers,
            seed,
            out,
        } => cmd_report(spec, *sequences, trackers, *seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
