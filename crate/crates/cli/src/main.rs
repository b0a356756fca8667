use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};
use strut_lattice::lattice::{parse_catalogue, LatticeRecord};
use strut_lattice::metrics::{DirectionSet, MetricReport, DEFAULT_DIRECTIONS};
use strut_lattice::optimize::{self, DesignProblem, StopReason};
use strut_lattice::record::{parse_records, write_records, StiffnessRecord};
use strut_lattice::tensor4::check_rotation;
use strut_lattice::{
    homogenize_batch, sampling, BeamMaterial, ElasticTensor4, Execution, Lattice, MandelMatrix,
    Mat3, PsdMethod, Vec3,
};

#[derive(Parser, Serialize)]
#[command(
    name = "strut-lattice",
    version,
    about = "Periodic strut-lattice homogenization and stiffness-tensor tools"
)]
struct Cli {
    /// Cap on worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Homogenize every lattice of a catalogue at each radius.
    Homogenize(HomogenizeArgs),
    /// Directional-modulus table of a stiffness record.
    Surface(SurfaceArgs),
    /// Apply a positive-semidefinite projection to stiffness records.
    PsdProject(PsdArgs),
    /// Compare predicted and target stiffness records.
    Metrics(MetricsArgs),
    /// Expand a catalogue with randomly perturbed realizations.
    Perturb(PerturbArgs),
    /// Move nodes to approach a target stiffness.
    Optimize(OptimizeArgs),
    /// Rotate stiffness records or lattices.
    Rotate(RotateArgs),
    /// Check a catalogue or stiffness file and report counts.
    Validate(ValidateArgs),
}

#[derive(Args, Serialize)]
struct HomogenizeArgs {
    #[arg(long)]
    catalogue: PathBuf,
    /// Strut radius; repeat for several. Defaults to each record's radius.
    #[arg(long = "radius")]
    radii: Vec<f64>,
    /// Beam material as `E=<v>,nu=<v>`.
    #[arg(long, default_value = "E=1,nu=0.3")]
    material: String,
    /// Append this many directional-modulus samples to each record.
    #[arg(long, default_value_t = 0)]
    surface: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SurfaceArgs {
    #[arg(long)]
    record: PathBuf,
    /// Which record of the file to use.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, short, default_value_t = DEFAULT_DIRECTIONS)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PsdArgs {
    #[arg(long)]
    record: PathBuf,
    /// One of square, fourth, exp, trunc2, trunc4, eigclamp.
    #[arg(long)]
    method: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct MetricsArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
    dirs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PerturbArgs {
    #[arg(long)]
    catalogue: PathBuf,
    /// Displacement magnitude per node, in cell length units.
    #[arg(long, allow_hyphen_values = true)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    realizations: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct OptimizeArgs {
    #[arg(long)]
    catalogue: PathBuf,
    #[arg(long)]
    name: String,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = optimize::DEFAULT_MAX_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = optimize::DEFAULT_STEP_SIZE)]
    lr: f64,
    #[arg(long, default_value_t = optimize::DEFAULT_FD_STEP)]
    fd_step: f64,
    /// Take every step as computed, without backtracking.
    #[arg(long)]
    plain: bool,
    #[arg(long, default_value = "E=1,nu=0.3")]
    material: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RotateArgs {
    /// Stiffness records to rotate.
    #[arg(
        long,
        conflicts_with = "catalogue",
        required_unless_present = "catalogue"
    )]
    record: Option<PathBuf>,
    /// Lattice catalogue to rotate.
    #[arg(long)]
    catalogue: Option<PathBuf>,
    /// Row-major 3×3 rotation matrix, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["axis", "random"])]
    matrix: Option<Vec<f64>>,
    /// Rotation axis, comma-separated; use with --angle.
    #[arg(
        long,
        value_delimiter = ',',
        requires = "angle",
        allow_hyphen_values = true
    )]
    axis: Option<Vec<f64>>,
    /// Rotation angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    angle: Option<f64>,
    /// Draw a uniformly random rotation from --seed.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ValidateArgs {
    #[arg(long, conflicts_with = "records", required_unless_present = "records")]
    catalogue: Option<PathBuf>,
    /// Stiffness record file.
    #[arg(long)]
    records: Option<PathBuf>,
}

/// Failure reported with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    arguments: serde_json::Value,
    seed: u64,
    tool_version: &'static str,
    started: f64,
    finished: f64,
}

struct Run<'a> {
    command: &'a str,
    arguments: serde_json::Value,
    seed: u64,
    started: f64,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

impl Run<'_> {
    /// Writes `data` to `out` (plus its manifest) or to stdout.
    fn emit(&self, out: Option<&Path>, data: &str) -> Outcome {
        match out {
            None => {
                print!("{data}");
                Ok(())
            }
            Some(path) => {
                std::fs::write(path, data)
                    .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                let manifest = RunManifest {
                    command: self.command,
                    arguments: self.arguments.clone(),
                    seed: self.seed,
                    tool_version: env!("CARGO_PKG_VERSION"),
                    started: self.started,
                    finished: unix_now(),
                };
                let mpath = manifest_path(path);
                let text = serde_json::to_string_pretty(&manifest)? + "\n";
                std::fs::write(&mpath, text)
                    .map_err(|e| Failure(format!("{}: {e}", mpath.display())))?;
                Ok(())
            }
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_records(path: &Path) -> Result<Vec<StiffnessRecord>, Failure> {
    parse_records(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_catalogue(path: &Path) -> Result<Vec<Lattice>, Failure> {
    parse_catalogue(&read(path)?)
        .into_iter()
        .map(|(_, item)| item.map_err(|e| Failure(format!("{}: {e}", path.display()))))
        .collect()
}

fn parse_material(text: &str) -> Result<BeamMaterial, Failure> {
    let mut mat = BeamMaterial::default();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Failure(format!("material entry '{part}' is not key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Failure(format!("material value '{value}' is not a number")))?;
        match key.trim() {
            "E" => mat.youngs_modulus = value,
            "nu" => mat.poisson_ratio = value,
            other => {
                return Err(Failure(format!(
                    "unknown material key '{other}' (expected E or nu)"
                )))
            }
        }
    }
    Ok(BeamMaterial::new(mat.youngs_modulus, mat.poisson_ratio)?)
}

fn sample_surface(c: &ElasticTensor4, n: usize, seed: u64) -> Vec<[f64; 4]> {
    let dirs = DirectionSet::random(n, seed);
    dirs.directions()
        .iter()
        .zip(dirs.project(c))
        .map(|(d, v)| [d.x, d.y, d.z, v])
        .collect()
}

fn surface_table(rows: &[[f64; 4]]) -> String {
    let mut s = String::from("# dx dy dz modulus\n");
    for r in rows {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e} {:.16e}", r[0], r[1], r[2], r[3]);
    }
    s
}

fn homogenize_cmd(a: &HomogenizeArgs, run: &Run) -> Outcome {
    let mat = parse_material(&a.material)?;
    let catalogue = read_catalogue(&a.catalogue)?;
    let mut records = Vec::new();
    let mut failures = 0;
    let per_lattice: Vec<Vec<f64>> = if a.radii.is_empty() {
        catalogue.iter().map(|l| vec![l.radius()]).collect()
    } else {
        vec![a.radii.clone(); catalogue.len()]
    };
    for (lat, radii) in catalogue.iter().zip(&per_lattice) {
        let results = homogenize_batch(std::slice::from_ref(lat), radii, &mat, Execution::Parallel);
        for (&r, res) in radii.iter().zip(results) {
            match res {
                Ok(h) => {
                    let mut rec = StiffnessRecord::from_tensor(&h.stiffness);
                    rec.name = Some(lat.name().to_string());
                    rec.radius = Some(r);
                    rec.relative_density = Some(h.relative_density);
                    if a.surface > 0 {
                        rec.surface = Some(sample_surface(&h.stiffness, a.surface, a.seed));
                    }
                    records.push(rec);
                }
                Err(e) => {
                    eprintln!("error: radius {r}: {e}");
                    failures += 1;
                }
            }
        }
    }
    run.emit(a.out.as_deref(), &write_records(&records))?;
    eprintln!(
        "homogenized {} of {} (lattice, radius) pairs",
        records.len(),
        records.len() + failures
    );
    if failures > 0 {
        return Err(Failure(format!("{failures} homogenization(s) failed")));
    }
    Ok(())
}

fn surface_cmd(a: &SurfaceArgs, run: &Run) -> Outcome {
    let records = read_records(&a.record)?;
    let rec = records.get(a.index).ok_or_else(|| {
        Failure(format!(
            "record index {} out of range ({} records)",
            a.index,
            records.len()
        ))
    })?;
    let rows = sample_surface(&rec.tensor()?, a.n, a.seed);
    run.emit(a.out.as_deref(), &surface_table(&rows))
}

fn psd_cmd(a: &PsdArgs, run: &Run) -> Outcome {
    let method: PsdMethod = a.method.parse()?;
    let mut out = Vec::new();
    for rec in read_records(&a.record)? {
        let m = strut_lattice::psd::project(rec.mandel_matrix()?.matrix(), method)?;
        let mut projected = StiffnessRecord::from_tensor(&MandelMatrix::new(m)?.to_tensor());
        projected.name = rec.name;
        projected.radius = rec.radius;
        projected.relative_density = rec.relative_density;
        out.push(projected);
    }
    run.emit(a.out.as_deref(), &write_records(&out))
}

fn metrics_cmd(a: &MetricsArgs, run: &Run) -> Outcome {
    let tensors = |p: &Path| -> Result<Vec<ElasticTensor4>, Failure> {
        read_records(p)?
            .iter()
            .map(|r| r.tensor().map_err(Failure::from))
            .collect()
    };
    let pred = tensors(&a.pred)?;
    let target = tensors(&a.target)?;
    let report = MetricReport::evaluate(&pred, &target, &DirectionSet::random(a.dirs, a.seed))?;
    run.emit(a.out.as_deref(), &(serde_json::to_string(&report)? + "\n"))
}

fn perturb_cmd(a: &PerturbArgs, run: &Run) -> Outcome {
    if !(a.level.is_finite() && a.level >= 0.0) {
        return Err(Failure(format!(
            "perturbation level {} must be >= 0",
            a.level
        )));
    }
    let catalogue = read_catalogue(&a.catalogue)?;
    let mut out = String::new();
    let mut added = 0;
    for lat in &catalogue {
        out.push_str(&lat.to_record_line());
        out.push('\n');
        if lat.node_count() < 2 {
            eprintln!(
                "note: lattice '{}' has a single node and is kept unperturbed",
                lat.name()
            );
            continue;
        }
        for k in 0..a.realizations {
            let p = lat.perturb(a.level, a.seed.wrapping_add(k))?;
            out.push_str(&p.with_name(format!("{}-p{k}", lat.name())).to_record_line());
            out.push('\n');
            added += 1;
        }
    }
    run.emit(a.out.as_deref(), &out)?;
    eprintln!(
        "{} lattices, {added} perturbed realizations",
        catalogue.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct TraceOutput {
    objective_history: Vec<f64>,
    stop: String,
    final_lattice: LatticeRecord,
    final_stiffness: StiffnessRecord,
}

fn optimize_cmd(a: &OptimizeArgs, run: &Run) -> Outcome {
    let mat = parse_material(&a.material)?;
    let lat = read_catalogue(&a.catalogue)?
        .into_iter()
        .find(|l| l.name() == a.name)
        .ok_or_else(|| {
            Failure(format!(
                "no lattice named '{}' in {}",
                a.name,
                a.catalogue.display()
            ))
        })?;
    let target = read_records(&a.target)?
        .first()
        .ok_or_else(|| Failure(format!("{} holds no stiffness record", a.target.display())))?
        .tensor()?;
    let mut prob = DesignProblem::new(lat, target, a.lr);
    prob.max_steps = a.steps;
    prob.fd_step = a.fd_step;
    prob.backtracking = !a.plain;
    let trace = optimize::solve(&prob, &mat, Execution::Parallel)?;
    let mut stiffness = StiffnessRecord::from_tensor(&trace.final_stiffness);
    stiffness.name = Some(trace.final_lattice.name().to_string());
    stiffness.relative_density = Some(trace.final_lattice.relative_density());
    let stop = match &trace.stop {
        StopReason::Aborted(e) => format!("aborted: {e}"),
        other => format!("{other:?}"),
    };
    let first = trace.objective_history[0];
    let last = *trace.objective_history.last().unwrap_or(&first);
    eprintln!(
        "{} steps, objective {first:.6e} -> {last:.6e} ({stop})",
        trace.steps()
    );
    let output = TraceOutput {
        objective_history: trace.objective_history,
        stop: stop.clone(),
        final_lattice: LatticeRecord::from(&trace.final_lattice),
        final_stiffness: stiffness,
    };
    run.emit(
        a.out.as_deref(),
        &(serde_json::to_string_pretty(&output)? + "\n"),
    )?;
    if let StopReason::Aborted(_) = trace.stop {
        return Err(Failure(stop));
    }
    Ok(())
}

fn rotation_from(a: &RotateArgs) -> Result<Mat3, Failure> {
    let r = if let Some(m) = &a.matrix {
        if m.len() != 9 {
            return Err(Failure(format!("--matrix needs 9 values, got {}", m.len())));
        }
        Mat3::from_row_slice(m)
    } else if let Some(axis) = &a.axis {
        if axis.len() != 3 {
            return Err(Failure(format!(
                "--axis needs 3 values, got {}",
                axis.len()
            )));
        }
        let axis = Vec3::from_column_slice(axis);
        if axis.norm() == 0.0 {
            return Err(Failure("rotation axis must be nonzero".into()));
        }
        sampling::axis_angle(axis, a.angle.unwrap_or(0.0).to_radians())
    } else if a.random {
        sampling::rotations(1, a.seed)[0]
    } else {
        return Err(Failure(
            "give --matrix, --axis with --angle, or --random".into(),
        ));
    };
    check_rotation(&r)?;
    Ok(r)
}

fn rotate_cmd(a: &RotateArgs, run: &Run) -> Outcome {
    let r = rotation_from(a)?;
    let data = if let Some(path) = &a.record {
        let mut out = Vec::new();
        for mut rec in read_records(path)? {
            let rotated = rec.tensor()?.rotate(&r)?;
            rec.mandel = rotated.to_mandel().to_row_vec();
            rec.surface = None;
            out.push(rec);
        }
        write_records(&out)
    } else if let Some(path) = &a.catalogue {
        let mut out = String::new();
        for lat in read_catalogue(path)? {
            out.push_str(&lat.rotate(&r)?.to_record_line());
            out.push('\n');
        }
        out
    } else {
        return Err(Failure("give --record or --catalogue".into()));
    };
    run.emit(a.out.as_deref(), &data)
}

fn validate_cmd(a: &ValidateArgs) -> Outcome {
    if let Some(path) = &a.records {
        let n = read_records(path)?.len();
        println!("records {n} valid {n} invalid 0");
        return Ok(());
    }
    let path = a
        .catalogue
        .as_ref()
        .ok_or_else(|| Failure("give --catalogue or --records".into()))?;
    let items = parse_catalogue(&read(path)?);
    let mut invalid = 0;
    for (_, item) in &items {
        if let Err(e) = item {
            eprintln!("{}: {e}", path.display());
            invalid += 1;
        }
    }
    println!(
        "records {} valid {} invalid {invalid}",
        items.len(),
        items.len() - invalid
    );
    if invalid > 0 {
        return Err(Failure(format!("{invalid} invalid record(s)")));
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let (name, seed) = match &cli.command {
        Command::Homogenize(a) => ("homogenize", a.seed),
        Command::Surface(a) => ("surface", a.seed),
        Command::PsdProject(_) => ("psd-project", 0),
        Command::Metrics(a) => ("metrics", a.seed),
        Command::Perturb(a) => ("perturb", a.seed),
        Command::Optimize(_) => ("optimize", 0),
        Command::Rotate(a) => ("rotate", a.seed),
        Command::Validate(_) => ("validate", 0),
    };
    let mut arguments = serde_json::to_value(&cli.command)?;
    if let Some(inner) = arguments.get(name).cloned() {
        arguments = inner;
    }
    if let Some(obj) = arguments.as_object_mut() {
        obj.insert("threads".into(), serde_json::to_value(cli.threads)?);
    }
    let ctx = Run {
        command: name,
        arguments,
        seed,
        started: unix_now(),
    };
    match &cli.command {
        Command::Homogenize(a) => homogenize_cmd(a, &ctx),
        Command::Surface(a) => surface_cmd(a, &ctx),
        Command::PsdProject(a) => psd_cmd(a, &ctx),
        Command::Metrics(a) => metrics_cmd(a, &ctx),
        Command::Perturb(a) => perturb_cmd(a, &ctx),
        Command::Optimize(a) => optimize_cmd(a, &ctx),
        Command::Rotate(a) => rotate_cmd(a, &ctx),
        Command::Validate(a) => validate_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
