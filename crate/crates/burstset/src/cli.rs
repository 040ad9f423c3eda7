//! Command-line surface: argument definitions and the command runners.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use burstset_core::eval::rank_by_burst_degree;
use burstset_core::synth::{generate, SynthConfig};
use burstset_core::{FeatureSet, HyperParams, SetRepresentation};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::{ParamsConfig, RunConfig};
use crate::error::{Error, Result};
use crate::features::{load_representation, save_representation};
use crate::fsio;
use crate::manifest::{load_manifest, load_sets};
use crate::methods::{
    detect, evaluate, format_roc, represent_all, sample, set_seed, AggregateMethod, DetectMethod,
    Detection, EvalTargets, QualityChoice, SampleStrategy,
};
use crate::protocol_io::load_protocol;
use crate::records::{format_instances, format_partition, format_weights};
use crate::synth_io::{format_config, parse_config, write_benchmark};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "BURSTSET_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "burstset",
    version,
    about = "Detect and suppress burstiness in sets of embedding vectors",
    after_help = "Set BURSTSET_WORKERS to limit the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic benchmark directory.
    Synth(SynthArgs),
    /// Compute per-set burst weights or group partitions and a burst-degree summary.
    Detect(DetectArgs),
    /// Draw seeded training instances from every set.
    Sample(SampleArgs),
    /// Aggregate every set into a unit-norm template.
    Aggregate(AggregateArgs),
    /// Score stored templates against verification and identification protocols.
    Evaluate(EvaluateArgs),
    /// List the sets with the highest burst degree.
    SelectBursty(SelectArgs),
    /// Aggregate and evaluate in one reproducible run.
    Pipeline(PipelineArgs),
}

/// Hyperparameter overrides; anything left out keeps its default.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// Ridge term of the GMP solve (> 0) [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Exponent on group cardinality for group sampling (>= 0) [default: 0.5]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda1: Option<f64>,
    /// Exponent on 1 - self-similarity (>= 0) [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda2: Option<f64>,
    /// Scale inside the exponential GMP sampling transform [default: 10]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda3: Option<f64>,
    /// Weight of quality in QA-GMP (>= 0) [default: 5]
    #[arg(long, allow_negative_numbers = true)]
    pub lambda4: Option<f64>,
    /// Elements per drawn instance (>= 1) [default: 15]
    #[arg(long = "n-t")]
    pub n_t: Option<usize>,
    /// Quickshift++ neighbor count [default: max(2, ceil(sqrt(n)))]
    #[arg(long)]
    pub k: Option<usize>,
    /// Quickshift++ density tolerance in [0, 1) [default: 0.3]
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

fn flag_for(param: &str) -> &'static str {
    match param {
        "lambda" => "--lambda",
        "lambda1" => "--lambda1",
        "lambda2" => "--lambda2",
        "lambda3" => "--lambda3",
        "lambda4" => "--lambda4",
        "n_t" => "--n-t",
        "k" => "--k",
        "beta" => "--beta",
        _ => "a hyperparameter",
    }
}

/// Checks hyperparameters up front so errors name the offending flag.
pub fn validated(params: HyperParams) -> Result<HyperParams> {
    match params.validate() {
        Ok(()) => Ok(params),
        Err(burstset_core::Error::Parameter { name, reason }) => Err(Error::Usage(format!(
            "invalid value for `{}`: {reason}",
            flag_for(name)
        ))),
        Err(e) => Err(e.into()),
    }
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<HyperParams> {
        let d = HyperParams::default();
        validated(HyperParams {
            lambda: self.lambda.unwrap_or(d.lambda),
            lambda1: self.lambda1.unwrap_or(d.lambda1),
            lambda2: self.lambda2.unwrap_or(d.lambda2),
            lambda3: self.lambda3.unwrap_or(d.lambda3),
            lambda4: self.lambda4.unwrap_or(d.lambda4),
            n_t: self.n_t.unwrap_or(d.n_t),
            k: self.k.or(d.k),
            beta: self.beta.unwrap_or(d.beta),
        })
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `key = value` config file; omitted keys keep their defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the config's seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Benchmark directory to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QualityArg {
    /// Source of per-element attention scores
    #[arg(long, value_enum, default_value_t = QualityChoice::Auto)]
    pub quality: QualityChoice,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Manifest CSV listing the sets
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub method: DetectMethod,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub quality: QualityArg,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = SampleStrategy::Vanilla)]
    pub strategy: SampleStrategy,
    /// Base seed; each set derives its own stream from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Instances drawn per set
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub method: AggregateMethod,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub quality: QualityArg,
    /// Output directory for one template per set plus `index.csv`
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// FAR operating points for TAR@FAR
    #[arg(long, value_delimiter = ',')]
    pub far: Option<Vec<f64>>,
    /// Ranks for rank-N identification
    #[arg(long, value_delimiter = ',')]
    pub rank: Option<Vec<usize>>,
    /// FPIR operating points for TPIR@FPIR
    #[arg(long, value_delimiter = ',')]
    pub fpir: Option<Vec<f64>>,
}

impl TargetArgs {
    fn resolve(&self) -> Result<EvalTargets> {
        let d = EvalTargets::default();
        let t = EvalTargets {
            far: self.far.clone().unwrap_or(d.far),
            ranks: self.rank.clone().unwrap_or(d.ranks),
            fpir: self.fpir.clone().unwrap_or(d.fpir),
        };
        check_targets(&t)?;
        Ok(t)
    }
}

fn check_targets(t: &EvalTargets) -> Result<()> {
    if let Some(f) = t.far.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::Usage(format!(
            "invalid value for `--far`: {f} is not in (0, 1]"
        )));
    }
    if let Some(f) = t.fpir.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::Usage(format!(
            "invalid value for `--fpir`: {f} is not in (0, 1]"
        )));
    }
    if t.ranks.contains(&0) {
        return Err(Error::Usage(
            "invalid value for `--rank`: ranks start at 1".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Verification pairs CSV `a,b,label`
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Identification CSV `probe,gallery_flag,identity`
    #[arg(long)]
    pub identification: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory written by `aggregate`
    #[arg(long)]
    pub reps: PathBuf,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub targets: TargetArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Number of sets to select
    #[arg(long)]
    pub k: usize,
    /// Write the ranking here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Replay a `run_config.json`; other inputs must then be omitted
    #[arg(long, conflicts_with_all = ["manifest", "method", "pairs", "identification"])]
    pub from_config: Option<PathBuf>,
    #[arg(long, required_unless_present = "from_config")]
    pub manifest: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "from_config")]
    pub method: Option<AggregateMethod>,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub quality: QualityArg,
    #[command(flatten)]
    pub targets: TargetArgs,
    #[arg(long)]
    pub out: PathBuf,
}

/// Prints a per-set note to stderr.
fn note(set_id: &str, message: &Option<String>) {
    if let Some(m) = message {
        eprintln!("note: set `{set_id}`: {m}");
    }
}

fn load(manifest: &Path) -> Result<Vec<FeatureSet>> {
    load_sets(&load_manifest(manifest)?)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => run_synth(&a),
        Command::Detect(a) => run_detect(&a),
        Command::Sample(a) => run_sample(&a),
        Command::Aggregate(a) => run_aggregate(&a),
        Command::Evaluate(a) => run_evaluate(&a),
        Command::SelectBursty(a) => run_select(&a),
        Command::Pipeline(a) => run_pipeline(&a),
    }
}

pub fn run_synth(a: &SynthArgs) -> Result<()> {
    let mut config = match &a.config {
        Some(p) => parse_config(&fsio::read_text(p)?)?,
        None => SynthConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    let bench = generate(&config)?;
    let manifest = write_benchmark(&a.out, &config, &bench)?;
    eprintln!(
        "wrote {} sets to {}\n{}",
        bench.sets.len(),
        manifest.display(),
        format_config(&config).trim_end()
    );
    Ok(())
}

pub fn run_detect(a: &DetectArgs) -> Result<()> {
    let params = a.params.resolve()?;
    let sets = load(&a.manifest)?;
    let quality = a.quality.quality;
    let outcomes = sets
        .par_iter()
        .map(|s| {
            let o =
                detect(s, a.method, &params, quality).map_err(|e| Error::in_set(s.set_id(), e))?;
            let text = match &o.detection {
                Detection::Weights(w) => format_weights(w),
                Detection::Partition(p) => format_partition(p),
            };
            fsio::write_atomic(&a.out.join(format!("{}.csv", s.set_id())), text.as_bytes())?;
            Ok((s.set_id().to_string(), s.n(), o))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<_> = outcomes.iter().collect();
    rows.sort_by(|x, y| x.0.cmp(&y.0));
    let qshift = a.method == DetectMethod::Qshift;
    let mut summary = String::from(if qshift {
        "set_id,n,burst_degree,n_groups\n"
    } else {
        "set_id,n,burst_degree\n"
    });
    for (id, n, o) in rows {
        summary.push_str(&format!("{id},{n},{}", o.burst_degree));
        if let Detection::Partition(p) = &o.detection {
            summary.push_str(&format!(",{}", p.n_groups()));
        }
        summary.push('\n');
    }
    fsio::write_atomic(&a.out.join("summary.csv"), summary.as_bytes())?;

    let mut rc = RunConfig::new("detect");
    rc.manifest = Some(a.manifest.clone());
    rc.method = Some(method_name(a.method));
    rc.quality = Some(quality);
    rc.params = Some(ParamsConfig::from(params));
    rc.write(&a.out)
}

fn method_name<T: ValueEnum>(m: T) -> String {
    m.to_possible_value()
        .expect("no variant is skipped")
        .get_name()
        .to_string()
}

pub fn run_sample(a: &SampleArgs) -> Result<()> {
    let params = a.params.resolve()?;
    if a.instances == 0 {
        return Err(Error::Usage(
            "invalid value for `--instances`: must be >= 1".into(),
        ));
    }
    let sets = load(&a.manifest)?;
    let drawn = sets
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            sample(s, a.strategy, &params, a.instances, set_seed(a.seed, i))
                .map_err(|e| Error::in_set(s.set_id(), e))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all = Vec::new();
    for (s, d) in sets.iter().zip(drawn) {
        note(s.set_id(), &d.note);
        all.extend(d.value);
    }
    fsio::write_atomic(
        &a.out.join("instances.csv"),
        format_instances(&all, params.n_t).as_bytes(),
    )?;
    let mut rc = RunConfig::new("sample");
    rc.manifest = Some(a.manifest.clone());
    rc.method = Some(method_name(a.strategy));
    rc.params = Some(params.into());
    rc.seed = Some(a.seed);
    rc.instances = Some(a.instances);
    rc.write(&a.out)
}

pub const INDEX: &str = "index.csv";

pub fn run_aggregate(a: &AggregateArgs) -> Result<()> {
    let params = a.params.resolve()?;
    let sets = load(&a.manifest)?;
    let reps = represent_all(&sets, a.method, &params, a.quality.quality)?;
    let mut index = String::from("set_id,file,method\n");
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&x, &y| sets[x].set_id().cmp(sets[y].set_id()));
    for i in order {
        let r = &reps[i];
        note(&r.value.set_id, &r.note);
        let file = format!("{}.bset", r.value.set_id);
        save_representation(&a.out.join(&file), &r.value)?;
        index.push_str(&format!("{},{file},{}\n", r.value.set_id, r.value.method));
    }
    fsio::write_atomic(&a.out.join(INDEX), index.as_bytes())?;
    let mut rc = RunConfig::new("aggregate");
    rc.manifest = Some(a.manifest.clone());
    rc.method = Some(method_name(a.method));
    rc.quality = Some(a.quality.quality);
    rc.params = Some(params.into());
    rc.write(&a.out)
}

/// Loads the templates listed in an `aggregate` output directory.
pub fn load_reps(dir: &Path) -> Result<BTreeMap<String, SetRepresentation>> {
    let path = dir.join(INDEX);
    let text = fsio::read_text(&path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some("set_id,file,method") {
        return Err(Error::format(&path, "expected header `set_id,file,method`"));
    }
    let mut reps = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(Error::format(&path, format!("bad row `{line}`")));
        }
        let rep =
            load_representation(&dir.join(f[1]), f[0], f[2]).map_err(|e| Error::in_set(f[0], e))?;
        reps.insert(f[0].to_string(), rep);
    }
    Ok(reps)
}

fn write_evaluation(
    out: &Path,
    reps: &BTreeMap<String, SetRepresentation>,
    protocol: &ProtocolArgs,
    targets: &EvalTargets,
) -> Result<()> {
    if protocol.pairs.is_none() && protocol.identification.is_none() {
        return Err(Error::Usage(
            "give `--pairs`, `--identification` or both".into(),
        ));
    }
    let p = load_protocol(
        protocol.pairs.as_deref(),
        protocol.identification.as_deref(),
    )?;
    let eval = evaluate(&p, reps, targets)?;
    let mut json = serde_json::to_string_pretty(&eval.metrics).expect("metrics serialize");
    json.push('\n');
    fsio::write_atomic(&out.join("metrics.json"), json.as_bytes())?;
    if let Some(c) = &eval.roc {
        fsio::write_atomic(&out.join("roc.csv"), format_roc(c).as_bytes())?;
    }
    Ok(())
}

pub fn run_evaluate(a: &EvaluateArgs) -> Result<()> {
    let targets = a.targets.resolve()?;
    let reps = load_reps(&a.reps)?;
    write_evaluation(&a.out, &reps, &a.protocol, &targets)?;
    let mut rc = RunConfig::new("evaluate");
    rc.reps = Some(a.reps.clone());
    rc.pairs = a.protocol.pairs.clone();
    rc.identification = a.protocol.identification.clone();
    rc.targets = Some(targets);
    rc.write(&a.out)
}

pub fn run_select(a: &SelectArgs) -> Result<()> {
    let sets = load(&a.manifest)?;
    if a.k == 0 || a.k > sets.len() {
        return Err(Error::Usage(format!(
            "invalid value for `--k`: must lie in 1..={}",
            sets.len()
        )));
    }
    let ranked = rank_by_burst_degree(&sets)?;
    let mut text = String::from("rank,set_id,burst_degree\n");
    for (i, (id, b)) in ranked.iter().take(a.k).enumerate() {
        text.push_str(&format!("{},{id},{b}\n", i + 1));
    }
    match &a.out {
        Some(p) => fsio::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Builds the pipeline's config from flags, or replays a saved one.
pub fn pipeline_config(a: &PipelineArgs) -> Result<RunConfig> {
    if let Some(path) = &a.from_config {
        let rc = RunConfig::load(path)?;
        if rc.command != "pipeline" {
            return Err(Error::Usage(format!(
                "{}: records a `{}` run, not a pipeline",
                path.display(),
                rc.command
            )));
        }
        return Ok(rc);
    }
    let mut rc = RunConfig::new("pipeline");
    rc.manifest = a.manifest.clone();
    rc.pairs = a.protocol.pairs.clone();
    rc.identification = a.protocol.identification.clone();
    rc.method = a.method.map(method_name);
    rc.quality = Some(a.quality.quality);
    rc.params = Some(a.params.resolve()?.into());
    rc.targets = Some(a.targets.resolve()?);
    Ok(rc)
}

pub fn run_pipeline(a: &PipelineArgs) -> Result<()> {
    let rc = pipeline_config(a)?;
    let manifest = rc
        .manifest
        .as_deref()
        .ok_or_else(|| Error::Usage("run config lacks `manifest`".into()))?;
    let method_str = rc
        .method
        .as_deref()
        .ok_or_else(|| Error::Usage("run config lacks `method`".into()))?;
    let method = AggregateMethod::from_str(method_str, false)
        .map_err(|_| Error::Usage(format!("unknown aggregation method `{method_str}`")))?;
    let params = validated(rc.params.map(Into::into).unwrap_or_default())?;
    let targets = rc.targets.clone().unwrap_or_default();
    check_targets(&targets)?;
    let quality = rc.quality.unwrap_or(QualityChoice::Auto);

    let sets = load(manifest)?;
    let reps = represent_all(&sets, method, &params, quality)?;
    let mut by_id = BTreeMap::new();
    for r in reps {
        note(&r.value.set_id, &r.note);
        by_id.insert(r.value.set_id.clone(), r.value);
    }
    let protocol = ProtocolArgs {
        pairs: rc.pairs.clone(),
        identification: rc.identification.clone(),
    };
    write_evaluation(&a.out, &by_id, &protocol, &targets)?;
    rc.write(&a.out)
}
