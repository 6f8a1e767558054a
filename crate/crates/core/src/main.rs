use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use scarflow::hamiltonian::{self, DEFAULT_G, DEFAULT_LAMBDA, DEFAULT_RANGE};
use scarflow::quench::{
    self, compare_models, load_run, run_experiment, run_sweep, write_comparison, RunManifest, SweepAxes,
    DEFAULT_EE_EVERY, DEFAULT_NEGATIVITY_BLOCKS, DEFAULT_SERIES_DELTAS, DEFAULT_SUBSYSTEMS,
};
use scarflow::{BlockadeBasis, Error, EvolutionConfig, ModelSpec, Result};

#[derive(Parser, Debug)]
#[command(name = "scarflow", version, about = "Information backflow in constrained PXP spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one quench and write its run directory.
    Run(RunArgs),
    /// Run a parameter sweep (comma-separated lists) and compare the results.
    Sweep(RunArgs),
    /// Compare finished run directories side by side.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump a Hamiltonian as `row col value` triplets.
    Hamiltonian {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// pxp, pxpz or pxpxp
    #[arg(long, default_value = "pxp")]
    model: String,
    #[arg(long = "n-sites", default_value = "20")]
    n_sites: String,
    #[arg(long, default_value_t = DEFAULT_LAMBDA.to_string())]
    lambda: String,
    #[arg(long, default_value_t = DEFAULT_RANGE.to_string())]
    r: String,
    #[arg(long, default_value_t = DEFAULT_G.to_string())]
    g: String,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    #[arg(long = "t-max", default_value_t = 40.0)]
    t_max: f64,
    #[arg(long = "snapshot-every", default_value_t = 1)]
    snapshot_every: usize,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "0.05:6.0:0.05")]
    deltas: String,
    /// Separations whose distance time series are written.
    #[arg(long = "series-deltas")]
    series_deltas: Option<String>,
    /// Comma-separated subsystem tokens: oddL, adjL, or site lists like 9-11.
    #[arg(long)]
    subsystems: Option<String>,
    /// Block sizes k for block-vs-probe negativity.
    #[arg(long = "negativity-blocks")]
    negativity_blocks: Option<String>,
    #[arg(long = "ee-every", default_value_t = DEFAULT_EE_EVERY)]
    ee_every: usize,
    /// JSON file whose fields override the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Flag overrides read from `--config`; every field is optional.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: Option<String>,
    n_sites: Option<serde_json::Value>,
    lambda: Option<serde_json::Value>,
    r: Option<serde_json::Value>,
    g: Option<serde_json::Value>,
    tau: Option<f64>,
    t_max: Option<f64>,
    snapshot_every: Option<usize>,
    deltas: Option<serde_json::Value>,
    series_deltas: Option<serde_json::Value>,
    subsystems: Option<serde_json::Value>,
    negativity_blocks: Option<serde_json::Value>,
    ee_every: Option<usize>,
    deep_quantile: Option<f64>,
    deep_window: Option<f64>,
}

/// JSON scalars or arrays become the same comma lists the flags accept.
fn as_list(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::Array(items) => items.iter().map(as_list).collect::<Vec<_>>().join(","),
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|_| Error::InvalidParameter(format!("cannot parse {what} value '{x}'"))))
        .collect()
}

fn parse_deltas(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad range '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err(Error::InvalidParameter(format!("bad range '{s}'")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // rounding keeps grid points bit-identical to their decimal spelling
        Ok((0..=count).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect())
    } else {
        parse_list("delta", s)
    }
}

impl RunArgs {
    fn apply_config(&mut self) -> Result<(Option<f64>, Option<f64>)> {
        let Some(path) = &self.config else { return Ok((None, None)) };
        let cfg: ConfigFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        let m = &mut self.model;
        if let Some(v) = cfg.model {
            m.model = v;
        }
        if let Some(v) = &cfg.n_sites {
            m.n_sites = as_list(v);
        }
        if let Some(v) = &cfg.lambda {
            m.lambda = as_list(v);
        }
        if let Some(v) = &cfg.r {
            m.r = as_list(v);
        }
        if let Some(v) = &cfg.g {
            m.g = as_list(v);
        }
        self.tau = cfg.tau.unwrap_or(self.tau);
        self.t_max = cfg.t_max.unwrap_or(self.t_max);
        self.snapshot_every = cfg.snapshot_every.unwrap_or(self.snapshot_every);
        self.ee_every = cfg.ee_every.unwrap_or(self.ee_every);
        if let Some(v) = &cfg.deltas {
            self.deltas = as_list(v);
        }
        if let Some(v) = &cfg.series_deltas {
            self.series_deltas = Some(as_list(v));
        }
        if let Some(v) = &cfg.subsystems {
            self.subsystems = Some(as_list(v));
        }
        if let Some(v) = &cfg.negativity_blocks {
            self.negativity_blocks = Some(as_list(v));
        }
        Ok((cfg.deep_quantile, cfg.deep_window))
    }

    fn axes(&self) -> Result<SweepAxes> {
        Ok(SweepAxes {
            family: self.model.model.parse()?,
            n_sites: parse_list("n-sites", &self.model.n_sites)?,
            lambda: parse_list("lambda", &self.model.lambda)?,
            r: parse_list("r", &self.model.r)?,
            g: parse_list("g", &self.model.g)?,
        })
    }

    fn manifests(&mut self) -> Result<Vec<RunManifest>> {
        let (deep_quantile, deep_window) = self.apply_config()?;
        let cfg = EvolutionConfig { tau: self.tau, t_max: self.t_max, snapshot_every: self.snapshot_every };
        let subsystems: Vec<String> = match &self.subsystems {
            Some(s) => parse_list("subsystem", s)?,
            None => DEFAULT_SUBSYSTEMS.iter().map(|s| s.to_string()).collect(),
        };
        let blocks: Vec<usize> = match &self.negativity_blocks {
            Some(s) => parse_list("negativity block", s)?,
            None => DEFAULT_NEGATIVITY_BLOCKS.to_vec(),
        };
        let deltas = parse_deltas(&self.deltas)?;
        let series_deltas = match &self.series_deltas {
            Some(s) => parse_list("series delta", s)?,
            None => DEFAULT_SERIES_DELTAS.to_vec(),
        };
        quench::expand_sweep(&self.axes()?, |spec: ModelSpec| {
            let mut m = RunManifest::from_tokens(spec, cfg, &subsystems, &blocks)?;
            m.delta_grid = deltas.clone();
            m.series_deltas = series_deltas.clone();
            m.ee_every = self.ee_every;
            if let Some(q) = deep_quantile {
                m.deep_quantile = q;
            }
            if let Some(w) = deep_window {
                m.deep_window = w;
            }
            Ok(m)
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(mut args) => {
            let manifests = args.manifests()?;
            let [manifest] = manifests.as_slice() else {
                return Err(Error::InvalidParameter("`run` takes single values; use `sweep` for lists".into()));
            };
            let out = run_experiment(manifest, &args.out)?;
            report(&args.out, &out);
        }
        Command::Sweep(mut args) => {
            let manifests = args.manifests()?;
            let outputs = run_sweep(&manifests, &args.out)?;
            for o in &outputs {
                report(&args.out.join(o.manifest.spec.label()), o);
            }
            let cmp = compare_models(&outputs)?;
            write_comparison(&args.out.join("comparison"), &cmp)?;
            println!("comparison written to {}", args.out.join("comparison").display());
        }
        Command::Compare { runs, out } => {
            let loaded = runs.iter().map(|d| load_run(d)).collect::<Result<Vec<_>>>()?;
            let cmp = compare_models(&loaded)?;
            write_comparison(&out, &cmp)?;
            println!("compared {} runs into {}", loaded.len(), out.display());
        }
        Command::Hamiltonian { model, out } => {
            let args = RunArgs {
                model,
                tau: 0.01,
                t_max: 0.0,
                snapshot_every: 1,
                deltas: String::new(),
                series_deltas: None,
                subsystems: None,
                negativity_blocks: None,
                ee_every: 0,
                config: None,
                out: out.clone(),
            };
            let axes = args.axes()?;
            let (Some(&n), Some(&lambda), Some(&r), Some(&g)) =
                (axes.n_sites.first(), axes.lambda.first(), axes.r.first(), axes.g.first())
            else {
                return Err(Error::InvalidParameter("missing model parameter".into()));
            };
            let spec = axes.family.spec(n, lambda, r, g);
            let basis = Arc::new(BlockadeBasis::new(n)?);
            let h = hamiltonian::build(basis, &spec)?;
            h.write_triplets(std::io::BufWriter::new(fs::File::create(&out)?))?;
            println!("{}: dim {} nnz {} -> {}", spec.label(), h.dim(), h.nnz(), out.display());
        }
    }
    Ok(())
}

fn report(dir: &Path, out: &quench::RunOutputs) {
    println!(
        "{}: {} snapshots, {:.1}s, checksum {} -> {}",
        out.manifest.spec.label(),
        out.times.len(),
        out.manifest.wall_clock_seconds.unwrap_or(0.0),
        out.manifest.checksum.as_deref().unwrap_or("-"),
        dir.display()
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
