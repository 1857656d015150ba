use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex64;

use rsma::alphabet::{make_constellation, modes_for_complexity, product_alphabet, ConstellationKind, TransmissionMode};
use rsma::channel::{ChannelRealization, CovarianceVariant};
use rsma::gmi::{gmi_approx, gmi_exact, EffectiveChannel, ExactSettings};
use rsma::harness::{evaluate_final, parse_config, run_sweep, write_sweep, ExperimentConfig};
use rsma::optimize::{
    init_precoders, optimize_modes, power_budget, BarrierConfig, InitStrategy, Objective, OptResult,
};
use rsma::rates::{RateMethod, SchemeKind};

#[derive(Parser)]
#[command(name = "rsma", version, about = "Finite-alphabet RSMA rates, precoder optimization and ergodic sweeps")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the GMI of one stream for given received coefficients.
    Gmi(GmiArgs),
    /// Optimize precoders for a saved channel realization.
    Optimize(OptimizeArgs),
    /// Run a config-driven ergodic sweep.
    Sweep(SweepArgs),
    /// Print the transmission modes admissible under a decoding complexity.
    Modes {
        #[arg(long, default_value_t = 16)]
        delta: usize,
    },
}

#[derive(clap::Args)]
struct GmiArgs {
    /// Desired-stream constellation.
    #[arg(long)]
    x: ConstellationKind,
    /// Constellations of the optimally treated interferers.
    #[arg(long = "i", value_delimiter = ',')]
    i_kinds: Vec<ConstellationKind>,
    /// Constellations of the Gaussian-treated interferers.
    #[arg(long = "j", value_delimiter = ',')]
    j_kinds: Vec<ConstellationKind>,
    /// Desired-stream coefficient, e.g. `0.8+0.1i`.
    #[arg(long)]
    a: Complex64,
    /// Coefficients of the `i` interferers.
    #[arg(long = "b", value_delimiter = ',', allow_hyphen_values = true)]
    b: Vec<Complex64>,
    /// Coefficients of the `j` interferers.
    #[arg(long = "c", value_delimiter = ',', allow_hyphen_values = true)]
    c: Vec<Complex64>,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// `exact` (Monte Carlo) or `approx`.
    #[arg(long, default_value = "exact")]
    method: String,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    /// Channel file as written by `sweep` with channel dumps enabled.
    #[arg(long)]
    channels: PathBuf,
    #[arg(long)]
    snr: f64,
    /// Fixed mode such as `qam8+bpsk`; otherwise every mode under `--delta`.
    #[arg(long)]
    mode: Option<TransmissionMode>,
    #[arg(long, default_value_t = 16)]
    delta: usize,
    #[arg(long, default_value = "cs")]
    scheme: SchemeKind,
    /// `sr` or `mmf`.
    #[arg(long, default_value = "sr")]
    objective: Objective,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optimizer hyperparameters are read from the `[optimizer]` and `[gmi]`
    /// sections of this config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Writes `precoder.csv` and `trace.csv` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "sweep_out")]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's covariance variant (`printed` or `standard`).
    #[arg(long)]
    variant: Option<CovarianceVariant>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Gmi(args) => gmi(args),
        Command::Optimize(args) => optimize(args),
        Command::Sweep(args) => sweep(args),
        Command::Modes { delta } => {
            print!("{}", modes_table(delta)?);
            Ok(())
        }
    }
}

fn modes_table(delta: usize) -> Result<String> {
    let mut out = String::from("mode\tprivate\tcommon\tcomplexity\n");
    for (idx, m) in modes_for_complexity(delta)?.iter().enumerate() {
        let _ = writeln!(
            out,
            "Mode {}\t{}\t{}\t{}",
            idx + 1,
            m.private.table_label(),
            m.common.table_label(),
            m.complexity(),
        );
    }
    Ok(out)
}

fn gmi(args: GmiArgs) -> Result<()> {
    if args.b.len() != args.i_kinds.len() || args.c.len() != args.j_kinds.len() {
        bail!("each interferer needs one coefficient (--i/--b and --j/--c must have equal lengths)");
    }
    let x = make_constellation(args.x);
    let i = product_alphabet(&args.i_kinds.iter().map(|k| make_constellation(*k)).collect::<Vec<_>>());
    let j = product_alphabet(&args.j_kinds.iter().map(|k| make_constellation(*k)).collect::<Vec<_>>());
    let eff = EffectiveChannel::new(args.a, args.b, args.c, args.sigma2);
    match args.method.as_str() {
        "approx" => println!("gmi_bits={}", gmi_approx(&eff, &x, &i, &j)?),
        "exact" => {
            let est = gmi_exact(&eff, &x, &i, &j, &ExactSettings::with_samples(args.samples), args.seed)?;
            println!(
                "gmi_bits={} std_error_bits={} s_opt={} samples={}",
                est.value_bits, est.mc_std_error_bits, est.s_opt, est.samples
            );
        }
        other => bail!("unknown method `{other}` (expected exact or approx)"),
    }
    Ok(())
}

fn optimizer_settings(path: Option<&Path>) -> Result<(BarrierConfig, ExactSettings)> {
    let Some(path) = path else {
        return Ok((BarrierConfig::default(), ExactSettings::default()));
    };
    let cfg = load_config(path)?;
    Ok((cfg.barrier, cfg.exact))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn optimize(args: OptimizeArgs) -> Result<()> {
    let h = ChannelRealization::load(&args.channels)?;
    let (barrier, exact) = optimizer_settings(args.config.as_deref())?;
    let p_t = power_budget(args.snr);
    let inits = init_precoders(&h, p_t, InitStrategy::MrtPlusCommon, args.restarts, args.seed)?;
    let modes = match args.mode {
        Some(m) => vec![m],
        None => modes_for_complexity(args.delta)?,
    };
    let search = optimize_modes(&h, &modes, args.scheme, args.objective, &barrier, &inits);
    let method = RateMethod::Exact { settings: exact, seed: args.seed };
    println!("mode\tapprox_bits\texact_bits\tconverged");
    let mut best: Option<(f64, TransmissionMode, &OptResult)> = None;
    for (mode, res) in &search.runs {
        match res {
            Ok(r) => {
                let eval = evaluate_final(&r.precoder, &h, *mode, args.scheme, args.objective, &method)?;
                println!("{}\t{:.4}\t{:.4}\t{}", mode, r.objective_bits, eval.objective_bits, r.converged);
                if best.is_none_or(|(b, _, _)| eval.objective_bits > b) {
                    best = Some((eval.objective_bits, *mode, r));
                }
            }
            Err(e) => println!("{mode}\tfailed: {e}"),
        }
    }
    let Some((value, mode, res)) = best else {
        bail!("every mode failed");
    };
    println!("selected {mode} with {value:.4} bits, allocation {:?}", res.allocation.as_slice());
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir)?;
        let mut p = String::from("# rsma-precoder v1 row-major re,im pairs\n");
        let m = res.precoder.matrix();
        for r in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols())
                .flat_map(|c| [m[(r, c)].re.to_string(), m[(r, c)].im.to_string()])
                .collect();
            let _ = writeln!(p, "{}", row.join(","));
        }
        fs::write(dir.join("precoder.csv"), p)?;
        let mut t = String::from("outer,inner,objective_bits\n");
        for e in &res.trace {
            let _ = writeln!(t, "{},{},{}", e.outer, e.inner, e.objective_bits);
        }
        fs::write(dir.join("trace.csv"), t)?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(variant) = args.variant {
        cfg.variant = variant;
    }
    let output = run_sweep(&cfg)?;
    write_sweep(&output, &args.out)?;
    let failed = output.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{} rows written to {} ({} failed)",
        output.rows.len(),
        args.out.display(),
        failed
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_table_has_one_line_per_mode() {
        let t = modes_table(4).unwrap();
        assert_eq!(t.lines().count(), 4);
        assert!(t.contains("Mode 1\tQPSK\t{0}\t4"));
        assert!(modes_table(3).is_err());
    }

    #[test]
    fn cli_parses() {
        Cli::try_parse_from(["rsma", "modes", "--delta", "8"]).unwrap();
        Cli::try_parse_from([
            "rsma", "gmi", "--x", "qpsk", "--i", "bpsk", "--b", "0.3-0.1i", "--a", "1+0i", "--method", "approx",
        ])
        .unwrap();
        assert!(Cli::try_parse_from(["rsma", "sweep"]).is_err());
    }
}
