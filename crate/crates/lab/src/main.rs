use std::path::PathBuf;
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgMatches, Command};
use nusc_lab::{run_to_dir, ExperimentConfig, LabError, LabResult, EXPERIMENT_IDS};

fn cli() -> Command {
    let common = [
        Arg::new("config")
            .long("config")
            .value_name("PATH")
            .value_parser(value_parser!(PathBuf))
            .help("TOML config; without it every field takes its default"),
        Arg::new("out")
            .long("out")
            .value_name("DIR")
            .default_value(".")
            .value_parser(value_parser!(PathBuf))
            .help("Output directory"),
        Arg::new("seed")
            .long("seed")
            .value_name("INT")
            .value_parser(value_parser!(u64))
            .help("Overrides the config seed"),
        Arg::new("threads")
            .long("threads")
            .value_name("INT")
            .value_parser(value_parser!(usize))
            .help("Worker threads (default: all cores)"),
    ];
    let mut cmd = Command::new("nusc")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Runs averaged product-formula experiments and writes CSV")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for id in EXPERIMENT_IDS {
        cmd = cmd.subcommand(Command::new(id).args(common.clone()));
    }
    cmd
}

fn load(id: &str, args: &ArgMatches) -> LabResult<ExperimentConfig> {
    let seed = args.get_one::<u64>("seed").copied();
    let mut config = match args.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| LabError::config("--config", format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => {
            let seed = seed.ok_or_else(|| LabError::config("seed", "give --seed or a config with a seed"))?;
            ExperimentConfig::with_defaults(id, seed)?
        }
    };
    if config.id() != id {
        return Err(LabError::config(
            "experiment",
            format!("config is for `{}`, not `{id}`", config.id()),
        ));
    }
    if let Some(s) = seed {
        config.set_seed(s);
    }
    Ok(config)
}

fn run(id: &str, args: &ArgMatches) -> LabResult<()> {
    if let Some(&n) = args.get_one::<usize>("threads") {
        if n < 1 {
            return Err(LabError::config("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::config("--threads", e.to_string()))?;
    }
    let config = load(id, args)?;
    let out = args.get_one::<PathBuf>("out").expect("has a default");
    for path in run_to_dir(&config, out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let matches = cli().get_matches();
    let (id, args) = matches.subcommand().expect("subcommand is required");
    match run(id, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
