use std::process::ExitCode;

use clap::Parser;

use viscid_waves_cli::{output, run, Cli, ErrorReport};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport { error: e.kind(), message: e.to_string() };
            let json = serde_json::to_string(&report).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", e.kind()));
            eprintln!("{json}");
            // best effort: the output directory may be the problem
            let _ = output::write_json(&report, &cli.out.join("error.json"));
            ExitCode::from(e.exit_code())
        }
    }
}
