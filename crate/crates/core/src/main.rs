use std::process::ExitCode;

use clap::Parser;
use pointview::batch::run_batch;
use pointview::cli::Args;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = args
        .render_config()
        .and_then(|cfg| Ok((cfg, args.inputs()?)))
        .and_then(|(cfg, inputs)| run_batch(&inputs, &args.out_dir, &cfg));
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            if summary.objects_failed > 0 || summary.views_failed > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
