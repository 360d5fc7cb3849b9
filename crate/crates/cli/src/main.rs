use clap::Parser;
use htype_cli::{run_cli, Cli, EXIT_FAIL};

fn main() {
    let cli = Cli::parse();
    match run_cli(&cli) {
        Ok(out) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&out.summary).expect("summary serializes")
            );
            if !out.pass {
                eprintln!("pass criteria not met");
                std::process::exit(EXIT_FAIL);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
