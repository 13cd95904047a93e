use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use ptwalk_cli::error::CliError;
use ptwalk_cli::output::json_text;
use ptwalk_cli::{execute, Cli};

fn fail(e: &CliError) -> ExitCode {
    eprint!("{}", json_text(&e.to_json()));
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    match execute(&cli) {
        Ok(manifest) => {
            println!("{}: wrote {} to {}", manifest.subcommand, manifest.outputs.join(", "), cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
