//! Drives the config-file front end from code: validate, then run `betti` and `classify`.

use singular_toda::cli::{parse_config, run, Command, RunOptions};

const CONFIG: &str = r#"
units = "4pi"
rho = [1.3, 0.8]

[surface]
kind = "sphere"
resolution = 3

[[singular]]
at = [0.0, 0.0]
alpha = [-0.5, 0.0]

[[singular]]
at = [3.141592653589793, 0.0]
alpha = [0.0, -0.5]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = parse_config(CONFIG).map_err(|d| d.to_string())?;
    println!("diagnostics: {:?}", config.diagnostics());
    let opts = RunOptions { output_dir: "cli_out".into(), seed: None };
    for command in [Command::Betti, Command::Classify] {
        let summary = run(command, &config, &opts)?;
        println!("{command:?}: {}", summary.message);
        for f in summary.files {
            println!("  wrote {}", f.display());
        }
    }
    Ok(())
}
