//! Builds an experiment configuration the way the command line does and
//! prints its canonical TOML form.

use cyclesim::cli::{config_to_toml, parse_args};

fn main() {
    let (_, cfg) = parse_args(["cyclesim", "--networks", "4", "--tmax", "50ms", "--step", "2.5ms", "--reps", "20"])
        .expect("valid flags");
    print!("{}", config_to_toml(&cfg));
    match parse_args(["cyclesim", "--noi-rank", "5", "--networks", "4"]) {
        Err(e) => println!("# rejected: {e} (exit code {})", e.exit_code()),
        Ok(_) => unreachable!(),
    }
}
