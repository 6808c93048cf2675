fn main() {
    std::process::exit(qbiv_cli::run_cli(std::env::args_os()));
}
