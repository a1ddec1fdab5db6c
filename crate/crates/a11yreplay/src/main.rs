fn main() {
    std::process::exit(a11yreplay::cli::run_cli(std::env::args_os()));
}
