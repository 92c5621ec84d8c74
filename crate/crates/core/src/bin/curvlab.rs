fn main() {
    std::process::exit(curvlab::cli::run_cli(std::env::args_os()));
}
