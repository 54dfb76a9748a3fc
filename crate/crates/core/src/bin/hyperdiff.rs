fn main() {
    std::process::exit(hyperdiff::cli::run_from_args(std::env::args_os()));
}
