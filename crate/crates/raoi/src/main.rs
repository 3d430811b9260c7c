fn main() {
    std::process::exit(raoi::cli::run_from(std::env::args_os()));
}
