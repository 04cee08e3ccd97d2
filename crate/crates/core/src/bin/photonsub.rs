fn main() {
    std::process::exit(photonsub::cli::run(std::env::args_os()));
}
